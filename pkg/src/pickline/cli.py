"""Command-line interface: simulate, train, evaluate, advise, serve.

Exit codes: 0 success, 1 usage error, 2 data error, 3 model error,
10 advisory outcome "infeasible" (not an error; the scan ran fine and found
no admissible speed).
"""
from __future__ import annotations

import argparse
import os
import sys

from .advisor import Infeasible, ScanGrid, advise, render_advice, summary_line
from .config import BIND_ENV_VAR, load_config
from .errors import (
    ConfigurationError,
    ModelFormatError,
    NotFittedError,
    PicklineError,
)
from .records import read_csv, write_csv
from .simulator import generate_dataset
from .tree import TREE_FEATURES
from .workflow import evaluate_validation, load_models, save_models, train_models

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_MODEL = 3
EXIT_INFEASIBLE = 10


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse terminates usage errors with code 2; this CLI reserves 2 for
    data errors, so remap to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _positive_int(raw: str) -> int:
    value = int(raw)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {raw!r}")
    return value


def build_parser() -> _Parser:
    parser = _Parser(prog="pickline",
                     description="Under-pickling defect prediction and "
                                 "line-speed advisory toolkit.")
    parser.add_argument("--config", metavar="FILE", default=None,
                        help="INI file layered over the built-in defaults "
                             "(or set PICKLINE_CONFIG)")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p_sim = sub.add_parser("simulate", help="generate a labeled synthetic dataset")
    p_sim.add_argument("-n", "--records", type=_positive_int, required=True,
                       help="number of records to generate")
    p_sim.add_argument("--defect-fraction", type=float, default=0.75,
                       help="target share of defective records (default 0.75)")
    p_sim.add_argument("--seed", type=int, default=None,
                       help="generation seed (default from config)")
    p_sim.add_argument("-o", "--out", required=True, help="output CSV path")
    p_sim.set_defaults(handler=cmd_simulate)

    p_train = sub.add_parser("train", help="train the defect network and speed tree")
    p_train.add_argument("--data", required=True, help="training CSV path")
    p_train.add_argument("--out-dir", required=True,
                         help="directory for model files and the training report")
    p_train.set_defaults(handler=cmd_train)

    p_eval = sub.add_parser("evaluate",
                            help="score the advisory path on the validation slice")
    p_eval.add_argument("--data", required=True, help="dataset CSV path")
    p_eval.add_argument("--models", required=True, help="model directory")
    p_eval.add_argument("--full", action="store_true",
                        help="evaluate every row instead of the held-out slice")
    p_eval.set_defaults(handler=cmd_evaluate)

    p_adv = sub.add_parser("advise", help="advise an admissible line speed")
    p_adv.add_argument("--models", required=True, help="model directory")
    for name in TREE_FEATURES:
        p_adv.add_argument(f"--{name}", type=float, default=None, metavar="X")
    p_adv.add_argument("--data", default=None,
                       help="read inputs from a CSV row instead of flags")
    p_adv.add_argument("--row", type=int, default=0,
                       help="0-based row index within --data")
    p_adv.add_argument("--v-min", type=float, default=None)
    p_adv.add_argument("--v-max", type=float, default=None)
    p_adv.add_argument("--step", type=float, default=None)
    p_adv.add_argument("--trace", action="store_true",
                       help="print the full advice document with the scan trace")
    p_adv.set_defaults(handler=cmd_advise)

    p_srv = sub.add_parser("serve", help="run the HTTP advisory service")
    p_srv.add_argument("--models", required=True, help="model directory")
    p_srv.add_argument("--host", default=None,
                       help="bind host (default 127.0.0.1, or PICKLINE_BIND)")
    p_srv.add_argument("--port", type=int, default=None,
                       help="bind port (default 8000, or PICKLINE_BIND)")
    p_srv.add_argument("--console-dir", default=None,
                       help="static directory with the operator console build")
    p_srv.set_defaults(handler=cmd_serve)
    return parser


def cmd_simulate(args, config) -> int:
    seed = config.seed_simulate if args.seed is None else args.seed
    dataset = generate_dataset(
        args.records, args.defect_fraction, seed,
        params=config.kinetics, geom=config.geometry, ranges=config.ranges,
        noise_amplitude=config.noise_amplitude)
    write_csv(dataset, args.out)
    print(f"wrote {len(dataset.records)} records to {args.out} "
          f"(defect share {dataset.defect_fraction():.3f}, seed {seed})")
    return EXIT_OK


def cmd_train(args, config) -> int:
    dataset = read_csv(args.data)
    result = train_models(dataset.records, config)
    tree_path, network_path, report_path = save_models(result, args.out_dir, config)
    sys.stdout.write(result.report)
    print(f"tree model: {tree_path}")
    print(f"network model: {network_path}")
    print(f"training report: {report_path}")
    if not result.network.converged:
        print(f"warning: network training did not converge; "
              f"{result.network.residual_conflicts} residual conflicts",
              file=sys.stderr)
    return EXIT_OK


def cmd_evaluate(args, config) -> int:
    dataset = read_csv(args.data)
    tree, network = _load_models(args.models, config)
    report = evaluate_validation(tree, network, dataset.records, config,
                                 full=args.full)
    sys.stdout.write(report.render())
    return EXIT_OK


def _load_models(directory, config):
    try:
        return load_models(directory, config)
    except FileNotFoundError as exc:
        raise ModelFormatError(f"model file not found: {exc.filename}") from exc


def cmd_advise(args, config) -> int:
    tree, network = _load_models(args.models, config)
    if args.data is not None:
        dataset = read_csv(args.data)
        if not 0 <= args.row < len(dataset.records):
            raise PicklineError(
                f"row {args.row} out of range for {len(dataset.records)} records")
        record = dataset.records[args.row]
        inputs = {name: record.value(name) for name in TREE_FEATURES}
    else:
        missing = [name for name in TREE_FEATURES if getattr(args, name) is None]
        if missing:
            raise _UsageError(
                "missing inputs: " + " ".join(f"--{m}" for m in missing)
                + " (or use --data/--row)")
        inputs = {name: getattr(args, name) for name in TREE_FEATURES}
    grid = ScanGrid(
        v_min=config.grid.v_min if args.v_min is None else args.v_min,
        v_max=config.grid.v_max if args.v_max is None else args.v_max,
        step=config.grid.step if args.step is None else args.step)
    advice = advise(tree, network, inputs, grid)
    print(summary_line(advice))
    if args.trace:
        sys.stdout.write(render_advice(advice))
    return EXIT_INFEASIBLE if isinstance(advice, Infeasible) else EXIT_OK


def cmd_serve(args, config) -> int:
    from .service import create_app

    host, port = "127.0.0.1", 8000
    bind = os.environ.get(BIND_ENV_VAR)
    if bind:
        host_part, _, port_part = bind.rpartition(":")
        if not host_part or not port_part.isdigit():
            raise ConfigurationError(
                f"{BIND_ENV_VAR} must look like host:port, got {bind!r}")
        host, port = host_part, int(port_part)
    if args.host is not None:
        host = args.host
    if args.port is not None:
        port = args.port
    app = create_app(args.models, config, console_dir=args.console_dir)

    import uvicorn

    uvicorn.run(app, host=host, port=port, log_level="info")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        return args.handler(args, config)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ModelFormatError, NotFittedError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except PicklineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
