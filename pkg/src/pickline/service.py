"""HTTP advisory service consumed by the operator console.

All request and response bodies are JSON using the exact CSV field names.
Validation failures answer 400 with one message per offending field; every
model-backed endpoint answers 503 until models are loaded. Models live in an
immutable snapshot swapped atomically by POST /api/reload, so no request can
observe a half-loaded model.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .advisor import (
    BATH_FIELDS,
    ScanGrid,
    advice_to_dict,
    advise,
    scan_speeds,
    summary_line,
)
from .config import AppConfig
from .errors import ConfigurationError, PicklineError
from .records import FIELD_BOUNDS
from .recbfn import NETWORK_FEATURES
from .tree import TREE_FEATURES
from .workflow import load_models


class _BadRequest(Exception):
    def __init__(self, errors: list[dict]):
        self.errors = errors
        super().__init__("invalid request")


class _ModelsUnavailable(Exception):
    pass


@dataclass(frozen=True)
class ModelSnapshot:
    tree: object
    network: object


class ModelStore:
    """Holds the current model snapshot; reload swaps it in one assignment."""

    def __init__(self, directory: str | Path, config: AppConfig):
        self.directory = Path(directory)
        self.config = config
        self.snapshot: ModelSnapshot | None = None

    def load(self) -> ModelSnapshot:
        tree, network = load_models(self.directory, self.config)
        snapshot = ModelSnapshot(tree=tree, network=network)
        self.snapshot = snapshot
        return snapshot

    def require(self) -> ModelSnapshot:
        if self.snapshot is None:
            raise _ModelsUnavailable()
        return self.snapshot


def _check_field(name: str, body: Mapping, errors: list[dict],
                 required: bool) -> float | None:
    if name not in body:
        if required:
            errors.append({"field": name, "message": "value required"})
        return None
    value = body[name]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        errors.append({"field": name, "message": "must be a number"})
        return None
    value = float(value)
    if not math.isfinite(value):
        errors.append({"field": name, "message": "must be finite"})
        return None
    bound = FIELD_BOUNDS.get(name)
    if bound is not None and not bound.admits(value):
        errors.append({"field": name,
                       "message": f"must lie in {bound.describe()}"})
        return None
    return value


def _validate_body(body: object, required: Sequence[str],
                   optional: Sequence[str] = ()) -> dict[str, float]:
    if not isinstance(body, Mapping):
        raise _BadRequest([{"field": "<body>",
                            "message": "body must be a JSON object"}])
    errors: list[dict] = []
    values: dict[str, float] = {}
    for name in required:
        value = _check_field(name, body, errors, required=True)
        if value is not None:
            values[name] = value
    for name in optional:
        value = _check_field(name, body, errors, required=False)
        if value is not None:
            values[name] = value
    if "w_s" in values and "t_s" in values and values["w_s"] <= values["t_s"]:
        errors.append({"field": "w_s",
                       "message": "strip width must exceed strip thickness"})
    if errors:
        raise _BadRequest(errors)
    return values


def _parse_grid(body: Mapping, default: ScanGrid) -> ScanGrid:
    raw = body.get("grid")
    if raw is None:
        return default
    if not isinstance(raw, Mapping):
        raise _BadRequest([{"field": "grid",
                            "message": "grid must be an object with v_min, v_max, step"}])
    kwargs = {}
    errors = []
    for key in ("v_min", "v_max", "step"):
        if key in raw:
            value = raw[key]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                errors.append({"field": f"grid.{key}", "message": "must be a number"})
            else:
                kwargs[key] = float(value)
    if errors:
        raise _BadRequest(errors)
    try:
        return ScanGrid(v_min=kwargs.get("v_min", default.v_min),
                        v_max=kwargs.get("v_max", default.v_max),
                        step=kwargs.get("step", default.step))
    except PicklineError as exc:
        raise _BadRequest([{"field": "grid", "message": str(exc)}]) from exc


async def _json_object(request: Request) -> Mapping:
    try:
        body = await request.json()
    except Exception as exc:
        raise _BadRequest([{"field": "<body>",
                            "message": "request body must be valid JSON"}]) from exc
    if not isinstance(body, Mapping):
        raise _BadRequest([{"field": "<body>",
                            "message": "body must be a JSON object"}])
    return body


def _model_metadata(snapshot: ModelSnapshot, config: AppConfig) -> dict:
    tree = snapshot.tree
    network = snapshot.network
    scaler = network.scaler
    return {
        "tree": {
            "depth": tree.depth,
            "size": tree.size,
            "features": list(tree.feature_names),
            "training_samples": tree.sample_count,
        },
        "network": {
            "units": network.unit_count,
            "features": list(network.feature_names),
            "theta_plus": network.theta_plus,
            "theta_minus": network.theta_minus,
            "converged": network.converged,
            "epochs": network.epochs,
            "residual_conflicts": network.residual_conflicts,
            "scaler": {
                name: [float(lo), float(hi)]
                for name, lo, hi in zip(scaler.feature_names, scaler.mins,
                                        scaler.maxs)
            },
        },
        "grid": {"v_min": config.grid.v_min, "v_max": config.grid.v_max,
                 "step": config.grid.step},
        "bounds": {
            name: {"lo": bound.lo, "hi": bound.hi,
                   "lo_open": bound.lo_open, "hi_open": bound.hi_open}
            for name, bound in FIELD_BOUNDS.items()
        },
    }


def create_app(models_dir: str | Path, config: AppConfig,
               console_dir: str | Path | None = None,
               require_models: bool = True) -> FastAPI:
    """Build the service. With require_models the snapshot must load now;
    otherwise endpoints answer 503 until a successful /api/reload."""
    store = ModelStore(models_dir, config)
    if require_models:
        try:
            store.load()
        except FileNotFoundError as exc:
            raise ConfigurationError(
                f"cannot start service, model file missing: {exc.filename}") from exc
    else:
        try:
            store.load()
        except (FileNotFoundError, PicklineError):
            pass

    app = FastAPI(title="pickline advisory service", docs_url=None,
                  redoc_url=None)
    app.state.store = store

    @app.exception_handler(_BadRequest)
    async def _bad_request(request: Request, exc: _BadRequest):
        return JSONResponse(status_code=400, content={"errors": exc.errors})

    @app.exception_handler(_ModelsUnavailable)
    async def _unavailable(request: Request, exc: _ModelsUnavailable):
        return JSONResponse(status_code=503,
                            content={"detail": "models not loaded"})

    @app.exception_handler(RequestValidationError)
    async def _fastapi_validation(request: Request, exc: RequestValidationError):
        errors = [{"field": ".".join(str(p) for p in err.get("loc", [])),
                   "message": err.get("msg", "invalid value")}
                  for err in exc.errors()]
        return JSONResponse(status_code=400, content={"errors": errors})

    @app.exception_handler(PicklineError)
    async def _domain_error(request: Request, exc: PicklineError):
        return JSONResponse(status_code=400,
                            content={"errors": [{"field": "<request>",
                                                 "message": str(exc)}]})

    @app.get("/api/health")
    async def health():
        return {"status": "ok", "models_loaded": store.snapshot is not None}

    @app.get("/api/model")
    async def model_info():
        snapshot = store.require()
        return _model_metadata(snapshot, config)

    @app.post("/api/predict")
    async def predict(request: Request):
        snapshot = store.require()
        body = await _json_object(request)
        values = _validate_body(body, NETWORK_FEATURES)
        label, scores = snapshot.network.predict(
            [values[name] for name in NETWORK_FEATURES])
        return {"class": label, "scores": scores}

    @app.post("/api/advise")
    async def advise_endpoint(request: Request):
        snapshot = store.require()
        body = await _json_object(request)
        values = _validate_body(body, TREE_FEATURES, optional=("w_s", "v"))
        grid = _parse_grid(body, config.grid)
        advice = advise(snapshot.tree, snapshot.network, values, grid)
        payload = advice_to_dict(advice)
        payload["summary"] = summary_line(advice)
        return payload

    @app.post("/api/scan")
    async def scan(request: Request):
        snapshot = store.require()
        body = await _json_object(request)
        values = _validate_body(body, BATH_FIELDS)
        grid = _parse_grid(body, config.grid)
        trace = scan_speeds(snapshot.network, values, grid)
        return {"trace": [{"v": p.v, "prediction": p.prediction} for p in trace]}

    @app.post("/api/reload")
    async def reload_models():
        try:
            snapshot = store.load()
        except FileNotFoundError as exc:
            return JSONResponse(
                status_code=500,
                content={"detail": f"reload failed, model file missing: {exc.filename}"})
        except PicklineError as exc:
            return JSONResponse(status_code=500,
                                content={"detail": f"reload failed: {exc}"})
        return {"reloaded": True, "model": _model_metadata(snapshot, config)}

    if console_dir is not None:
        console_dir = Path(console_dir)
        if not console_dir.is_dir():
            raise ConfigurationError(f"console directory not found: {console_dir}")
        app.mount("/", StaticFiles(directory=console_dir, html=True),
                  name="console")
    return app
