"""Ask the advisor for a safe line speed under three bath conditions.

Trains the models on a seeded dataset, then walks held-out coils until one
of each advice kind turns up: a hard speed cap, a whole admissible class
band, and a bath too degraded to pickle at any scanned speed. Each advice
comes with the full speed scan, shown here as a one-line strip.

Run from the repository root:  python3 demos/advise_operator.py
"""
from pickline.advisor import advise, summary_line
from pickline.config import load_config
from pickline.records import NO_DEFECT
from pickline.simulator import generate_dataset
from pickline.tree import TREE_FEATURES
from pickline.workflow import train_models

config = load_config()
dataset = generate_dataset(1800, 0.75, config.seed_simulate,
                           params=config.kinetics, geom=config.geometry,
                           ranges=config.ranges,
                           noise_amplitude=config.noise_amplitude)
result = train_models(dataset.records, config)
print(f"models ready: {result.network.unit_count} network units, "
      f"tree of size {result.tree.size}\n")


def trace_strip(advice):
    """One character per scanned speed: '.' pickles clean, 'x' under-pickles."""
    cells = "".join("." if p.prediction == NO_DEFECT else "x"
                    for p in advice.trace)
    lo = advice.trace[0].v
    hi = advice.trace[-1].v
    return f"  [{cells}]  {lo:g} .. {hi:g}"


wanted = ["max_speed", "speed_range", "infeasible"]
shown = []
for record in result.validation_records:
    inputs = {name: record.value(name) for name in TREE_FEATURES}
    advice = advise(result.tree, result.network, inputs, config.grid)
    if advice.kind in wanted:
        wanted.remove(advice.kind)
        shown.append((record, advice))
    if not wanted:
        break

for record, advice in shown:
    print(f"coil: T_3={record.T_3:.1f} C, HCl_3={record.HCl_3:.1f} wt%, "
          f"Fe2_2={record.Fe2_2:.0f} g/L, t_s={record.t_s:.2f} mm")
    print(f"  {summary_line(advice)}")
    print(trace_strip(advice))
    print()

print("reading the strips: the first 'x' marks the predicted defect onset,")
print("and the speed just before it is the cap. A fully clear strip hands")
print("the decision to the speed-class tree, which answers with a band.")
