"""Walk through the synthetic coil dataset and the kinetics behind it.

Generates a seeded dataset, looks at the class balance, then picks one
clean record and traces how the defect boundary emerges from the contact
time the scale needs versus the time the strip actually spends in acid.

Run from the repository root:  python3 demos/explore_dataset.py
"""
import numpy as np

from pickline.config import load_config
from pickline.records import classify_speed
from pickline.simulator import (defect_boundary_speed, generate_dataset,
                                required_pickling_time, residence_time)

config = load_config()
dataset = generate_dataset(600, 0.75, config.seed_simulate,
                           params=config.kinetics, geom=config.geometry,
                           ranges=config.ranges,
                           noise_amplitude=config.noise_amplitude)
records = dataset.records

defective = [r for r in records if r.under_p]
clean = [r for r in records if not r.under_p]
print(f"{len(records)} records, {len(defective)} defective "
      f"({len(defective) / len(records):.1%})")

print("\nspeed class of each record (defective coils shown separately):")
for group, name in ((clean, "clean"), (defective, "defective")):
    counts = {}
    for r in group:
        counts[classify_speed(r.v).value] = counts.get(classify_speed(r.v).value, 0) + 1
    row = "  ".join(f"{cls}={counts.get(cls, 0):3d}" for cls in "ABC")
    print(f"  {name:<10} {row}")

speeds = np.array([r.v for r in records])
print(f"\nline speed spans {speeds.min():.0f} to {speeds.max():.0f} m/min "
      f"(median {np.median(speeds):.0f})")

# One clean coil: where does its personal defect boundary sit?
sample = clean[0]
t_req = required_pickling_time(sample, config.kinetics)
v_boundary = defect_boundary_speed(sample, config.kinetics, config.geometry)
print(f"\nsample coil: t_s={sample.t_s:.2f} mm strip, "
      f"T_3={sample.T_3:.1f} C, HCl=({sample.HCl_1:.1f}, "
      f"{sample.HCl_2:.1f}, {sample.HCl_3:.1f}) wt%")
print(f"required contact time {t_req * 60:.1f} s, "
      f"noise-free boundary speed {v_boundary:.1f} m/min")

print("\n  v (m/min)   residence (s)   margin (s)")
for v in (150.0, 250.0, 350.0, 450.0):
    t_res = residence_time(v, config.geometry)
    margin = (t_res - t_req) * 60
    verdict = "ok" if margin >= 0 else "UNDER-PICKLED"
    print(f"  {v:9.0f}   {t_res * 60:13.1f}   {margin:+10.1f}   {verdict}")

print("\nthe strip outruns the acid somewhere between the last 'ok' row and")
print("the first shortfall; the advisor's job is to find that edge per coil.")
