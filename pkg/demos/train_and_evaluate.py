"""Train both models end to end and read the quality report.

Simulates a seeded dataset, fits the defect network and the speed-class
tree on the training split, then scores the held-out records with the
per-class precision / recall / F-measure table.

Run from the repository root:  python3 demos/train_and_evaluate.py
"""
import numpy as np

from pickline.config import load_config
from pickline.metrics import evaluate_global
from pickline.records import DEFECT, NO_DEFECT
from pickline.recbfn import NETWORK_FEATURES
from pickline.simulator import generate_dataset
from pickline.workflow import train_models

config = load_config()
dataset = generate_dataset(1800, 0.75, config.seed_simulate,
                           params=config.kinetics, geom=config.geometry,
                           ranges=config.ranges,
                           noise_amplitude=config.noise_amplitude)

result = train_models(dataset.records, config)
print(result.report)

# Binary check first: does the network catch defective holdout coils?
X_val = np.array([[r.value(name) for name in NETWORK_FEATURES]
                  for r in result.validation_records])
predicted = result.network.predict_batch(X_val)
actual = [DEFECT if r.under_p else NO_DEFECT
          for r in result.validation_records]
wrong = sum(1 for p, a in zip(predicted, actual) if p != a)
print(f"\nnetwork holdout misclassification: {wrong}/{len(actual)} "
      f"({wrong / len(actual):.1%})")

# Then the full per-class view on the same holdout.
report = evaluate_global(result.tree, result.network,
                         result.validation_records, config.grid)
print()
print(report.render())
