"""Simulate a partially labeled dataset, fit the classifier, score it.

The generative story: two Gaussian classes share a monotone warping of each
coordinate, and only a few training rows carry labels.  The model recovers
the warping with monotone splines and treats the unlabeled rows as missing
data inside one Gibbs sampler.

Run with: python3 demos/03_end_to_end.py  (about a minute)
"""

import numpy as np

from nonparanormal.classifier import predict, select_and_fit
from nonparanormal.metrics import confusion, format_table, rates
from nonparanormal.simulate import SimScenario, gen_dataset

scenario = SimScenario(
    p=5, n_star=50, n_l_star=10, transform="logistic", seed=3, n_test_per_class=500
)
sim = gen_dataset(scenario, rep=0)
n_labeled = int((sim.train.labels >= 0).sum())
print(f"train: {sim.train.n} rows, {n_labeled} labeled; test: {sim.test.n} rows")

model = select_and_fit(
    sim.train,
    basis_sizes=range(8, 16),
    pilot_iters=150,
    final_iters=800,
    seed=0,
    log=lambda msg: print("  " + msg),
)
print(f"chosen basis size: {model.basis_size}")
print(f"class weight (class 0): {model.lambda0:.3f}")

labels, p1 = predict(model, sim.test.x)
r = rates(confusion(sim.test.labels, labels))
print()
print(format_table(["fpr", "fnr", "error", "mcc"], [[r.fpr, r.fnr, r.error, r.mcc]]))

lo, hi = p1.min(), p1.max()
print(f"\nclass-1 probabilities span [{lo:.3f}, {hi:.3f}]")
sure = float(np.mean((p1 < 0.1) | (p1 > 0.9)))
print(f"{sure:.0%} of test rows are called with probability outside (0.1, 0.9)")
