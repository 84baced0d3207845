"""How the basis size is chosen: pilot chains and boundary-zone counts.

A short pilot chain runs for every candidate size; the size whose fitted
model leaves the fewest training points in the decision boundary zone wins
(ties go to the smaller size).  The zone is where neither class is favored
by at least a factor m in posterior odds.

Run with: python3 demos/04_basis_selection.py
"""

from nonparanormal.classifier import (
    PreprocessMap,
    _transform,
    apply_preprocess,
    boundary_count,
    select_and_fit,
)
from nonparanormal.simulate import SimScenario, gen_dataset

scenario = SimScenario(
    p=3, n_star=40, n_l_star=10, transform="probit", seed=6, n_test_per_class=50
)
sim = gen_dataset(scenario, rep=0)

model = select_and_fit(
    sim.train, basis_sizes=range(8, 14), pilot_iters=120, final_iters=400, seed=2
)

print("pilot results (boundary-zone training points per candidate size):")
for row in model.selection:
    shown = row.boundary if row.boundary is not None else row.note
    marker = "  <- chosen" if row.size == model.basis_size else ""
    print(f"  size {row.size:2d}: {shown}{marker}")

pm = PreprocessMap(mean=model.pre_mean, scale=model.pre_scale)
y = _transform(model, apply_preprocess(pm, sim.train.x))
print("\nboundary counts for the final model as the odds factor m grows:")
for m in (1.5, 3.0, 10.0, 100.0):
    print(f"  m = {m:>5}: {boundary_count(model, y, m)} of {sim.train.n} training rows")
print("(a wider odds band can only include more points, so counts never decrease)")
