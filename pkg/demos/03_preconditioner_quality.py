"""Preconditioner quality: the delta measure and the ridge weight.

Shows how the ridged masked-Gram preconditioner compares with its no-ridge
component, an SRHT Gram matrix, and the do-nothing identity control, and how
quality varies with the ridge weight and with the trace bounds that justify
largest-norm selection.  Run with ``python demos/03_preconditioner_quality.py``.
"""

import numpy as np

from sketchls import (
    DataSpec,
    ExperimentConfig,
    LambdaRule,
    aopt_select,
    gram,
    lambda_sweep,
    make_dataset,
    run_delta_table,
    sym_eigvals,
    trace_inverse_bound,
)

spec = DataSpec("t2", n=2**12, d=30, seed=5)
cfg = ExperimentConfig(
    data=spec, m=500, n_iter=1, reps=10,
    lambda_rule=LambdaRule.for_distribution(spec.dist),
)

print("delta measure (1 = perfect preconditioner, 0 = identity, < 0 = harmful)")
rows, _ = run_delta_table(cfg, variants=("zero", "rule", "srht", "identity"))
for row in rows:
    print(f"  {row['variant']:9s} mean delta = {row['delta_mean']:+.4f}"
          f"   (failed replications: {row['failures']})")

print("\nridge-weight sweep (proportion of the total squared row norm):")
rows, _ = lambda_sweep(cfg, [0.05, 0.1, 0.2, 0.4, 0.8, 1.0])
for row in rows:
    bar = "#" * max(0, int(40 * row["delta_mean"]))
    print(f"  {row['proportion']:5.2f}  delta = {row['delta_mean']:+.4f}  {bar}")

# the selection rule itself: keeping the largest-norm rows shrinks the upper
# bound on the trace of the inverse information matrix (average variance)
ds = make_dataset(DataSpec("t2", n=512, d=5, seed=6))
print("\ninverse-trace bound as the subsample grows (largest-norm masks):")
for m in (16, 64, 256, 512):
    mask = aopt_select(ds.x, m)
    masked = gram(ds.x[mask.indices])
    c_lower = float(sym_eigvals(masked)[0])
    actual = float(np.trace(np.linalg.inv(masked)))
    bound = trace_inverse_bound(ds.x, mask, c_lower)
    print(f"  m={m:4d}  actual trace = {actual:10.3e}   bound = {bound:10.3e}")
