"""The benchmark harness end to end, at demo scale.

Convergence curves, the initializer comparison across row counts, and the
time/iterations-to-precision table, printed as plain-text tables.  Everything
is seeded, so re-running prints identical numbers (wall-clock aside).
Run with ``python demos/04_benchmark_harness.py``.
"""

from sketchls import (
    DataSpec,
    ExperimentConfig,
    LambdaRule,
    run_convergence,
    run_init_comparison,
    run_time_to_precision,
)

cfg = ExperimentConfig(
    data=DataSpec("normal", n=2**12, d=20, seed=1),
    m=400,
    n_iter=10,
    reps=20,
    lambda_rule=LambdaRule.for_distribution("normal"),
)

print("mean squared error vs the exact solution, per iteration "
      f"(n=2^12, d=20, m={cfg.m}, {cfg.reps} replications, trimmed mean):")
rows, meta = run_convergence(cfg, threads=4)
methods = list(dict.fromkeys(r["method"] for r in rows))
print("iter  " + "".join(f"{m:>14s}" for m in methods))
for it in range(cfg.n_iter + 1):
    cells = {r["method"]: r["mse2"] for r in rows if r["iter"] == it}
    print(f"{it:4d}  " + "".join(f"{cells[m]:>14.3e}" for m in methods))
print(f"line-search descent violations: {meta['descent_violations']}")

print("\none-shot estimators across row counts "
      "(total sketch budget 320 rows, error vs ground truth):")
rows, _ = run_init_comparison(
    [2**10, 2**11, 2**12], d=8, m=32, n_iter=10, reps=20,
    dist="lognormal", seed=2, threads=4,
)
ests = list(dict.fromkeys(r["estimator"] for r in rows))
print("   n  " + "".join(f"{e:>12s}" for e in ests))
for n in (2**10, 2**11, 2**12):
    cells = {r["estimator"]: r["mse1"] for r in rows if r["n"] == n}
    print(f"{n:5d} " + "".join(f"{cells[e]:>12.2e}" for e in ests))

print("\ntime and iterations until the distance to the exact solution "
      "drops below 1e-10:")
rows, _ = run_time_to_precision(cfg, threads=4)
print(f"{'method':>14s} {'mean seconds':>14s} {'mean iters':>12s} {'status':>8s}")
for row in rows:
    secs = f"{row['mean_seconds']:.4f}" if row["mean_seconds"] else "-"
    iters = f"{row['mean_iters']:.1f}" if row["mean_iters"] else "-"
    print(f"{row['method']:>14s} {secs:>14s} {iters:>12s} {row['status']:>8s}")
