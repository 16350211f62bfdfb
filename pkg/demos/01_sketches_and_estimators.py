"""Sketching operators and one-shot estimators.

Builds the four sketch families on one synthetic dataset and compares the
classical-sketch and Hessian-sketch estimates against the exact least-squares
solution.  Run with ``python demos/01_sketches_and_estimators.py``.
"""

import numpy as np

from sketchls import (
    DataSpec,
    SketchKind,
    aopt_cs_estimate,
    cs_estimate,
    derive_rng,
    draw_sketch,
    hs_estimate,
    leverage_scores,
    make_dataset,
)

ds = make_dataset(DataSpec("lognormal", n=4096, d=8, seed=0))
beta_ls = ds.beta_ls
m = 256

print(f"dataset: lognormal covariates, n={ds.x.shape[0]}, d={ds.x.shape[1]}, m={m}")
print(f"exact solution error vs ground truth: {np.linalg.norm(beta_ls - ds.beta_star):.3e}\n")

print("classical sketch (solve on the sketched pair):")
for variant in ("srht", "uniform", "leverage", "aopt"):
    sx, sy = draw_sketch(ds.x, ds.y, SketchKind(variant, m), derive_rng(1))
    beta = cs_estimate(sx, sy)
    print(f"  {variant:9s} ||beta - beta_ls|| = {np.linalg.norm(beta - beta_ls):.3e}")

print("\nHessian sketch (sketched Gram matrix, exact gradient):")
xty = ds.x.T @ ds.y
for variant in ("srht", "uniform", "leverage", "aopt"):
    sx, _ = draw_sketch(ds.x, ds.y, SketchKind(variant, m), derive_rng(2))
    beta = hs_estimate(sx, xty)
    print(f"  {variant:9s} ||beta - beta_ls|| = {np.linalg.norm(beta - beta_ls):.3e}")

# the deterministic largest-norm selection doubles as an initializer whose
# row mask is recycled for the preconditioner in the iterative solver
beta0, mask = aopt_cs_estimate(ds.x, ds.y, m)
norms = (ds.x**2).sum(axis=1)
print(f"\nlargest-norm mask: keeps rows with squared norm >= {norms[mask.indices].min():.2f}"
      f" (dataset median {np.median(norms):.2f})")
print(f"initializer error: {np.linalg.norm(beta0 - beta_ls):.3e}")

scores = leverage_scores(ds.x)
print(f"\nleverage scores: sum = {scores.sum():.6f} (= d), max = {scores.max():.4f}")
