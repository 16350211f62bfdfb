"""Benchmark orchestration: MSE-versus-iteration curves, initializer
comparisons across n, preconditioner-quality tables, time/iterations to a
target precision, ridge ablations, and ridge-weight sweeps.

Replications run in a thread pool; each replication derives its own dataset
seed (master seed XOR replication index) and per-method generator streams, and
aggregation is a deterministic fold over replication order, so results are
byte-identical regardless of the worker count.  Failed or divergent
replications are excluded from the trimmed means and surfaced in a
``failures`` column.  Wall-clock columns include sketch construction and
preconditioner build but exclude dataset generation; they are the only
non-deterministic outputs.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .datagen import DataSpec, Dataset, make_dataset
from .errors import EmptyInput, NotPositiveDefinite, SingularMatrix
from .linalg import gram, row_sq_norms
from .precond import LambdaRule, build_m, delta_from_matrix, delta_measure
from .sketch import SketchKind, derive_rng, leverage_sample, srht_apply
from .solvers import (
    SolveTrace,
    acc_ihs_solve,
    aopt_cs_estimate,
    aopt_ihs_solve,
    cs_estimate,
    ihs_solve,
    preconditioned_descent,
    pw_gradient_solve,
)

__all__ = [
    "METHODS",
    "INITIALIZERS",
    "ExperimentConfig",
    "trimmed_mean",
    "run_convergence",
    "run_init_comparison",
    "run_delta_table",
    "run_time_to_precision",
    "run_ridge_ablation",
    "lambda_sweep",
]

METHODS = ("ihs", "acc-ihs", "pw-gradient", "aopt-ihs")
INITIALIZERS = ("full", "srht-cs", "lev-cs", "aopt-cs")
DELTA_VARIANTS = ("zero", "rule", "srht")
RIDGE_VARIANTS = ("ridged", "raw", "identity")

#: fixed per-purpose stream tags so replication streams never collide
_STREAMS = {"ihs": 1, "acc-ihs": 2, "pw-gradient": 3, "aopt-ihs": 4,
            "srht-cs": 5, "lev-cs": 6, "delta-srht": 7}

#: slack for the non-increasing-objective check; exact line search guarantees
#: descent in exact arithmetic, this absorbs roundoff at the plateau
_DESCENT_RTOL = 1e-9


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully determines one benchmark run (including every random stream)."""

    data: DataSpec
    m: int
    n_iter: int
    reps: int
    lambda_rule: LambdaRule
    methods: tuple = METHODS
    trim: float = 0.025
    tol: float = 1e-10
    init_policy: str = "default"  # "default" (zero for baselines) | "aopt-for-all"
    iter_cap: int = 500

    def __post_init__(self):
        if not 0.0 <= self.trim < 0.5:
            raise ValueError("trim must lie in [0, 0.5)")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods: {sorted(unknown)}")
        if self.init_policy not in ("default", "aopt-for-all"):
            raise ValueError(f"unknown init policy {self.init_policy!r}")
        object.__setattr__(self, "methods", tuple(self.methods))


def trimmed_mean(values, frac: float) -> float:
    """Mean after dropping floor(frac * len) values from each tail."""
    values = np.sort(np.asarray(values, dtype=np.float64))
    if values.size == 0:
        raise EmptyInput("trimmed_mean of an empty sequence")
    if not 0.0 <= frac < 0.5:
        raise ValueError("trim fraction must lie in [0, 0.5)")
    k = int(np.floor(frac * values.size))
    return float(values[k : values.size - k].mean())


def _map_reps(fn, reps: int, threads: int):
    """Apply ``fn`` to 0..reps-1, preserving replication order."""
    if threads <= 1:
        return [fn(r) for r in range(reps)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(reps)))


def _rep_dataset(cfg: ExperimentConfig, rep: int) -> Dataset:
    return make_dataset(replace(cfg.data, seed=cfg.data.seed ^ rep))


def _descent_violations(objective) -> int:
    obj = np.asarray(objective)
    prev = obj[:-1]
    return int((obj[1:] > prev * (1.0 + _DESCENT_RTOL) + 1e-300).sum())


def _sq_error_curves(trace: SolveTrace, beta_star, n_iter: int):
    """Per-iteration squared errors vs the ground truth and the exact
    solution, padded to n_iter+1 by repeating the final iterate (an early
    ``converged`` stop means the iterate is a fixed point)."""
    betas = trace.betas + [trace.betas[-1]] * (n_iter - trace.iterations)
    b = np.stack(betas)
    mse1 = ((b - beta_star) ** 2).sum(axis=1)
    d2 = np.asarray(trace.dist_to_ls)
    d2 = np.concatenate([d2, np.full(n_iter - trace.iterations, d2[-1])])
    return mse1, d2**2


def _run_method(method, cfg, ds, lam, rep, beta0=None):
    """One solver run inside a replication; returns a SolveTrace."""
    kind = SketchKind("srht", cfg.m)
    rng = derive_rng(cfg.data.seed, rep, _STREAMS.get(method, 0))
    common = dict(beta_ls=ds.beta_ls, stop_at_dist=0.0)
    if method == "ihs":
        return ihs_solve(ds.x, ds.y, kind, cfg.n_iter, rng, beta0=beta0, **common)
    if method == "acc-ihs":
        return acc_ihs_solve(ds.x, ds.y, kind, cfg.n_iter, rng, beta0=beta0, **common)
    if method == "pw-gradient":
        return pw_gradient_solve(ds.x, ds.y, kind, cfg.n_iter, rng, beta0=beta0, **common)
    return aopt_ihs_solve(ds.x, ds.y, cfg.m, cfg.n_iter, lam, **common)


def run_convergence(cfg: ExperimentConfig, threads: int = 1):
    """MSE curves per iteration for each configured method.

    Iteration 0 records the initializer: the zero vector for the baseline
    methods under the default policy, the largest-norm-rows estimate for
    ``aopt-ihs`` and, under ``aopt-for-all``, for every method.  Returns
    ``(rows, meta)`` where rows follow the schema
    (method, iter, mse1, mse2, failures).
    """

    def one_rep(rep):
        ds = _rep_dataset(cfg, rep)
        lam = cfg.lambda_rule.resolve(ds.x)
        shared0 = None
        if cfg.init_policy == "aopt-for-all":
            shared0 = aopt_cs_estimate(ds.x, ds.y, cfg.m)[0]
        out = {}
        for method in cfg.methods:
            try:
                trace = _run_method(method, cfg, ds, lam, rep, beta0=shared0)
                if trace.status == "diverge":
                    out[method] = ("diverge", None, 0)
                    continue
                curves = _sq_error_curves(trace, ds.beta_star, cfg.n_iter)
                viol = (
                    _descent_violations(trace.objective)
                    if method == "aopt-ihs"
                    else 0
                )
                out[method] = ("ok", curves, viol)
            except (NotPositiveDefinite, SingularMatrix) as err:
                out[method] = (f"error: {err}", None, 0)
        return out

    per_rep = _map_reps(one_rep, cfg.reps, threads)
    rows = []
    meta = {"descent_violations": 0, "failures": {}}
    for method in cfg.methods:
        oks = [r[method][1] for r in per_rep if r[method][0] == "ok"]
        meta["descent_violations"] += sum(
            r[method][2] for r in per_rep if r[method][0] == "ok"
        )
        failures = cfg.reps - len(oks)
        meta["failures"][method] = failures
        if not oks:
            continue
        mse1 = np.stack([c[0] for c in oks])
        mse2 = np.stack([c[1] for c in oks])
        for it in range(cfg.n_iter + 1):
            rows.append(
                {
                    "method": method,
                    "iter": it,
                    "mse1": trimmed_mean(mse1[:, it], cfg.trim),
                    "mse2": trimmed_mean(mse2[:, it], cfg.trim),
                    "failures": failures,
                }
            )
    return rows, meta


def run_init_comparison(
    n_grid,
    d: int,
    m: int,
    n_iter: int,
    reps: int,
    dist: str = "lognormal",
    seed: int = 0,
    sigma_noise: float = 3.0,
    trim: float = 0.025,
    threads: int = 1,
):
    """One-shot estimator comparison across row counts with a fixed total
    sketch budget ``M = n_iter * m`` rows (the budget an iterative run would
    consume).  Rows follow (n, estimator, mse1, failures).
    """
    budget = n_iter * m
    rows = []
    meta = {"budget": budget, "failures": {}}
    for n in n_grid:
        if n < budget:
            raise ValueError(f"n={n} is smaller than the sketch budget {budget}")
        spec = DataSpec(dist, int(n), d, seed, sigma_noise)

        def one_rep(rep, spec=spec, n=n):
            ds = make_dataset(replace(spec, seed=spec.seed ^ rep))
            out = {}
            for est in INITIALIZERS:
                try:
                    if est == "full":
                        beta = ds.beta_ls
                    elif est == "srht-cs":
                        rng = derive_rng(seed, n, rep, _STREAMS["srht-cs"])
                        beta = cs_estimate(*srht_apply(ds.x, ds.y, budget, rng))
                    elif est == "lev-cs":
                        rng = derive_rng(seed, n, rep, _STREAMS["lev-cs"])
                        beta = cs_estimate(*leverage_sample(ds.x, ds.y, budget, rng))
                    else:
                        beta = aopt_cs_estimate(ds.x, ds.y, budget)[0]
                    out[est] = float(((beta - ds.beta_star) ** 2).sum())
                except (NotPositiveDefinite, SingularMatrix):
                    out[est] = None
            return out

        per_rep = _map_reps(one_rep, reps, threads)
        for est in INITIALIZERS:
            vals = [r[est] for r in per_rep if r[est] is not None]
            failures = reps - len(vals)
            meta["failures"][(int(n), est)] = failures
            if vals:
                rows.append(
                    {
                        "n": int(n),
                        "estimator": est,
                        "mse1": trimmed_mean(vals, trim),
                        "failures": failures,
                    }
                )
    return rows, meta


def run_delta_table(cfg: ExperimentConfig, variants=DELTA_VARIANTS, threads: int = 1):
    """Average conditioning-improvement measure per preconditioner variant.

    Variants: ``zero`` (masked Gram, no ridge), ``rule`` (ridge weight from
    the config rule), ``srht`` (Gram of an SRHT sketch of the same size), and
    ``identity`` (scaled identity control, exactly 0 up to roundoff).  Rows
    follow (dist, d, variant, delta_mean, failures).
    """

    def one_rep(rep):
        ds = _rep_dataset(cfg, rep)
        q = gram(ds.x)
        mask = aopt_cs_estimate(ds.x, ds.y, cfg.m)[1]
        lam = cfg.lambda_rule.resolve(ds.x)
        out = {}
        for variant in variants:
            try:
                if variant == "zero":
                    out[variant] = delta_measure(build_m(ds.x, mask, 0.0), q)
                elif variant == "rule":
                    out[variant] = delta_measure(build_m(ds.x, mask, lam), q)
                elif variant == "srht":
                    rng = derive_rng(cfg.data.seed, rep, _STREAMS["delta-srht"])
                    sx, _ = srht_apply(ds.x, ds.y, cfg.m, rng)
                    out[variant] = delta_from_matrix(gram(sx), q)
                elif variant == "identity":
                    out[variant] = delta_from_matrix(lam * np.eye(ds.x.shape[1]), q)
                else:
                    raise ValueError(f"unknown delta variant {variant!r}")
            except (NotPositiveDefinite, SingularMatrix):
                out[variant] = None
        return out

    per_rep = _map_reps(one_rep, cfg.reps, threads)
    rows = []
    for variant in variants:
        vals = [r[variant] for r in per_rep if r[variant] is not None]
        failures = cfg.reps - len(vals)
        rows.append(
            {
                "dist": cfg.data.dist,
                "d": cfg.data.d,
                "variant": variant,
                "delta_mean": float(np.mean(vals)) if vals else None,
                "failures": failures,
            }
        )
    return rows, {"lambda_profile": cfg.lambda_rule.profile}


def run_time_to_precision(cfg: ExperimentConfig, threads: int = 1):
    """Mean wall-clock seconds and iterations until the distance to the exact
    solution drops to ``cfg.tol`` (iteration cap ``cfg.iter_cap``).

    Rows follow (method, dist, d, mean_seconds, mean_iters, status) with
    status ``ok`` when every replication reached the target, ``diverge`` when
    any diverged, else ``cap`` when any hit the iteration cap.  Divergent and
    capped replications contribute no time.  Timing covers per-iteration work
    plus sketch/preconditioner setup; dataset generation and the exact
    solve are excluded.
    """

    def one_rep(rep):
        ds = _rep_dataset(cfg, rep)
        lam = cfg.lambda_rule.resolve(ds.x)
        kind = SketchKind("srht", cfg.m)
        out = {}
        for method in cfg.methods:
            rng = derive_rng(cfg.data.seed, rep, _STREAMS.get(method, 0))
            run = dict(beta_ls=ds.beta_ls, stop_at_dist=cfg.tol)
            try:
                if method == "ihs":
                    trace = ihs_solve(ds.x, ds.y, kind, cfg.iter_cap, rng, **run)
                elif method == "acc-ihs":
                    trace = acc_ihs_solve(ds.x, ds.y, kind, cfg.iter_cap, rng, **run)
                elif method == "pw-gradient":
                    trace = pw_gradient_solve(ds.x, ds.y, kind, cfg.iter_cap, rng, **run)
                else:
                    trace = aopt_ihs_solve(ds.x, ds.y, cfg.m, cfg.iter_cap, lam, **run)
            except (NotPositiveDefinite, SingularMatrix):
                out[method] = ("diverge", None, None)
                continue
            if trace.status == "diverge":
                out[method] = ("diverge", None, None)
            elif trace.dist_to_ls[-1] <= cfg.tol:
                secs = trace.setup_seconds + float(np.sum(trace.elapsed))
                out[method] = ("ok", trace.iterations, secs)
            else:
                out[method] = ("cap", None, None)
        return out

    per_rep = _map_reps(one_rep, cfg.reps, threads)
    rows = []
    for method in cfg.methods:
        results = [r[method] for r in per_rep]
        iters = [r[1] for r in results if r[0] == "ok"]
        secs = [r[2] for r in results if r[0] == "ok"]
        statuses = {r[0] for r in results}
        status = "diverge" if "diverge" in statuses else ("cap" if "cap" in statuses else "ok")
        rows.append(
            {
                "method": method,
                "dist": cfg.data.dist,
                "d": cfg.data.d,
                "mean_seconds": float(np.mean(secs)) if secs else None,
                "mean_iters": float(np.mean(iters)) if iters else None,
                "status": status,
            }
        )
    return rows, {"tol": cfg.tol, "iter_cap": cfg.iter_cap}


def run_ridge_ablation(cfg: ExperimentConfig, threads: int = 1):
    """Exact-line-search runs with the ridged preconditioner, its no-ridge
    masked-Gram component, and the identity (plain gradient descent with
    exact line search).  All three share the same largest-norm-rows
    initializer per replication.  Rows follow
    (variant, iter, mse1, mse2, failures).
    """

    def one_rep(rep):
        ds = _rep_dataset(cfg, rep)
        lam = cfg.lambda_rule.resolve(ds.x)
        beta0, mask = aopt_cs_estimate(ds.x, ds.y, cfg.m)
        out = {}
        for variant in RIDGE_VARIANTS:
            try:
                if variant == "ridged":
                    apply_inv = build_m(ds.x, mask, lam).solve
                elif variant == "raw":
                    apply_inv = build_m(ds.x, mask, 0.0).solve
                else:
                    apply_inv = lambda v: v
                trace = preconditioned_descent(
                    ds.x, ds.y, beta0, apply_inv, cfg.n_iter, beta_ls=ds.beta_ls
                )
                out[variant] = (
                    _sq_error_curves(trace, ds.beta_star, cfg.n_iter),
                    _descent_violations(trace.objective),
                )
            except (NotPositiveDefinite, SingularMatrix):
                out[variant] = None
        return out

    per_rep = _map_reps(one_rep, cfg.reps, threads)
    rows = []
    meta = {"descent_violations": 0, "failures": {}}
    for variant in RIDGE_VARIANTS:
        oks = [r[variant] for r in per_rep if r[variant] is not None]
        failures = cfg.reps - len(oks)
        meta["failures"][variant] = failures
        meta["descent_violations"] += sum(v for _, v in oks)
        if not oks:
            continue
        mse1 = np.stack([c[0] for c, _ in oks])
        mse2 = np.stack([c[1] for c, _ in oks])
        for it in range(cfg.n_iter + 1):
            rows.append(
                {
                    "variant": variant,
                    "iter": it,
                    "mse1": trimmed_mean(mse1[:, it], cfg.trim),
                    "mse2": trimmed_mean(mse2[:, it], cfg.trim),
                    "failures": failures,
                }
            )
    return rows, meta


def lambda_sweep(cfg: ExperimentConfig, proportions, threads: int = 1):
    """Average conditioning-improvement measure of the ridged preconditioner
    as the ridge weight sweeps over proportions of the total squared row
    norm.  Rows follow (dist, d, proportion, delta_mean, failures).
    """
    proportions = [float(p) for p in proportions]
    if any(p <= 0 for p in proportions):
        raise ValueError("proportions must be positive")

    def one_rep(rep):
        ds = _rep_dataset(cfg, rep)
        q = gram(ds.x)
        mask = aopt_cs_estimate(ds.x, ds.y, cfg.m)[1]
        total = float(row_sq_norms(ds.x).sum())
        n, d = ds.x.shape
        base = (n / cfg.m) * gram(ds.x[mask.indices])
        out = {}
        for prop in proportions:
            try:
                m_matrix = base + prop * total * np.eye(d)
                out[prop] = delta_from_matrix(m_matrix, q)
            except (NotPositiveDefinite, SingularMatrix):
                out[prop] = None
        return out

    per_rep = _map_reps(one_rep, cfg.reps, threads)
    rows = []
    for prop in proportions:
        vals = [r[prop] for r in per_rep if r[prop] is not None]
        rows.append(
            {
                "dist": cfg.data.dist,
                "d": cfg.data.d,
                "proportion": prop,
                "delta_mean": float(np.mean(vals)) if vals else None,
                "failures": cfg.reps - len(vals),
            }
        )
    return rows, {}
