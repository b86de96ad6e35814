"""Monte Carlo estimators for finite-horizon ruin probabilities and ruin-time
Laplace transforms.

Paths are generated in fixed-size blocks.  Block ``b`` draws from its own
stream, derived from ``(seed, b)``, so an estimate depends only on
``(seed, n)`` and never on how many workers processed the blocks.  Every
estimand computed with the same seed sees the same paths.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import kernels
from .claims import ClaimDistribution
from .model import InitialReserves, ModelParams, validate
from .reports import EstimateReport
from .simulate import PathBatch, batch_indicators, generate_paths, scan

BLOCK_SIZE = 8192
DEFAULT_BIAS_BUDGET = 1e-6


class FiniteKind(str, enum.Enum):
    MIN = "min"
    MAX_SIMULTANEOUS = "max_simultaneous"
    BOTH_EVENTS = "both_events"
    PSI1 = "psi1"
    PSI2 = "psi2"


class LaplaceKind(str, enum.Enum):
    MIN = "min"
    MAX_SIMULTANEOUS = "max_simultaneous"
    TAU1 = "tau1"
    TAU2 = "tau2"


_ALIASES = {
    "max": "max_simultaneous",
    "maxsimultaneous": "max_simultaneous",
    "bothevents": "both_events",
    "both": "both_events",
}


def _kind(enum_cls, kind):
    if isinstance(kind, enum_cls):
        return kind
    key = str(kind).lower().replace("-", "_")
    key = _ALIASES.get(key.replace("_", ""), key)
    return enum_cls(key)


class BudgetError(ValueError):
    pass


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def block_sizes(n: int, block_size: int = BLOCK_SIZE) -> list[int]:
    full, rem = divmod(n, block_size)
    return [block_size] * full + ([rem] if rem else [])


def block_batch(params: ModelParams, claim: ClaimDistribution, T: float, seed: int, block: int, size: int) -> PathBatch:
    return generate_paths(params.lam, claim, T, size, block_rng(seed, block))


def _worker(job):
    func, payload, blocks = job
    return [(b, func(payload, b, size)) for b, size in blocks]


def run_blocks(func, payload, n: int, workers: int = 1):
    """Evaluate ``func(payload, block, size)`` for every block, in block order.

    Blocks are dealt round-robin to ``workers`` processes; results are
    reassembled by block index, so the outcome is independent of ``workers``.
    """
    sizes = list(enumerate(block_sizes(n)))
    if workers <= 1 or len(sizes) <= 1:
        return [func(payload, b, size) for b, size in sizes]
    workers = min(workers, len(sizes))
    jobs = [(func, payload, sizes[w::workers]) for w in range(workers)]
    out = {}
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(_worker, jobs):
            out.update(part)
    return [out[b] for b, _ in sizes]


# -- finite horizon ---------------------------------------------------------

FINITE_ORDER = ("psi1", "psi2", "min", "both_events", "max_simultaneous")


def _finite_block(payload, block, size):
    params, claim, reserves, T, seed = payload
    batch = block_batch(params, claim, T, seed, block, size)
    ind = batch_indicators(scan(batch, params, reserves), batch, T)
    return tuple(int(ind[k].sum()) for k in FINITE_ORDER)


def finite_ruin_counts(params, reserves, T, n, seed, claim, workers=1) -> dict[str, int]:
    """Ruin counts for every finite-horizon estimand on one common path set."""
    validate(params)
    if n < 1 or not T > 0:
        raise ValueError("need n >= 1 and T > 0")
    parts = run_blocks(_finite_block, (params, claim, reserves, float(T), seed), n, workers)
    totals = np.sum(np.asarray(parts, dtype=np.int64), axis=0)
    return dict(zip(FINITE_ORDER, (int(t) for t in totals)))


def estimate_finite_ruin_all(params, reserves, T, n, seed, claim, workers=1) -> dict[str, EstimateReport]:
    counts = finite_ruin_counts(params, reserves, T, n, seed, claim, workers)
    return {
        k: EstimateReport.from_counts(k, c, n, seed=seed, worker_count=workers, extra={"T": float(T)})
        for k, c in counts.items()
    }


def estimate_finite_ruin(params, reserves, T, kind, n, seed, claim, workers=1) -> EstimateReport:
    """P{ruin of the given kind by time T}; ``kind`` is a :class:`FiniteKind`."""
    kind = _kind(FiniteKind, kind)
    return estimate_finite_ruin_all(params, reserves, T, n, seed, claim, workers)[kind.value]


# -- Laplace transforms -------------------------------------------------------

LAPLACE_COLUMNS = {"tau1": 0, "tau2": 1, "min": 2, "max_simultaneous": 3}


def truncation_horizon(s: float, bias_budget: float = DEFAULT_BIAS_BUDGET) -> float:
    return float(math.ceil(-math.log(bias_budget) / s))


def _resolve_truncation(s, T_trunc, bias_budget):
    if not s > 0:
        raise ValueError("Laplace argument s must be positive")
    if T_trunc is None:
        T_trunc = truncation_horizon(s, bias_budget)
    bound = math.exp(-s * T_trunc)
    if bound > bias_budget:
        raise BudgetError(f"exp(-s*T_trunc) = {bound:.3g} exceeds the bias budget {bias_budget:.3g}")
    return float(T_trunc), bound


def _laplace_block(payload, block, size):
    params, claim, reserves, s, T, seed = payload
    batch = block_batch(params, claim, T, seed, block, size)
    times = batch.times_from_index(scan(batch, params, reserves))
    vals = np.where(times <= T, np.exp(-s * np.minimum(times, T)), 0.0)
    return vals.sum(axis=0), (vals * vals).sum(axis=0)


def _merge_moments(parts, ncols):
    sums = [math.fsum(p[0][j] for p in parts) for j in range(ncols)]
    sqs = [math.fsum(p[1][j] for p in parts) for j in range(ncols)]
    return sums, sqs


def estimate_laplace_all(params, reserves, s, n, seed, claim, T_trunc=None,
                         bias_budget=DEFAULT_BIAS_BUDGET, workers=1) -> dict[str, EstimateReport]:
    validate(params)
    T, bound = _resolve_truncation(s, T_trunc, bias_budget)
    parts = run_blocks(_laplace_block, (params, claim, reserves, float(s), T, seed), n, workers)
    sums, sqs = _merge_moments(parts, 4)
    return {
        k: EstimateReport.from_moments(
            f"laplace_{k}", sums[j], sqs[j], n, truncation_bias_bound=bound, seed=seed,
            worker_count=workers, extra={"s": float(s), "T_trunc": T},
        )
        for k, j in LAPLACE_COLUMNS.items()
    }


def estimate_laplace(params, reserves, s, kind, n, seed, claim, T_trunc=None,
                     bias_budget=DEFAULT_BIAS_BUDGET, workers=1) -> EstimateReport:
    """Truncated estimate of ``E[exp(-s tau)]``.

    Only ruin times up to ``T_trunc`` contribute, so the untruncated value lies
    in ``[estimate, estimate + exp(-s T_trunc)]``.
    """
    kind = _kind(LaplaceKind, kind)
    return estimate_laplace_all(params, reserves, s, n, seed, claim, T_trunc, bias_budget, workers)[kind.value]


def _levels_block(payload, block, size):
    params, claim, levels, which, s, T, seed = payload
    batch = block_batch(params, claim, T, seed, block, size)
    p = params.p1 if which == "tau1" else params.p2
    idx = kernels.first_passage_levels(batch.theta, batch.sigma, batch.counts, levels, p, params.r)
    times = batch.times_from_index(idx)
    vals = np.where(times <= T, np.exp(-s * np.minimum(times, T)), 0.0)
    return vals.sum(axis=0), (vals * vals).sum(axis=0)


def univariate_laplace_levels(params, s, which, levels, n, seed, claim, T_trunc=None,
                              bias_budget=DEFAULT_BIAS_BUDGET, workers=1) -> list[EstimateReport]:
    """``E[exp(-s tau_i(x))]`` for each normalized starting level ``x``.

    All levels share the same paths, so the table is monotone pathwise.
    """
    which = _kind(LaplaceKind, which).value
    if which not in ("tau1", "tau2"):
        raise ValueError("univariate tables need kind tau1 or tau2")
    validate(params)
    T, bound = _resolve_truncation(s, T_trunc, bias_budget)
    levels = np.ascontiguousarray(levels, dtype=float)
    parts = run_blocks(_levels_block, (params, claim, levels, which, float(s), T, seed), n, workers)
    sums, sqs = _merge_moments(parts, levels.size)
    return [
        EstimateReport.from_moments(
            f"laplace_{which}", sums[j], sqs[j], n, truncation_bias_bound=bound, seed=seed,
            worker_count=workers, extra={"v": float(levels[j]), "s": float(s), "T_trunc": T},
        )
        for j in range(levels.size)
    ]


def boundary_laplace_table(params, s, kind, points, n, seed, claim, T_trunc=None,
                           bias_budget=DEFAULT_BIAS_BUDGET, workers=1) -> list[EstimateReport]:
    """Univariate Laplace values on the line ``u1/delta1 = u2/delta2``.

    ``points`` are normalized coordinates ``v`` (so ``u1 = delta1 v`` and
    ``u2 = delta2 v``).  ``tau2`` gives the boundary data of the min problem,
    ``tau1`` that of the max problem.
    """
    reps = univariate_laplace_levels(params, s, kind, points, n, seed, claim, T_trunc, bias_budget, workers)
    out = []
    for rep in reps:
        v = rep.extra["v"]
        extra = dict(rep.extra, u1=params.delta1 * v, u2=params.delta2 * v)
        out.append(EstimateReport(**{**rep.__dict__, "extra": extra}))
    return out


def _grid_block(payload, block, size):
    params, claim, points, col, s, T, seed = payload
    batch = block_batch(params, claim, T, seed, block, size)
    sums = np.empty(len(points))
    sqs = np.empty(len(points))
    for j, (v1, v2) in enumerate(points):
        res = InitialReserves(params.delta1 * v1, params.delta2 * v2)
        times = batch.times_from_index(scan(batch, params, res)[:, col])
        vals = np.where(times <= T, np.exp(-s * np.minimum(times, T)), 0.0)
        sums[j] = vals.sum()
        sqs[j] = (vals * vals).sum()
    return sums, sqs


def laplace_point_table(params, s, kind, points, n, seed, claim, T_trunc=None,
                        bias_budget=DEFAULT_BIAS_BUDGET, workers=1) -> list[EstimateReport]:
    """Joint Laplace estimates at many normalized points ``(v1, v2)`` on shared paths."""
    kind = _kind(LaplaceKind, kind)
    validate(params)
    T, bound = _resolve_truncation(s, T_trunc, bias_budget)
    pts = [(float(a), float(b)) for a, b in points]
    payload = (params, claim, pts, LAPLACE_COLUMNS[kind.value], float(s), T, seed)
    parts = run_blocks(_grid_block, payload, n, workers)
    sums, sqs = _merge_moments(parts, len(pts))
    return [
        EstimateReport.from_moments(
            f"laplace_{kind.value}", sums[j], sqs[j], n, truncation_bias_bound=bound, seed=seed,
            worker_count=workers, extra={"v1": pts[j][0], "v2": pts[j][1], "s": float(s), "T_trunc": T},
        )
        for j in range(len(pts))
    ]


def reserves_on_boundary(params: ModelParams, v: float) -> InitialReserves:
    return InitialReserves(params.delta1 * v, params.delta2 * v)

