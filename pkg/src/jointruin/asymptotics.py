"""Heavy-tail finite-time approximations and their Monte Carlo check.

For regularly varying claims and ``x1 <= x2`` the finite-horizon ruin
probabilities behave like one big discounted claim:

    P(T_max <= T) ~ lam T Fbar_T(x2),   P(T_min <= T) ~ lam T Fbar_T(x1),
    psi_i(x_i, T) ~ lam T Fbar_T(x_i),

where ``Fbar_T`` is the tail of ``exp(-r V) sigma`` with ``V`` uniform on
``(0, T]``.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import asdict, dataclass, field

from .claims import ClaimDistribution, DiscountedClaimLaw
from .estimate import BudgetError, estimate_finite_ruin_all
from .model import ModelParams, reserves_from_normalized, validate

REGIME_THRESHOLD = 0.1
SE_FRACTION = 0.2

_TARGET = {"max_simultaneous": 1, "min": 0, "psi1": 0, "psi2": 1}


class HypothesisWarning(UserWarning):
    """The claim law is outside the regularly varying family."""


class RegimeError(ValueError):
    pass


def _norm_kind(kind: str) -> str:
    key = str(kind).lower().replace("-", "_")
    key = {"max": "max_simultaneous", "maxsimultaneous": "max_simultaneous"}.get(key, key)
    if key not in _TARGET:
        raise ValueError(f"unknown kind {kind!r}; expected one of {sorted(_TARGET)}")
    return key


@dataclass(frozen=True)
class Approximation:
    kind: str
    value: float
    target_x: float
    in_regime: bool
    in_hypothesis: bool


def approx_ruin(params: ModelParams, claim: ClaimDistribution, x1: float, x2: float, T: float,
                kind: str = "min", threshold: float = REGIME_THRESHOLD, law: DiscountedClaimLaw | None = None
                ) -> Approximation:
    """``lam T Fbar_T(x)`` at ``x2`` for the max kind and ``x1`` for min.

    ``psi1`` and ``psi2`` use their own coordinate.  Values above one are
    returned unchanged, flagged as outside the asymptotic regime.
    """
    kind = _norm_kind(kind)
    if kind in ("min", "max_simultaneous") and x1 > x2:
        raise RegimeError("joint approximations need x1 <= x2")
    if not claim.regularly_varying:
        warnings.warn(f"claim family {claim.family!r} is not regularly varying", HypothesisWarning, stacklevel=2)
    law = law or DiscountedClaimLaw(claim, params.r, T)
    x = (x1, x2)[_TARGET[kind]]
    value = params.lam * T * float(law.survival(x))
    return Approximation(kind, value, float(x), value < threshold, bool(claim.regularly_varying))


@dataclass(frozen=True)
class AsymptoticReport:
    kind: str
    x1: float
    x2: float
    T: float
    approx: float
    approx_min: float
    approx_max: float
    approx_psi1: float
    approx_psi2: float
    estimate: float
    std_error: float
    ci95: tuple
    ratio: float
    ratio_ci: tuple
    in_regime: bool
    in_hypothesis: bool
    n_samples: int
    seed: int
    estimates: dict = field(default_factory=dict)
    ie_residual: int = 0

    def to_record(self) -> dict:
        return asdict(self)


CSV_COLUMNS = ("kind", "x1", "x2", "T", "estimate", "std_error", "approximation", "ratio",
               "ratio_ci_low", "ratio_ci_high", "in_regime", "in_hypothesis", "n")


def write_sweep_csv(reports, fh, extra_columns: dict | None = None) -> None:
    extra_columns = extra_columns or {}
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(list(CSV_COLUMNS) + list(extra_columns))
    for rep in reports:
        w.writerow([
            rep.kind, repr(rep.x1), repr(rep.x2), repr(rep.T), repr(rep.estimate), repr(rep.std_error),
            repr(rep.approx), repr(rep.ratio), repr(rep.ratio_ci[0]), repr(rep.ratio_ci[1]),
            int(rep.in_regime), int(rep.in_hypothesis), rep.n_samples,
        ] + list(extra_columns.values()))


def _point(params, claim, law, x1, x2, T, kind, n, seed, workers, threshold):
    approx = {k: approx_ruin(params, claim, x1, x2, T, k, threshold, law) for k in _TARGET}
    reserves = reserves_from_normalized(params, x1, x2)
    est = estimate_finite_ruin_all(params, reserves, T, n, seed, claim, workers)
    counts = {k: rep.successes for k, rep in est.items()}
    ie = counts["min"] - counts["psi1"] - counts["psi2"] + counts["both_events"]
    rep = est[kind]
    a = approx[kind]
    return AsymptoticReport(
        kind=kind, x1=float(x1), x2=float(x2), T=float(T), approx=a.value,
        approx_min=approx["min"].value, approx_max=approx["max_simultaneous"].value,
        approx_psi1=approx["psi1"].value, approx_psi2=approx["psi2"].value,
        estimate=rep.estimate, std_error=rep.std_error, ci95=tuple(rep.ci95),
        ratio=rep.estimate / a.value, ratio_ci=(rep.ci95[0] / a.value, rep.ci95[1] / a.value),
        in_regime=a.in_regime, in_hypothesis=a.in_hypothesis, n_samples=n, seed=seed,
        estimates={k: r.estimate for k, r in est.items()}, ie_residual=int(ie),
    )


def required_samples(p: float, target_se: float) -> int:
    return int(math.ceil(p * (1.0 - p) / target_se**2))


def ratio_sweep(params: ModelParams, claim: ClaimDistribution, xs, T: float, kind: str = "min",
                n: int = 100_000, seed: int = 0, budget: int | None = None, workers: int = 1,
                threshold: float = REGIME_THRESHOLD, se_fraction: float = SE_FRACTION) -> list[AsymptoticReport]:
    """Monte Carlo over ``xs`` against the approximation, one common seed.

    ``xs`` holds scalars (``x1 = x2 = x``) or ``(x1, x2)`` pairs, increasing.
    The largest point is run first; if its standard error exceeds
    ``se_fraction`` of the approximation, ``n`` is raised to what the
    observed rate needs, up to ``budget`` paths, else :class:`BudgetError`.
    """
    validate(params)
    kind = _norm_kind(kind)
    pts = [(float(x), float(x)) if not isinstance(x, (tuple, list)) else (float(x[0]), float(x[1])) for x in xs]
    if not pts:
        return []
    if any(b <= a for a, b in zip(pts, pts[1:])):
        raise ValueError("x grid must be increasing")
    budget = n if budget is None else budget
    law = DiscountedClaimLaw(claim, params.r, T)
    last = _point(params, claim, law, *pts[-1], T, kind, n, seed, workers, threshold)
    target = se_fraction * last.approx
    if last.std_error > target:
        p = max(last.estimate, last.approx)
        need = required_samples(min(p, 0.5), target)
        if need > budget:
            raise BudgetError(
                f"SE {last.std_error:.3g} at x={pts[-1]} exceeds {se_fraction:.0%} of the approximation; "
                f"about {need} paths needed, budget is {budget}"
            )
        n = need
        last = _point(params, claim, law, *pts[-1], T, kind, n, seed, workers, threshold)
    return [_point(params, claim, law, *x, T, kind, n, seed, workers, threshold) for x in pts[:-1]] + [last]


@dataclass(frozen=True)
class IEDecomposition:
    x1: float
    x2: float
    T: float
    psi1: float
    psi2: float
    min: float
    both_events: float
    max_simultaneous: float
    gap: float
    counts: dict
    degenerate: bool


def ie_decomposition(params: ModelParams, claim: ClaimDistribution, x1: float, x2: float, T: float,
                     n: int, seed: int, workers: int = 1) -> IEDecomposition:
    """``psi1 + psi2 - min`` (both lines ruined by T) against simultaneous ruin.

    On common paths the first equals the both-events estimate exactly; the
    gap to the simultaneous estimate is never negative.
    """
    reserves = reserves_from_normalized(params, x1, x2)
    est = estimate_finite_ruin_all(params, reserves, T, n, seed, claim, workers)
    c = {k: r.successes for k, r in est.items()}
    both = c["psi1"] + c["psi2"] - c["min"]
    return IEDecomposition(
        x1=float(x1), x2=float(x2), T=float(T),
        psi1=c["psi1"] / n, psi2=c["psi2"] / n, min=c["min"] / n,
        both_events=both / n, max_simultaneous=c["max_simultaneous"] / n,
        gap=(both - c["max_simultaneous"]) / n, counts=c, degenerate=x1 > x2,
    )
