"""Monte Carlo estimate reports and interval helpers."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from statistics import NormalDist

Z95 = NormalDist().inv_cdf(0.975)


def wilson_interval(successes: int, n: int, z: float = Z95) -> tuple[float, float]:
    if n <= 0:
        return (0.0, 1.0)
    p = successes / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo, hi = max(0.0, centre - half), min(1.0, centre + half)
    # guard rounding at p = 0 or 1 so the interval always contains p
    return (min(lo, p), max(hi, p))


def normal_interval(mean: float, se: float, z: float = Z95) -> tuple[float, float]:
    return (max(0.0, mean - z * se), min(1.0, mean + z * se))


@dataclass(frozen=True)
class EstimateReport:
    """Point estimate with its sampling error.

    ``successes`` is set for raw proportions so that pathwise identities can be
    checked on integer counts.  ``truncation_bias_bound`` is zero for
    finite-horizon probabilities.
    """

    estimand: str
    estimate: float
    std_error: float
    ci95: tuple[float, float]
    n_samples: int
    truncation_bias_bound: float = 0.0
    seed: int | None = None
    worker_count: int = 1
    successes: int | None = None
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_counts(cls, estimand, successes, n, **kw) -> "EstimateReport":
        p = successes / n
        se = math.sqrt(p * (1.0 - p) / n)
        return cls(estimand, p, se, wilson_interval(successes, n), n, successes=int(successes), **kw)

    @classmethod
    def from_moments(cls, estimand, total, total_sq, n, **kw) -> "EstimateReport":
        mean = total / n
        var = max(total_sq / n - mean * mean, 0.0) * n / max(n - 1, 1)
        se = math.sqrt(var / n)
        return cls(estimand, mean, se, normal_interval(mean, se), n, **kw)

    def to_record(self, include_workers: bool = False) -> dict:
        d = asdict(self)
        d["ci95"] = list(self.ci95)
        if not include_workers:
            d.pop("worker_count")
        if not d["extra"]:
            d.pop("extra")
        return d
