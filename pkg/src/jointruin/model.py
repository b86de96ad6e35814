"""Model parameters for the two-line compound Poisson risk model with interest.

Both lines share one claim stream: a claim of size ``z`` costs line ``i`` the
amount ``delta_i * z``.  Reserves earn interest at rate ``r`` and premiums at
rate ``c_i``.  Most of the package works in normalized coordinates
``v_i = u_i / delta_i`` where a claim is a diagonal shift ``(-z, -z)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

SUM_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Violation:
    code: str
    message: str


class ParameterError(ValueError):
    """Raised when model parameters break one or more constraints.

    ``violations`` lists every broken constraint, not just the first.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(v.message for v in self.violations))

    @property
    def codes(self):
        return [v.code for v in self.violations]


@dataclass(frozen=True)
class ModelParams:
    r: float
    lam: float
    c1: float
    c2: float
    delta1: float
    delta2: float

    def violations(self) -> list[Violation]:
        out = []
        if not self.r > 0:
            out.append(Violation("rate_nonpositive", "interest rate must be strictly positive"))
        if not self.lam > 0:
            out.append(Violation("intensity_nonpositive", "Poisson intensity must be positive"))
        if not (self.c1 > 0 and self.c2 > 0):
            out.append(Violation("premium_nonpositive", "premium rates must be positive"))
        for name, d in (("delta1", self.delta1), ("delta2", self.delta2)):
            if not 0 < d < 1:
                out.append(Violation("fraction_range", f"{name} must lie strictly between 0 and 1"))
        if not abs(self.delta1 + self.delta2 - 1.0) <= SUM_TOLERANCE:
            out.append(Violation("fraction_sum", "fractions do not sum to 1"))
        if self.delta1 > 0 and self.delta2 > 0 and not self.c1 / self.delta1 > self.c2 / self.delta2:
            out.append(Violation("premium_order", "c1/delta1 must exceed c2/delta2"))
        return out

    @property
    def p1(self) -> float:
        return self.c1 / (self.r * self.delta1)

    @property
    def p2(self) -> float:
        return self.c2 / (self.r * self.delta2)

    def as_dict(self) -> dict:
        return {
            "r": self.r,
            "lam": self.lam,
            "c1": self.c1,
            "c2": self.c2,
            "delta1": self.delta1,
            "delta2": self.delta2,
        }


def validate(params: ModelParams) -> ModelParams:
    """Return ``params`` unchanged, or raise :class:`ParameterError` listing
    every violated constraint."""
    bad = params.violations()
    if bad:
        raise ParameterError(bad)
    return params


@dataclass(frozen=True)
class InitialReserves:
    u1: float
    u2: float


@dataclass(frozen=True)
class NormalizedState:
    x1: float
    x2: float
    p1: float
    p2: float

    @classmethod
    def from_model(cls, params: ModelParams, reserves: InitialReserves) -> "NormalizedState":
        return cls(
            reserves.u1 / params.delta1,
            reserves.u2 / params.delta2,
            params.p1,
            params.p2,
        )


def normalize(params: ModelParams, reserves: InitialReserves) -> NormalizedState:
    return NormalizedState.from_model(params, reserves)


def reserves_from_normalized(params: ModelParams, x1: float, x2: float) -> InitialReserves:
    return InitialReserves(params.delta1 * x1, params.delta2 * x2)


class Regime(enum.Enum):
    NON_DEGENERATE = "non_degenerate"
    # min-ruin reduces to line 2 alone, max-ruin to line 1 alone
    DEGENERATE = "degenerate"


def classify_regime(params: ModelParams, reserves: InitialReserves) -> Regime:
    # compare u1/d1 > u2/d2 without division so common scaling is exact
    if reserves.u1 * params.delta2 > reserves.u2 * params.delta1:
        return Regime.DEGENERATE
    return Regime.NON_DEGENERATE


def ordering_cross_time(params: ModelParams, reserves: InitialReserves) -> float:
    """Time at which the normalized reserves of the two lines meet.

    Claims are common to both lines, so ``X2(t) - X1(t)`` is the deterministic
    curve ``(x2 - x1) + (p2 - p1)(1 - exp(-r t))``.  Returns ``inf`` when the
    gap never closes.
    """
    st = normalize(params, reserves)
    gap = st.x2 - st.x1
    if gap < 0:
        raise ValueError("ordering_cross_time needs x1 <= x2 (non-degenerate regime)")
    reach = st.p1 - st.p2
    if gap >= reach:
        return math.inf
    return -math.log1p(-gap / reach) / params.r


def deterministic_gap(params: ModelParams, reserves: InitialReserves, t):
    """``X2(t) - X1(t)``; accepts scalar or array ``t``."""
    st = normalize(params, reserves)
    return (st.x2 - st.x1) + (st.p2 - st.p1) * (-np.expm1(-params.r * np.asarray(t, dtype=float)))
