"""Event-driven simulation of the coupled reserve processes.

Reserves only increase between claims, so every ruin event happens at a claim
instant and a scan over arrivals is exact.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernels
from .claims import ClaimDistribution
from .model import InitialReserves, ModelParams, normalize

NO_RUIN = kernels.NO_RUIN
COLUMNS = ("tau1", "tau2", "t_min", "t_max")


@dataclass(frozen=True, eq=False)
class PathBatch:
    """Padded arrivals for ``m`` paths; row ``i`` is valid up to ``counts[i]``."""

    theta: np.ndarray
    sigma: np.ndarray
    counts: np.ndarray
    T: float

    def __len__(self):
        return self.theta.shape[0]

    def times_from_index(self, idx):
        """Map ruin indices to times (0 at start, inf when no ruin)."""
        idx = np.asarray(idx)
        rows = np.arange(idx.shape[0]).reshape((-1,) + (1,) * (idx.ndim - 1))
        safe = np.clip(idx - 1, 0, max(self.theta.shape[1] - 1, 0))
        if self.theta.shape[1] == 0:
            t = np.zeros(idx.shape)
        else:
            t = self.theta[rows, safe]
        t = np.where(idx == 0, 0.0, t)
        return np.where(idx == NO_RUIN, math.inf, t)


def generate_paths(lam: float, claim: ClaimDistribution, T: float, m: int, rng: np.random.Generator) -> PathBatch:
    """Poisson arrivals on [0, T] as cumulative exponential gaps, plus claims."""
    scale = 1.0 / lam
    mean = lam * T
    width = int(math.ceil(mean + 6.0 * math.sqrt(mean) + 10.0))
    theta = np.cumsum(rng.exponential(scale, (m, width)), axis=1)
    while m and theta[:, -1].min() <= T:
        more = np.cumsum(rng.exponential(scale, (m, width)), axis=1) + theta[:, -1:]
        theta = np.concatenate([theta, more], axis=1)
    counts = (theta <= T).sum(axis=1).astype(np.int64)
    kmax = int(counts.max()) if m else 0
    theta = np.ascontiguousarray(theta[:, :kmax])
    mask = np.arange(kmax)[None, :] < counts[:, None]
    sigma = np.zeros((m, kmax))
    sigma[mask] = claim.sample(rng, int(counts.sum()))
    return PathBatch(theta, sigma, counts, float(T))


def scan(batch: PathBatch, params: ModelParams, reserves: InitialReserves) -> np.ndarray:
    """Ruin indices ``(m, 4)`` for (tau1, tau2, T_min, T_max), discounted form."""
    st = normalize(params, reserves)
    return kernels.scan_joint(batch.theta, batch.sigma, batch.counts, st.x1, st.x2, st.p1, st.p2, params.r)


def scan_compounded(batch: PathBatch, params: ModelParams, reserves: InitialReserves) -> np.ndarray:
    return kernels.scan_joint_compounded(
        batch.theta, batch.sigma, batch.counts,
        reserves.u1, reserves.u2, params.c1, params.c2, params.delta1, params.delta2, params.r,
    )


class RuinTimes(NamedTuple):
    tau1: float
    tau2: float
    t_min: float
    t_max: float


class JointIndicators(NamedTuple):
    a: int
    b: int
    a_or_b: int
    a_and_b: int
    simultaneous: int


@dataclass(frozen=True, eq=False)
class PathRecord:
    """One trajectory on [0, T] with its ruin functionals.

    Ruin times are ``inf`` when the event does not happen within the horizon.
    ``t_max`` is the first instant both lines are negative *at once*.
    """

    theta: np.ndarray
    sigma: np.ndarray
    T: float
    params: ModelParams
    reserves: InitialReserves
    indices: tuple = field(default=(NO_RUIN,) * 4)

    def _batch(self):
        return PathBatch(self.theta[None, :], self.sigma[None, :], np.array([self.theta.size], dtype=np.int64), self.T)

    def _time(self, idx):
        if idx == NO_RUIN:
            return math.inf
        return 0.0 if idx == 0 else float(self.theta[idx - 1])

    @property
    def times(self) -> RuinTimes:
        return RuinTimes(*(self._time(i) for i in self.indices))

    @property
    def tau1(self):
        return self.times.tau1

    @property
    def tau2(self):
        return self.times.tau2

    @property
    def t_min(self):
        return self.times.t_min

    @property
    def t_max(self):
        return self.times.t_max

    def reserves_at_arrivals(self):
        """Post-claim ``(U1, U2)`` and ``(X1, X2)`` at every arrival, closed form."""
        p, st = self.params, normalize(self.params, self.reserves)
        th, r = self.theta, p.r
        S = np.cumsum(np.exp(-r * th) * self.sigma)
        drift = -np.expm1(-r * th)
        X1 = st.x1 + st.p1 * drift - S
        X2 = st.x2 + st.p2 * drift - S
        grow = np.exp(r * th)
        U1 = p.delta1 * grow * X1
        U2 = p.delta2 * grow * X2
        return U1, U2, X1, X2

    def write_csv(self, fh):
        U1, U2, X1, X2 = self.reserves_at_arrivals()
        w = csv.writer(fh)
        w.writerow(["k", "theta", "sigma", "U1", "U2", "X1", "X2"])
        for k in range(self.theta.size):
            w.writerow([k + 1] + [repr(float(v)) for v in (self.theta[k], self.sigma[k], U1[k], U2[k], X1[k], X2[k])])


def simulate_path(
    params: ModelParams,
    reserves: InitialReserves,
    T: float,
    rng: np.random.Generator,
    claim: ClaimDistribution,
) -> PathRecord:
    if not T > 0:
        raise ValueError("horizon T must be positive")
    times = []
    t = rng.exponential(1.0 / params.lam)
    while t <= T:
        times.append(t)
        t += rng.exponential(1.0 / params.lam)
    theta = np.asarray(times, dtype=float)
    sigma = np.asarray(claim.sample(rng, theta.size), dtype=float).reshape(theta.shape)
    rec = PathRecord(theta, sigma, float(T), params, reserves)
    idx = tuple(int(i) for i in scan(rec._batch(), params, reserves)[0])
    return PathRecord(theta, sigma, float(T), params, reserves, idx)


def ruin_times_discounted(path: PathRecord, params=None, reserves=None) -> RuinTimes:
    params = params or path.params
    reserves = reserves or path.reserves
    idx = scan(path._batch(), params, reserves)[0]
    return RuinTimes(*(path._time(int(i)) for i in idx))


def ruin_times_compounded(path: PathRecord, params=None, reserves=None) -> RuinTimes:
    params = params or path.params
    reserves = reserves or path.reserves
    idx = scan_compounded(path._batch(), params, reserves)[0]
    return RuinTimes(*(path._time(int(i)) for i in idx))


def eventwise_joint_indicators(path: PathRecord, T: float | None = None) -> JointIndicators:
    T = path.T if T is None else T
    t = path.times
    a, b = int(t.tau1 <= T), int(t.tau2 <= T)
    return JointIndicators(a, b, int(t.t_min <= T), a * b, int(t.t_max <= T))


def batch_indicators(idx: np.ndarray, batch: PathBatch, T: float | None = None) -> dict[str, np.ndarray]:
    """Vectorised :func:`eventwise_joint_indicators` over a scanned batch."""
    T = batch.T if T is None else T
    times = batch.times_from_index(idx)
    a = times[:, 0] <= T
    b = times[:, 1] <= T
    return {
        "psi1": a,
        "psi2": b,
        "min": times[:, 2] <= T,
        "both_events": a & b,
        "max_simultaneous": times[:, 3] <= T,
    }
