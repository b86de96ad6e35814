"""Claim-size distributions and the law of a uniformly timed discounted claim."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize

from .reports import EstimateReport


class RootFindError(RuntimeError):
    pass


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1.0) / 2.0, w / 2.0


class ClaimDistribution:
    """Positive claim sizes.  Subclasses provide the tail and its inverse."""

    family = "abstract"
    regularly_varying = False
    # interior points where the density is discontinuous
    breakpoints: tuple[float, ...] = ()

    def survival(self, x):
        raise NotImplementedError

    def density(self, x):
        raise NotImplementedError

    def isf(self, q):
        """Inverse survival: smallest ``x`` with ``survival(x) <= q``, ``q`` in (0, 1]."""
        raise NotImplementedError

    @property
    def mean(self) -> float:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size=None):
        # 1 - U lies in (0, 1], so isf never sees 0
        return self.isf(1.0 - rng.random(size))

    def spec(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Exponential(ClaimDistribution):
    mean_size: float = 1.0

    family = "exponential"

    def __post_init__(self):
        if not self.mean_size > 0:
            raise ValueError("exponential mean must be positive")

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x <= 0, 1.0, np.exp(-np.maximum(x, 0.0) / self.mean_size))

    def density(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 0.0, np.exp(-np.maximum(x, 0.0) / self.mean_size) / self.mean_size)

    def isf(self, q):
        return -self.mean_size * np.log(q)

    @property
    def mean(self) -> float:
        return self.mean_size

    def spec(self) -> dict:
        return {"family": "exponential", "mean": self.mean_size}


@dataclass(frozen=True)
class RegVaryingClaim(ClaimDistribution):
    """Survival ``L(x) / x**alpha`` above the splice point ``x0``, 1 below it.

    ``L`` defaults to ``beta * log(e + x)``, which is continuous and unbounded.
    ``x0`` solves ``L(x0) = x0**alpha`` so the survival function is continuous.
    A custom ``slowly_varying`` must be a vectorised callable; its log-derivative
    is then taken numerically.
    """

    alpha: float
    beta: float = 1.0
    slowly_varying: object = None
    x0: float = field(init=False)

    family = "regvarying"
    regularly_varying = True

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("tail index alpha must be positive")
        if self.slowly_varying is None and not self.beta > 0:
            raise ValueError("beta must be positive")
        object.__setattr__(self, "x0", self._splice_point())
        grid = self.x0 * np.logspace(0, 12, 400)[1:]
        if np.any(self._dlogL(grid) - self.alpha >= 0):
            raise ValueError("survival L(x)/x**alpha is not strictly decreasing beyond x0")

    @property
    def breakpoints(self):
        return (self.x0,)

    def L(self, x):
        x = np.asarray(x, dtype=float)
        if self.slowly_varying is None:
            return self.beta * np.log(math.e + x)
        return np.asarray(self.slowly_varying(x), dtype=float)

    def _dlogL(self, x):
        """d log L / d log x."""
        x = np.asarray(x, dtype=float)
        if self.slowly_varying is None:
            return x / ((math.e + x) * np.log(math.e + x))
        eps = 1e-6
        return (np.log(self.L(x * math.exp(eps))) - np.log(self.L(x * math.exp(-eps)))) / (2 * eps)

    def _dL(self, x):
        x = np.asarray(x, dtype=float)
        if self.slowly_varying is None:
            return self.beta / (math.e + x)
        return self._dlogL(x) * self.L(x) / x

    def _splice_point(self) -> float:
        def gap(logx):
            return math.log(float(self.L(math.exp(logx)))) - self.alpha * logx

        lo, hi = -1.0, 1.0
        while gap(lo) <= 0:
            lo -= 2.0
            if lo < -200:
                raise RootFindError("no splice point: L(x) <= x**alpha near 0")
        while gap(hi) >= 0:
            hi += 2.0
            if hi > 700:
                raise RootFindError("no splice point: L(x) >= x**alpha everywhere")
        return math.exp(optimize.brentq(gap, lo, hi, xtol=1e-15, rtol=1e-15))

    def log_tail(self, x):
        x = np.asarray(x, dtype=float)
        return np.log(self.L(x)) - self.alpha * np.log(x)

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        above = x > self.x0
        xs = np.where(above, x, self.x0 * 2.0)
        return np.where(above, np.minimum(np.exp(self.log_tail(xs)), 1.0), 1.0)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        above = x > self.x0
        xs = np.where(above, x, self.x0 * 2.0)
        f = self.alpha * self.L(xs) * xs ** (-self.alpha - 1) - self._dL(xs) * xs ** (-self.alpha)
        return np.where(above, f, 0.0)

    def isf(self, q, tol: float = 1e-12, max_iter: int = 200):
        q = np.asarray(q, dtype=float)
        scalar = q.ndim == 0
        q = np.atleast_1d(q)
        logq = np.log(np.minimum(q, 1.0))
        ylo = np.full(q.shape, math.log(self.x0))

        def phi(y):
            return np.log(self.L(np.exp(y))) - self.alpha * y - logq

        yhi = ylo + (-logq) / self.alpha + 1.0
        for _ in range(max_iter):
            bad = phi(yhi) >= 0
            if not bad.any():
                break
            yhi = np.where(bad, yhi + 2.0 * (yhi - ylo), yhi)
        else:
            raise RootFindError("could not bracket the inverse survival")

        done = logq >= 0.0
        y = np.where(done, ylo, 0.5 * (ylo + yhi))
        for _ in range(max_iter):
            val = phi(y)
            ylo = np.where(val > 0, y, ylo)
            yhi = np.where(val <= 0, y, yhi)
            slope = self._dlogL(np.exp(y)) - self.alpha
            step = y - val / slope
            step = np.where((step > ylo) & (step < yhi), step, 0.5 * (ylo + yhi))
            step = np.where(done, y, step)
            moved = np.abs(step - y)
            y = step
            if np.all(moved <= tol * np.maximum(1.0, np.abs(y))):
                break
        else:
            raise RootFindError("inverse survival did not converge; is L well formed?")
        x = np.where(done, self.x0, np.exp(y))
        return x[0] if scalar else x

    @property
    def mean(self) -> float:
        if self.alpha <= 1:
            return math.inf
        tail, _ = integrate.quad(lambda x: float(self.survival(x)), self.x0, np.inf, limit=200)
        return self.x0 + tail

    def spec(self) -> dict:
        if self.slowly_varying is not None:
            return {"family": "regvarying", "alpha": self.alpha, "L": "custom"}
        return {"family": "regvarying", "alpha": self.alpha, "beta": self.beta}


def claim_from_spec(spec: dict) -> ClaimDistribution:
    family = spec.get("family", "").lower()
    if family == "exponential":
        return Exponential(float(spec.get("mean_size", spec.get("mean", 1.0))))
    if family in ("regvarying", "regularly_varying"):
        return RegVaryingClaim(float(spec["alpha"]), float(spec.get("beta", 1.0)))
    raise ValueError(f"unknown claim family {spec.get('family')!r}")


def sample_claim(dist: ClaimDistribution, rng: np.random.Generator) -> float:
    return float(dist.sample(rng))


@dataclass(frozen=True)
class DiscountedClaimLaw:
    """Law of ``exp(-r V) * sigma`` with ``V`` uniform on (0, T]."""

    base: ClaimDistribution
    r: float
    T: float
    nodes: int = 64

    def survival(self, x, tol: float = 1e-9):
        """``(1/T) * int_0^T survival(x * exp(r y)) dy`` by Gauss-Legendre,
        split where the integrand has a kink, doubled until stable."""
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        n = self.nodes
        prev = self._survival_gl(x, n)
        while True:
            n *= 2
            cur = self._survival_gl(x, n)
            if np.max(np.abs(cur - prev)) < tol or n >= 4096:
                break
            prev = cur
        out = np.where(x <= 0, 1.0, cur)
        return out[0] if scalar else out

    def _survival_gl(self, x, n):
        nodes, weights = gauss_legendre(n)
        xs = np.maximum(x, 1e-300)
        cuts = [np.zeros_like(xs)]
        for b in self.base.breakpoints:
            cuts.append(np.clip(np.log(b / xs) / self.r, 0.0, self.T))
        cuts.append(np.full_like(xs, self.T))
        cuts = np.sort(np.stack(cuts, axis=-1), axis=-1)
        total = np.zeros_like(xs)
        for a, b in zip(cuts[..., :-1].T, cuts[..., 1:].T):
            y = a[:, None] + (b - a)[:, None] * nodes[None, :]
            vals = self.base.survival(xs[:, None] * np.exp(self.r * y))
            total += (b - a) * (vals @ weights)
        return total / self.T

    def sample(self, rng: np.random.Generator, size=None):
        v = self.T * (1.0 - rng.random(size))
        return np.exp(-self.r * v) * self.base.sample(rng, size)


def survival_T(law: DiscountedClaimLaw, x):
    return law.survival(x)


def S_of_x(claim: RegVaryingClaim, r: float, T: float, x: float) -> float:
    """Slowly varying part of the discounted tail, ``survival_T(x) * x**alpha``.

    Evaluated in the substituted form
    ``x**alpha / (r T) * int_x^{exp(rT) x} L(u) / u**(alpha+1) du``.
    """
    if not x > claim.x0:
        raise ValueError(f"S(x) is defined for x > x0 = {claim.x0}")
    a = claim.alpha
    # factor x**-(alpha+1) out of the integrand to keep it O(1)
    val, _ = integrate.quad(
        lambda t: float(claim.L(x * t)) * t ** (-a - 1.0),
        1.0,
        math.exp(r * T),
        epsabs=0.0,
        epsrel=1e-13,
        limit=200,
    )
    return val / (r * T)


def convolution_tail_mc(
    law: DiscountedClaimLaw, n: int, x, samples: int, seed: int, chunk: int = 1_000_000
) -> EstimateReport | list[EstimateReport]:
    """Estimate ``P{sum of n independent discounted claims > x}``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    rng = np.random.default_rng(seed)
    hits = np.zeros(xs.shape, dtype=np.int64)
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        total = np.zeros(m)
        for _ in range(n):
            total += law.sample(rng, m)
        hits += (total[:, None] > xs[None, :]).sum(axis=0)
        done += m
    reports = [
        EstimateReport.from_counts(f"conv_tail_n{n}", int(h), samples, seed=seed, extra={"x": float(xv)})
        for h, xv in zip(hits, xs)
    ]
    return reports[0] if np.ndim(x) == 0 else reports
