"""Grid solver for the Laplace transforms of the joint ruin times.

The field ``g(v1, v2) = E[exp(-s T)]`` is computed on the wedge
``0 <= v1 <= v2`` of normalized reserves by iterating the first-claim
operator

    (Tg)(v) = exp(-(lam+s) h) g(phi_h v)
              + int_0^h lam exp(-(lam+s) t) int_0^inf g(phi_t v - z) f(z) dz dt,

where ``phi_t v = exp(r t) v + p (exp(r t) - 1)`` is the premium-plus-interest
drift and a claim shifts both coordinates by ``-z``.  ``T`` is a contraction
with factor ``(lam + s exp(-(lam+s) h)) / (lam + s)``.

Values below the diagonal (``v1 > v2``) belong to the degenerate regime and are
univariate: the min field equals the ``tau2`` transform of ``v2`` there, the
max field the ``tau1`` transform of ``v1``.  They are stored on the grid so a
single interpolation rule covers the whole square; together with the diagonal
they are pinned to Monte Carlo boundary tables and never iterated.

Interpolation is bilinear except in the cells cut by the diagonal, where it is
linear on each triangle so the diagonal kink is never straddled.  Claim
integrals run along diagonal rays; they are split at every grid-line crossing
and integrated with low-order Gauss-Legendre on each piece.  Since every
stencil is fixed, the operator is assembled once as a sparse affine map.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import sparse

from .claims import ClaimDistribution, claim_from_spec, gauss_legendre
from .model import ModelParams

MIN = "min"
MAX = "max"


class SolverError(RuntimeError):
    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)


class ConvergenceError(SolverError):
    pass


class OutOfDomainError(ValueError):
    pass


def _check_kind(kind):
    kind = str(kind).lower()
    if kind in ("min",):
        return MIN
    if kind in ("max", "max_simultaneous"):
        return MAX
    raise ValueError(f"kind must be 'min' or 'max', got {kind!r}")


def contraction_factor(lam: float, s: float, h: float) -> float:
    return (lam + s * math.exp(-(lam + s) * h)) / (lam + s)


def default_step(lam: float, s: float) -> float:
    """Step with ``exp(-(lam+s) h) = 0.1``; the factor is then
    ``(lam + 0.1 s) / (lam + s)`` (0.7 for lam=1, s=0.5)."""
    return math.log(10.0) / (lam + s)


@dataclass(frozen=True)
class WedgeGrid:
    """Uniform grid ``v_k = k * delta`` on both normalized axes.

    The first ``n_core`` nodes span ``[0, vmax]``; ``n_buffer`` extra nodes
    absorb one operator step of drift.
    """

    n_core: int
    vmax: float
    n_buffer: int = 0

    @classmethod
    def for_model(cls, n_core: int, vmax: float, params: ModelParams, h: float) -> "WedgeGrid":
        delta = vmax / (n_core - 1)
        reach = math.expm1(params.r * h) * (vmax + max(params.p1, params.p2))
        return cls(n_core, vmax, int(math.ceil(reach / delta - 1e-9)))

    @property
    def delta(self) -> float:
        return self.vmax / (self.n_core - 1)

    @property
    def n(self) -> int:
        return self.n_core + self.n_buffer

    @property
    def v(self) -> np.ndarray:
        return np.arange(self.n) * self.delta

    @property
    def v_total(self) -> float:
        return (self.n - 1) * self.delta

    def refined(self) -> "WedgeGrid":
        """Halve the spacing over the same physical extent."""
        return WedgeGrid(2 * self.n_core - 1, self.vmax, 2 * self.n_buffer)

    def spec(self) -> dict:
        return {"n_core": self.n_core, "vmax": self.vmax, "n_buffer": self.n_buffer}

    def masks(self):
        i, j = np.indices((self.n, self.n))
        return i < j, i == j, i > j


@dataclass
class BoundaryData:
    """Univariate Laplace tables at the grid levels plus the optional
    Monte Carlo closure for the max field where only line 1 is negative."""

    v: np.ndarray
    tau1: np.ndarray | None = None
    tau2: np.ndarray | None = None
    tau1_se: np.ndarray | None = None
    tau2_se: np.ndarray | None = None
    closure_v1: np.ndarray | None = None
    closure_v2: np.ndarray | None = None
    closure: np.ndarray | None = None
    closure_se: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"meta": self.meta}
        for name in ("v", "tau1", "tau2", "tau1_se", "tau2_se", "closure_v1", "closure_v2", "closure", "closure_se"):
            val = getattr(self, name)
            out[name] = None if val is None else np.asarray(val).tolist()
        return out

    @classmethod
    def from_json(cls, d: dict) -> "BoundaryData":
        kw = {k: (None if d.get(k) is None else np.asarray(d[k], dtype=float)) for k in (
            "v", "tau1", "tau2", "tau1_se", "tau2_se", "closure_v1", "closure_v2", "closure", "closure_se")}
        return cls(meta=d.get("meta", {}), **kw)

    def max_se(self, kind) -> float:
        se = self.tau2_se if kind == MIN else self.tau1_se
        return 0.0 if se is None else float(np.max(se))


@dataclass
class LaplaceField:
    values: np.ndarray
    grid: WedgeGrid
    kind: str
    s: float
    params: ModelParams
    claim: dict
    h: float
    rho: float
    iterations: int = 0
    diffs: list = field(default_factory=list)
    boundary: BoundaryData | None = None

    @property
    def ratios(self) -> list:
        d = self.diffs
        return [d[k] / d[k - 1] for k in range(1, len(d)) if d[k - 1] > 0]

    def diagonal(self) -> np.ndarray:
        return np.diag(self.values).copy()


# -- interpolation ------------------------------------------------------------

def interp_stencil(q1, q2, grid: WedgeGrid):
    """Flat node indices ``(P, 4)`` and weights ``(P, 4)`` interpolating the
    grid at points ``(q1, q2)``; coordinates are clamped into the grid."""
    n, d = grid.n, grid.delta
    vt = grid.v_total
    a = np.clip(np.asarray(q1, dtype=float), 0.0, vt) / d
    b = np.clip(np.asarray(q2, dtype=float), 0.0, vt) / d
    i = np.minimum(np.floor(a).astype(np.int64), n - 2)
    j = np.minimum(np.floor(b).astype(np.int64), n - 2)
    fa = a - i
    fb = b - j
    idx = np.stack([i * n + j, (i + 1) * n + j, i * n + j + 1, (i + 1) * n + j + 1], axis=-1)
    w = np.stack([(1 - fa) * (1 - fb), fa * (1 - fb), (1 - fa) * fb, fa * fb], axis=-1)
    diag = i == j
    if diag.any():
        up = diag & (fa <= fb)
        lo = diag & (fa > fb)
        # upper triangle (i,i), (i,i+1), (i+1,i+1); lower (i,i), (i+1,i), (i+1,i+1)
        w[up] = np.stack([1 - fb[up], np.zeros(up.sum()), fb[up] - fa[up], fa[up]], axis=-1)
        w[lo] = np.stack([1 - fa[lo], fa[lo] - fb[lo], np.zeros(lo.sum()), fb[lo]], axis=-1)
    return idx, w


def interpolate(values: np.ndarray, grid: WedgeGrid, q1, q2):
    idx, w = interp_stencil(q1, q2, grid)
    return (values.ravel()[idx] * w).sum(axis=-1)


def _interp1(levels, table, x):
    return np.interp(x, levels, table)


def _closure_value(boundary: BoundaryData, params: ModelParams, q1, q2):
    """Max field where line 1 alone is negative.  Below ``-p1`` line 1 can
    never recover, so only line 2 matters."""
    q1 = np.asarray(q1, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    out = _interp1(boundary.v, boundary.tau2, q2)
    live = q1 > -params.p1
    if live.any():
        cv1, cv2, c = boundary.closure_v1, boundary.closure_v2, boundary.closure
        a = np.clip(q1[live], cv1[0], cv1[-1])
        b = np.clip(q2[live], cv2[0], cv2[-1])
        ia = np.clip(np.searchsorted(cv1, a, side="right") - 1, 0, cv1.size - 2)
        ib = np.clip(np.searchsorted(cv2, b, side="right") - 1, 0, cv2.size - 2)
        fa = (a - cv1[ia]) / (cv1[ia + 1] - cv1[ia])
        fb = (b - cv2[ib]) / (cv2[ib + 1] - cv2[ib])
        out[live] = ((1 - fa) * (1 - fb) * c[ia, ib] + fa * (1 - fb) * c[ia + 1, ib]
                     + (1 - fa) * fb * c[ia, ib + 1] + fa * fb * c[ia + 1, ib + 1])
    return out


# -- quadrature along claim rays -----------------------------------------------

def _ray_breaks(w1, w2, zmax, grid: WedgeGrid, extra=()):
    """Sorted breakpoints of ``[0, zmax]`` where the ray ``w - z`` crosses a
    grid line, plus any ``extra`` absolute z values; shape ``(P, K)``.

    Lines are continued past the far edge so no piece is longer than delta.
    """
    d = grid.delta
    kmax = int(math.ceil(float(np.max(zmax, initial=0.0)) / d)) + 2
    steps = np.arange(kmax)
    cols = [np.zeros_like(zmax)[:, None], zmax[:, None]]
    for w in (w1, w2):
        k0 = np.maximum(np.ceil((w - zmax) / d), 0.0)
        k = k0[:, None] + steps[None, :]
        z = w[:, None] - k * d
        ok = (z > 0) & (z < zmax[:, None])
        cols.append(np.where(ok, z, zmax[:, None]))
    for e in extra:
        cols.append(np.clip(np.full_like(zmax, e), 0.0, zmax)[:, None])
    return np.sort(np.concatenate(cols, axis=1), axis=1)


def _segments(breaks, n_gauss):
    """Gauss nodes over every positive-length piece: owner, z, weight."""
    start = breaks[:, :-1]
    length = np.diff(breaks, axis=1)
    keep = length > 1e-14
    owner = np.nonzero(keep)[0]
    start = start[keep]
    length = length[keep]
    x, wg = gauss_legendre(n_gauss)
    z = (start[:, None] + length[:, None] * x[None, :]).ravel()
    wz = (length[:, None] * wg[None, :]).ravel()
    return np.repeat(owner, n_gauss), z, wz


def _jump_terms(w1, w2, scale, grid, claim, kind, params, boundary, n_gauss):
    """Claim integral ``scale * int g(w - z) f(z) dz`` at each point ``w``.

    Returns the grid part as ``(owner, cols, vals)`` and the known part
    (ruin mass and closure values) as a vector over points.
    """
    zmin = np.minimum(w1, w2)
    zmax = np.maximum(w1, w2)
    const = np.zeros_like(w1)
    owner, z, wz = _segments(_ray_breaks(w1, w2, zmin, grid, claim.breakpoints), n_gauss)
    wz = wz * claim.density(z) * scale[owner]
    idx, wts = interp_stencil(w1[owner] - z, w2[owner] - z, grid)
    if kind == MIN:
        const += scale * claim.survival(zmin)
    else:
        const += scale * claim.survival(zmax)
        # exactly one coordinate negative: the known closure values
        width = zmax - zmin
        nseg = np.maximum(np.ceil(width / (0.5 * grid.delta)), 1).astype(np.int64)
        top = int(nseg.max(initial=1))
        frac = np.minimum(np.arange(top + 1)[None, :] / nseg[:, None], 1.0)
        mbreaks = zmin[:, None] + width[:, None] * frac
        for e in claim.breakpoints:
            mbreaks = np.concatenate([mbreaks, np.clip(np.full_like(zmin, e), zmin, zmax)[:, None]], axis=1)
        mbreaks = np.sort(mbreaks, axis=1)
        mo, mz, mw = _segments(mbreaks, n_gauss)
        q1 = w1[mo] - mz
        q2 = w2[mo] - mz
        line1_neg = q1 < q2
        val = np.empty_like(mz)
        if line1_neg.any():
            val[line1_neg] = _closure_value(boundary, params, q1[line1_neg], q2[line1_neg])
        if (~line1_neg).any():
            val[~line1_neg] = _interp1(boundary.v, boundary.tau1, q1[~line1_neg])
        const += np.bincount(mo, weights=mw * claim.density(mz) * val * scale[mo], minlength=w1.size)
    return (owner, idx, wts * wz[:, None]), const


# -- operator -----------------------------------------------------------------

def _time_pieces(v1, v2, params, h, n_time):
    """Gauss nodes in t on [0, h], split where the drift crosses the diagonal."""
    gap = v2 - v1
    reach = params.p1 - params.p2
    with np.errstate(divide="ignore", invalid="ignore"):
        t_exit = np.where(gap < reach, -np.log1p(-gap / reach) / params.r, np.inf)
    cut = np.clip(t_exit, 0.0, h)
    x, wg = gauss_legendre(n_time)
    t = np.concatenate([cut[:, None] * x[None, :], cut[:, None] + (h - cut)[:, None] * x[None, :]], axis=1)
    wt = np.concatenate([cut[:, None] * wg[None, :], (h - cut)[:, None] * wg[None, :]], axis=1)
    return t, wt


def _drift(v, p, r, t):
    e = np.expm1(r * t)
    return v + e * (v + p)


@dataclass
class LaplaceOperator:
    """Affine map ``g -> A g + b`` on the flattened grid; pinned nodes are
    reset to their boundary values after every application."""

    A: sparse.csr_matrix
    b: np.ndarray
    pinned: np.ndarray
    pinned_values: np.ndarray
    grid: WedgeGrid
    kind: str
    s: float
    h: float
    rho: float

    def apply(self, values: np.ndarray) -> np.ndarray:
        g = np.asarray(values, dtype=float).ravel()
        out = self.A @ g + self.b
        out[self.pinned] = self.pinned_values
        return out.reshape(values.shape)

    def initial(self) -> np.ndarray:
        g = np.ones(self.grid.n * self.grid.n)
        g[self.pinned] = self.pinned_values
        return g.reshape(self.grid.n, self.grid.n)


def pinned_field(grid: WedgeGrid, boundary: BoundaryData, kind: str):
    """Boolean mask and values for the diagonal and sub-diagonal nodes."""
    n = grid.n
    if np.asarray(boundary.v).size != n or not np.allclose(boundary.v, grid.v, rtol=0, atol=1e-9 * grid.delta):
        raise ValueError("boundary levels do not match the grid nodes")
    i, j = np.indices((n, n))
    if kind == MIN:
        if boundary.tau2 is None:
            raise ValueError("min field needs tau2 boundary data")
        vals = np.asarray(boundary.tau2)[j]
    else:
        if boundary.tau1 is None or boundary.tau2 is None or boundary.closure is None:
            raise ValueError("max field needs tau1, tau2 and closure data")
        vals = np.asarray(boundary.tau1)[i]
    mask = i >= j
    return mask.ravel(), vals.ravel()[mask.ravel()]


def build_operator(params: ModelParams, claim: ClaimDistribution, s: float, grid: WedgeGrid,
                   boundary: BoundaryData, kind=MIN, h: float | None = None,
                   n_time: int = 16, n_gauss: int = 2, chunk_nodes: int = 64) -> LaplaceOperator:
    kind = _check_kind(kind)
    if not s > 0:
        raise ValueError("s must be positive")
    h = default_step(params.lam, s) if h is None else float(h)
    lam, r = params.lam, params.r
    n = grid.n
    pinned, pinned_values = pinned_field(grid, boundary, kind)
    free = np.nonzero(~pinned)[0]
    v = grid.v
    decay = math.exp(-(lam + s) * h)
    b = np.zeros(n * n)
    blocks = []
    for lo in range(0, free.size, chunk_nodes):
        rows = free[lo:lo + chunk_nodes]
        v1 = v[rows // n]
        v2 = v[rows % n]
        # drift term
        idx, w = interp_stencil(_drift(v1, params.p1, r, h), _drift(v2, params.p2, r, h), grid)
        owners = [np.repeat(np.arange(rows.size), 4)]
        cols = [idx.ravel()]
        vals = [decay * w.ravel()]
        # first claim inside (0, h]
        t, wt = _time_pieces(v1, v2, params, h, n_time)
        k = t.shape[1]
        pair_row = np.repeat(np.arange(rows.size), k)
        tt = t.ravel()
        scale = wt.ravel() * lam * np.exp(-(lam + s) * tt)
        w1 = _drift(np.repeat(v1, k), params.p1, r, tt)
        w2 = _drift(np.repeat(v2, k), params.p2, r, tt)
        (own, jidx, jw), const = _jump_terms(w1, w2, scale, grid, claim, kind, params, boundary, n_gauss)
        owners.append(np.repeat(pair_row[own], 4))
        cols.append(jidx.ravel())
        vals.append(jw.ravel())
        b[rows] = np.bincount(pair_row, weights=const, minlength=rows.size)
        local = sparse.csr_matrix(
            (np.concatenate(vals), (np.concatenate(owners), np.concatenate(cols))), shape=(rows.size, n * n)
        )
        local.sum_duplicates()
        blocks.append((rows, local))
    if blocks:
        stacked = sparse.vstack([blk for _, blk in blocks], format="csr")
        order = np.concatenate([rws for rws, _ in blocks])
        P = sparse.csr_matrix((np.ones(order.size), (order, np.arange(order.size))), shape=(n * n, order.size))
        A = (P @ stacked).tocsr()
    else:
        A = sparse.csr_matrix((n * n, n * n))
    return LaplaceOperator(A, b, pinned, pinned_values, grid, kind, float(s), h, contraction_factor(lam, s, h))


def apply_T(field: LaplaceField, params, claim, s, boundary, kind=None, h=None, operator=None) -> LaplaceField:
    """One application of the first-claim operator to ``field``."""
    kind = _check_kind(kind or field.kind)
    op = operator or build_operator(params, claim, s, field.grid, boundary, kind, h)
    return replace(field, values=op.apply(field.values), h=op.h, rho=op.rho, diffs=list(field.diffs))


def solve_fixed_point(params: ModelParams, claim: ClaimDistribution, s: float, grid: WedgeGrid,
                      boundary: BoundaryData, kind=MIN, tol: float = 1e-3, max_iter: int = 500,
                      h: float | None = None, initial: LaplaceField | None = None,
                      operator: LaplaceOperator | None = None, check_boundary_se: bool = True) -> LaplaceField:
    """Iterate ``g <- T g`` from ``g = 1`` until the successive sup-norm change
    drops below ``tol (1 - rho) / rho``, which bounds the distance to the
    fixed point by ``tol``."""
    kind = _check_kind(kind)
    if not tol > 0:
        raise ValueError("tol must be positive")
    if check_boundary_se and boundary.max_se(kind) > tol:
        raise ValueError(
            f"boundary standard error {boundary.max_se(kind):.2e} exceeds the solver tolerance {tol:.2e}"
        )
    op = operator or build_operator(params, claim, s, grid, boundary, kind, h)
    g = op.initial() if initial is None else initial.values.copy()
    diffs = []
    stop = tol * (1.0 - op.rho) / op.rho
    for it in range(1, max_iter + 1):
        new = op.apply(g)
        if not np.all(np.isfinite(new)):
            raise SolverError("non-finite value in the field", diffs)
        d = float(np.max(np.abs(new - g)))
        diffs.append(d)
        g = new
        if d < stop:
            return LaplaceField(g, grid, kind, float(s), params, claim.spec(), op.h, op.rho, it, diffs, boundary)
    raise ConvergenceError(f"no convergence after {max_iter} iterations (last change {diffs[-1]:.3e})", diffs)


def iteration_bound(tol: float, rho: float) -> int:
    return int(math.ceil(math.log(tol) / math.log(rho))) + 2


# -- stationary equation residual -----------------------------------------------

@dataclass
class Residual:
    values: np.ndarray
    interior: np.ndarray
    sup: float


def interior_mask(grid: WedgeGrid, margin: int = 2) -> np.ndarray:
    i, j = np.indices((grid.n, grid.n))
    return (i >= margin) & (j - i >= margin) & (j <= grid.n_core - 1 - margin)


def jump_integral(values: np.ndarray, grid: WedgeGrid, params, claim, kind, boundary, nodes_mask, n_gauss=2):
    """``int_0^inf g(v - z) f(z) dz`` at the masked nodes."""
    flat = np.nonzero(nodes_mask.ravel())[0]
    v = grid.v
    w1, w2 = v[flat // grid.n], v[flat % grid.n]
    (own, idx, wts), const = _jump_terms(w1, w2, np.ones(flat.size), grid, claim, kind, params, boundary, n_gauss)
    contrib = (values.ravel()[idx] * wts).sum(axis=1)
    out = np.bincount(own, weights=contrib, minlength=flat.size) + const
    return flat, out


def residual_stationary(field: LaplaceField, params: ModelParams, claim: ClaimDistribution, s: float,
                        kind=None, margin: int = 2, n_gauss: int = 2) -> Residual:
    """Residual of
    ``(v1+p1) dg/dv1 + (v2+p2) dg/dv2 - (lam+s)/r g + lam/r int g(v-z) f(z) dz``
    at interior nodes, with central differences."""
    kind = _check_kind(kind or field.kind)
    grid = field.grid
    g = field.values
    d = grid.delta
    mask = interior_mask(grid, margin)
    flat, J = jump_integral(g, grid, params, claim, kind, field.boundary, mask, n_gauss)
    i, j = flat // grid.n, flat % grid.n
    v = grid.v
    d1 = (g[i + 1, j] - g[i - 1, j]) / (2 * d)
    d2 = (g[i, j + 1] - g[i, j - 1]) / (2 * d)
    lam, r = params.lam, params.r
    res = (v[i] + params.p1) * d1 + (v[j] + params.p2) * d2 - (lam + s) / r * g[i, j] + lam / r * J
    out = np.full(g.shape, np.nan)
    out[i, j] = res
    sup = float(np.max(np.abs(res))) if res.size else 0.0
    return Residual(out, mask, sup)


# -- boundary data ----------------------------------------------------------------

def estimate_boundary_data(params: ModelParams, claim: ClaimDistribution, s: float, grid: WedgeGrid,
                           kind=MIN, n: int = 1_000_000, seed: int = 0, workers: int = 1,
                           closure_shape=(9, 13), closure_n: int | None = None) -> BoundaryData:
    """Monte Carlo tables that pin the diagonal and the degenerate region.

    The min field needs the ``tau2`` transform; the max field needs ``tau1``,
    ``tau2`` and the joint values where line 1 alone is negative.
    """
    from .estimate import laplace_point_table, univariate_laplace_levels

    kind = _check_kind(kind)
    v = grid.v
    bd = BoundaryData(v=v, meta={"n": int(n), "seed": int(seed), "kind": kind})
    needs = ("tau2",) if kind == MIN else ("tau1", "tau2")
    for which in needs:
        reps = univariate_laplace_levels(params, s, which, v, n, seed, claim, workers=workers)
        setattr(bd, which, np.array([rep.estimate for rep in reps]))
        setattr(bd, which + "_se", np.array([rep.std_error for rep in reps]))
    if kind == MAX:
        na, nb = closure_shape
        cv1 = np.linspace(-params.p1, 0.0, na)
        cv2 = np.linspace(0.0, grid.v_total, nb)
        pts = [(a, b) for a in cv1 for b in cv2]
        reps = laplace_point_table(params, s, "max_simultaneous", pts, closure_n or n, seed + 1, claim,
                                   workers=workers)
        bd.closure_v1, bd.closure_v2 = cv1, cv2
        bd.closure = np.array([rep.estimate for rep in reps]).reshape(na, nb)
        bd.closure_se = np.array([rep.std_error for rep in reps]).reshape(na, nb)
    return bd


# -- queries and checkpoints -----------------------------------------------------

def query(field: LaplaceField, u1: float, u2: float) -> float:
    p = field.params
    v1, v2 = u1 / p.delta1, u2 / p.delta2
    tol = 1e-12 * max(1.0, abs(v2))
    if v1 < 0 or v2 < 0 or v1 > v2 + tol or v2 > field.grid.vmax + tol:
        raise OutOfDomainError(f"({u1}, {u2}) lies outside the solved wedge")
    return float(interpolate(field.values, field.grid, np.array([v1]), np.array([v2]))[0])


CHECKPOINT_MAGIC = "# jointruin laplace field v1"


def save_checkpoint(field: LaplaceField, path, meta: dict | None = None) -> None:
    header = {
        "meta": meta or {},
        "params": field.params.as_dict(),
        "claim": field.claim,
        "s": field.s,
        "kind": field.kind,
        "grid": field.grid.spec(),
        "iterations": field.iterations,
        "rho": field.rho,
        "h": field.h,
        "diffs": field.diffs,
        "boundary": None if field.boundary is None else field.boundary.to_json(),
    }
    with open(path, "w") as fh:
        fh.write(CHECKPOINT_MAGIC + "\n")
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for row in field.values:
            fh.write(" ".join(repr(float(x)) for x in row) + "\n")


def load_checkpoint(path) -> LaplaceField:
    with open(path) as fh:
        if fh.readline().rstrip("\n") != CHECKPOINT_MAGIC:
            raise ValueError(f"{path} is not a field checkpoint")
        header = json.loads(fh.readline())
        values = np.array([[float(x) for x in line.split()] for line in fh if line.strip()])
    grid = WedgeGrid(**header["grid"])
    if values.shape != (grid.n, grid.n):
        raise ValueError("checkpoint values do not match the grid")
    boundary = None if header["boundary"] is None else BoundaryData.from_json(header["boundary"])
    return LaplaceField(
        values, grid, header["kind"], header["s"], ModelParams(**header["params"]), header["claim"],
        header["h"], header["rho"], header["iterations"], header["diffs"], boundary,
    )


def claim_of(field: LaplaceField) -> ClaimDistribution:
    return claim_from_spec(field.claim)
