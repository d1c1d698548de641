"""Finite-difference operators d(x) u'' - a(x) u' + q(x) u on periodic and
truncated-line grids, with Metzler-structure bookkeeping and resolvent solves.

The centered scheme is second order; when its off-diagonals would go negative
(losing the discrete maximum principle) assembly either rejects or, with
scheme="auto", falls back to first-order upwind advection, which is Metzler
for every h.
"""

import threading
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import MetzlerError, SingularOperatorError
from .periodic_coeffs import PeriodicFn


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform grid on [0, L) with wrap-around indexing."""

    period: float
    n: int

    def __post_init__(self):
        if self.n < 16:
            raise ValueError(f"PeriodicGrid needs n >= 16, got {self.n}")
        if self.period <= 0:
            raise ValueError("period must be positive")

    @property
    def h(self):
        return self.period / self.n

    def nodes(self):
        return np.arange(self.n) * self.h

    def refined(self, factor=2):
        return PeriodicGrid(self.period, self.n * factor)


@dataclass(frozen=True)
class LineGrid:
    """Truncated line covering an integer number of periods.

    Nodes x_j = x_min + j h, j = 0..m-1, h = L / n_per_period; the far-field
    Dirichlet data live on ghost nodes just outside [x_min, x_max).  x_min must
    sit on a period boundary so coefficient phases match the periodic grid.
    """

    period: float
    n_per_period: int
    periods: int
    x_min: float = 0.0
    boundary_left: tuple = (0.0, 0.0)
    boundary_right: tuple = (1.0, 1.0)

    def __post_init__(self):
        if self.m < 512:
            raise ValueError(f"LineGrid needs at least 512 points, got {self.m}")
        ratio = self.x_min / self.period
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError("x_min must be an integer multiple of the period")

    @property
    def m(self):
        return self.n_per_period * self.periods

    @property
    def h(self):
        return self.period / self.n_per_period

    @property
    def x_max(self):
        return self.x_min + self.periods * self.period

    def nodes(self):
        return self.x_min + np.arange(self.m) * self.h

    def refined(self, factor=2):
        return LineGrid(
            self.period,
            self.n_per_period * factor,
            self.periods,
            self.x_min,
            self.boundary_left,
            self.boundary_right,
        )


def _coefficient_samples(coef, xs, period):
    """Sample a coefficient given as PeriodicFn, scalar or periodic vector."""
    if isinstance(coef, PeriodicFn):
        return np.asarray(coef.eval(xs), dtype=float)
    if np.isscalar(coef):
        return np.full(xs.shape, float(coef))
    arr = np.asarray(coef, dtype=float)
    if arr.shape == xs.shape:
        return arr.copy()
    # periodic sample vector: tile across an integer number of periods
    if xs.size % arr.size == 0:
        reps = xs.size // arr.size
        # phase check: xs must start on a period boundary with matching spacing
        return np.tile(arr, reps)
    raise ValueError(f"cannot sample coefficient of length {arr.size} on grid of {xs.size} nodes")


@dataclass
class DiscreteOperator:
    """Banded representation of d u'' - a u' + q u with optional wrap entries.

    apply(u) = T u + offset, where the affine offset carries the Dirichlet
    ghost-node data of line grids (zero for periodic operators).
    """

    n: int
    h: float
    scheme: str
    periodic: bool
    sub: np.ndarray  # coefficient of u_{j-1} in row j (sub[0] used via wrap)
    main: np.ndarray
    sup: np.ndarray  # coefficient of u_{j+1} in row j
    wrap_lo: float = 0.0  # row 0, column n-1 (periodic only)
    wrap_hi: float = 0.0  # row n-1, column 0 (periodic only)
    offset: np.ndarray = None  # affine boundary term (line only)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    @property
    def min_offdiagonal(self):
        vals = [self.sub[1:].min(initial=np.inf), self.sup[:-1].min(initial=np.inf)]
        if self.periodic:
            vals += [self.wrap_lo, self.wrap_hi]
        return float(min(vals))

    def apply(self, u):
        u = np.asarray(u, dtype=float)
        if u.shape != (self.n,):
            raise ValueError(f"operator dimension {self.n}, vector has shape {u.shape}")
        out = self.main * u
        out[1:] += self.sub[1:] * u[:-1]
        out[:-1] += self.sup[:-1] * u[1:]
        if self.periodic:
            out[0] += self.wrap_lo * u[-1]
            out[-1] += self.wrap_hi * u[0]
        if self.offset is not None:
            out = out + self.offset
        return out

    def to_sparse(self):
        """Linear part T as a CSC matrix (affine offset excluded)."""
        diags = [self.sub[1:], self.main, self.sup[:-1]]
        mat = sp.diags(diags, offsets=[-1, 0, 1], shape=(self.n, self.n), format="lil")
        if self.periodic:
            mat[0, self.n - 1] += self.wrap_lo
            mat[self.n - 1, 0] += self.wrap_hi
        return mat.tocsc()

    def _factorization(self, sigma):
        with self._lock:
            lu = self._cache.get(sigma)
            if lu is None:
                mat = (sigma * sp.identity(self.n, format="csc")) - self.to_sparse()
                try:
                    lu = spla.splu(mat)
                except RuntimeError as exc:
                    cond = None
                    if self.n <= 4096:
                        dense = mat.toarray()
                        sv = np.linalg.svd(dense, compute_uv=False)
                        cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
                    raise SingularOperatorError(
                        f"shifted system sigma={sigma} is singular: {exc}",
                        condition_estimate=cond,
                    ) from exc
                self._cache[sigma] = lu
        return lu

    def solve_shifted(self, sigma, rhs):
        """Solve (sigma I - T) u = rhs + offset; factorizations are cached."""
        rhs = np.asarray(rhs, dtype=float)
        if rhs.shape != (self.n,):
            raise ValueError(f"operator dimension {self.n}, rhs has shape {rhs.shape}")
        if self.offset is not None:
            rhs = rhs + self.offset
        return self._factorization(sigma).solve(rhs)

    def dump_coordinates(self):
        """Coordinate-format text of the linear part, for debugging."""
        mat = self.to_sparse().tocoo()
        lines = [f"{i} {j} {v:.17g}" for i, j, v in zip(mat.row, mat.col, mat.data)]
        return "\n".join(lines)


def _bands(d, a, q, h, scheme):
    """Sub/main/super diagonals for the chosen advection scheme."""
    if scheme == "centered":
        sub = d / h**2 + a / (2.0 * h)
        sup = d / h**2 - a / (2.0 * h)
        main = -2.0 * d / h**2 + q
    elif scheme == "upwind":
        sub = d / h**2 + np.maximum(a, 0.0) / h
        sup = d / h**2 + np.maximum(-a, 0.0) / h
        main = -2.0 * d / h**2 - np.abs(a) / h + q
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return sub, main, sup


def _choose_scheme(d, a, q, h, scheme):
    if scheme in ("centered", "upwind"):
        sub, main, sup = _bands(d, a, q, h, scheme)
        if scheme == "centered" and min(sub.min(), sup.min()) < 0.0:
            j = int(np.argmin(np.minimum(sub, sup)))
            raise MetzlerError(
                f"centered advection loses the Metzler structure at node {j} "
                f"(off-diagonal {min(sub[j], sup[j]):.3g}); refine the grid or use upwind"
            )
        return scheme, sub, main, sup
    if scheme == "auto":
        sub, main, sup = _bands(d, a, q, h, "centered")
        if min(sub.min(), sup.min()) >= 0.0:
            return "centered", sub, main, sup
        sub, main, sup = _bands(d, a, q, h, "upwind")
        return "upwind", sub, main, sup
    raise ValueError(f"unknown scheme {scheme!r}")


def assemble_periodic(d, a, q, grid, scheme="auto"):
    """Periodic operator with wrap-around entries (banded plus two corners)."""
    xs = grid.nodes()
    dv = _coefficient_samples(d, xs, grid.period)
    av = _coefficient_samples(a, xs, grid.period)
    qv = _coefficient_samples(q, xs, grid.period)
    used, sub, main, sup = _choose_scheme(dv, av, qv, grid.h, scheme)
    return DiscreteOperator(
        n=grid.n,
        h=grid.h,
        scheme=used,
        periodic=True,
        sub=sub,
        main=main,
        sup=sup,
        wrap_lo=float(sub[0]),
        wrap_hi=float(sup[-1]),
    )


def assemble_line(d, a, q, grid, scheme="auto", clamp=(0.0, 1.0)):
    """Line operator with Dirichlet ghost clamps just outside the domain.

    Row 0 sees a ghost node at x_min - h frozen at clamp[0]; row m-1 sees one
    at x_max frozen at clamp[1].  Applying the operator to the constant clamp
    state (with q = 0) therefore gives zero at the boundary rows.
    """
    xs = grid.nodes()
    dv = _coefficient_samples(d, xs, grid.period)
    av = _coefficient_samples(a, xs, grid.period)
    qv = _coefficient_samples(q, xs, grid.period)
    used, sub, main, sup = _choose_scheme(dv, av, qv, grid.h, scheme)
    offset = np.zeros(grid.m)
    offset[0] = sub[0] * clamp[0]
    offset[-1] = sup[-1] * clamp[1]
    return DiscreteOperator(
        n=grid.m,
        h=grid.h,
        scheme=used,
        periodic=False,
        sub=sub,
        main=main,
        sup=sup,
        offset=offset,
    )
