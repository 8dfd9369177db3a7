"""Wigner functions on a fixed rectangular phase-space raster.

Convention: integral of W over dq dp is 1, a = (q + ip)/sqrt(2).  With this
choice the vacuum peaks at 1/pi and |W| <= 1/pi everywhere.

Grids are stored as real arrays of shape (np, nq): row index runs over p,
column index over q, so a row-major dump has q varying fastest.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatchError,
    NumericalOverflowError,
    UndefinedSimilarityError,
)
from .fock import DensityMatrix

WIGNER_BOUND = 1.0 / np.pi


@dataclass(frozen=True)
class PhaseGrid:
    """Rectangular raster over [q_min, q_max] x [p_min, p_max]."""

    nq: int = 48
    np: int = 48
    q_min: float = -4.0
    q_max: float = 4.0
    p_min: float = -4.0
    p_max: float = 4.0

    def __post_init__(self):
        if self.nq < 2 or self.np < 2:
            raise ValueError("grid needs at least 2 points per axis")
        if self.q_max <= self.q_min or self.p_max <= self.p_min:
            raise ValueError("grid bounds must satisfy max > min")

    def q_axis(self) -> np.ndarray:
        return np.linspace(self.q_min, self.q_max, self.nq)

    def p_axis(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.np)

    @property
    def cell_area(self) -> float:
        dq = (self.q_max - self.q_min) / (self.nq - 1)
        dp = (self.p_max - self.p_min) / (self.np - 1)
        return dq * dp


@dataclass(frozen=True)
class WignerGrid:
    """Raster of W(q, p); values[i, j] = W(q_axis[j], p_axis[i])."""

    grid: PhaseGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        expected = (self.grid.np, self.grid.nq)
        if self.values.shape != expected:
            raise DimensionMismatchError(
                f"raster shape {self.values.shape} != grid shape {expected}"
            )


def _clenshaw_diagonal(L: int, x: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Clenshaw sum of c_n * (-1)^n sqrt(L! n!/(L+n)!) LaguerreL[n, L, x].

    c has shape (B,) per diagonal entry stacked as (len, B); x is the grid
    raster; returns an array of shape (B,) + x.shape.
    """
    B = c.shape[1]
    ones = np.ones((B,) + x.shape, dtype=complex)
    if len(c) == 1:
        return c[0][:, None, None] * ones
    if len(c) == 2:
        y0 = c[0][:, None, None] * ones
        y1 = c[1][:, None, None] * ones
    else:
        k = len(c)
        y0 = c[-2][:, None, None] * ones
        y1 = c[-1][:, None, None] * ones
        for i in range(3, len(c) + 1):
            k -= 1
            y0, y1 = (
                c[-i][:, None, None] - y1 * np.sqrt((k - 1.0) * (L + k - 1.0) / ((L + k) * k)),
                y0 - y1 * ((L + 2.0 * k - 1.0) - x) / np.sqrt((L + k) * k),
            )
    return y0 - y1 * ((L + 1.0) - x) / np.sqrt(L + 1.0)


def _wigner_stack(rhos: np.ndarray, grid: PhaseGrid) -> np.ndarray:
    """Wigner rasters for a stack of density matrices, shape (B, N, N)."""
    B, N, _ = rhos.shape
    Q, P = np.meshgrid(grid.q_axis(), grid.p_axis())
    A2 = np.sqrt(2.0) * (Q + 1j * P)  # 2*alpha in the a=(q+ip)/sqrt(2) convention
    X = (A2 * A2.conj()).real
    # double the off-diagonals so that only upper diagonals need summing
    doubled = rhos * (2.0 - np.eye(N))
    w = (2.0 * rhos[:, 0, N - 1])[:, None, None] * np.ones_like(A2).astype(complex)
    for L in range(N - 2, -1, -1):
        diag = np.diagonal(doubled, offset=L, axis1=1, axis2=2).T
        w = _clenshaw_diagonal(L, X, diag) + w * A2 / np.sqrt(L + 1.0)
    out = w.real * np.exp(-0.5 * X) / np.pi
    if not np.all(np.isfinite(out)):
        raise NumericalOverflowError(
            "Wigner evaluation overflowed; cutoff too small for the grid extent"
        )
    return out


def wigner(rho: DensityMatrix, grid: PhaseGrid | None = None) -> WignerGrid:
    """Wigner function of `rho` evaluated on `grid`.

    Uses the Clenshaw recurrence over generalized-Laguerre terms of the
    displaced-parity expansion; cost O(np * nq * N^2).
    """
    if grid is None:
        grid = PhaseGrid()
    values = _wigner_stack(rho.data[None, :, :], grid)[0]
    return WignerGrid(grid, values)


def wigner_many(rhos, grid: PhaseGrid | None = None) -> list[WignerGrid]:
    """Wigner functions of several states sharing one grid.

    `rhos` is a sequence of DensityMatrix or a (B, N, N) complex array.
    Much faster than mapping `wigner` when B is large.
    """
    if grid is None:
        grid = PhaseGrid()
    if isinstance(rhos, np.ndarray):
        stack = rhos
    else:
        stack = np.stack([r.data for r in rhos])
    values = _wigner_stack(stack, grid)
    return [WignerGrid(grid, values[b]) for b in range(len(stack))]


def _require_same_grid(a: WignerGrid, b: WignerGrid):
    if a.grid != b.grid:
        raise DimensionMismatchError("grids differ")


def cosine_similarity(a: WignerGrid, b: WignerGrid) -> float:
    """Normalized flat inner product <a, b> / (||a|| ||b||) over grid points."""
    _require_same_grid(a, b)
    av = a.values.ravel().astype(np.float64)
    bv = b.values.ravel().astype(np.float64)
    na = np.linalg.norm(av)
    nb = np.linalg.norm(bv)
    if na == 0.0 or nb == 0.0:
        raise UndefinedSimilarityError("cosine similarity of a zero-norm grid")
    return float(np.dot(av, bv) / (na * nb))


def norm_integral(w: WignerGrid) -> float:
    """Riemann-sum normalization diagnostic: sum(W) * cell area."""
    return float(np.sum(w.values) * w.grid.cell_area)
