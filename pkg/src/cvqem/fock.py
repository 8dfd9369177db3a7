"""Truncated Fock-space linear algebra.

Single bosonic mode truncated at `cutoff` levels (0 .. cutoff-1), hbar = 1,
a = (q + ip) / sqrt(2).  Everything here is dense complex128; the heavy
lifting is plain numpy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CutoffTooSmallError,
    DimensionMismatchError,
    InvalidDimensionError,
)

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-8
POSITIVITY_TOL = -1e-8


@dataclass(frozen=True)
class CoherentAmplitude:
    """Dimensionless coherent amplitude alpha = re + i*im."""

    re: float
    im: float

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    def __abs__(self) -> float:
        return math.hypot(self.re, self.im)


@dataclass(frozen=True)
class Operator:
    """Dense operator on the truncated Fock space."""

    dim: int
    data: np.ndarray

    def __post_init__(self):
        if self.dim < 2:
            raise InvalidDimensionError(f"operator dim must be >= 2, got {self.dim}")
        if self.data.shape != (self.dim, self.dim):
            raise DimensionMismatchError(
                f"operator data shape {self.data.shape} != ({self.dim}, {self.dim})"
            )

    def dagger(self) -> "Operator":
        return Operator(self.dim, self.data.conj().T.copy())

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.data - self.data.conj().T)) < tol)

    def __neg__(self) -> "Operator":
        return Operator(self.dim, -self.data)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, (numerically) positive state matrix."""

    dim: int
    data: np.ndarray

    def __post_init__(self):
        if self.dim < 2:
            raise InvalidDimensionError(f"state dim must be >= 2, got {self.dim}")
        if self.data.shape != (self.dim, self.dim):
            raise DimensionMismatchError(
                f"state data shape {self.data.shape} != ({self.dim}, {self.dim})"
            )
        tr = np.trace(self.data)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace {tr} deviates from 1 beyond {TRACE_TOL}")
        if np.max(np.abs(self.data - self.data.conj().T)) > HERMITICITY_TOL:
            raise ValueError("state is not Hermitian within tolerance")
        evals = np.linalg.eigvalsh(self.data)
        if evals.min() < POSITIVITY_TOL:
            raise ValueError(f"state has negative eigenvalue {evals.min():.3e}")

    @classmethod
    def from_pure(cls, vec: np.ndarray) -> "DensityMatrix":
        vec = np.asarray(vec, dtype=complex)
        vec = vec / np.linalg.norm(vec)
        return cls(len(vec), np.outer(vec, vec.conj()))

    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.data))

    def expectation(self, op: Operator) -> complex:
        if op.dim != self.dim:
            raise DimensionMismatchError("operator/state dimension mismatch")
        return complex(np.trace(op.data @ self.data))

    def purity(self) -> float:
        return float(np.real(np.trace(self.data @ self.data)))


def destroy(cutoff: int) -> Operator:
    """Annihilation operator: a[n-1, n] = sqrt(n)."""
    if cutoff < 2:
        raise InvalidDimensionError(f"cutoff must be >= 2, got {cutoff}")
    a = np.zeros((cutoff, cutoff), dtype=complex)
    ns = np.arange(1, cutoff)
    a[ns - 1, ns] = np.sqrt(ns)
    return Operator(cutoff, a)


def create(cutoff: int) -> Operator:
    return destroy(cutoff).dagger()


def number_op(cutoff: int) -> Operator:
    if cutoff < 2:
        raise InvalidDimensionError(f"cutoff must be >= 2, got {cutoff}")
    return Operator(cutoff, np.diag(np.arange(cutoff, dtype=complex)))


def coherent(alpha: CoherentAmplitude, cutoff: int) -> DensityMatrix:
    """Coherent state |alpha><alpha| in the truncated basis.

    Raises CutoffTooSmallError when the Poisson population at the top
    level exceeds 1e-8, i.e. the truncation would visibly distort the
    state.
    """
    if cutoff < 2:
        raise InvalidDimensionError(f"cutoff must be >= 2, got {cutoff}")
    a = alpha.value
    ns = np.arange(cutoff)
    # amplitudes e^{-|a|^2/2} a^n / sqrt(n!), built in log space to avoid
    # factorial overflow at large cutoffs
    log_fact = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, cutoff)))))
    mag = np.exp(-0.5 * abs(a) ** 2 + ns * np.log(abs(a)) - 0.5 * log_fact) if a != 0 else None
    if a == 0:
        vec = np.zeros(cutoff, dtype=complex)
        vec[0] = 1.0
    else:
        phase = np.exp(1j * ns * np.angle(a))
        vec = mag * phase
    tail = abs(vec[cutoff - 1]) ** 2
    if tail > 1e-8:
        raise CutoffTooSmallError(
            f"coherent state |alpha|={abs(alpha):.3f} has population "
            f"{tail:.2e} at level {cutoff - 1}; increase the cutoff"
        )
    return DensityMatrix.from_pure(vec)


def kerr_hamiltonian(K: float, cutoff: int) -> Operator:
    """Kerr interaction K * adag^2 a^2 = K * n(n-1), diagonal."""
    if cutoff < 2:
        raise InvalidDimensionError(f"cutoff must be >= 2, got {cutoff}")
    ns = np.arange(cutoff, dtype=float)
    return Operator(cutoff, np.diag(K * ns * (ns - 1)).astype(complex))


def squeezing_hamiltonian(Delta: float, K: float, P0: float, cutoff: int) -> Operator:
    """Detuned Kerr oscillator with a linear drive.

    H = -Delta adag a + K adag^2 a^2 - P0 (a + adag)
    """
    a = destroy(cutoff).data
    n = number_op(cutoff).data
    H = -Delta * n + K * kerr_hamiltonian(1.0, cutoff).data - P0 * (a + a.conj().T)
    H = 0.5 * (H + H.conj().T)  # symmetrize away roundoff
    return Operator(cutoff, H)


def fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.

    Reduces to |<psi|phi>|^2 for pure states.
    """
    if rho.dim != sigma.dim:
        raise DimensionMismatchError("fidelity requires equal dimensions")
    evals, evecs = np.linalg.eigh(rho.data)
    evals = np.clip(evals, 0.0, None)
    sqrt_rho = (evecs * np.sqrt(evals)) @ evecs.conj().T
    inner = sqrt_rho @ sigma.data @ sqrt_rho
    ev = np.linalg.eigvalsh(inner)
    ev = np.clip(ev, 0.0, None)
    f = float(np.sum(np.sqrt(ev)) ** 2)
    return min(max(f, 0.0), 1.0)


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """T(rho, sigma) = (1/2) ||rho - sigma||_1."""
    if rho.dim != sigma.dim:
        raise DimensionMismatchError("trace distance requires equal dimensions")
    ev = np.linalg.eigvalsh(rho.data - sigma.data)
    return float(0.5 * np.sum(np.abs(ev)))


def tail_mass(rho: DensityMatrix, from_level: int) -> float:
    """Total population at Fock levels >= from_level (0 if out of range)."""
    if from_level >= rho.dim:
        return 0.0
    from_level = max(from_level, 0)
    return float(np.sum(rho.populations()[from_level:]))
