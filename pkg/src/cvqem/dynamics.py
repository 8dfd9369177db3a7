"""Time evolution of density matrices.

Markovian Lindblad dynamics integrated with fixed-step classical RK4,
the forward/backward fiducial sequence used for dataset generation, and
a reaction-coordinate extension that realizes memoryful photon loss as
one damped auxiliary mode exchanging excitations with the system.

The integrator works on stacks of states (B, N, N) so that many
evolutions sharing a Hamiltonian can ride one BLAS call; rates may vary
per stack element.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    CutoffTooSmallError,
    DimensionMismatchError,
    IntegrationBlowupError,
)
from .fock import DensityMatrix, Operator, destroy, number_op

TAIL_GUARD = 1e-6
DEFAULT_DT = 1e-3


class ChannelKind(enum.Enum):
    LOSS = "loss"
    DEPHASING = "dephasing"


class Regime(enum.Enum):
    MARKOVIAN = "markovian"
    REACTION_COORDINATE = "reaction_coordinate"


@dataclass(frozen=True)
class NoiseChannel:
    """Noise channel with jump operator sqrt(rate) * a (loss) or
    sqrt(rate) * adag a (dephasing)."""

    kind: ChannelKind
    rate: float

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError(f"channel rate must be >= 0, got {self.rate}")


def loss(rate: float) -> NoiseChannel:
    return NoiseChannel(ChannelKind.LOSS, rate)


def dephasing(rate: float) -> NoiseChannel:
    return NoiseChannel(ChannelKind.DEPHASING, rate)


def standard_channels(kappa: float, dephasing_fraction: float = 0.05) -> list[NoiseChannel]:
    """Photon loss at `kappa` plus dephasing at one twentieth of it."""
    return [loss(kappa), dephasing(kappa * dephasing_fraction)]


@dataclass(frozen=True)
class RcParams:
    """Reaction-coordinate mode: levels, exchange coupling, damping, detuning."""

    rc_cutoff: int = 6
    coupling: float = 0.0
    rc_damping: float = 1.0
    rc_frequency: float = 0.0

    def __post_init__(self):
        if self.rc_cutoff < 3:
            raise ValueError("rc_cutoff must be >= 3")
        if self.rc_damping <= 0:
            raise ValueError("rc_damping must be > 0")


def default_rc_params(kappa: float, rc_cutoff: int = 6) -> RcParams:
    """RC configuration targeting loss rate `kappa` with memory time ~ 1/kappa.

    Damping gamma = 2*kappa gives correlation time 2/gamma = 1/kappa and the
    weak-coupling rate 4*lambda^2/gamma reproduces `kappa`.
    """
    gamma = 2.0 * kappa
    lam = math.sqrt(kappa * gamma) / 2.0
    return RcParams(rc_cutoff=rc_cutoff, coupling=lam, rc_damping=gamma, rc_frequency=0.0)


@dataclass(frozen=True)
class EvolutionSpec:
    """Everything `evolve` needs besides the state and the duration."""

    hamiltonian: Operator
    channels: tuple[NoiseChannel, ...] = ()
    dt: float = DEFAULT_DT
    regime: Regime = Regime.MARKOVIAN
    # (matrix, rate) pairs on the full space; used by rc_extend output
    explicit_jumps: tuple = ()
    # set when the space factors as system (x) auxiliary mode
    factor_dims: tuple[int, int] | None = None

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be > 0")
        object.__setattr__(self, "channels", tuple(self.channels))

    @property
    def dim(self) -> int:
        return self.hamiltonian.dim

    def jump_terms(self) -> list[tuple[np.ndarray, float]]:
        """Resolve channels to (operator, rate) pairs on this space."""
        terms = []
        dim = self.dim
        sys_dim = self.factor_dims[0] if self.factor_dims else dim
        for ch in self.channels:
            if ch.kind is ChannelKind.LOSS:
                op = destroy(sys_dim).data
            else:
                op = number_op(sys_dim).data
            if self.factor_dims:
                op = np.kron(op, np.eye(self.factor_dims[1]))
            terms.append((op, ch.rate))
        terms.extend((np.asarray(m), r) for m, r in self.explicit_jumps)
        return terms

    def negated(self) -> "EvolutionSpec":
        return replace(self, hamiltonian=-self.hamiltonian)

    def with_rates_scaled(self, factor: float) -> "EvolutionSpec":
        chans = tuple(NoiseChannel(c.kind, c.rate * factor) for c in self.channels)
        jumps = tuple((m, r * factor) for m, r in self.explicit_jumps)
        return replace(self, channels=chans, explicit_jumps=jumps)


def _lmul(A: np.ndarray, S: np.ndarray) -> np.ndarray:
    """A @ S[b] for every stack element, as one GEMM."""
    return np.tensordot(A, S, axes=([1], [1])).transpose(1, 0, 2)


def _rmul(S: np.ndarray, A: np.ndarray) -> np.ndarray:
    B, N, _ = S.shape
    return (S.reshape(B * N, N) @ A).reshape(B, N, N)


class _Generator:
    """Precompiled Lindblad right-hand side for a fixed spec."""

    def __init__(self, spec: EvolutionSpec, rates_override=None, negate_h=False):
        H = spec.hamiltonian.data
        self.H = -H if negate_h else H
        self.terms = []
        for i, (L, rate) in enumerate(spec.jump_terms()):
            if rates_override is not None and rates_override[i] is not None:
                rate = rates_override[i]
            rate = np.asarray(rate, dtype=float)
            self.terms.append((L, L.conj().T, L.conj().T @ L, rate))

    def __call__(self, S: np.ndarray) -> np.ndarray:
        out = -1j * (_lmul(self.H, S) - _rmul(S, self.H))
        for L, Ld, M, rate in self.terms:
            diss = _rmul(_lmul(L, S), Ld) - 0.5 * (_lmul(M, S) + _rmul(S, M))
            if rate.ndim == 0:
                out += rate * diss
            else:
                out += rate[:, None, None] * diss
        return out


def _check_finite(S: np.ndarray, context: str):
    if not np.all(np.isfinite(S.view(float))):
        raise IntegrationBlowupError(f"non-finite state entries during {context}")


def _rk4_segment(S: np.ndarray, gen: _Generator, dt: float, duration: float,
                 context: str = "evolution") -> np.ndarray:
    """Integrate dS/dt = gen(S) for `duration`, re-hermitizing and
    renormalizing the trace after every step."""
    if duration < 0:
        raise ValueError("duration must be >= 0")
    n_full = int(math.floor(duration / dt + 1e-12))
    tail = duration - n_full * dt
    if tail < 1e-12:
        tail = 0.0
    sizes = [dt] * n_full + ([tail] if tail else [])
    for i, h in enumerate(sizes):
        k1 = gen(S)
        k2 = gen(S + (0.5 * h) * k1)
        k3 = gen(S + (0.5 * h) * k2)
        k4 = gen(S + h * k3)
        S = S + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        S = 0.5 * (S + S.conj().transpose(0, 2, 1))
        tr = np.trace(S, axis1=1, axis2=2).real
        S = S / tr[:, None, None]
        if (i + 1) % 64 == 0:
            _check_finite(S, context)
    _check_finite(S, context)
    return S


def _guard_tails(S: np.ndarray, spec: EvolutionSpec, guard: float = TAIL_GUARD):
    """Raise if population piled up at the top level of any factor."""
    diag = np.diagonal(S, axis1=1, axis2=2).real
    if spec.factor_dims:
        sys_dim, rc_dim = spec.factor_dims
        pops = diag.reshape(diag.shape[0], sys_dim, rc_dim)
        sys_top = pops[:, -1, :].sum(axis=1).max()
        rc_top = pops[:, :, -1].sum(axis=1).max()
        worst = max(sys_top, rc_top)
    else:
        worst = diag[:, -1].max()
    if worst > guard:
        raise CutoffTooSmallError(
            f"top-level population {worst:.2e} exceeds tail guard {guard:.0e}; "
            "raise the Fock cutoff"
        )


def lindblad_rhs(rho: DensityMatrix, spec: EvolutionSpec) -> np.ndarray:
    """Right-hand side -i[H, rho] + sum_L rate (L rho Ld - (1/2){Ld L, rho})."""
    if rho.dim != spec.dim:
        raise DimensionMismatchError("state and spec dimensions differ")
    gen = _Generator(spec)
    return gen(rho.data[None, :, :])[0]


def evolve_stack(stack: np.ndarray, spec: EvolutionSpec, t: float,
                 rates_override=None, negate_h=False) -> np.ndarray:
    """RK4-evolve a (B, N, N) stack for duration t. Low-level entry point;
    rates_override replaces per-term rates, possibly with (B,) arrays."""
    gen = _Generator(spec, rates_override=rates_override, negate_h=negate_h)
    out = _rk4_segment(np.array(stack, dtype=complex), gen, spec.dt, t)
    _guard_tails(out, spec)
    return out


def evolve(rho0: DensityMatrix, spec: EvolutionSpec, t: float) -> DensityMatrix:
    """Evolve `rho0` under the master equation for time t >= 0."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if rho0.dim != spec.dim:
        raise DimensionMismatchError("state and spec dimensions differ")
    if t == 0:
        return rho0
    out = evolve_stack(rho0.data[None, :, :], spec, t)
    return DensityMatrix(rho0.dim, out[0])


def evolve_checkpoints(rho0: DensityMatrix, spec: EvolutionSpec,
                       times) -> list[DensityMatrix]:
    """States at the given (sorted, >= 0) times along a single trajectory."""
    times = list(times)
    if any(t < 0 for t in times) or sorted(times) != times:
        raise ValueError("checkpoint times must be sorted and >= 0")
    gen = _Generator(spec)
    S = rho0.data[None, :, :].astype(complex)
    out = []
    now = 0.0
    for t in times:
        S = _rk4_segment(S, gen, spec.dt, t - now, context="checkpoint evolution")
        now = t
        _guard_tails(S, spec)
        out.append(DensityMatrix(rho0.dim, S[0].copy()))
    return out


def fiducial_sequence(rho: DensityMatrix, spec: EvolutionSpec, tau: float) -> DensityMatrix:
    """Forward +H for tau/2 then -H for tau/2, noise active in both legs.

    With all channel rates zero this is an identity up to integrator error;
    with noise it isolates the accumulated decoherence of duration tau.
    """
    if tau < 0:
        raise ValueError("tau must be >= 0")
    if tau == 0:
        return rho
    half = evolve(rho, spec, tau / 2.0)
    return evolve(half, spec.negated(), tau / 2.0)


def fiducial_exposures_stack(stack: np.ndarray, spec: EvolutionSpec, taus,
                             rates_override=None) -> np.ndarray:
    """Fiducial-sequence outputs for several exposure durations at once.

    `stack` is (B, N, N); `taus` a sorted list. The +H leg is integrated
    once with checkpoints at tau/2, each checkpoint then runs its own -H
    leg. Returns (len(taus), B, N, N).
    """
    taus = list(taus)
    if any(t < 0 for t in taus) or sorted(taus) != taus:
        raise ValueError("exposure durations must be sorted and >= 0")
    gen_fwd = _Generator(spec, rates_override=rates_override)
    gen_bwd = _Generator(spec, rates_override=rates_override, negate_h=True)
    S = np.array(stack, dtype=complex)
    outputs = [None] * len(taus)
    now = 0.0
    for j, tau in enumerate(taus):
        S = _rk4_segment(S, gen_fwd, spec.dt, tau / 2.0 - now, context="fiducial +H leg")
        now = tau / 2.0
        if tau == 0:
            outputs[j] = S.copy()
        else:
            back = _rk4_segment(S.copy(), gen_bwd, spec.dt, tau / 2.0,
                                context="fiducial -H leg")
            _guard_tails(back, spec)
            outputs[j] = back
    return np.stack(outputs)


def fiducial_pair(rho: DensityMatrix, spec: EvolutionSpec, tau1: float,
                  tau2: float) -> tuple[DensityMatrix, DensityMatrix]:
    """(fiducial(tau1), fiducial(tau2)) sharing the common +H leg."""
    if not (tau1 >= tau2 >= 0):
        raise ValueError("need tau1 >= tau2 >= 0")
    outs = fiducial_exposures_stack(rho.data[None, :, :], spec, [tau2, tau1])
    return (DensityMatrix(rho.dim, outs[1, 0]), DensityMatrix(rho.dim, outs[0, 0]))


# ---------------------------------------------------------------------------
# Reaction-coordinate (memoryful loss) extension


def rc_extend(spec: EvolutionSpec, rc: RcParams) -> EvolutionSpec:
    """Markovian spec on system (x) RC with excitation-exchange coupling.

    H_ext = H_sys (x) I + Omega bdag b + lambda (adag b + a bdag); photon
    loss is replaced by damping sqrt(gamma_rc) b of the RC mode, while any
    dephasing channel stays directly on the system factor.
    """
    if spec.regime is not Regime.REACTION_COORDINATE:
        raise ValueError("rc_extend expects a spec in the ReactionCoordinate regime")
    sys_dim = spec.dim
    rc_dim = rc.rc_cutoff
    a = destroy(sys_dim).data
    b = destroy(rc_dim).data
    eye_s = np.eye(sys_dim)
    eye_r = np.eye(rc_dim)
    a_ext = np.kron(a, eye_r)
    b_ext = np.kron(eye_s, b)
    H_ext = (
        np.kron(spec.hamiltonian.data, eye_r)
        + rc.rc_frequency * (b_ext.conj().T @ b_ext)
        + rc.coupling * (a_ext.conj().T @ b_ext + a_ext @ b_ext.conj().T)
    )
    H_ext = 0.5 * (H_ext + H_ext.conj().T)
    keep = tuple(c for c in spec.channels if c.kind is ChannelKind.DEPHASING)
    return EvolutionSpec(
        hamiltonian=Operator(sys_dim * rc_dim, H_ext),
        channels=keep,
        dt=spec.dt,
        regime=Regime.MARKOVIAN,
        explicit_jumps=((b_ext, rc.rc_damping),),
        factor_dims=(sys_dim, rc_dim),
    )


def rc_embed(rho_sys: DensityMatrix, rc_dim: int) -> DensityMatrix:
    """System state tensored with the RC vacuum."""
    vac = np.zeros((rc_dim, rc_dim), dtype=complex)
    vac[0, 0] = 1.0
    return DensityMatrix(rho_sys.dim * rc_dim, np.kron(rho_sys.data, vac))


def rc_reduce(rho_ext: DensityMatrix, system_dim: int, rc_dim: int) -> DensityMatrix:
    """Partial trace over the RC factor."""
    if system_dim * rc_dim != rho_ext.dim:
        raise DimensionMismatchError(
            f"dim {rho_ext.dim} does not factor as {system_dim} x {rc_dim}"
        )
    blocks = rho_ext.data.reshape(system_dim, rc_dim, system_dim, rc_dim)
    reduced = np.einsum("srtr->st", blocks)
    reduced = 0.5 * (reduced + reduced.conj().T)
    return DensityMatrix(system_dim, reduced)
