"""Noisy continuous-variable dynamics, phase-space datasets, and a
time-conditioned denoiser for extrapolative error mitigation."""

__version__ = "0.1.0"
