"""Counterdiabatic drive shaping for a single (hybrid) mode.

A mode with complex detuning dtilde = delta - i*kappa/2 driven by a
slowly varying eps(t) trails its instantaneous equilibrium
abar(t) = i*eps(t)/dtilde.  Adding the correction

    eps_cd(t) = eps(t) - i * d(eps)/dt / (delta - i*kappa/2)

makes the mode follow abar(t) exactly, for any protocol duration: the
correction cancels the diabatic term d(abar)/dt in the co-moving frame.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError, DegenerateDenominator
from .pulses import (
    AnalyticPulse,
    PiecewiseConstantPulse,
    Pulse,
    SampledPulse,
    fd4_derivative,
    hold,
    quench,
    sin2_ramp,
)

__all__ = ["cd_pulse", "cd_correction", "reference_pulse"]


def _denominator(delta: float, kappa: float) -> complex:
    den = complex(delta, -0.5 * kappa)
    if den == 0:
        raise DegenerateDenominator("delta - i*kappa/2 vanishes")
    return den


def cd_pulse(reference: Pulse, delta: float, kappa: float) -> Pulse:
    """Counterdiabatic version of a reference drive.

    Analytic references return an analytic pulse built from the exact
    derivative; sampled references return a sampled pulse whose
    derivative comes from 4th-order finite differences on the sample
    grid (five samples minimum).  Piecewise-constant references are
    rejected: their derivative is a train of delta functions.
    """
    den = _denominator(delta, kappa)
    if isinstance(reference, PiecewiseConstantPulse):
        raise ConfigError(
            "cannot shape a piecewise-constant reference; its derivative "
            "is distributional"
        )
    if isinstance(reference, SampledPulse):
        deriv = fd4_derivative(reference.samples, reference.dt)
        samples = reference.samples - 1j * deriv / den
        return SampledPulse(
            t0=reference.t0,
            dt=reference.dt,
            samples=samples,
            pre=reference.pre,
            post=reference.post,
        )
    if isinstance(reference, AnalyticPulse):
        if reference.derivative_fn is None:
            raise ConfigError(
                f"analytic reference {reference.label!r} carries no derivative"
            )
        ref_val = reference.value_fn
        ref_der = reference.derivative_fn
        ref_sec = reference.second_fn

        def val(t):
            return np.asarray(ref_val(t), dtype=complex) - 1j * np.asarray(
                ref_der(t), dtype=complex
            ) / den

        der = None
        if ref_sec is not None:
            def der(t):
                return np.asarray(ref_der(t), dtype=complex) - 1j * np.asarray(
                    ref_sec(t), dtype=complex
                ) / den

        return AnalyticPulse(
            label=f"cd({reference.label})",
            params={**reference.params, "delta": delta, "kappa": kappa},
            span=reference.span,
            value_fn=val,
            derivative_fn=der,
            flat_tails=reference.flat_tails,
        )
    raise ConfigError(f"unsupported reference type {type(reference).__name__}")


def cd_correction(reference: Pulse, delta: float, kappa: float, t) -> np.ndarray:
    """The added drive eps_cd(t) - eps(t) = -i * d(eps)/dt / dtilde.

    Stated in the drive-amplitude convention (the coefficient of the
    -i*(eps a^dag - h.c.) drive term); its magnitude |d(eps)/dt| / |dtilde|
    is the speed-up resource consumed by the shortcut.
    """
    den = _denominator(delta, kappa)
    return -1j * np.asarray(reference.derivative(t), dtype=complex) / den


def reference_pulse(shape: str, eps0: complex, tf: float | None = None) -> AnalyticPulse:
    """Library of reference protocols: 'sin2', 'quench', or 'hold'."""
    if shape == "sin2":
        if tf is None:
            raise ConfigError("sin2 ramp needs a duration tf")
        return sin2_ramp(eps0, tf)
    if shape == "quench":
        return quench(eps0)
    if shape == "hold":
        return hold(eps0)
    raise ConfigError(f"unknown reference shape {shape!r}")
