"""Measurement-chain emulation: from intracavity fields to the detected signal.

The drive reaches the device through an input capacitor (complex
reflection coefficient ``gamma``), a length of line (one-way phase
``theta``), and a T junction feeding the drive-coupled mode.  Folding
the reflections into the mode equations renormalizes its detuning and
linewidth and fixes the complex scale between the incoming wave and the
effective drive amplitude.  The outgoing wave is the coherent sum of
the direct feedthrough and the mode leakage, with an optional complex
fit coefficient on the leakage term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, SingularOmega, ZeroEffectiveKappa
from .network import ModeNetwork

__all__ = [
    "IoChainParams",
    "effective_params",
    "output_field",
    "s21_spectrum",
    "low_pass",
    "reference_chain",
]


@dataclass(frozen=True)
class IoChainParams:
    """Feedline parameters: reflection, line phase, port coupling, leak fit.

    ``kappa_a`` is the bare coupling of the drive-facing mode to the
    line (1/ns).  Defaults for ``gamma`` and ``theta`` are the design
    estimates of the reference device; ``leak_scale`` rescales the
    leakage term and defaults to the ideal chain.
    """

    kappa_a: float
    gamma: complex = 0.98 - 0.17j
    theta: float = 0.05
    leak_scale: complex = 1.0

    def __post_init__(self):
        if not self.kappa_a > 0:
            raise ConfigError("kappa_a must be positive")
        if abs(self.gamma) > 1 + 1e-12:
            raise ConfigError("|gamma| must not exceed 1 (passive reflector)")

    @property
    def round_trip(self) -> complex:
        """Reflection seen by the mode: capacitor plus twice the line phase."""
        return self.gamma * np.exp(2j * self.theta)


def effective_params(p: IoChainParams, delta_a: float) -> tuple[float, float, complex]:
    """Detuning, linewidth, and drive scale of the line-dressed mode.

    Returns (delta_a_eff, kappa_a_eff, drive_scale) where drive_scale
    maps the incoming wave amplitude to the effective drive:
    delta_a_eff = delta_a + Im(round_trip) kappa_a / 4,
    kappa_a_eff = kappa_a (1 + Re(round_trip)) / 2,
    drive_scale = sqrt(kappa_a) (1 - gamma) e^{i theta} / 2.
    """
    rt = p.round_trip
    kappa_eff = p.kappa_a * (1.0 + rt.real) / 2.0
    if kappa_eff <= 0:
        raise ZeroEffectiveKappa(
            "destructive reflection cancels the port coupling entirely"
        )
    delta_eff = delta_a + rt.imag * p.kappa_a / 4.0
    drive_scale = np.sqrt(p.kappa_a) * (1.0 - p.gamma) * np.exp(1j * p.theta) / 2.0
    return delta_eff, kappa_eff, complex(drive_scale)


def output_field(p: IoChainParams, eps, a_field):
    """Detected outgoing wave for drive eps and drive-coupled field a_field.

    Affine in both arguments: the feedthrough 2 eps / sqrt(kappa_a)
    plus the leakage (1 + round_trip)/2 * sqrt(kappa_a) * a_field, the
    latter scaled by the fit coefficient.
    """
    eps = np.asarray(eps, dtype=complex)
    a_field = np.asarray(a_field, dtype=complex)
    rk = np.sqrt(p.kappa_a)
    feed = 2.0 * eps / rk
    leak = p.leak_scale * (1.0 + p.round_trip) / 2.0 * rk * a_field
    out = feed + leak
    return complex(out) if out.ndim == 0 else out


def s21_spectrum(net: ModeNetwork, p: IoChainParams, omega_grid) -> np.ndarray:
    """Normalized steady-state transmission over probe detunings (rad/ns).

    For each probe offset w the network steady state under a unit
    continuous drive is alpha = i (Omega - w I)^{-1} c, and the
    transmission is the output normalized to the pure feedthrough:
    S21(w) = 1 + leak_scale (1 + round_trip)/4 * kappa_a * (c . alpha).
    Dips sit near the real parts of the hybrid detunings.
    """
    grid = np.atleast_1d(np.asarray(omega_grid, dtype=float))
    omega = net.omega
    c = net.drive_coupling
    eye = np.eye(net.n_modes)
    coeff = p.leak_scale * (1.0 + p.round_trip) / 4.0 * p.kappa_a
    out = np.empty(grid.size, dtype=complex)
    for i, w in enumerate(grid):
        shifted = omega - w * eye
        try:
            alpha = 1j * np.linalg.solve(shifted, c)
        except np.linalg.LinAlgError as exc:
            raise SingularOmega(
                f"lossless resonance at probe offset {w:g} rad/ns"
            ) from exc
        if not np.all(np.isfinite(alpha)):
            raise SingularOmega(f"lossless resonance at probe offset {w:g} rad/ns")
        out[i] = 1.0 + coeff * np.dot(c, alpha)
    return out


def low_pass(times, values, time_constant: float) -> np.ndarray:
    """Single-pole low-pass applied to a sampled trace (zero-order hold).

    Models slow energy-storing chain components as y' = (x - y)/tau,
    discretized exactly per sample interval.  The first sample passes
    through unchanged.
    """
    if not time_constant > 0:
        raise ConfigError("time constant must be positive")
    t = np.asarray(times, dtype=float)
    x = np.asarray(values, dtype=complex)
    if t.ndim != 1 or x.shape != t.shape:
        raise ConfigError("times and values must be matching 1-D arrays")
    y = np.empty_like(x)
    y[0] = x[0]
    decay = np.exp(-np.diff(t) / time_constant)
    for i in range(1, t.size):
        y[i] = decay[i - 1] * y[i - 1] + (1.0 - decay[i - 1]) * x[i]
    return y


def reference_chain(kappa_eff: float, *, leak_scale: complex = 1.0) -> IoChainParams:
    """Chain with the reference reflection estimates and a given dressed linewidth.

    Backs out the bare port coupling that the default (gamma, theta)
    dress down to ``kappa_eff``, so the chain is consistent with a
    network calibrated from measured hybrid linewidths.
    """
    probe = IoChainParams(kappa_a=1.0, leak_scale=leak_scale)
    factor = (1.0 + probe.round_trip.real) / 2.0
    if factor <= 0:
        raise ZeroEffectiveKappa("reference reflection cancels the port")
    return IoChainParams(kappa_a=kappa_eff / factor, leak_scale=leak_scale)
