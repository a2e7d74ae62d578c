"""Hybridization: diagonalize a mode network into decoupled hybrid modes.

The frequency matrix is generally non-Hermitian (loss on the diagonal),
so hybrid modes come from a similarity transform rather than a unitary
one:  omega = from_hybrid @ diag(detunings) @ to_hybrid  with
to_hybrid = from_hybrid^-1.  Hybrid amplitudes beta = to_hybrid @ alpha
then evolve independently as d(beta_k)/dt = -i*dtilde_k*beta_k - ...
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DefectiveMatrix, DimensionMismatch, SingularOmega
from .network import ModeNetwork

__all__ = [
    "HybridSpectrum",
    "hybridize",
    "equilibrium_state",
    "equilibrium_amplitude",
    "adiabatic_timescale",
]

_CONDITION_LIMIT = 1e8


@dataclass(frozen=True)
class HybridSpectrum:
    """Eigen-decomposition of a frequency matrix.

    ``detunings[k]`` is the complex hybrid detuning (real part detuning,
    imaginary part -kappa_k/2), sorted by ascending real part with ties
    broken by ascending imaginary part.  ``to_hybrid`` maps bare mode
    amplitudes to hybrid amplitudes; ``from_hybrid`` is its inverse.
    """

    detunings: np.ndarray
    to_hybrid: np.ndarray
    from_hybrid: np.ndarray
    condition: float

    def __post_init__(self):
        for name in ("detunings", "to_hybrid", "from_hybrid"):
            arr = np.array(getattr(self, name), dtype=complex)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_modes(self) -> int:
        return self.detunings.size

    def reconstruct(self) -> np.ndarray:
        """Rebuild the original frequency matrix from the decomposition."""
        return self.from_hybrid @ np.diag(self.detunings) @ self.to_hybrid


def hybridize(net: ModeNetwork) -> HybridSpectrum:
    """Diagonalize a network into independent hybrid modes.

    Raises
    ------
    DefectiveMatrix
        If the eigenvector matrix is ill-conditioned (> 1e8), i.e. the
        matrix is numerically non-diagonalizable (exceptional point).
    """
    values, vectors = np.linalg.eig(net.omega)
    order = np.lexsort((values.imag, values.real))
    values = values[order]
    vectors = vectors[:, order]
    condition = float(np.linalg.cond(vectors))
    if not np.isfinite(condition) or condition > _CONDITION_LIMIT:
        raise DefectiveMatrix(
            f"eigenvector condition number {condition:.2e} exceeds {_CONDITION_LIMIT:.0e}"
        )
    return HybridSpectrum(
        detunings=values,
        to_hybrid=np.linalg.inv(vectors),
        from_hybrid=vectors,
        condition=condition,
    )


def equilibrium_state(net: ModeNetwork, drive: np.ndarray | complex) -> np.ndarray:
    """Steady state i * omega^-1 @ eps of a constant drive vector.

    A scalar ``drive`` is fanned out through the network's drive
    coupling; a vector is used as the per-mode drive directly.
    """
    drive = np.asarray(drive, dtype=complex)
    if drive.ndim == 0:
        drive = net.drive_coupling * complex(drive)
    if drive.shape != (net.n_modes,):
        raise DimensionMismatch(
            f"drive vector shape {drive.shape} for {net.n_modes} modes"
        )
    try:
        sol = np.linalg.solve(net.omega, drive)
    except np.linalg.LinAlgError as exc:
        raise SingularOmega("frequency matrix is singular") from exc
    cond = np.linalg.cond(net.omega)
    if not np.isfinite(cond) or cond > 1e14:
        raise SingularOmega(f"frequency matrix condition {cond:.2e} too large")
    return 1j * sol


def equilibrium_amplitude(delta: float, kappa: float, eps: complex) -> complex:
    """Single-mode steady state i*eps / (delta - i*kappa/2)."""
    den = complex(delta, -0.5 * kappa)
    if den == 0:
        raise SingularOmega("delta - i*kappa/2 vanishes")
    return 1j * eps / den


def adiabatic_timescale(delta: float, kappa: float) -> float:
    """Slowest timescale governing adiabatic following of one mode.

    1 / min(sqrt(delta^2 + kappa^2/4), kappa): the inverse distance of
    the complex detuning from zero, or the relaxation rate, whichever
    is slower.  Infinite for a lossless resonant mode.
    """
    rate = min(np.hypot(delta, 0.5 * kappa), kappa)
    return float("inf") if rate == 0 else 1.0 / rate
