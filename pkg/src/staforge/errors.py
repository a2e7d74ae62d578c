"""Exception types raised across the toolkit.

Every error that a caller is expected to catch derives from
:class:`StaforgeError`, so ``except StaforgeError`` is a safe blanket
for CLI-style handling.
"""

from __future__ import annotations


class StaforgeError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatch(StaforgeError):
    """Array shapes disagree with the declared mode count."""


class NonHermitianCoupling(StaforgeError):
    """Off-diagonal coupling block violates omega_ij == conj(omega_ji)."""


class NonPassive(StaforgeError):
    """A mode has negative loss (positive imaginary diagonal entry)."""


class ConfigError(StaforgeError):
    """Malformed or inconsistent configuration input."""


class CalibrationInfeasible(StaforgeError):
    """No bare two-mode parameters reproduce a requested hybrid pair."""


class DefectiveMatrix(StaforgeError):
    """Frequency matrix is too close to non-diagonalizable to hybridize."""


class SingularOmega(StaforgeError):
    """Frequency matrix is singular where an inverse is required."""


class DegenerateDenominator(StaforgeError):
    """Counterdiabatic denominator delta - i*kappa/2 vanishes."""


class DegenerateDetuning(StaforgeError):
    """A hybrid detuning is exactly zero where 1/detuning is required."""


class RankDeficient(StaforgeError):
    """Constraint matrix has (numerically) dependent rows."""


class QuadratureFailure(StaforgeError):
    """Adaptive quadrature could not reach tolerance within budget."""


class ZeroEffectiveKappa(StaforgeError):
    """Interference leaves the effective external coupling non-positive."""


class ZeroPath(StaforgeError):
    """Trace endpoints coincide; efficiency is undefined."""


class TruncationBreach(StaforgeError):
    """Fock-space truncation is inadequate for the requested evolution."""
