"""Unit conventions and conversions.

Internal units everywhere: time in ns, angular frequency in rad/ns,
field amplitudes in sqrt(photons)/ns.  Frequencies quoted in MHz or GHz
are ordinary (not angular) frequencies and convert with a 2*pi factor.
A mode evolving as exp(-i*omega*t) with Im(omega) <= 0 decays.
"""

from __future__ import annotations

import math

TWO_PI = 2.0 * math.pi


def rad_ns_from_mhz(f_mhz: float) -> float:
    """Angular frequency in rad/ns for an ordinary frequency in MHz."""
    return TWO_PI * f_mhz * 1e-3


def mhz_from_rad_ns(w: float) -> float:
    return w / (TWO_PI * 1e-3)


def rad_ns_from_ghz(f_ghz: float) -> float:
    """Angular frequency in rad/ns for an ordinary frequency in GHz."""
    return TWO_PI * f_ghz


def ghz_from_rad_ns(w: float) -> float:
    return w / TWO_PI
