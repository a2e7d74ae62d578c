"""Speed-limit diagnostics for single-mode phase-space trajectories.

For a mode following a coherent trajectory alpha(t), the evolution-time
bound is geometric: the angle between initial and final states,
arccos |<a_i|a_f>| = arccos exp(-|Delta alpha|^2 / 2), divided by the
phase-space speed |d alpha / dt|, which plays the role of the energy
uncertainty.  The efficiency of a protocol is that angle over the
actual path length; straight-line trajectories saturate it.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, ZeroPath
from .langevin import Trace

__all__ = ["path_length", "quantum_efficiency", "max_efficiency"]


def _single_mode_points(trace) -> np.ndarray:
    if isinstance(trace, Trace):
        if trace.n_modes != 1:
            raise DimensionMismatch("speed-limit diagnostics are single-mode")
        return np.asarray(trace.alphas[:, 0])
    pts = np.asarray(trace, dtype=complex)
    if pts.ndim != 1 or pts.size < 2:
        raise DimensionMismatch("need a 1-D trajectory with at least two points")
    return pts


def _geodesic_angle(dist: float) -> float:
    # arccos(exp(-d^2/2)) without cancellation near d = 0
    u = -np.expm1(-0.5 * dist * dist)
    if u < 1e-6:
        return float(np.sqrt(2.0 * u) * (1.0 + u / 12.0 + 3.0 * u * u / 160.0))
    return float(np.arccos(1.0 - u))


def path_length(trace) -> float:
    """Polyline length of the trajectory in phase space.

    Exact for piecewise-linear paths and monotone under grid
    refinement, which is why no derivative estimate is involved.
    """
    pts = _single_mode_points(trace)
    return float(np.sum(np.abs(np.diff(pts))))


def quantum_efficiency(trace) -> float:
    """Geodesic angle between endpoints over the traversed path length."""
    pts = _single_mode_points(trace)
    dist = abs(pts[-1] - pts[0])
    if dist == 0:
        raise ZeroPath("trajectory endpoints coincide")
    return _geodesic_angle(dist) / path_length(pts)


def max_efficiency(delta_alpha_abs: float) -> float:
    """Efficiency of a straight-line trajectory with the given endpoint distance.

    This is the supremum over all trajectories sharing the endpoints;
    it decreases from 1 at zero distance to (pi/2)/distance at large
    distance, where the endpoint states are already orthogonal.
    """
    d = abs(float(delta_alpha_abs))
    if d == 0.0:
        return 1.0
    return _geodesic_angle(d) / d
