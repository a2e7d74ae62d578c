"""Drive pulse types.

Three pulse families cover every protocol in the toolkit:

* :class:`PiecewiseConstantPulse` -- section amplitudes on a strictly
  increasing edge grid, right-continuous at every edge.
* :class:`SampledPulse` -- uniformly sampled complex amplitudes with
  linear interpolation between samples.
* :class:`AnalyticPulse` -- a closed-form shape carrying its own exact
  derivative (and optionally second derivative).

All pulses evaluate to the ``pre`` amplitude before their domain and to
the ``post`` amplitude after it, and all are immutable.  Time is in ns,
amplitudes in sqrt(photons)/ns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import ConfigError

__all__ = [
    "PiecewiseConstantPulse",
    "SampledPulse",
    "AnalyticPulse",
    "Pulse",
    "sin2_ramp",
    "quench",
    "hold",
]


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PiecewiseConstantPulse:
    """Right-continuous piecewise-constant drive.

    ``edges`` has m+1 strictly increasing entries; section j (0-based)
    holds ``amplitudes[j]`` on [edges[j], edges[j+1]).  Outside the edge
    range the pulse holds ``pre`` (t < edges[0]) or ``post``
    (t >= edges[-1]).
    """

    edges: np.ndarray
    amplitudes: np.ndarray
    pre: complex = 0.0 + 0.0j
    post: complex = 0.0 + 0.0j

    def __post_init__(self):
        edges = _frozen_array(self.edges, float)
        amps = _frozen_array(self.amplitudes, complex)
        if edges.ndim != 1 or amps.ndim != 1 or edges.size != amps.size + 1:
            raise ConfigError(
                f"need m+1 edges for m amplitudes, got {edges.size} and {amps.size}"
            )
        if amps.size == 0:
            raise ConfigError("piecewise pulse needs at least one section")
        if not np.all(np.diff(edges) > 0):
            raise ConfigError("section edges must be strictly increasing")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "pre", complex(self.pre))
        object.__setattr__(self, "post", complex(self.post))

    @property
    def span(self) -> tuple[float, float]:
        return float(self.edges[0]), float(self.edges[-1])

    def breakpoints(self) -> np.ndarray:
        return np.asarray(self.edges)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.edges, t, side="right") - 1
        values = np.concatenate(
            ([self.pre], self.amplitudes, [self.post])
        )
        out = values[np.clip(idx, -1, self.amplitudes.size) + 1]
        return out if t.ndim else complex(out)

    def derivative(self, t):
        raise ConfigError(
            "piecewise-constant pulse has a distributional derivative; "
            "use a sampled or analytic reference instead"
        )


@dataclass(frozen=True)
class SampledPulse:
    """Uniformly sampled drive, linearly interpolated between samples."""

    t0: float
    dt: float
    samples: np.ndarray
    pre: complex = 0.0 + 0.0j
    post: complex | None = None

    def __post_init__(self):
        samples = _frozen_array(self.samples, complex)
        if samples.ndim != 1 or samples.size < 2:
            raise ConfigError("sampled pulse needs at least two samples")
        if not self.dt > 0:
            raise ConfigError("sample spacing must be positive")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "pre", complex(self.pre))
        post = self.post if self.post is not None else samples[-1]
        object.__setattr__(self, "post", complex(post))

    @property
    def span(self) -> tuple[float, float]:
        return self.t0, self.t0 + self.dt * (self.samples.size - 1)

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.samples.size)

    def breakpoints(self) -> np.ndarray:
        return self.times()

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        lo, hi = self.span
        u = (t - self.t0) / self.dt
        idx = np.clip(np.floor(u).astype(int), 0, self.samples.size - 2)
        frac = u - idx
        interp = self.samples[idx] * (1 - frac) + self.samples[idx + 1] * frac
        out = np.where(t < lo, self.pre, np.where(t >= hi, self.post, interp))
        return out if t.ndim else complex(out)

    def derivative(self, t):
        """Sampled derivative via 4th-order finite differences.

        Central five-point stencil in the interior, one-sided at the
        four edge samples, linearly interpolated like the values.
        """
        d = fd4_derivative(self.samples, self.dt)
        proxy = SampledPulse(self.t0, self.dt, d, pre=0.0, post=0.0)
        return proxy(t)


def fd4_derivative(samples: np.ndarray, dt: float) -> np.ndarray:
    """4th-order finite-difference derivative on a uniform grid."""
    y = np.asarray(samples)
    n = y.size
    if n < 5:
        raise ConfigError("4th-order differences need at least five samples")
    d = np.empty_like(y)
    d[2:-2] = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * dt)
    # one-sided 5-point stencils at each edge
    d[0] = (-25 * y[0] + 48 * y[1] - 36 * y[2] + 16 * y[3] - 3 * y[4]) / (12 * dt)
    d[1] = (-3 * y[0] - 10 * y[1] + 18 * y[2] - 6 * y[3] + y[4]) / (12 * dt)
    d[-2] = (3 * y[-1] + 10 * y[-2] - 18 * y[-3] + 6 * y[-4] - y[-5]) / (12 * dt)
    d[-1] = (25 * y[-1] - 48 * y[-2] + 36 * y[-3] - 16 * y[-4] + 3 * y[-5]) / (12 * dt)
    return d


@dataclass(frozen=True)
class AnalyticPulse:
    """Closed-form drive with exact derivative.

    ``span`` bounds the active (time-dependent) region; every library
    shape is constant outside it, which propagators exploit.  ``label``
    and ``params`` identify the shape in reports.
    """

    label: str
    params: dict
    span: tuple[float, float]
    value_fn: Callable[[np.ndarray], np.ndarray]
    derivative_fn: Callable[[np.ndarray], np.ndarray] | None = None
    second_fn: Callable[[np.ndarray], np.ndarray] | None = None
    flat_tails: bool = True

    def __post_init__(self):
        object.__setattr__(self, "params", dict(self.params))
        object.__setattr__(
            self, "span", (float(self.span[0]), float(self.span[1]))
        )

    def breakpoints(self) -> np.ndarray:
        lo, hi = self.span
        return np.array([lo, hi]) if hi > lo else np.array([lo])

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        out = np.asarray(self.value_fn(t_arr), dtype=complex)
        return out if t_arr.ndim else complex(out)

    def derivative(self, t):
        if self.derivative_fn is None:
            raise ConfigError(f"pulse {self.label!r} carries no derivative")
        t_arr = np.asarray(t, dtype=float)
        out = np.asarray(self.derivative_fn(t_arr), dtype=complex)
        return out if t_arr.ndim else complex(out)


Pulse = Union[PiecewiseConstantPulse, SampledPulse, AnalyticPulse]


def sin2_ramp(eps0: complex, tf: float) -> AnalyticPulse:
    """Smooth ramp 0 -> eps0: eps(t) = eps0 sin^2(pi t / 2 tf) on [0, tf]."""
    if not tf > 0:
        raise ConfigError("ramp duration must be positive")
    eps0 = complex(eps0)
    w = math.pi / (2 * tf)

    def val(t):
        inside = eps0 * np.sin(w * t) ** 2
        return np.where(t < 0, 0, np.where(t < tf, inside, eps0))

    def der(t):
        inside = eps0 * w * np.sin(2 * w * t)
        return np.where((t >= 0) & (t < tf), inside, 0)

    def sec(t):
        inside = eps0 * 2 * w * w * np.cos(2 * w * t)
        return np.where((t >= 0) & (t < tf), inside, 0)

    return AnalyticPulse(
        label="sin2",
        params={"eps0": eps0, "tf": tf},
        span=(0.0, tf),
        value_fn=val,
        derivative_fn=der,
        second_fn=sec,
    )


def quench(eps0: complex) -> AnalyticPulse:
    """Sudden switch-on: 0 before t=0, eps0 from t=0 on."""
    eps0 = complex(eps0)
    return AnalyticPulse(
        label="quench",
        params={"eps0": eps0},
        span=(0.0, 0.0),
        value_fn=lambda t: np.where(t < 0, 0, eps0),
        derivative_fn=lambda t: np.zeros_like(t, dtype=complex),
        second_fn=lambda t: np.zeros_like(t, dtype=complex),
    )


def hold(eps0: complex) -> AnalyticPulse:
    """Constant drive at all times."""
    eps0 = complex(eps0)
    return AnalyticPulse(
        label="hold",
        params={"eps0": eps0},
        span=(0.0, 0.0),
        value_fn=lambda t: np.full_like(t, eps0, dtype=complex),
        derivative_fn=lambda t: np.zeros_like(t, dtype=complex),
        second_fn=lambda t: np.zeros_like(t, dtype=complex),
    )
