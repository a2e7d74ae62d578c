"""Phase-space speed-limit diagnostics."""

import numpy as np
import pytest

from staforge import (
    DimensionMismatch,
    ZeroPath,
    cd_pulse,
    max_efficiency,
    path_length,
    propagate,
    quantum_efficiency,
    sin2_ramp,
    single_mode,
)


def test_path_length_polyline():
    pts = np.array([0.0, 3.0 + 4.0j, 3.0 + 4.0j, 6.0 + 8.0j])
    assert path_length(pts) == pytest.approx(10.0)


def test_straight_line_saturates_bound():
    d = 0.37
    pts = np.linspace(0.0, d, 11).astype(complex)
    eta = quantum_efficiency(pts)
    assert eta == pytest.approx(max_efficiency(d), rel=1e-12)


def test_detour_reduces_efficiency():
    pts = np.array([0.0, 0.2 + 0.3j, 0.4 + 0.0j])
    assert quantum_efficiency(pts) < max_efficiency(0.4)


def test_max_efficiency_frozen_value():
    # arccos(exp(-0.005)) / 0.1, frozen from a direct evaluation
    assert max_efficiency(0.1) == pytest.approx(0.9991668753719142, rel=1e-12)
    assert max_efficiency(0.0) == 1.0


def test_geodesic_series_continuous_at_switch():
    # the series branch and the arccos branch must agree where they meet
    eps = 1e-6
    d_at = np.sqrt(-2.0 * np.log1p(-eps))
    lo = max_efficiency(d_at * (1 - 1e-9))
    hi = max_efficiency(d_at * (1 + 1e-9))
    assert abs(lo - hi) < 1e-9


def test_max_efficiency_large_distance_limit():
    d = 50.0
    assert max_efficiency(d) == pytest.approx((np.pi / 2.0) / d, rel=1e-10)


def test_efficiency_bounded_by_straight_line():
    # a real driven trajectory can approach but not beat the bound
    delta, kappa = 0.0154, 1.0 / 62.88
    net = single_mode(delta, kappa)
    ref = sin2_ramp(0.25, 100.0)
    shaped = cd_pulse(ref, delta, kappa)
    times = np.linspace(0.0, 100.0, 400)
    trace = propagate(net, shaped, 0.0, times)
    d = abs(trace.mode(0)[-1] - trace.mode(0)[0])
    eta = quantum_efficiency(trace)
    assert eta <= max_efficiency(d) + 1e-12
    assert 0.0 < eta <= 1.0


def test_error_paths():
    with pytest.raises(ZeroPath):
        quantum_efficiency(np.array([0.3 + 0.0j, 1.0j, 0.3 + 0.0j]))
    with pytest.raises(DimensionMismatch):
        quantum_efficiency(np.array([1.0 + 0.0j]))
    net2 = single_mode(0.1, 0.02)
    trace = propagate(net2, sin2_ramp(0.1, 5.0), 0.0, [0.0, 5.0])
    # multi-mode traces are rejected
    from staforge import ModeNetwork

    omega = np.diag([0.1 - 0.01j, 0.2 - 0.02j])
    net = ModeNetwork(omega=omega, drive_coupling=np.ones(2))
    multi = propagate(net, sin2_ramp(0.1, 5.0), np.zeros(2), [0.0, 5.0])
    with pytest.raises(DimensionMismatch):
        path_length(multi)
    # single-mode Trace is accepted directly
    assert path_length(trace) > 0.0
