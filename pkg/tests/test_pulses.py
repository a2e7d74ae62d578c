"""Pulse container behavior: evaluation, spans, derivatives, breakpoints."""

import numpy as np
import pytest

from staforge import (
    AnalyticPulse,
    ConfigError,
    PiecewiseConstantPulse,
    SampledPulse,
    hold,
    quench,
    sin2_ramp,
)


def test_sin2_ramp_endpoints():
    eps_f = 2.0 - 1.0j
    p = sin2_ramp(eps_f, 80.0)
    assert p(0.0) == 0
    assert p(80.0) == pytest.approx(eps_f)
    assert p(40.0) == pytest.approx(0.5 * eps_f)
    # flat tails
    assert p(-5.0) == 0
    assert p(300.0) == pytest.approx(eps_f)


def test_sin2_ramp_derivative_matches_finite_difference():
    p = sin2_ramp(1.0 + 0.5j, 60.0)
    t = np.linspace(1.0, 59.0, 37)
    h = 1e-6
    fd = (np.asarray(p(t + h)) - np.asarray(p(t - h))) / (2 * h)
    np.testing.assert_allclose(p.derivative(t), fd, rtol=0, atol=1e-7)


def test_sin2_derivative_vanishes_at_tails():
    p = sin2_ramp(1.0, 60.0)
    assert p.derivative(-1.0) == 0
    assert p.derivative(61.0) == 0


def test_sin2_requires_positive_duration():
    with pytest.raises(ConfigError):
        sin2_ramp(1.0, 0.0)


def test_quench_step():
    p = quench(3.0j)
    assert p(-1e-9) == 0
    assert p(0.0) == pytest.approx(3.0j)
    assert p(1e3) == pytest.approx(3.0j)
    lo, hi = p.span
    assert lo == hi == 0.0


def test_quench_scalar_and_array_agree():
    p = quench(1.0 - 0.5j)
    t = np.array([-0.5, 0.0, 2.0])
    np.testing.assert_allclose(np.asarray(p(t)), [0.0, 1.0 - 0.5j, 1.0 - 0.5j])


def test_hold_is_constant():
    p = hold(0.7 - 0.2j)
    t = np.linspace(-50, 50, 11)
    np.testing.assert_allclose(np.asarray(p(t)), 0.7 - 0.2j)
    assert np.all(np.asarray(p.derivative(t)) == 0)


def test_piecewise_constant_lookup():
    edges = np.array([0.0, 1.0, 2.5, 4.0])
    amps = np.array([1.0, 2.0, 3.0], dtype=complex)
    p = PiecewiseConstantPulse(edges=edges, amplitudes=amps, pre=-1.0, post=9.0)
    # half-open sections [edges[j], edges[j+1])
    assert p(0.0) == 1.0
    assert p(0.999) == 1.0
    assert p(1.0) == 2.0
    assert p(2.5) == 3.0
    assert p(4.0) == 9.0
    assert p(-0.01) == -1.0
    t = np.array([-1.0, 0.5, 1.5, 3.0, 5.0])
    np.testing.assert_allclose(np.asarray(p(t)), [-1.0, 1.0, 2.0, 3.0, 9.0])


def test_piecewise_constant_validation():
    with pytest.raises(Exception):
        PiecewiseConstantPulse(
            edges=np.array([0.0, 1.0]), amplitudes=np.array([1.0, 2.0])
        )
    with pytest.raises(Exception):
        PiecewiseConstantPulse(
            edges=np.array([0.0, 2.0, 1.0]), amplitudes=np.array([1.0, 2.0])
        )


def test_piecewise_breakpoints_are_edges():
    edges = np.array([0.0, 2.0, 4.0])
    p = PiecewiseConstantPulse(edges=edges, amplitudes=np.array([1.0, 2.0]))
    np.testing.assert_array_equal(p.breakpoints(), edges)


def test_sampled_pulse_linear_interpolation():
    t0, dt = 2.0, 0.5
    samples = np.array([0.0, 1.0, 4.0, 9.0], dtype=complex)
    p = SampledPulse(t0=t0, dt=dt, samples=samples)
    assert p(2.0) == 0.0
    assert p(2.25) == pytest.approx(0.5)
    assert p(3.25) == pytest.approx(6.5)
    # clamped outside, pre/post default to endpoint samples
    assert p(0.0) == 0.0
    assert p(100.0) == pytest.approx(9.0)


def test_sampled_pulse_matches_dense_sampling_of_analytic():
    ref = sin2_ramp(1.0 - 2.0j, 30.0)
    t = np.linspace(0.0, 30.0, 3001)
    p = SampledPulse(t0=0.0, dt=t[1] - t[0], samples=np.asarray(ref(t)))
    probe = np.linspace(0.0, 30.0, 997)
    np.testing.assert_allclose(
        np.asarray(p(probe)), np.asarray(ref(probe)), atol=2e-4
    )


def test_sampled_pulse_needs_two_samples():
    with pytest.raises(Exception):
        SampledPulse(t0=0.0, dt=1.0, samples=np.array([1.0]))


def test_analytic_pulse_span_and_breakpoints():
    p = AnalyticPulse(
        label="spiral",
        params={},
        span=(0.0, 5.0),
        value_fn=lambda t: np.exp(1j * t),
        derivative_fn=lambda t: 1j * np.exp(1j * t),
        flat_tails=False,
    )
    assert p.span == (0.0, 5.0)
    np.testing.assert_array_equal(p.breakpoints(), [0.0, 5.0])
    assert p(1.3) == pytest.approx(np.exp(1.3j))
    assert p.derivative(1.3) == pytest.approx(1j * np.exp(1.3j))


def test_analytic_pulse_without_derivative_refuses():
    p = AnalyticPulse(label="bare", params={}, span=(0.0, 1.0), value_fn=lambda t: t)
    with pytest.raises(ConfigError):
        p.derivative(0.5)


def test_pulses_vectorize_and_preserve_scalars():
    for p in (sin2_ramp(1.0, 10.0), quench(1.0), hold(2.0)):
        out = p(np.array([0.1, 0.2]))
        assert isinstance(out, np.ndarray) and out.shape == (2,)
        assert isinstance(p(0.1), complex)
