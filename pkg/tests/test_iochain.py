"""Measurement-chain emulation: dressing, transmission, detection filter."""

import numpy as np
import pytest

from staforge import (
    ConfigError,
    IoChainParams,
    SingularOmega,
    ZeroEffectiveKappa,
    effective_params,
    hybridize,
    low_pass,
    output_field,
    qubit_block,
    reference_chain,
    reference_device,
    s21_spectrum,
    single_mode,
)


def test_params_validation():
    with pytest.raises(ConfigError):
        IoChainParams(kappa_a=0.0)
    with pytest.raises(ConfigError):
        IoChainParams(kappa_a=0.1, gamma=1.2)
    p = IoChainParams(kappa_a=0.1, gamma=0.5 + 0.1j, theta=0.3)
    assert p.round_trip == pytest.approx((0.5 + 0.1j) * np.exp(0.6j))


def test_effective_params_formulas():
    p = IoChainParams(kappa_a=0.2, gamma=0.6 - 0.2j, theta=0.1)
    rt = p.round_trip
    d_eff, k_eff, scale = effective_params(p, 0.05)
    assert d_eff == pytest.approx(0.05 + rt.imag * 0.2 / 4.0)
    assert k_eff == pytest.approx(0.2 * (1.0 + rt.real) / 2.0)
    assert scale == pytest.approx(
        np.sqrt(0.2) * (1.0 - (0.6 - 0.2j)) * np.exp(0.1j) / 2.0
    )


def test_zero_effective_kappa():
    # a perfect pi round trip cancels the coupling
    p = IoChainParams(kappa_a=0.2, gamma=1.0, theta=np.pi / 2)
    with pytest.raises(ZeroEffectiveKappa):
        effective_params(p, 0.0)


def test_output_field_affine_superposition():
    p = IoChainParams(kappa_a=0.15)
    e1, e2 = 0.3 - 0.1j, -0.2 + 0.4j
    a1, a2 = 1.1 + 0.2j, -0.5j
    lhs = output_field(p, e1 + e2, a1 + a2)
    rhs = (
        output_field(p, e1, a1)
        + output_field(p, e2, a2)
        - output_field(p, 0.0, 0.0)
    )
    assert abs(lhs - rhs) < 1e-12
    assert output_field(p, 0.0, 0.0) == 0.0
    # vector input keeps shape
    arr = output_field(p, np.array([e1, e2]), np.array([a1, a2]))
    assert arr.shape == (2,)


def test_s21_single_mode_analytic():
    # one dressed mode: S21 = 1 + coeff * i c^2 / (dtil - w)
    kappa = 0.05
    net = single_mode(0.2, kappa)
    p = IoChainParams(kappa_a=kappa)
    grid = np.linspace(-0.5, 0.8, 301)
    s = s21_spectrum(net, p, grid)
    coeff = (1.0 + p.round_trip) / 4.0 * kappa
    dtil = 0.2 - 0.5j * kappa
    want = 1.0 + coeff * 1j / (dtil - grid)
    np.testing.assert_allclose(s, want, atol=1e-12)
    # the dip sits at the mode detuning
    assert grid[np.argmin(np.abs(s))] == pytest.approx(0.2, abs=0.01)


def test_s21_lossless_resonance_raises():
    net = single_mode(0.1, 0.0)
    with pytest.raises(SingularOmega):
        s21_spectrum(net, IoChainParams(kappa_a=0.05), [0.1])


def test_s21_reference_block_dips_near_hybrid_detunings():
    net = qubit_block(reference_device(), 0)
    spec = hybridize(net)
    chain = reference_chain(float(np.max(-2.0 * spec.detunings.imag)))
    grid = np.linspace(-0.1, 0.25, 4001)
    mag = np.abs(s21_spectrum(net, chain, grid))
    # interior local minima
    interior = (mag[1:-1] < mag[:-2]) & (mag[1:-1] <= mag[2:])
    dips = grid[1:-1][interior]
    for eig in spec.detunings.real:
        assert np.min(np.abs(dips - eig)) < 0.005


def test_low_pass_exact_single_pole():
    # step response of the ZOH discretization matches the continuous pole
    tau = 3.0
    t = np.linspace(0.0, 20.0, 401)
    x = np.ones_like(t, dtype=complex)
    x[0] = 0.0
    y = low_pass(t, x, tau)
    np.testing.assert_allclose(y[1:], 1.0 - np.exp(-t[1:] / tau), atol=1e-12)
    assert y[0] == 0.0
    # uneven sampling still lands on the same exponential
    tu = np.array([0.0, 0.7, 1.1, 2.9, 6.0, 13.0])
    xu = np.ones_like(tu, dtype=complex)
    xu[0] = 0.0
    yu = low_pass(tu, xu, tau)
    np.testing.assert_allclose(yu[1:], 1.0 - np.exp(-tu[1:] / tau), atol=1e-12)


def test_low_pass_validation():
    with pytest.raises(ConfigError):
        low_pass([0.0, 1.0], [1.0, 1.0], 0.0)
    with pytest.raises(ConfigError):
        low_pass([0.0, 1.0], [1.0, 1.0, 1.0], 1.0)


def test_reference_chain_round_trip():
    k_eff = 1.0 / 17.86
    chain = reference_chain(k_eff)
    _, dressed, _ = effective_params(chain, 0.0)
    assert dressed == pytest.approx(k_eff, rel=1e-12)
    assert chain.gamma == IoChainParams(kappa_a=1.0).gamma
