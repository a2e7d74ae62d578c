"""Piecewise-constant multi-mode transfer synthesis and peak-power shaping."""

import numpy as np
import pytest

from staforge import (
    ConfigError,
    DegenerateDetuning,
    DimensionMismatch,
    MinNormSolution,
    QuadratureFailure,
    RankDeficient,
    assemble_pulse,
    boundary_targets,
    filtered_transfer_matrix,
    optimize_peak_power,
    peak_power,
    peak_power_lower_bound,
    pulse_energy,
    section_edges,
    solve_min_norm,
    solve_multiport,
    solve_transfer,
    transfer_matrix,
)

from _oracles import (
    filtered_transfer_element,
    min_norm_normal_equations,
    rk4_mean_field,
    transfer_element,
)

# four hybrid detunings in the style of the reference device (rad/ns)
DTIL = np.array(
    [
        -0.0154 - 0.008j,
        0.0154 - 0.008j,
        0.1455 - 0.028j,
        0.1700 - 0.032j,
    ]
)


def test_transfer_matrix_vs_quadrature():
    m, t0, tf = 6, 0.0, 60.0
    G = transfer_matrix(DTIL, m, t0, tf)
    edges = section_edges(m, t0, tf)
    for k in range(DTIL.size):
        for j in range(m):
            want = transfer_element(DTIL[k], edges[j], edges[j + 1], tf)
            assert abs(G[k, j] - want) < 1e-10


def test_transfer_matrix_zero_detuning_is_section_length():
    G = transfer_matrix([0.0], 4, 0.0, 40.0)
    np.testing.assert_allclose(G[0], np.full(4, 10.0), atol=1e-12)


def test_section_edges_validation():
    with pytest.raises(ConfigError):
        section_edges(0, 0.0, 1.0)
    with pytest.raises(ConfigError):
        section_edges(3, 1.0, 1.0)


def test_boundary_targets_hold_is_consistent():
    # eps0 = epsf = eps with a constant drive: y must equal G summed,
    # scaled by the equilibrium amplitude relation
    t0, tf = 0.0, 50.0
    y = boundary_targets(DTIL, 0.3, 0.3, t0, tf)
    G = transfer_matrix(DTIL, 5, t0, tf)
    np.testing.assert_allclose(G @ np.full(5, 0.3), y, atol=1e-10)
    with pytest.raises(DegenerateDetuning):
        boundary_targets([0.0, 0.1], 0.1, 0.2, 0.0, 1.0)


def test_min_norm_against_normal_equations():
    rng = np.random.default_rng(5)
    G = rng.normal(size=(4, 9)) + 1j * rng.normal(size=(4, 9))
    y = rng.normal(size=4) + 1j * rng.normal(size=4)
    sol = solve_min_norm(G, y)
    np.testing.assert_allclose(
        sol.essential, min_norm_normal_equations(G, y), atol=1e-10
    )
    # constraints hold, residual at solver precision
    np.testing.assert_allclose(G @ sol.sections(), y, atol=1e-12)
    # null basis: orthonormal and annihilated by G
    nb = sol.null_basis
    np.testing.assert_allclose(nb.conj().T @ nb, np.eye(5), atol=1e-12)
    assert np.max(np.abs(G @ nb)) < 1e-12


def test_null_motion_keeps_constraints():
    rng = np.random.default_rng(6)
    G = rng.normal(size=(3, 8)) + 1j * rng.normal(size=(3, 8))
    y = rng.normal(size=3) + 1j * rng.normal(size=3)
    sol = solve_min_norm(G, y)
    moved = sol.with_x(rng.normal(size=5) + 1j * rng.normal(size=5))
    np.testing.assert_allclose(G @ moved.sections(), y, atol=1e-11)
    # energy splits orthogonally
    assert pulse_energy(moved) == pytest.approx(
        np.sum(np.abs(sol.essential) ** 2) + np.sum(np.abs(moved.x) ** 2)
    )


def test_solver_error_paths():
    G = np.ones((3, 2), dtype=complex)
    with pytest.raises(ConfigError):
        solve_min_norm(G, np.ones(3))
    G = np.vstack([np.ones(5), np.ones(5)]).astype(complex)
    with pytest.raises(RankDeficient):
        solve_min_norm(G, np.ones(2))
    with pytest.raises(DimensionMismatch):
        solve_min_norm(np.ones((2, 5), dtype=complex) + 1j, np.ones(3))
    sol = solve_min_norm(np.eye(2, 6) + 0j, np.ones(2))
    with pytest.raises(DimensionMismatch):
        sol.with_x(np.zeros(3))


def test_peak_power_bound_and_square_case():
    sol = solve_transfer(DTIL, 8, 0.0, 60.0, 0.0, 0.4)
    assert peak_power_lower_bound(sol) <= peak_power(sol) + 1e-15
    # m == n leaves no freedom: optimizer is a no-op
    square = solve_transfer(DTIL, 4, 0.0, 60.0, 0.0, 0.4)
    out, info = optimize_peak_power(square, seed=1)
    assert info["nit"] == 0
    np.testing.assert_array_equal(out.sections(), square.sections())


def test_optimizer_deterministic_and_improves():
    sol = solve_transfer(DTIL, 8, 0.0, 60.0, 0.0, 0.4)
    a, ia = optimize_peak_power(sol, seed=7, generations=60)
    b, ib = optimize_peak_power(sol, seed=7, generations=60)
    np.testing.assert_array_equal(a.x, b.x)
    assert ia["pmax"] == ib["pmax"]
    assert ia["pmax"] <= peak_power(sol) + 1e-12
    assert ia["pmax"] >= peak_power_lower_bound(sol) - 1e-12


def test_assembled_pulse_hits_target_exactly():
    # independent RK4 through the assembled pulse must land every hybrid
    # mode on its final equilibrium
    t0, tf, epsf = 0.0, 60.0, 0.4
    m = 6
    sol = solve_transfer(DTIL, m, t0, tf, 0.0, epsf)
    pulse = assemble_pulse(sol, t0, tf, 0.0, epsf)
    omega = np.diag(DTIL)
    coupling = np.ones(DTIL.size, dtype=complex)
    alpha = np.zeros(DTIL.size, dtype=complex)
    edges = section_edges(m, t0, tf)
    for j in range(m):
        mid = 0.5 * (edges[j] + edges[j + 1])
        amp = pulse(mid)
        alpha = rk4_mean_field(
            omega, coupling, lambda t, a=amp: a, alpha, edges[j], edges[j + 1], 3000
        )
    target = 1j * epsf / DTIL
    assert np.max(np.abs(alpha - target) / np.abs(target)) < 1e-9


def test_multiport_single_port_reduces():
    t0, tf, m = 0.0, 60.0, 7
    single = solve_transfer(DTIL, m, t0, tf, 0.0, 0.4)
    multi = solve_multiport(
        DTIL,
        np.eye(DTIL.size),
        np.ones((DTIL.size, 1)),
        m,
        t0,
        tf,
        [0.0],
        [0.4],
    )
    np.testing.assert_allclose(
        multi.port_sections()[0], single.sections(), atol=1e-10
    )
    assert multi.port_sections().shape == (1, m)


def test_multiport_two_ports_constraints_hold():
    t0, tf, m = 0.0, 50.0, 5
    rng = np.random.default_rng(2)
    C = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))
    multi = solve_multiport(
        DTIL, np.eye(4), C, m, t0, tf, [0.0, 0.0], [0.3, -0.2j]
    )
    # verify with the exact constant-drive update per section:
    # abar + (alpha - abar) e^{-i dtil dt}
    edges = section_edges(m, t0, tf)
    ps = multi.port_sections()
    alpha = np.zeros(4, dtype=complex)
    dt = np.diff(edges)
    for j in range(m):
        amp = C @ ps[:, j]
        abar = 1j * amp / DTIL
        alpha = abar + (alpha - abar) * np.exp(-1j * DTIL * dt[j])
    target = 1j * (C @ np.array([0.3, -0.2j])) / DTIL
    assert np.max(np.abs(alpha - target)) < 1e-9


def test_multiport_validation():
    with pytest.raises(DimensionMismatch):
        solve_multiport(DTIL, np.eye(4), np.ones((3, 2)), 5, 0, 50, 0, 0)
    with pytest.raises(DegenerateDetuning):
        solve_multiport([0.0], np.eye(1), np.ones((1, 1)), 3, 0, 50, 0, 0)


def test_filtered_matrix_allpass_recovers_plain():
    # a band far wider than any spectral feature with a padded window
    # must reproduce the unfiltered matrix
    m, t0, tf = 5, 0.0, 60.0
    G = transfer_matrix(DTIL, m, t0, tf)
    wmax = 1e6 * float(np.max(np.abs(DTIL)))
    Gf = filtered_transfer_matrix(
        DTIL, m, t0, tf, band=(-wmax, wmax), window=(t0 - 10.0, tf + 10.0)
    )
    assert np.max(np.abs(Gf - G)) < 1e-8


def test_filtered_matrix_element_vs_nested_quadrature():
    # sharp in-band filter, one element, against the brute-force
    # time-domain convolution oracle
    m, t0, tf = 3, 0.0, 30.0
    band = (-0.6, 0.6)
    window = (-5.0, 35.0)
    dt1 = DTIL[:2]
    Gf = filtered_transfer_matrix(dt1, m, t0, tf, band=band, window=window)
    edges = section_edges(m, t0, tf)
    for k in range(2):
        for j in range(m):
            want = filtered_transfer_element(
                dt1[k], edges[j], edges[j + 1], tf, band[0], band[1], *window
            )
            assert abs(Gf[k, j] - want) < 1e-6


def test_filtered_matrix_error_paths():
    with pytest.raises(ConfigError):
        filtered_transfer_matrix(DTIL, 4, 0.0, 60.0, band=(0.5, 0.5))
    with pytest.raises(ConfigError):
        filtered_transfer_matrix(DTIL, 4, 0.0, 60.0, band=(-1, 1), window=(5.0, 5.0))
    # window edge a hair away from a section edge defeats the tail series
    with pytest.raises(QuadratureFailure):
        filtered_transfer_matrix(
            DTIL, 4, 0.0, 60.0, band=(-1e9, 1e9), window=(0.0, 60.0 + 1e-9)
        )
