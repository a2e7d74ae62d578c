"""Network construction, validation, JSON round-trips, reference device."""

import json

import numpy as np
import pytest

from staforge import (
    ConfigError,
    DimensionMismatch,
    ModeNetwork,
    NonHermitianCoupling,
    NonPassive,
    hybridize,
    load_network,
    network_from_config,
    network_to_config,
    qubit_block,
    reference_calibration,
    reference_device,
    single_mode,
)
from staforge.units import TWO_PI, rad_ns_from_mhz

from _oracles import eig2x2


def test_single_mode_passthrough():
    net = single_mode(0.3, 0.05, coupling=2.0 - 1.0j)
    assert net.n_modes == 1
    assert net.omega[0, 0] == pytest.approx(0.3 - 0.025j)
    assert net.drive_coupling[0] == pytest.approx(2.0 - 1.0j)
    np.testing.assert_allclose(net.kappas, [0.05])
    np.testing.assert_allclose(net.detunings, [0.3])


def test_rejects_non_square_omega():
    with pytest.raises(DimensionMismatch):
        ModeNetwork(omega=np.zeros((2, 3)), drive_coupling=np.zeros(2))


def test_rejects_wrong_coupling_shape():
    with pytest.raises(DimensionMismatch):
        ModeNetwork(omega=np.eye(2), drive_coupling=np.zeros(3))


def test_rejects_non_hermitian_offdiagonal():
    omega = np.array([[0.0, 0.1], [0.3, 0.0]], dtype=complex)
    with pytest.raises(NonHermitianCoupling):
        ModeNetwork(omega=omega, drive_coupling=np.ones(2))


def test_rejects_gain():
    omega = np.array([[0.1 + 0.2j]])  # positive imag part = gain
    with pytest.raises(NonPassive):
        ModeNetwork(omega=omega, drive_coupling=np.ones(1))


def test_kappas_and_detunings_views():
    omega = np.array([[0.2 - 0.05j, 0.1], [0.1, -0.3]], dtype=complex)
    net = ModeNetwork(omega=omega, drive_coupling=np.ones(2))
    np.testing.assert_allclose(net.detunings, [0.2, -0.3])
    np.testing.assert_allclose(net.kappas, [0.1, 0.0])


def test_qubit_block_slices_block_diagonal():
    dev = reference_device()
    b0 = qubit_block(dev, 0)
    b1 = qubit_block(dev, 1)
    np.testing.assert_allclose(b0.omega, dev.omega[:2, :2])
    np.testing.assert_allclose(b1.omega, dev.omega[2:, 2:])
    np.testing.assert_allclose(b0.drive_coupling, dev.drive_coupling[:2])
    assert b0.drive_frequency == dev.drive_frequency
    with pytest.raises(ConfigError):
        qubit_block(dev, 2)
    with pytest.raises(DimensionMismatch):
        qubit_block(single_mode(0.1, 0.1), 0)


def test_config_round_trip(tmp_path):
    dev = reference_device()
    cfg = network_to_config(dev)
    back = network_from_config(cfg)
    np.testing.assert_allclose(back.omega, dev.omega, atol=1e-12)
    np.testing.assert_allclose(back.drive_coupling, dev.drive_coupling, atol=1e-12)
    path = tmp_path / "dev.json"
    path.write_text(json.dumps(cfg))
    loaded = load_network(path)
    np.testing.assert_allclose(loaded.omega, dev.omega, atol=1e-12)


def test_config_error_reporting(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"modes": [{"detuning_mhz": 1.0}]}')
    with pytest.raises(ConfigError, match="kappa_mhz"):
        load_network(bad)
    notjson = tmp_path / "notjson.json"
    notjson.write_text("{")
    with pytest.raises(ConfigError, match="invalid JSON"):
        load_network(notjson)


def test_config_coupling_indices_checked():
    cfg = {
        "modes": [
            {"detuning_mhz": 0.0, "kappa_mhz": 1.0},
            {"detuning_mhz": 5.0, "kappa_mhz": 0.0},
        ],
        "couplings": [{"i": 0, "j": 5, "j_mhz": 3.0}],
    }
    with pytest.raises(ConfigError):
        network_from_config(cfg)


# ---------------------------------------------------------------------------
# reference device: the calibration table must be reproduced exactly


REF_DRIVE_GHZ = 6.44025
REF_TABLE = {
    0: {"f_ghz": (6.4427, 6.4634), "kappa": (1 / 62.88, 1 / 17.86)},
    1: {"f_ghz": (6.4378, 6.4673), "kappa": (1 / 77.93, 1 / 15.64)},
}


def _expected_pair(state):
    # TWO_PI * GHz = rad/ns directly
    row = REF_TABLE[state]
    pair = np.array(
        [
            TWO_PI * (f - REF_DRIVE_GHZ) - 0.5j * k
            for f, k in zip(row["f_ghz"], row["kappa"])
        ]
    )
    return pair[np.argsort(pair.real)]


@pytest.mark.parametrize("state", [0, 1])
def test_reference_device_reproduces_calibration(state):
    dev = reference_device()
    block = qubit_block(dev, state)
    got = hybridize(block).detunings
    want = _expected_pair(state)
    # within 1% in both frequency and linewidth, per-mode
    for g, w in zip(got, want):
        assert abs(g.real - w.real) <= 0.01 * max(abs(w.real), 1e-6)
        assert abs(g.imag - w.imag) <= 0.01 * abs(w.imag)


@pytest.mark.parametrize("state", [0, 1])
def test_reference_calibration_closed_form_inverse(state):
    cal = reference_calibration()[state]
    assert cal["eig_residual"] < 1e-12
    block = np.array(
        [
            [cal["delta_a"] - 0.5j * cal["kappa_a"], cal["j"]],
            [cal["j"], cal["delta_b"]],
        ]
    )
    np.testing.assert_allclose(
        eig2x2(block), cal["hybrid_targets"], rtol=0, atol=1e-14
    )


def test_reference_block0_linewidth_sum_matches_port_coupling():
    # total decay of a two-mode block with one lossy port equals that
    # port's coupling; holds exactly by trace invariance
    cal = reference_calibration()[0]
    hybrid_sum = -2.0 * cal["hybrid_targets"].imag.sum()
    assert hybrid_sum == pytest.approx(cal["kappa_a"], rel=1e-12)
    # and the block-0 value lands near the designed 2pi*11.4 MHz port
    assert abs(hybrid_sum - rad_ns_from_mhz(11.4)) / rad_ns_from_mhz(11.4) < 0.01


def test_reference_device_only_filters_driven():
    dev = reference_device()
    # modes 0 and 2 are the feedline-facing modes in each block
    assert dev.drive_coupling[0] != 0
    assert dev.drive_coupling[2] != 0
    assert dev.drive_coupling[1] == 0
    assert dev.drive_coupling[3] == 0


def test_reference_device_drive_frequency():
    dev = reference_device()
    assert dev.drive_frequency == pytest.approx(TWO_PI * REF_DRIVE_GHZ)
