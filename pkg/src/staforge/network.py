"""Mode networks: the complex frequency matrix and its construction.

A network of n linear bosonic modes is described by an n x n complex
matrix ``omega`` whose diagonal holds detuning - i*kappa/2 per mode
(detuning relative to the drive frame, loss rate kappa >= 0) and whose
off-diagonal block is a Hermitian coupling: omega_ij == conj(omega_ji).
Mean-field amplitudes obey

    d(alpha)/dt = -i * omega @ alpha - drive_coupling * eps(t)

for a scalar drive eps(t) fanned out by the per-mode coupling vector.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    CalibrationInfeasible,
    ConfigError,
    DimensionMismatch,
    NonHermitianCoupling,
    NonPassive,
)
from .units import rad_ns_from_ghz, rad_ns_from_mhz

__all__ = [
    "ModeNetwork",
    "single_mode",
    "qubit_block",
    "network_from_config",
    "network_to_config",
    "load_network",
    "reference_device",
    "reference_calibration",
]

_HERMITICITY_TOL = 1e-10
_PASSIVITY_TOL = 1e-12


@dataclass(frozen=True)
class ModeNetwork:
    """Immutable n-mode network in a fixed drive rotating frame.

    Parameters
    ----------
    omega : (n, n) complex ndarray
        Frequency matrix, diagonal detuning - i*kappa/2, Hermitian
        couplings off the diagonal.  rad/ns.
    drive_coupling : (n,) complex ndarray
        Per-mode weights of the shared scalar drive.
    drive_frequency : float, optional
        Angular frequency of the rotating frame, rad/ns.  Only used for
        reporting absolute frequencies.
    """

    omega: np.ndarray
    drive_coupling: np.ndarray
    drive_frequency: float | None = None

    def __post_init__(self):
        omega = np.array(self.omega, dtype=complex)
        coupling = np.array(self.drive_coupling, dtype=complex)
        if omega.ndim != 2 or omega.shape[0] != omega.shape[1]:
            raise DimensionMismatch(f"omega must be square, got {omega.shape}")
        n = omega.shape[0]
        if coupling.shape != (n,):
            raise DimensionMismatch(
                f"drive coupling shape {coupling.shape} for {n} modes"
            )
        scale = max(np.abs(omega).max(), 1.0)
        off = omega - np.diag(np.diag(omega))
        if np.abs(off - off.conj().T).max() > _HERMITICITY_TOL * scale:
            raise NonHermitianCoupling(
                "coupling block must satisfy omega_ij == conj(omega_ji)"
            )
        gain = np.diag(omega).imag.max()
        if gain > _PASSIVITY_TOL * scale:
            raise NonPassive(f"mode with negative loss: max Im(diag) = {gain:.3e}")
        omega.setflags(write=False)
        coupling.setflags(write=False)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "drive_coupling", coupling)

    @property
    def n_modes(self) -> int:
        return self.omega.shape[0]

    @property
    def detunings(self) -> np.ndarray:
        return np.diag(self.omega).real.copy()

    @property
    def kappas(self) -> np.ndarray:
        return -2.0 * np.diag(self.omega).imag


def single_mode(delta: float, kappa: float, coupling: complex = 1.0) -> ModeNetwork:
    """One-mode network with detuning delta and loss kappa (rad/ns, 1/ns)."""
    return ModeNetwork(
        omega=np.array([[delta - 0.5j * kappa]]),
        drive_coupling=np.array([coupling]),
    )


def qubit_block(net: ModeNetwork, state: int) -> ModeNetwork:
    """Extract one qubit-state block of a block-diagonal two-block device."""
    if net.n_modes % 2 != 0:
        raise DimensionMismatch("qubit blocks need an even mode count")
    half = net.n_modes // 2
    if state not in (0, 1):
        raise ConfigError("qubit state must be 0 or 1")
    sl = slice(0, half) if state == 0 else slice(half, 2 * half)
    return ModeNetwork(
        omega=net.omega[sl, sl],
        drive_coupling=net.drive_coupling[sl],
        drive_frequency=net.drive_frequency,
    )


# ---------------------------------------------------------------------------
# JSON config


def network_from_config(cfg: dict) -> ModeNetwork:
    """Build a network from its JSON-style dict description.

    Expected keys: ``modes`` (list of {detuning_mhz, kappa_mhz}),
    optional ``couplings`` (list of {i, j, j_mhz}), optional
    ``drive_coupling`` (list of numbers or [re, im] pairs, default all
    ones), optional ``drive_freq_ghz``.
    """
    try:
        modes = cfg["modes"]
    except (KeyError, TypeError):
        raise ConfigError("config must contain a 'modes' list")
    if not isinstance(modes, list) or not modes:
        raise ConfigError("'modes' must be a non-empty list")
    n = len(modes)
    omega = np.zeros((n, n), dtype=complex)
    for i, mode in enumerate(modes):
        try:
            delta = rad_ns_from_mhz(float(mode["detuning_mhz"]))
            kappa = rad_ns_from_mhz(float(mode["kappa_mhz"]))
        except (KeyError, TypeError, ValueError):
            raise ConfigError(f"mode {i} needs numeric detuning_mhz and kappa_mhz")
        omega[i, i] = delta - 0.5j * kappa
    for c in cfg.get("couplings", []):
        try:
            i, j = int(c["i"]), int(c["j"])
            g = rad_ns_from_mhz(float(c["j_mhz"]))
        except (KeyError, TypeError, ValueError):
            raise ConfigError("couplings need integer i, j and numeric j_mhz")
        if not (0 <= i < n and 0 <= j < n) or i == j:
            raise ConfigError(f"coupling indices ({i}, {j}) out of range")
        omega[i, j] = g
        omega[j, i] = np.conj(g)
    coupling = cfg.get("drive_coupling")
    if coupling is None:
        cvec = np.ones(n, dtype=complex)
    else:
        cvec = np.array([_complex_from_json(x) for x in coupling])
        if cvec.shape != (n,):
            raise ConfigError("drive_coupling length must equal the mode count")
    freq = cfg.get("drive_freq_ghz")
    drive_frequency = rad_ns_from_ghz(float(freq)) if freq is not None else None
    return ModeNetwork(omega, cvec, drive_frequency)


def _complex_from_json(x) -> complex:
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return complex(float(x[0]), float(x[1]))
    raise ConfigError(f"cannot read complex value from {x!r}")


def network_to_config(net: ModeNetwork) -> dict:
    from .units import ghz_from_rad_ns, mhz_from_rad_ns

    cfg = {
        "modes": [
            {
                "detuning_mhz": mhz_from_rad_ns(float(d)),
                "kappa_mhz": mhz_from_rad_ns(float(k)),
            }
            for d, k in zip(net.detunings, net.kappas)
        ],
        "couplings": [],
        "drive_coupling": [[float(c.real), float(c.imag)] for c in net.drive_coupling],
    }
    n = net.n_modes
    for i in range(n):
        for j in range(i + 1, n):
            if net.omega[i, j] != 0:
                cfg["couplings"].append(
                    {"i": i, "j": j, "j_mhz": mhz_from_rad_ns(float(net.omega[i, j].real))}
                )
    if net.drive_frequency is not None:
        cfg["drive_freq_ghz"] = ghz_from_rad_ns(net.drive_frequency)
    return cfg


def load_network(path) -> ModeNetwork:
    with open(path) as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    return network_from_config(cfg)


# ---------------------------------------------------------------------------
# Reference readout device
#
# A two-resonator readout chain measured in two qubit states.  The
# calibration below lists, per qubit state, the two hybridized-mode
# frequencies (GHz), their linewidths (1/ns), and the shared drive
# frequency.  Bare two-mode parameters are reconstructed from each pair
# by inverting the 2x2 eigenvalue problem in closed form.

_REF_DRIVE_GHZ = 6.44025
_REF_TABLE = {
    0: {"f_ghz": (6.4427, 6.4634), "kappa": (1 / 62.88, 1 / 17.86)},
    1: {"f_ghz": (6.4378, 6.4673), "kappa": (1 / 77.93, 1 / 15.64)},
}


def _hybrid_pair(state: int) -> np.ndarray:
    row = _REF_TABLE[state]
    pair = np.array(
        [
            rad_ns_from_ghz(f - _REF_DRIVE_GHZ) - 0.5j * k
            for f, k in zip(row["f_ghz"], row["kappa"])
        ]
    )
    return pair[np.argsort(pair.real)]

def _invert_pair(lam_low, lam_high):
    """Bare (delta_a, delta_b, kappa_a, J) reproducing two hybrid modes.

    Inverts eigvals([[da - i ka/2, J], [J, db]]) = (lam_low, lam_high)
    exactly: trace fixes ka and da+db, the squared eigenvalue splitting
    fixes da-db through its imaginary part and J through its real part.
    """
    tr = lam_low + lam_high
    ka = -2.0 * tr.imag
    if ka <= 0:
        raise CalibrationInfeasible("hybrid pair implies non-positive loss")
    split = lam_high - lam_low
    s2 = split * split
    u = -s2.imag / ka  # da - db
    four_j2 = s2.real - u * u + 0.25 * ka * ka
    if four_j2 <= 0:
        raise CalibrationInfeasible("hybrid pair implies imaginary coupling")
    j = 0.5 * np.sqrt(four_j2)
    da = 0.5 * (tr.real + u)
    db = 0.5 * (tr.real - u)
    block = np.array([[da - 0.5j * ka, j], [j, db]])
    ev = np.linalg.eigvals(block)
    ev = ev[np.argsort(ev.real)]
    resid = max(
        abs(ev[0] - lam_low) / abs(lam_low), abs(ev[1] - lam_high) / abs(lam_high)
    )
    if resid > 1e-9:
        raise CalibrationInfeasible(f"round-trip eigenvalue error {resid:.2e}")
    return da, db, ka, j, resid


def reference_calibration() -> dict:
    """Reconstructed bare parameters of the reference device, per state."""
    out = {}
    for state in (0, 1):
        lam = _hybrid_pair(state)
        da, db, ka, j, resid = _invert_pair(lam[0], lam[1])
        out[state] = {
            "delta_a": da,
            "delta_b": db,
            "kappa_a": ka,
            "j": j,
            "hybrid_targets": lam,
            "eig_residual": resid,
        }
    return out


def reference_device() -> ModeNetwork:
    """The calibrated two-state readout device as a 4-mode network.

    Modes 0-1 form the (filter, resonator) pair with the qubit in state
    0, modes 2-3 the same pair in state 1.  Only the filter modes couple
    to the drive line.  Hybridizing either block reproduces the
    calibration table to numerical precision; the reconstruction
    residuals are available from :func:`reference_calibration`.
    """
    cal = reference_calibration()
    omega = np.zeros((4, 4), dtype=complex)
    for state in (0, 1):
        p = cal[state]
        k = 2 * state
        omega[k, k] = p["delta_a"] - 0.5j * p["kappa_a"]
        omega[k + 1, k + 1] = p["delta_b"]
        omega[k, k + 1] = omega[k + 1, k] = p["j"]
    return ModeNetwork(
        omega=omega,
        drive_coupling=np.array([1.0, 0.0, 1.0, 0.0], dtype=complex),
        drive_frequency=rad_ns_from_ghz(_REF_DRIVE_GHZ),
    )
