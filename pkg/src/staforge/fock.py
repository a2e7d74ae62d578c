"""Truncated-Fock Lindblad oracle for the mean-field layer.

Evolves the full density matrix of one driven lossy mode,
rho' = -i[H(t), rho] + kappa (a rho a+ - {a+ a, rho}/2) with
H(t) = (delta + kerr_shift) a+a - i (eps(t) a+ - eps*(t) a),
on a finite Fock ladder.  Because the model is linear, a coherent
initial state stays exactly coherent with amplitude given by the
mean-field equation; comparing the two layers validates both.

The right-hand side is applied in O(dim^2) by diagonal and shifted
slices, never through matrix products, and time stepping is classic
fixed-step fourth-order Runge-Kutta with the step chosen against both
the drive sampling and a spectral-radius bound of the generator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionMismatch, TruncationBreach
from .langevin import propagate
from .network import single_mode
from .pulses import Pulse, SampledPulse

__all__ = [
    "FockConfig",
    "coherent_state",
    "lindblad_evolve",
    "liouvillian_spectrum",
    "predicted_spectrum",
    "displaced_frame_check",
    "fidelity_coherent",
    "mean_field",
    "mean_photon",
    "purity",
    "top_population",
]

_TOP_POP_LIMIT = 1e-8


@dataclass(frozen=True)
class FockConfig:
    """Single-mode oracle configuration.

    ``dim`` Fock levels 0..dim-1; ``delta`` detuning (rad/ns), ``kappa``
    loss (1/ns); ``kerr_shift`` is an opaque static detuning offset
    applied to the oracle Hamiltonian only, for probing where the
    linear mean-field model stops being exact.
    """

    dim: int
    delta: float
    kappa: float
    kerr_shift: float = 0.0

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise ConfigError("dim must be an integer >= 2")
        if self.kappa < 0:
            raise ConfigError("kappa must be non-negative")

    @property
    def delta_eff(self) -> float:
        return self.delta + self.kerr_shift


def coherent_state(dim: int, alpha: complex) -> np.ndarray:
    """Normalized coherent-state vector on the truncated ladder."""
    c = np.empty(dim, dtype=complex)
    c[0] = 1.0
    for n in range(1, dim):
        c[n] = c[n - 1] * alpha / np.sqrt(n)
    c *= np.exp(-0.5 * abs(alpha) ** 2)
    return c


class _Generator:
    """Precomputed slices of the Lindblad right-hand side."""

    def __init__(self, cfg: FockConfig):
        d = cfg.dim
        n = np.arange(d)
        self.sq = np.sqrt(np.arange(1.0, d))
        self.lin = (
            -1j * cfg.delta_eff * (n[:, None] - n[None, :])
            - 0.5 * cfg.kappa * (n[:, None] + n[None, :])
        ).astype(complex)
        self.jump = cfg.kappa * np.outer(self.sq, self.sq)

    def apply(self, rho: np.ndarray, eps: complex) -> np.ndarray:
        sq = self.sq
        out = self.lin * rho
        out[:-1, :-1] += self.jump * rho[1:, 1:]
        if eps != 0:
            ec = np.conj(eps)
            out[1:, :] -= eps * sq[:, None] * rho[:-1, :]
            out[:-1, :] += ec * sq[:, None] * rho[1:, :]
            out[:, :-1] += eps * sq[None, :] * rho[:, 1:]
            out[:, 1:] -= ec * sq[None, :] * rho[:, :-1]
        return out


def _step_bound(cfg: FockConfig, pulse: Pulse, t0: float, t1: float, max_step) -> float:
    # peak drive over the run, by dense sampling plus the tail values
    probe = np.abs(np.asarray(pulse(np.linspace(t0, t1, 4097)), dtype=complex))
    eps_peak = float(probe.max())
    d, dl, k = cfg.dim, abs(cfg.delta_eff), cfg.kappa
    radius = 2.0 * ((d - 1) * dl + 2.0 * np.sqrt(d) * eps_peak) + d * k
    h = 0.08 / max(radius, 1e-12)
    if k > 0:
        h = min(h, 0.01 / k)
    if dl > 0:
        h = min(h, 0.01 / dl)
    if isinstance(pulse, SampledPulse):
        h = min(h, pulse.dt / 4.0)
    if max_step is not None:
        if not max_step > 0:
            raise ConfigError("max_step must be positive")
        h = min(h, max_step)
    return h


def _validate_state(rho0: np.ndarray, dim: int) -> np.ndarray:
    rho = np.array(rho0, dtype=complex)
    if rho.shape != (dim, dim):
        raise DimensionMismatch(f"state must be {dim}x{dim}")
    if np.abs(rho - rho.conj().T).max() > 1e-10:
        raise ConfigError("initial state is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > 1e-8 or abs(np.trace(rho).imag) > 1e-10:
        raise ConfigError("initial state is not unit trace")
    if np.linalg.eigvalsh(rho).min() < -1e-10:
        raise ConfigError("initial state is not positive semidefinite")
    return rho


def lindblad_evolve(
    cfg: FockConfig, pulse: Pulse, rho0: np.ndarray, times, *, max_step=None
) -> np.ndarray:
    """Density matrices at the requested times, shape (T, dim, dim).

    Integration runs segment by segment between drive breakpoints so a
    discontinuous section boundary never falls inside a step.  The top
    two Fock populations are monitored at every output time; growth
    past 1e-8 aborts with TruncationBreach since amplitudes are then
    leaning on the truncation edge.
    """
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size < 1 or np.any(np.diff(t) <= 0):
        raise ConfigError("times must be strictly increasing")
    rho = _validate_state(rho0, cfg.dim)
    gen = _Generator(cfg)
    h_cap = _step_bound(cfg, pulse, t[0], t[-1], max_step)

    knots = set(t.tolist())
    for b in np.asarray(pulse.breakpoints(), dtype=float):
        if t[0] < b < t[-1]:
            knots.add(float(b))
    knots = np.array(sorted(knots))
    wanted = {float(x): i for i, x in enumerate(t)}

    out = np.empty((t.size, cfg.dim, cfg.dim), dtype=complex)
    if float(t[0]) in wanted:
        out[0] = rho
        _check_truncation(rho, t[0])
    for a, b in zip(knots[:-1], knots[1:]):
        if b <= t[0]:
            continue
        # left-limit evaluation keeps the final RK4 stage on this segment
        b_inner = np.nextafter(b, a)
        nsub = max(1, int(np.ceil((b - a) / h_cap)))
        h = (b - a) / nsub
        s = a
        for _ in range(nsub):
            e1 = complex(pulse(min(s, b_inner)))
            e2 = complex(pulse(min(s + 0.5 * h, b_inner)))
            e4 = complex(pulse(min(s + h, b_inner)))
            k1 = gen.apply(rho, e1)
            k2 = gen.apply(rho + 0.5 * h * k1, e2)
            k3 = gen.apply(rho + 0.5 * h * k2, e2)
            k4 = gen.apply(rho + h * k3, e4)
            rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            s += h
        idx = wanted.get(float(b))
        if idx is not None:
            out[idx] = rho
            _check_truncation(rho, b)
    return out


def _check_truncation(rho: np.ndarray, t: float) -> None:
    top = float(rho[-1, -1].real + rho[-2, -2].real)
    if top > _TOP_POP_LIMIT:
        raise TruncationBreach(
            f"top two Fock levels hold {top:.2e} population at t={t:g} ns"
        )


def top_population(rho: np.ndarray, levels: int = 2) -> float:
    return float(np.sum(np.diagonal(rho)[-levels:]).real)


def mean_field(rho: np.ndarray) -> complex:
    d = rho.shape[0]
    sq = np.sqrt(np.arange(1.0, d))
    return complex(np.sum(sq * np.diagonal(rho, offset=-1)))


def mean_photon(rho: np.ndarray) -> float:
    return float(np.sum(np.arange(rho.shape[0]) * np.diagonal(rho).real))


def purity(rho: np.ndarray) -> float:
    return float(np.sum(np.abs(rho) ** 2))


def fidelity_coherent(rho: np.ndarray, alpha: complex) -> float:
    """Overlap <alpha| rho |alpha> with the coherent state of amplitude alpha."""
    c = coherent_state(rho.shape[0], alpha)
    return float(np.real(c.conj() @ rho @ c))


def predicted_spectrum(cfg: FockConfig, j_max: int, k_max: int) -> np.ndarray:
    """Closed-form undriven eigenvalues i delta j - kappa (j/2 + k)."""
    j = np.arange(j_max + 1)[:, None]
    k = np.arange(k_max + 1)[None, :]
    return 1j * cfg.delta_eff * j - cfg.kappa * (j / 2.0 + k)


def liouvillian_spectrum(cfg: FockConfig, j_max: int, k_max: int) -> np.ndarray:
    """Eigenvalues of the undriven generator matched to their predictions.

    Builds the dense dim^2 x dim^2 map, diagonalizes it, and assigns to
    every predicted value (and its conjugate) the nearest unused
    computed eigenvalue.  Returns the matched (j_max+1, k_max+1) array
    for the non-negative branch; a prediction left without a neighbor
    within 1e-6 kappa means the truncation distorted that corner.
    """
    if cfg.dim < j_max + k_max + 5:
        raise ConfigError("dim too small for the requested spectrum corner")
    if cfg.kappa <= 0:
        raise ConfigError("spectrum matching needs kappa > 0")
    d = cfg.dim
    a = np.diag(np.sqrt(np.arange(1.0, d)), k=1)
    nhat = np.diag(np.arange(float(d)))
    h = cfg.delta_eff * nhat
    eye = np.eye(d)
    lsup = -1j * (np.kron(eye, h) - np.kron(h.T, eye)) + cfg.kappa * (
        np.kron(a, a) - 0.5 * (np.kron(eye, nhat) + np.kron(nhat, eye))
    )
    eigs = np.linalg.eigvals(lsup)
    used = np.zeros(eigs.size, dtype=bool)
    tol = 1e-6 * cfg.kappa
    matched = np.empty((j_max + 1, k_max + 1), dtype=complex)

    def consume(target: complex) -> complex:
        dist = np.abs(eigs - target)
        dist[used] = np.inf
        i = int(np.argmin(dist))
        if dist[i] > tol:
            raise TruncationBreach(
                f"no eigenvalue within {tol:.2e} of prediction {target:.6g}"
            )
        used[i] = True
        return complex(eigs[i])

    preds = predicted_spectrum(cfg, j_max, k_max)
    for j in range(j_max + 1):
        for k in range(k_max + 1):
            matched[j, k] = consume(preds[j, k])
            if j > 0:
                consume(np.conj(preds[j, k]))
    return matched


def displaced_frame_check(cfg: FockConfig, pulse: Pulse, times) -> float:
    """Worst infidelity between the oracle state and the mean-field prediction.

    Starts from vacuum, evolves the oracle, and scores each output time
    by 1 - <alpha(t)| rho(t) |alpha(t)> where alpha(t) comes from the
    mean-field propagator WITHOUT the kerr shift; a nonzero shift thus
    measures how far the linear model drifts.
    """
    t = np.asarray(times, dtype=float)
    vac = np.zeros((cfg.dim, cfg.dim), dtype=complex)
    vac[0, 0] = 1.0
    rhos = lindblad_evolve(cfg, pulse, vac, t)
    net = single_mode(cfg.delta, cfg.kappa)
    trace = propagate(net, pulse, np.zeros(1, dtype=complex), t)
    worst = 0.0
    for i in range(t.size):
        fid = fidelity_coherent(rhos[i], trace.alphas[i, 0])
        worst = max(worst, 1.0 - fid)
    return worst
