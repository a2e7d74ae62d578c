"""Multi-mode equilibrium transfer by piecewise-constant drives.

A network hybridized into n independent modes reaches the equilibrium
of a new drive value exactly at time tf iff the m section amplitudes
eps_j of a piecewise-constant drive satisfy the n linear constraints

    sum_j G_kj eps_j = y_k,
    G_kj = int_{t_{j-1}}^{t_j} exp(-i dtilde_k (tf - t)) dt,
    y_k  = (eps_f - eps_0 exp(-i dtilde_k (tf - t0))) / (i dtilde_k),

one per hybrid detuning dtilde_k.  With m > n sections the solution
set is an affine space; the SVD gives its minimum-energy point and an
orthonormal basis of the residual freedom, over which the peak section
power can then be minimized (differential evolution plus a
deterministic minimax polish).

The filter-corrected constraint matrix replaces each ideal rectangular
section with its band-limited image and is evaluated by adaptive
quadrature over the passband, plus asymptotic tail integrals when the
band extends far beyond the spectral structure.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import quad_vec
from scipy.optimize import differential_evolution, minimize
from scipy.stats import qmc

from .errors import (
    ConfigError,
    DegenerateDetuning,
    DimensionMismatch,
    QuadratureFailure,
    RankDeficient,
)
from .pulses import PiecewiseConstantPulse

__all__ = [
    "section_edges",
    "transfer_matrix",
    "boundary_targets",
    "MinNormSolution",
    "solve_min_norm",
    "solve_transfer",
    "pulse_energy",
    "peak_power",
    "peak_power_lower_bound",
    "optimize_peak_power",
    "assemble_pulse",
    "MultiportSolution",
    "solve_multiport",
    "filtered_transfer_matrix",
]

_RANK_RTOL = 1e-12


def section_edges(m: int, t0: float, tf: float) -> np.ndarray:
    """Equal-length section edges t0 = e_0 < ... < e_m = tf."""
    if m < 1:
        raise ConfigError("need at least one section")
    if not tf > t0:
        raise ConfigError("tf must exceed t0")
    return np.linspace(t0, tf, m + 1)


def _phi(z: np.ndarray) -> np.ndarray:
    """(exp(z) - 1)/z, series near z = 0 to avoid cancellation."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-4
    zs = np.where(small, 0.0, z)
    with np.errstate(invalid="ignore"):
        direct = np.where(small, 1.0, (np.exp(zs) - 1.0) / np.where(small, 1.0, zs))
    series = 1.0 + z / 2.0 + z * z / 6.0 + z**3 / 24.0
    return np.where(small, series, direct)


def transfer_matrix(detunings, m: int, t0: float, tf: float) -> np.ndarray:
    """Constraint matrix G (n x m) of equal piecewise-constant sections.

    G_kj is the response at tf of hybrid mode k to a unit drive on
    section j; the zero-detuning limit is the section length.
    """
    dtil = np.atleast_1d(np.asarray(detunings, dtype=complex))
    edges = section_edges(m, t0, tf)
    dt = np.diff(edges)
    z = 1j * dtil[:, None] * dt[None, :]
    # G = exp(-i d (tf - t_j)) * dt * (1 - exp(-i d dt))/(i d dt)
    tail = np.exp(-1j * dtil[:, None] * (tf - edges[1:])[None, :])
    return tail * dt[None, :] * _phi(-z)


def boundary_targets(detunings, eps0: complex, epsf: complex, t0: float, tf: float) -> np.ndarray:
    """Right-hand side y (n,) for an equilibrium-to-equilibrium transfer."""
    dtil = np.atleast_1d(np.asarray(detunings, dtype=complex))
    if np.any(dtil == 0):
        raise DegenerateDetuning("a hybrid detuning is exactly zero")
    return (epsf - eps0 * np.exp(-1j * dtil * (tf - t0))) / (1j * dtil)


@dataclass(frozen=True)
class MinNormSolution:
    """Affine solution set of G eps = y, anchored at its min-norm point.

    ``essential`` is the minimum-energy solution, ``null_basis`` an
    orthonormal (m, m-n) basis of the homogeneous space, ``x`` the free
    coordinates.  The realized sections are
    ``essential + null_basis @ x``.
    """

    essential: np.ndarray
    null_basis: np.ndarray
    x: np.ndarray
    singular_values: np.ndarray

    def __post_init__(self):
        for name in ("essential", "null_basis", "x", "singular_values"):
            arr = np.array(getattr(self, name), dtype=complex if name != "singular_values" else float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.null_basis.shape != (self.essential.size, self.x.size):
            raise DimensionMismatch("null basis shape disagrees with x")

    @property
    def m(self) -> int:
        return self.essential.size

    @property
    def n_constraints(self) -> int:
        return self.singular_values.size

    def sections(self) -> np.ndarray:
        if self.x.size == 0:
            return np.asarray(self.essential).copy()
        return self.essential + self.null_basis @ self.x

    def with_x(self, x) -> "MinNormSolution":
        x = np.asarray(x, dtype=complex)
        if x.shape != self.x.shape:
            raise DimensionMismatch(f"x must have shape {self.x.shape}")
        return replace(self, x=x)


def solve_min_norm(G: np.ndarray, y: np.ndarray) -> MinNormSolution:
    """Minimum-energy solution of the underdetermined system G eps = y."""
    G = np.asarray(G, dtype=complex)
    y = np.asarray(y, dtype=complex)
    n, m = G.shape
    if y.shape != (n,):
        raise DimensionMismatch(f"y shape {y.shape} for {n} constraints")
    if m < n:
        raise ConfigError(f"need at least as many sections ({m}) as modes ({n})")
    u, s, vh = np.linalg.svd(G, full_matrices=True)
    if s[-1] < _RANK_RTOL * s[0]:
        raise RankDeficient(
            f"singular value ratio {s[-1] / s[0]:.2e} below {_RANK_RTOL:g}"
        )
    v = vh.conj().T
    coeff = (u.conj().T @ y) / s
    essential = v[:, :n] @ coeff
    return MinNormSolution(
        essential=essential,
        null_basis=v[:, n:],
        x=np.zeros(m - n, dtype=complex),
        singular_values=s,
    )


def solve_transfer(detunings, m, t0, tf, eps0, epsf) -> MinNormSolution:
    """Build the constraint system and return its min-norm solution."""
    G = transfer_matrix(detunings, m, t0, tf)
    y = boundary_targets(detunings, eps0, epsf, t0, tf)
    return solve_min_norm(G, y)


def pulse_energy(solution: MinNormSolution) -> float:
    """Sum of squared section amplitudes.

    Equals |essential|^2 + |x|^2 because the null basis is orthonormal
    and orthogonal to the essential part.
    """
    return float(np.sum(np.abs(solution.sections()) ** 2))


def peak_power(solution: MinNormSolution) -> float:
    return float(np.max(np.abs(solution.sections()) ** 2))


def peak_power_lower_bound(solution: MinNormSolution) -> float:
    """Energy/m of the min-norm point: no drive can beat its mean power."""
    return float(np.sum(np.abs(solution.essential) ** 2) / solution.m)


def optimize_peak_power(
    solution: MinNormSolution,
    *,
    seed: int,
    bounds_scale: float = 10.0,
    generations: int = 300,
    pop_factor: int = 15,
    refine: bool = True,
) -> tuple[MinNormSolution, dict]:
    """Minimize the peak section power over the solution freedom.

    Global stage: differential evolution (rand/1/bin, F=0.8, CR=0.9,
    population pop_factor per real dimension) over the box
    |Re x_i|, |Im x_i| <= bounds_scale * |essential|, seeded and
    deterministic.  The initial population is Latin-hypercube within
    the essential solution's own amplitude scale and includes x = 0.
    Because the objective is a maximum of smooth powers, the global
    stage is polished by a deterministic epigraph minimax solve from
    its best member.
    """
    if seed is None:
        raise ConfigError("a seed is required for reproducible optimization")
    d = solution.x.size
    if d == 0:
        return solution, {"pmax": peak_power(solution), "nit": 0, "refined": False}
    ess = solution.essential
    null = solution.null_basis
    bound = bounds_scale * float(np.linalg.norm(ess))

    def objective_population(xreal):
        x = xreal[:d] + 1j * xreal[d:]
        eps = ess[:, None] + null @ x
        return np.max(np.abs(eps) ** 2, axis=0)

    npop = pop_factor * 2 * d
    sampler = qmc.LatinHypercube(d=2 * d, seed=np.random.default_rng(seed))
    init = (sampler.random(npop) * 2.0 - 1.0) * min(
        2.0 * float(np.max(np.abs(ess))), bound
    )
    init[0] = 0.0
    result = differential_evolution(
        objective_population,
        bounds=[(-bound, bound)] * (2 * d),
        strategy="rand1bin",
        mutation=0.8,
        recombination=0.9,
        popsize=pop_factor,
        maxiter=generations,
        tol=0.0,
        seed=seed,
        init=init,
        polish=False,
        updating="deferred",
        vectorized=True,
    )
    best_x, best_p = result.x, float(result.fun)
    info = {"pmax_global": best_p, "nit": int(result.nit), "refined": False}
    if refine:
        refined = _refine_minimax(ess, null, best_x, bound)
        if refined is not None and refined[1] < best_p:
            best_x, best_p = refined
            info["refined"] = True
    info["pmax"] = best_p
    return solution.with_x(best_x[:d] + 1j * best_x[d:]), info


def _refine_minimax(ess, null, x0, bound):
    """Epigraph form: min t subject to |eps_j(x)|^2 <= t, solved by SLSQP."""
    m, d = null.shape

    def eps_of(xreal):
        return ess + null @ (xreal[:d] + 1j * xreal[d:])

    z0 = np.concatenate([[np.max(np.abs(eps_of(x0)) ** 2)], x0])
    constraints = [
        {"type": "ineq", "fun": (lambda z, j=j: z[0] - np.abs(eps_of(z[1:])[j]) ** 2)}
        for j in range(m)
    ]
    bounds = [(None, None)] + [(-bound, bound)] * (2 * d)
    res = minimize(
        lambda z: z[0],
        z0,
        method="SLSQP",
        constraints=constraints,
        bounds=bounds,
        options={"maxiter": 500, "ftol": 1e-14},
    )
    if not np.isfinite(res.x[0]):
        return None
    x = res.x[1:]
    # report the actual peak at the refined point, not the epigraph value
    p = float(np.max(np.abs(eps_of(x)) ** 2))
    return x, p


def assemble_pulse(
    solution: MinNormSolution, t0: float, tf: float, eps0: complex, epsf: complex
) -> PiecewiseConstantPulse:
    """Piecewise-constant pulse realizing the solution on [t0, tf]."""
    sections = solution.sections()
    return PiecewiseConstantPulse(
        edges=section_edges(sections.size, t0, tf),
        amplitudes=sections,
        pre=eps0,
        post=epsf,
    )


@dataclass(frozen=True)
class MultiportSolution:
    """Per-port section amplitudes from a stacked multiport solve."""

    solution: MinNormSolution
    n_ports: int
    m: int

    def port_sections(self) -> np.ndarray:
        return self.solution.sections().reshape(self.n_ports, self.m)


def solve_multiport(
    detunings,
    to_hybrid: np.ndarray,
    port_couplings: np.ndarray,
    m: int,
    t0: float,
    tf: float,
    eps0s,
    epsfs,
) -> MultiportSolution:
    """Transfer with several independently shaped drive ports.

    ``port_couplings`` (n_modes x n_ports) maps port amplitudes to mode
    drives; port i holds eps0s[i] before t0 and epsfs[i] after tf.  The
    stacked unknown is the (n_ports * m) vector of section amplitudes,
    port-major.
    """
    dtil = np.atleast_1d(np.asarray(detunings, dtype=complex))
    if np.any(dtil == 0):
        raise DegenerateDetuning("a hybrid detuning is exactly zero")
    n = dtil.size
    C = np.atleast_2d(np.asarray(port_couplings, dtype=complex))
    if C.shape[0] != n:
        raise DimensionMismatch("port couplings must have one row per mode")
    p = C.shape[1]
    eps0s = np.broadcast_to(np.asarray(eps0s, dtype=complex), (p,))
    epsfs = np.broadcast_to(np.asarray(epsfs, dtype=complex), (p,))
    oc = np.asarray(to_hybrid, dtype=complex) @ C  # (n, p) hybrid-frame weights
    G = transfer_matrix(dtil, m, t0, tf)  # (n, m)
    M = (oc[:, :, None] * G[:, None, :]).reshape(n, p * m)
    phase = np.exp(-1j * dtil * (tf - t0))
    y = np.einsum("kp,p->k", oc, epsfs) - np.einsum("kp,p->k", oc, eps0s) * phase
    y = y / (1j * dtil)
    sol = solve_min_norm(M, y)
    return MultiportSolution(solution=sol, n_ports=p, m=m)


# ---------------------------------------------------------------------------
# band-limited (filter-corrected) constraint matrix


def filtered_transfer_matrix(
    detunings,
    m: int,
    t0: float,
    tf: float,
    *,
    band: tuple[float, float],
    window: tuple[float, float] | None = None,
    quad_tol: float = 1e-12,
) -> np.ndarray:
    """Constraint matrix with each section passed through a brick-wall filter.

    ``band`` = (w_lo, w_hi) is the passband in the drive rotating frame
    (rad/ns); ``window`` is the time interval over which the filtered
    section is integrated against the mode response, defaulting to
    [t0, tf].  Equals :func:`transfer_matrix` when the band covers the
    whole spectral support of the sections.

    The passband integral is evaluated by adaptive Gauss-Kronrod
    quadrature on a core interval containing all spectral structure;
    any band range beyond the core is added via integration-by-parts
    asymptotic tail series (exact for window-aligned section edges).
    """
    dtil = np.atleast_1d(np.asarray(detunings, dtype=complex))
    n = dtil.size
    edges = section_edges(m, t0, tf)
    w_lo, w_hi = float(band[0]), float(band[1])
    if not w_hi > w_lo:
        raise ConfigError("band must satisfy w_lo < w_hi")
    T0, T1 = (float(window[0]), float(window[1])) if window is not None else (t0, tf)
    if not T1 > T0:
        raise ConfigError("window must have positive length")

    dt = np.diff(edges)
    wlen = T1 - T0

    def integrand(w):
        # spectra of the rectangular sections ...
        a = np.exp(1j * w * edges[:-1]) * dt * _phi(1j * w * dt)
        # ... times the windowed mode response at offset dtilde - w
        z = 1j * (dtil - w)
        b = np.exp(z * T0) * wlen * _phi(z * wlen)
        return b[:, None] * a[None, :]

    # core interval: wide enough that beyond it the integrand is in its
    # asymptotic 1/w^2 regime for every phase present
    taus = (edges[:, None] - np.array([T0, T1])[None, :]).ravel()
    nz = np.abs(taus[np.abs(taus) > 1e-12])
    w_core = 50.0 * max(np.max(np.abs(dtil)), 1.0 / dt.min(), 1.0 / wlen)
    if nz.size and (w_lo < -w_core or w_hi > w_core):
        needed = 50.0 / nz.min()
        if needed > 1e5:
            raise QuadratureFailure(
                "window edge nearly coincides with a section edge; "
                "tail expansion would not converge"
            )
        w_core = max(w_core, needed)

    lo = max(w_lo, -w_core)
    hi = min(w_hi, w_core)
    total = np.zeros((n, m), dtype=complex)
    if hi > lo:
        value, err = quad_vec(integrand, lo, hi, epsabs=quad_tol, epsrel=1e-10,
                              norm="max", limit=2000)
        if not np.isfinite(err) or err > max(1e3 * quad_tol, 1e-9 * np.abs(value).max()):
            raise QuadratureFailure(f"passband quadrature error estimate {err:.2e}")
        total += value
    if w_lo < lo:
        total += _tail_block(dtil, edges, T0, T1, w_lo, lo)
    if w_hi > hi:
        total += _tail_block(dtil, edges, T0, T1, hi, w_hi)
    prefactor = np.exp(-1j * dtil * tf) / (2.0 * np.pi)
    return prefactor[:, None] * total


def _tail_block(dtil, edges, T0, T1, a, b):
    """Tail of the passband integral over [a, b], |w| large throughout."""
    n = dtil.size
    m = edges.size - 1
    out = np.zeros((n, m), dtype=complex)
    for k in range(n):
        d = dtil[k]
        for j in range(m):
            acc = 0.0 + 0.0j
            for tp, sp in ((edges[j + 1], 1.0), (edges[j], -1.0)):
                for tq, sq in ((T1, 1.0), (T0, -1.0)):
                    tau = tp - tq
                    series = 0.0 + 0.0j
                    dpow = 1.0 + 0.0j
                    for s in range(12):
                        term = dpow * _oscillatory_inverse_power(s + 2, tau, a, b)
                        series += term
                        dpow *= d
                        if abs(term) < 1e-18:
                            break
                    acc += sp * sq * np.exp(1j * d * tq) * series
            out[k, j] = acc
    return out


def _oscillatory_inverse_power(order: int, tau: float, a: float, b: float) -> complex:
    """int_a^b exp(i w tau) / w^order dw for an interval with |w| large."""
    if tau == 0.0:
        return (b ** (1 - order) - a ** (1 - order)) / (1.0 - order)
    w_min = min(abs(a), abs(b))
    coeff = 1.0 + 0.0j
    acc = 0.0 + 0.0j
    for r in range(40):
        p = order + r
        boundary = (
            np.exp(1j * b * tau) * b ** (-p) - np.exp(1j * a * tau) * a ** (-p)
        ) / (1j * tau)
        acc += coeff * boundary
        coeff *= p / (1j * tau)
        remainder = abs(coeff) * w_min ** (-p) / p
        if remainder < 1e-20 * max(1.0, abs(acc)):
            return acc
    raise QuadratureFailure(
        f"tail series for tau={tau:g} over [{a:g}, {b:g}] did not converge"
    )
