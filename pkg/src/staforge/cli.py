"""Command-line front end.

Subcommands: hybridize, cd, mmoc, simulate, qsl, filtercheck,
lindblad-check, sweep.  Every command reads a device (the built-in
reference device or a JSON config), writes CSV/JSON artifacts and SVG
plots into --out, and is deterministic for a fixed --seed.  With
--verify the exit code reports the command's own consistency checks:
0 pass, 1 fail; config problems exit 2, computational errors 3.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import cd as cdmod
from . import fock, iochain, multimode, qsl, reporting
from .errors import ConfigError, RankDeficient, StaforgeError
from .hybrid import adiabatic_timescale, equilibrium_state, hybridize
from .langevin import propagate, settling_time
from .network import (
    ModeNetwork,
    load_network,
    qubit_block,
    reference_device,
    single_mode,
)
from .pulses import PiecewiseConstantPulse, SampledPulse, quench
from .units import TWO_PI, mhz_from_rad_ns, rad_ns_from_mhz

SETTLE_THRESHOLD = float(np.exp(-5.0))


def _parse_complex(text: str) -> complex:
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(parts[0])
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise ConfigError(f"cannot parse complex value {text!r} (use re or re,im)")


def _parse_grid(text: str) -> np.ndarray:
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid {text!r} must be start:stop:count")
        try:
            a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise ConfigError(f"bad grid {text!r}") from exc
        if n < 2:
            raise ConfigError("grid needs at least 2 points")
        return np.linspace(a, b, n)
    try:
        return np.array([float(x) for x in text.split(",")])
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}") from exc


def _load_net(args) -> ModeNetwork:
    if getattr(args, "config", None):
        return load_network(args.config)
    if getattr(args, "single_mode", False):
        # reference resonator alone: 2.45 MHz above drive, 62.88 ns lifetime
        return single_mode(rad_ns_from_mhz(2.45), 1.0 / 62.88)
    return reference_device()


def _select_block(net: ModeNetwork, state) -> ModeNetwork:
    if state is None:
        return net
    return qubit_block(net, state)


def _threads(n_tasks: int) -> int:
    cap = os.environ.get("STA_FORGE_THREADS")
    if cap is not None:
        try:
            cap = int(cap)
        except ValueError as exc:
            raise ConfigError("STA_FORGE_THREADS must be an integer") from exc
        if cap < 1:
            raise ConfigError("STA_FORGE_THREADS must be >= 1")
    else:
        cap = os.cpu_count() or 1
    return max(1, min(cap, n_tasks))


def _outdir(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _decay_horizon(net: ModeNetwork, lifetimes: float = 5.0) -> float:
    # decay is governed by the hybrid linewidths, not the bare ones
    rates = -2.0 * hybridize(net).detunings.imag
    rates = rates[rates > 1e-300]
    if rates.size == 0:
        raise ConfigError("device has no lossy mode; give --t-end explicitly")
    return lifetimes / float(rates.min())


def _verdict(name: str, ok: bool, detail: str) -> bool:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return ok


# ---------------------------------------------------------------------------
# hybridize


def cmd_hybridize(args) -> int:
    net = _load_net(args)
    out = _outdir(args)
    report = {"blocks": []}
    blocks = [("full", net)]
    if net.n_modes == 4 and getattr(args, "config", None) is None:
        blocks += [("state0", qubit_block(net, 0)), ("state1", qubit_block(net, 1))]
    ok = True
    for label, block in blocks:
        spec = hybridize(block)
        rows = []
        print(f"{label}: {block.n_modes} modes")
        for k, dt in enumerate(spec.detunings):
            kappa = -2.0 * dt.imag
            tau = adiabatic_timescale(dt.real, kappa)
            rows.append(
                {
                    "detuning_mhz": mhz_from_rad_ns(dt.real),
                    "kappa_per_ns": kappa,
                    "lifetime_ns": (1.0 / kappa) if kappa > 0 else None,
                    "adiabatic_ns": tau,
                }
            )
            life = f"{1.0 / kappa:9.2f}" if kappa > 0 else "      inf"
            print(
                f"  mode {k}: detuning {mhz_from_rad_ns(dt.real):+9.4f} MHz"
                f"  lifetime {life} ns  adiabatic {tau:9.2f} ns"
            )
        resid = float(
            np.abs(spec.reconstruct() - block.omega).max()
            / max(np.abs(block.omega).max(), 1e-300)
        )
        report["blocks"].append(
            {"label": label, "modes": rows, "reconstruction_residual": resid}
        )
        if args.verify:
            ok &= _verdict(
                f"hybridize/{label}", resid < 1e-10, f"reconstruction residual {resid:.2e}"
            )
    reporting.write_json(os.path.join(out, "hybridize.json"), report)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# cd


def cmd_cd(args) -> int:
    net = _select_block(_load_net(args), args.state)
    out = _outdir(args)
    spec = hybridize(net)
    k = args.mode_index
    if not 0 <= k < spec.n_modes:
        raise ConfigError(f"mode index {k} out of range for {spec.n_modes} modes")
    dtil = spec.detunings[k]
    delta, kappa = float(dtil.real), float(-2.0 * dtil.imag)
    epsf = _parse_complex(args.epsf)
    ref = cdmod.reference_pulse(args.shape, epsf, args.tf)
    drive = cdmod.cd_pulse(ref, delta, kappa)

    t_end = args.tf + _decay_horizon(net)
    times = np.linspace(0.0, t_end, args.samples)
    trace = propagate(net, drive, np.zeros(net.n_modes, dtype=complex), times)

    hybrid_amp = trace.alphas @ spec.to_hybrid.T
    weights = spec.to_hybrid @ net.drive_coupling
    target = 1j * np.outer(ref(times), weights) / spec.detunings[None, :]

    kappa_port = float(np.max(-2.0 * spec.detunings.imag))
    chain = iochain.reference_chain(kappa_port)
    a_field = trace.alphas @ net.drive_coupling
    r_out = iochain.output_field(chain, np.asarray(drive(times), dtype=complex), a_field)
    if args.tau is not None:
        r_out = iochain.low_pass(times, r_out, args.tau)

    reporting.write_pulse_csv(os.path.join(out, "pulse_reference.csv"), times, ref(times))
    reporting.write_pulse_csv(os.path.join(out, "pulse_cd.csv"), times, drive(times))
    reporting.write_trace_csv(os.path.join(out, "trace.csv"), times, trace.alphas)
    reporting.write_output_csv(os.path.join(out, "output.csv"), times, r_out)

    fig = reporting.new_figure(figsize=(9, 4))
    ax1 = fig.add_subplot(1, 2, 1)
    ax1.plot(times, np.abs(r_out))
    ax1.axvline(args.tf, ls="--", lw=0.8, color="gray")
    ax1.set_xlabel("time (ns)")
    ax1.set_ylabel("|r_out|")
    ax2 = fig.add_subplot(1, 2, 2)
    ax2.plot(r_out.real, r_out.imag, lw=0.8)
    ax2.set_xlabel("Re r_out")
    ax2.set_ylabel("Im r_out")
    ax2.set_aspect("equal", adjustable="datalim")
    fig.tight_layout()
    reporting.save_figure(fig, os.path.join(out, "cd.svg"))

    err = np.abs(hybrid_amp[:, k] - target[:, k])
    scale = np.abs(target[:, k]).max()
    rel = float(err.max() / scale) if scale > 0 else float(err.max())
    print(f"target mode {k}: max following error {rel:.3e} relative")
    if args.verify:
        return 0 if _verdict("cd/following", rel <= 1e-9, f"{rel:.3e} <= 1e-9") else 1
    return 0


# ---------------------------------------------------------------------------
# mmoc


def _load_problem(args) -> dict:
    prob = {
        "m": args.m,
        "t0_ns": args.t0,
        "tf_ns": args.tf,
        "eps0": _parse_complex(args.eps0),
        "epsf": _parse_complex(args.epsf),
        "seed": args.seed,
        "bounds_scale": args.bounds_scale,
    }
    if getattr(args, "problem", None):
        with open(args.problem) as fh:
            raw = json.load(fh)
        for key in ("m", "t0_ns", "tf_ns", "seed", "bounds_scale"):
            if key in raw:
                prob[key] = raw[key]
        for key in ("eps0", "epsf"):
            if key in raw:
                v = raw[key]
                prob[key] = complex(v[0], v[1]) if isinstance(v, list) else complex(v)
    if args.mode == "reset":
        prob["eps0"], prob["epsf"] = prob["epsf"], prob["eps0"]
    return prob


def _solve_problem(detunings, prob: dict, optimize: bool):
    try:
        sol = multimode.solve_transfer(
            detunings, prob["m"], prob["t0_ns"], prob["tf_ns"], prob["eps0"], prob["epsf"]
        )
    except RankDeficient as exc:
        raise RankDeficient(f"{exc}; increase m or tf to separate the modes") from None
    info = {"pmax": multimode.peak_power(sol), "refined": False, "nit": 0}
    if optimize and sol.x.size:
        sol, info = multimode.optimize_peak_power(
            sol, seed=prob["seed"], bounds_scale=prob["bounds_scale"]
        )
    return sol, info


def _solution_report(sol, info, prob) -> dict:
    p0 = abs(prob["epsf"]) ** 2 if prob["epsf"] != 0 else abs(prob["eps0"]) ** 2
    pmax = multimode.peak_power(sol)
    pmax_x0 = float(np.max(np.abs(sol.essential) ** 2))
    bound = multimode.peak_power_lower_bound(sol)
    db = lambda p: 10.0 * np.log10(p / p0)
    return {
        "m": sol.m,
        "t0_ns": prob["t0_ns"],
        "tf_ns": prob["tf_ns"],
        "eps0": prob["eps0"],
        "epsf": prob["epsf"],
        "seed": prob["seed"],
        "sections": sol.sections(),
        "x": sol.x,
        "s_i": sol.singular_values,
        "energy": multimode.pulse_energy(sol),
        "pmax_db": db(pmax),
        "pmax_min_energy_db": db(pmax_x0),
        "lower_bound_db": db(bound),
        "reduction_db": db(pmax_x0) - db(pmax),
        "optimizer": info,
    }


def cmd_mmoc(args) -> int:
    net = _load_net(args)
    out = _outdir(args)
    spec = hybridize(net)
    prob = _load_problem(args)
    sol, info = _solve_problem(spec.detunings, prob, not args.no_optimize)
    report = _solution_report(sol, info, prob)

    pulse = multimode.assemble_pulse(sol, prob["t0_ns"], prob["tf_ns"], prob["eps0"], prob["epsf"])
    span = prob["tf_ns"] - prob["t0_ns"]
    times = np.linspace(prob["t0_ns"] - 0.1 * span, prob["tf_ns"] + 0.5 * span, args.samples)
    alpha0 = equilibrium_state(net, prob["eps0"])
    trace = propagate(net, pulse, alpha0, times)
    reporting.write_pulse_csv(
        os.path.join(out, "pulse.csv"), times, np.asarray(pulse(times), dtype=complex)
    )
    reporting.write_trace_csv(os.path.join(out, "trace.csv"), times, trace.alphas)

    # final-state error per hybrid mode, both qubit-state blocks
    at_tf = propagate(net, pulse, alpha0, np.array([prob["t0_ns"], prob["tf_ns"]])).alphas[-1]
    beta = spec.to_hybrid @ at_tf
    weights = spec.to_hybrid @ net.drive_coupling
    beta_f = 1j * weights * prob["epsf"] / spec.detunings
    beta_0 = 1j * weights * prob["eps0"] / spec.detunings
    norm = np.maximum(np.abs(beta_f), np.abs(beta_0))
    errors = np.abs(beta - beta_f) / np.where(norm > 0, norm, 1.0)
    report["final_state_relative_error"] = errors
    reporting.write_json(os.path.join(out, "solution.json"), report)

    fig = reporting.new_figure(figsize=(9, 4))
    ax1 = fig.add_subplot(1, 2, 1)
    grid = np.linspace(prob["t0_ns"] - 0.1 * span, prob["tf_ns"] + 0.5 * span, 1201)
    vals = np.asarray(pulse(grid), dtype=complex)
    ax1.plot(grid, vals.real, label="Re")
    ax1.plot(grid, vals.imag, label="Im")
    ax1.set_xlabel("time (ns)")
    ax1.set_ylabel("drive amplitude")
    ax1.legend()
    ax2 = fig.add_subplot(1, 2, 2)
    hyb = trace.alphas @ spec.to_hybrid.T
    for k in range(spec.n_modes):
        ax2.plot(times, np.abs(hyb[:, k]), label=f"mode {k}")
    ax2.axvline(prob["tf_ns"], ls="--", lw=0.8, color="gray")
    ax2.set_xlabel("time (ns)")
    ax2.set_ylabel("|hybrid amplitude|")
    ax2.legend()
    fig.tight_layout()
    reporting.save_figure(fig, os.path.join(out, "mmoc.svg"))

    print(
        f"P_max {report['pmax_db']:.3f} dB  (min-energy {report['pmax_min_energy_db']:.3f} dB,"
        f" bound {report['lower_bound_db']:.3f} dB)"
    )
    print(f"final-state relative errors: {np.array2string(errors, precision=2)}")
    if args.verify:
        ok = _verdict("mmoc/transfer", bool(np.all(errors <= 1e-6)), f"max {errors.max():.2e}")
        ok &= _verdict(
            "mmoc/bound",
            multimode.peak_power(sol) >= multimode.peak_power_lower_bound(sol) - 1e-12,
            "P_max >= lower bound",
        )
        return 0 if ok else 1
    return 0


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(args) -> int:
    net = _select_block(_load_net(args), args.state)
    out = _outdir(args)
    if args.pulse_csv:
        raw = np.loadtxt(args.pulse_csv, delimiter=",", skiprows=1)
        if raw.ndim != 2 or raw.shape[1] < 3:
            raise ConfigError("pulse CSV needs time_ns, re_eps, im_eps columns")
        t = raw[:, 0]
        dt = np.diff(t)
        if not np.allclose(dt, dt[0], rtol=1e-9, atol=1e-12):
            raise ConfigError("pulse CSV must be sampled on a regular grid")
        drive = SampledPulse(t0=t[0], dt=float(dt[0]), samples=raw[:, 1] + 1j * raw[:, 2])
    elif args.solution:
        with open(args.solution) as fh:
            rep = json.load(fh)
        sections = np.array([complex(a, b) for a, b in rep["sections"]])
        edges = multimode.section_edges(len(sections), rep["t0_ns"], rep["tf_ns"])
        drive = PiecewiseConstantPulse(
            edges=edges,
            amplitudes=sections,
            pre=complex(*rep["eps0"]),
            post=complex(*rep["epsf"]),
        )
    else:
        epsf = _parse_complex(args.epsf)
        drive = cdmod.reference_pulse(args.shape, epsf, args.tf)

    lo, hi = drive.span
    t_end = args.t_end if args.t_end is not None else hi + _decay_horizon(net, 12.0)
    times = np.linspace(min(lo, 0.0), t_end, args.samples)
    alpha0 = equilibrium_state(net, complex(drive(times[0] - 1.0)))
    trace = propagate(net, drive, alpha0, times)
    reporting.write_trace_csv(os.path.join(out, "trace.csv"), times, trace.alphas)
    reporting.write_pulse_csv(
        os.path.join(out, "pulse.csv"), times, np.asarray(drive(times), dtype=complex)
    )

    alpha_bar = equilibrium_state(net, complex(drive(t_end + 1.0)))
    scale = max(np.max(np.abs(alpha_bar)), np.max(np.abs(alpha0)), 1e-300)
    final_dev = np.abs(trace.alphas[-1] - alpha_bar) / scale
    print(f"propagated {net.n_modes} mode(s) over [{times[0]:g}, {t_end:g}] ns")
    for k in range(net.n_modes):
        print(
            f"  mode {k}: final |alpha| {abs(trace.alphas[-1, k]):.6g}"
            f"  deviation from equilibrium {final_dev[k]:.3e} relative"
        )

    verdict = True
    if args.verify:
        # 12 slow-mode lifetimes past the drive end leave e^-6 ~ 2.5e-3
        verdict &= _verdict(
            "simulate/relaxed",
            bool(np.max(final_dev) <= 1e-2),
            f"final deviation {np.max(final_dev):.3e}",
        )
    if net.n_modes == 1 and args.shape == "quench" and not (args.pulse_csv or args.solution):
        alpha_eq = equilibrium_state(net, _parse_complex(args.epsf))[0]
        resid = np.abs(trace.alphas[:, 0] - alpha_eq) ** 2 / abs(alpha_eq) ** 2
        t_settle = settling_time(times, resid, SETTLE_THRESHOLD)
        kappa = net.kappas[0]
        print(
            f"settling to {SETTLE_THRESHOLD:.3%} residual power at t = {t_settle:.2f} ns"
            f" (5/kappa = {5.0 / kappa:.2f} ns)"
        )
        if args.verify:
            rel = abs(t_settle - 5.0 / kappa) / (5.0 / kappa)
            verdict &= _verdict("simulate/settling", rel <= 0.02, f"off by {rel:.3%}")
    fig = reporting.new_figure(figsize=(6, 4))
    ax = fig.add_subplot(1, 1, 1)
    for k in range(net.n_modes):
        ax.plot(times, np.abs(trace.alphas[:, k]), label=f"mode {k}")
    ax.set_xlabel("time (ns)")
    ax.set_ylabel("|alpha|")
    ax.legend()
    fig.tight_layout()
    reporting.save_figure(fig, os.path.join(out, "simulate.svg"))
    return 0 if verdict else 1


# ---------------------------------------------------------------------------
# qsl


def run_efficiency_sweep(deltas_mhz, kappa: float, dalpha_grid, tf: float) -> dict:
    """Efficiency of CD vs direct-quench protocols over endpoint distances."""
    deltas = [rad_ns_from_mhz(d) for d in deltas_mhz]
    result = {
        "delta_alpha": np.asarray(dalpha_grid, dtype=float),
        "eta_max": np.array([qsl.max_efficiency(d) for d in dalpha_grid]),
        "eta_cd": [],
        "eta_direct": {f"{d:g}": [] for d in deltas_mhz},
    }
    for dal in dalpha_grid:
        delta0 = deltas[0]
        dtil0 = complex(delta0, -0.5 * kappa)
        epsf = -1j * dal * dtil0
        drive = cdmod.cd_pulse(cdmod.reference_pulse("sin2", epsf, tf), delta0, kappa)
        times = np.linspace(0.0, tf, 801)
        trace = propagate(single_mode(delta0, kappa), drive, np.zeros(1, complex), times)
        result["eta_cd"].append(qsl.quantum_efficiency(trace))
        for d_mhz, delta in zip(deltas_mhz, deltas):
            dtil = complex(delta, -0.5 * kappa)
            qtimes = np.linspace(0.0, 10.0 / kappa, 8001)
            qtrace = propagate(
                single_mode(delta, kappa), quench(-1j * dal * dtil), np.zeros(1, complex), qtimes
            )
            result["eta_direct"][f"{d_mhz:g}"].append(qsl.quantum_efficiency(qtrace))
    result["eta_cd"] = np.array(result["eta_cd"])
    result["eta_direct"] = {k: np.array(v) for k, v in result["eta_direct"].items()}
    return result


def cmd_qsl(args) -> int:
    out = _outdir(args)
    deltas_mhz = [float(x) for x in args.delta_mhz.split(",")]
    grid = _parse_grid(args.grid)
    kappa = 1.0 / args.kappa_inv
    res = run_efficiency_sweep(deltas_mhz, kappa, grid, args.tf)
    first = f"{deltas_mhz[0]:g}"
    reporting.write_efficiency_csv(
        os.path.join(out, "efficiency.csv"),
        res["delta_alpha"],
        res["eta_direct"][first],
        res["eta_cd"],
        res["eta_max"],
    )
    reporting.write_json(os.path.join(out, "efficiency.json"), res)
    fig = reporting.new_figure(figsize=(6, 4))
    ax = fig.add_subplot(1, 1, 1)
    ax.plot(res["delta_alpha"], res["eta_max"], "k--", label="bound")
    ax.plot(res["delta_alpha"], res["eta_cd"], label="cd")
    for key, vals in res["eta_direct"].items():
        ax.plot(res["delta_alpha"], vals, label=f"direct {key} MHz")
    ax.set_xlabel("|delta alpha|")
    ax.set_ylabel("efficiency")
    ax.legend()
    fig.tight_layout()
    reporting.save_figure(fig, os.path.join(out, "efficiency.svg"))

    if args.verify:
        gap = float(np.abs(res["eta_cd"] - res["eta_max"]).max())
        ok = _verdict("qsl/cd-saturates", gap <= 1e-3, f"max |eta_cd - bound| {gap:.2e}")
        if len(deltas_mhz) >= 2:
            lo = res["eta_direct"][f"{deltas_mhz[0]:g}"]
            hi = res["eta_direct"][f"{deltas_mhz[1]:g}"]
            ok &= _verdict(
                "qsl/detuning-ordering",
                bool(np.all(hi < lo)),
                "higher detuning is pointwise less efficient",
            )
        return 0 if ok else 1
    return 0


# ---------------------------------------------------------------------------
# filtercheck


def cmd_filtercheck(args) -> int:
    net = _select_block(_load_net(args), args.state)
    out = _outdir(args)
    spec = hybridize(net)
    carrier = rad_ns_from_mhz(args.carrier_mhz)
    cutoff = rad_ns_from_mhz(args.cutoff_mhz)
    band = (carrier - cutoff, carrier + cutoff)
    window = None
    if args.window:
        w = [float(x) for x in args.window.split(",")]
        if len(w) != 2:
            raise ConfigError("--window must be T0,T1")
        window = (w[0], w[1])
    g0 = multimode.transfer_matrix(spec.detunings, args.m, args.t0, args.tf)
    g1 = multimode.filtered_transfer_matrix(
        spec.detunings, args.m, args.t0, args.tf, band=band, window=window
    )
    rel = np.abs(g1 - g0) / np.abs(g0)
    worst = float(rel.max())
    print(
        f"passband {args.carrier_mhz - args.cutoff_mhz:g}..{args.carrier_mhz + args.cutoff_mhz:g} MHz:"
        f" max relative constraint-matrix distortion {worst:.3e}"
    )
    reporting.write_json(
        os.path.join(out, "filtercheck.json"),
        {
            "band_rad_ns": band,
            "m": args.m,
            "t0_ns": args.t0,
            "tf_ns": args.tf,
            "max_relative_difference": worst,
            "relative_difference": rel,
        },
    )
    if args.verify:
        return (
            0
            if _verdict("filtercheck", worst < args.tol, f"{worst:.3e} < {args.tol:g}")
            else 1
        )
    return 0


# ---------------------------------------------------------------------------
# lindblad-check


def cmd_lindblad_check(args) -> int:
    out = _outdir(args)
    delta = rad_ns_from_mhz(args.delta_mhz)
    kappa = 1.0 / args.kappa_inv
    cfg = fock.FockConfig(dim=args.dim, delta=delta, kappa=kappa, kerr_shift=rad_ns_from_mhz(args.kerr_mhz))
    dtil = complex(delta, -0.5 * kappa)
    target = float(np.sqrt(args.target_n))
    epsf = -1j * target * dtil
    drive = cdmod.cd_pulse(cdmod.reference_pulse("sin2", epsf, args.tf), delta, kappa)
    times = np.linspace(0.0, args.tf + 20.0, args.samples)
    infid = fock.displaced_frame_check(cfg, drive, times)

    spec_cfg = fock.FockConfig(dim=args.spectrum_dim, delta=delta, kappa=kappa)
    matched = fock.liouvillian_spectrum(spec_cfg, args.jmax, args.kmax)
    predicted = fock.predicted_spectrum(spec_cfg, args.jmax, args.kmax)
    gap = float(np.abs(matched - predicted).max() / kappa)

    print(f"max displaced-frame infidelity {infid:.3e}")
    print(f"max spectrum mismatch {gap:.3e} kappa")
    reporting.write_json(
        os.path.join(out, "lindblad_check.json"),
        {
            "dim": args.dim,
            "target_photon": args.target_n,
            "max_infidelity": infid,
            "spectrum_dim": args.spectrum_dim,
            "matched": matched,
            "predicted": predicted,
            "max_spectrum_gap_kappa": gap,
        },
    )
    if args.verify:
        ok = _verdict("lindblad/fidelity", infid <= 1e-6, f"infidelity {infid:.2e}")
        ok &= _verdict("lindblad/spectrum", gap <= 1e-6, f"gap {gap:.2e} kappa")
        return 0 if ok else 1
    return 0


# ---------------------------------------------------------------------------
# sweep


def _pmax_point(payload) -> dict:
    detunings, m, t0, tf, eps0, epsf, seed, bounds_scale = payload
    sol = multimode.solve_transfer(np.asarray(detunings), m, t0, tf, eps0, epsf)
    p0 = abs(epsf) ** 2 if epsf != 0 else abs(eps0) ** 2
    pmax_x0 = float(np.max(np.abs(sol.essential) ** 2))
    opt, _ = multimode.optimize_peak_power(sol, seed=seed, bounds_scale=bounds_scale)
    db = lambda p: float(10.0 * np.log10(p / p0))
    return {
        "tf_ns": tf,
        "pmax_min_energy_db": db(pmax_x0),
        "pmax_db": db(multimode.peak_power(opt)),
        "lower_bound_db": db(multimode.peak_power_lower_bound(sol)),
    }


def _sweep_pmax(args, out: str) -> int:
    net = _load_net(args)
    spec = hybridize(net)
    grid = _parse_grid(args.tf_grid)
    payloads = [
        (spec.detunings, args.m, 0.0, float(tf), 0.0 + 0.0j, _parse_complex(args.epsf), args.seed, args.bounds_scale)
        for tf in grid
    ]
    workers = _threads(len(payloads))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_pmax_point, payloads))
    else:
        rows = [_pmax_point(p) for p in payloads]
    cols = {key: np.array([r[key] for r in rows]) for key in rows[0]}
    reporting.write_csv(
        os.path.join(out, "pmax_vs_tf.csv"),
        ["tf_ns", "pmax_min_energy_db", "pmax_db", "lower_bound_db"],
        [cols["tf_ns"], cols["pmax_min_energy_db"], cols["pmax_db"], cols["lower_bound_db"]],
    )
    fig = reporting.new_figure(figsize=(6, 4))
    ax = fig.add_subplot(1, 1, 1)
    ax.plot(cols["tf_ns"], cols["pmax_min_energy_db"], label="min energy")
    ax.plot(cols["tf_ns"], cols["pmax_db"], label="optimized")
    ax.plot(cols["tf_ns"], cols["lower_bound_db"], "k--", label="bound")
    ax.set_xlabel("tf (ns)")
    ax.set_ylabel("peak power (dB rel steady)")
    ax.legend()
    fig.tight_layout()
    reporting.save_figure(fig, os.path.join(out, "pmax_vs_tf.svg"))
    if args.verify:
        ok = _verdict(
            "sweep/pmax-ordering",
            bool(
                np.all(cols["pmax_db"] <= cols["pmax_min_energy_db"] + 1e-9)
                and np.all(cols["pmax_db"] >= cols["lower_bound_db"] - 1e-9)
            ),
            "bound <= optimized <= min-energy on every point",
        )
        return 0 if ok else 1
    return 0


def _sweep_cd_durations(args, out: str) -> int:
    net = _select_block(_load_net(args), args.state if args.state is not None else 0)
    spec = hybridize(net)
    dtil = spec.detunings[args.mode_index]
    delta, kappa = float(dtil.real), float(-2.0 * dtil.imag)
    mode = single_mode(delta, kappa)
    epsf = _parse_complex(args.epsf)
    alpha_f = equilibrium_state(mode, epsf)[0]
    durations = _parse_grid(args.tf_grid)
    rows = []
    fig = reporting.new_figure(figsize=(6, 4))
    ax = fig.add_subplot(1, 1, 1)
    for tf in durations:
        times = np.linspace(0.0, tf + 6.0 / kappa, 4001)
        for kind in ("cd", "plain"):
            ref = cdmod.reference_pulse("sin2", epsf, tf)
            drive = cdmod.cd_pulse(ref, delta, kappa) if kind == "cd" else ref
            trace = propagate(mode, drive, np.zeros(1, complex), times)
            resid = np.abs(trace.alphas[:, 0] - alpha_f) ** 2 / abs(alpha_f) ** 2
            settle = settling_time(times, resid, SETTLE_THRESHOLD)
            rows.append({"tf_ns": float(tf), "kind": kind, "settle_ns": settle})
            if kind == "cd":
                ax.plot(times, np.abs(trace.alphas[:, 0]), label=f"cd tf={tf:g}")
    qtimes = np.linspace(0.0, 12.0 / kappa, 4001)
    qtrace = propagate(mode, quench(epsf), np.zeros(1, complex), qtimes)
    qresid = np.abs(qtrace.alphas[:, 0] - alpha_f) ** 2 / abs(alpha_f) ** 2
    rows.append(
        {
            "tf_ns": 0.0,
            "kind": "quench",
            "settle_ns": settling_time(qtimes, qresid, SETTLE_THRESHOLD),
        }
    )
    ax.plot(qtimes, np.abs(qtrace.alphas[:, 0]), "k:", label="quench")
    ax.set_xlabel("time (ns)")
    ax.set_ylabel("|alpha|")
    ax.legend(fontsize=7)
    fig.tight_layout()
    reporting.save_figure(fig, os.path.join(out, "cd_durations.svg"))
    reporting.write_json(os.path.join(out, "cd_durations.json"), {"rows": rows})
    for r in rows:
        print(f"{r['kind']:>6} tf={r['tf_ns']:6.1f}  settles at {r['settle_ns']:8.2f} ns")
    if args.verify:
        settle = {(r["kind"], r["tf_ns"]): r["settle_ns"] for r in rows}
        anchor = [tf for tf in durations if tf <= 200]
        slow = [tf for tf in durations if tf >= 500]
        if not (anchor and slow):
            ok = _verdict(
                "sweep/duration-ordering",
                False,
                "need a duration <= 200 ns and one >= 500 ns in --tf-grid",
            )
        else:
            tq = settle[("quench", 0.0)]
            ok = _verdict(
                "sweep/duration-ordering",
                settle[("cd", anchor[-1])] < tq < settle[("plain", slow[0])],
                f"cd({anchor[-1]:g}) {settle[('cd', anchor[-1])]:.1f}"
                f" < quench {tq:.1f}"
                f" < plain({slow[0]:g}) {settle[('plain', slow[0])]:.1f} ns",
            )
        return 0 if ok else 1
    return 0


def cmd_sweep(args) -> int:
    out = _outdir(args)
    if args.tf_grid is None:
        args.tf_grid = "20:200:10" if args.kind == "pmax_vs_tf" else "30,100,800"
    if args.kind == "pmax_vs_tf":
        return _sweep_pmax(args, out)
    if args.kind == "eta_vs_dalpha":
        return cmd_qsl(args)
    return _sweep_cd_durations(args, out)


# ---------------------------------------------------------------------------
# s21


def cmd_s21(args) -> int:
    net = _load_net(args)
    out = _outdir(args)
    results = {}
    span = rad_ns_from_mhz(args.span_mhz)
    grid = np.linspace(-span, span, args.points)
    states = (0, 1) if net.n_modes >= 4 else (None,)
    fig = reporting.new_figure(figsize=(6, 4))
    ax = fig.add_subplot(1, 1, 1)
    for state in states:
        block = _select_block(net, state)
        spec = hybridize(block)
        # the drive-facing (filter-like) mode is the broadest one
        chain = iochain.reference_chain(float(np.max(-2.0 * spec.detunings.imag)))
        s21 = iochain.s21_spectrum(block, chain, grid)
        freq_ghz = (
            (net.drive_frequency + grid) / TWO_PI if net.drive_frequency else grid / TWO_PI
        )
        label = "device" if state is None else f"state{state}"
        reporting.write_spectrum_csv(os.path.join(out, f"s21_{label}.csv"), freq_ghz, s21)
        dips = _dip_offsets(grid, np.abs(s21), spec.n_modes)
        narrow = int(np.argmax(spec.detunings.imag))  # smallest kappa
        results[label] = {
            "dips_rad_ns": dips,
            "eigs_rad_ns": spec.detunings.real,
            "narrow_mode": narrow,
        }
        ax.plot(grid / TWO_PI * 1e3, np.abs(s21), label=label)
    ax.set_xlabel("probe offset (MHz)")
    ax.set_ylabel("|S21|")
    ax.legend()
    fig.tight_layout()
    reporting.save_figure(fig, os.path.join(out, "s21.svg"))
    reporting.write_json(os.path.join(out, "s21.json"), results)
    if args.verify:
        ok = True
        tol = rad_ns_from_mhz(0.5)
        for label, r in results.items():
            dips = np.asarray(r["dips_rad_ns"])
            for eig in r["eigs_rad_ns"]:
                nearest = float(np.min(np.abs(dips - eig))) if dips.size else np.inf
                ok &= _verdict(
                    f"s21/{label}/dip@{mhz_from_rad_ns(eig):+.2f}MHz",
                    nearest <= tol,
                    f"offset {mhz_from_rad_ns(nearest):.3f} MHz",
                )
        if len(results) == 2:
            seps = []
            for r in results.values():
                dips = np.asarray(r["dips_rad_ns"])
                eig = r["eigs_rad_ns"][r["narrow_mode"]]
                seps.append(dips[np.argmin(np.abs(dips - eig))])
            sep_mhz = abs(mhz_from_rad_ns(seps[0] - seps[1]))
            ok &= _verdict(
                "s21/state-separation",
                abs(sep_mhz - 4.9) <= 0.5,
                f"narrow-dip separation {sep_mhz:.3f} MHz",
            )
        return 0 if ok else 1
    return 0


def _dip_offsets(grid: np.ndarray, mag: np.ndarray, count: int) -> np.ndarray:
    """Offsets of the `count` deepest local minima of |S21| on the grid."""
    interior = (mag[1:-1] < mag[:-2]) & (mag[1:-1] <= mag[2:])
    idx = np.where(interior)[0] + 1
    if idx.size == 0:
        return np.array([])
    order = idx[np.argsort(mag[idx])]
    chosen = sorted(order[:count])
    return grid[np.asarray(chosen, dtype=int)]


# ---------------------------------------------------------------------------
# parser


def _add_common(p, *, seed=False):
    p.add_argument("--config", help="device JSON path (default: built-in reference device)")
    p.add_argument("--out", default="staforge_out", help="output directory")
    p.add_argument("--verify", action="store_true", help="run consistency checks; exit 1 on failure")
    if seed:
        p.add_argument("--seed", type=int, default=2024)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="staforge",
        description="Design and verify shortcut-to-equilibrium drive pulses for lossy mode networks.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hybridize", help="print and export the hybrid-mode spectrum")
    _add_common(p)
    p.set_defaults(func=cmd_hybridize)

    p = sub.add_parser("cd", help="shape a counterdiabatic ramp and simulate the output chain")
    _add_common(p)
    p.add_argument("--state", type=int, choices=(0, 1), default=0)
    p.add_argument("--mode-index", type=int, default=0, help="hybrid mode to steer")
    p.add_argument("--tf", type=float, default=100.0)
    p.add_argument("--shape", default="sin2", choices=("sin2",))
    p.add_argument("--epsf", default="1", help="target drive amplitude re[,im]")
    p.add_argument("--samples", type=int, default=1201)
    p.add_argument("--tau", type=float, default=None, help="optional output low-pass constant (ns)")
    p.set_defaults(func=cmd_cd)

    p = sub.add_parser("mmoc", help="solve the sectioned multi-mode transfer problem")
    _add_common(p, seed=True)
    p.add_argument("--problem", help="problem JSON overriding the flags below")
    p.add_argument("--m", type=int, default=10)
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--tf", type=float, default=60.0)
    p.add_argument("--mode", default="ringup", choices=("ringup", "reset"))
    p.add_argument("--eps0", default="0")
    p.add_argument("--epsf", default="1")
    p.add_argument("--bounds-scale", type=float, default=10.0)
    p.add_argument("--no-optimize", action="store_true")
    p.add_argument("--samples", type=int, default=1201)
    p.set_defaults(func=cmd_mmoc)

    p = sub.add_parser("simulate", help="propagate a drive and export the mode trace")
    _add_common(p)
    p.add_argument("--state", type=int, choices=(0, 1), default=None)
    p.add_argument(
        "--single-mode",
        action="store_true",
        help="use the bare reference resonator instead of the full device",
    )
    p.add_argument("--shape", default="quench", choices=("quench", "sin2", "hold"))
    p.add_argument("--epsf", default="1")
    p.add_argument("--tf", type=float, default=100.0)
    p.add_argument("--t-end", type=float, default=None)
    p.add_argument("--samples", type=int, default=2001)
    p.add_argument("--pulse-csv", help="replay a sampled pulse CSV")
    p.add_argument("--solution", help="replay an exported mmoc solution JSON exactly")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("qsl", help="efficiency sweep of CD versus direct protocols")
    _add_common(p)
    p.add_argument("--delta-mhz", default="3,6")
    p.add_argument("--kappa-inv", type=float, default=62.88)
    p.add_argument("--tf", type=float, default=100.0)
    p.add_argument("--grid", default="0.1:5:25")
    p.set_defaults(func=cmd_qsl)

    p = sub.add_parser("filtercheck", help="bound the drive-line filter distortion of the constraints")
    _add_common(p)
    p.add_argument("--state", type=int, choices=(0, 1), default=0)
    p.add_argument("--m", type=int, default=10)
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--tf", type=float, default=60.0)
    p.add_argument("--carrier-mhz", type=float, default=225.0)
    p.add_argument("--cutoff-mhz", type=float, default=750.0)
    p.add_argument("--window", default=None, help="integration window T0,T1 (ns)")
    p.add_argument(
        "--tol",
        type=float,
        default=1e-6,
        help="verify threshold on the max relative distortion",
    )
    p.set_defaults(func=cmd_filtercheck)

    p = sub.add_parser("lindblad-check", help="validate the mean-field layer against the Fock oracle")
    _add_common(p)
    p.add_argument("--dim", type=int, default=50)
    p.add_argument("--delta-mhz", type=float, default=2.45)
    p.add_argument("--kappa-inv", type=float, default=62.88)
    p.add_argument("--kerr-mhz", type=float, default=0.0)
    p.add_argument("--tf", type=float, default=100.0)
    p.add_argument("--target-n", type=float, default=16.0)
    p.add_argument("--samples", type=int, default=51)
    p.add_argument("--jmax", type=int, default=2)
    p.add_argument("--kmax", type=int, default=2)
    p.add_argument("--spectrum-dim", type=int, default=12)
    p.set_defaults(func=cmd_lindblad_check)

    p = sub.add_parser("s21", help="steady-state transmission spectra per qubit state")
    _add_common(p)
    p.add_argument("--span-mhz", type=float, default=40.0)
    p.add_argument("--points", type=int, default=4001)
    p.set_defaults(func=cmd_s21)

    p = sub.add_parser("sweep", help="grid sweeps reproducing the summary figures")
    _add_common(p, seed=True)
    p.add_argument("--kind", required=True, choices=("pmax_vs_tf", "eta_vs_dalpha", "cd_durations"))
    p.add_argument("--m", type=int, default=10)
    p.add_argument("--epsf", default="1")
    p.add_argument("--bounds-scale", type=float, default=10.0)
    p.add_argument(
        "--tf-grid",
        default=None,
        help="duration grid; defaults to 20:200:10 (pmax) or 30,100,800 (cd_durations)",
    )
    p.add_argument("--state", type=int, choices=(0, 1), default=None)
    p.add_argument("--mode-index", type=int, default=0)
    p.add_argument("--delta-mhz", default="3,6")
    p.add_argument("--kappa-inv", type=float, default=62.88)
    p.add_argument("--tf", type=float, default=100.0)
    p.add_argument("--grid", default="0.1:5:25")
    p.set_defaults(func=cmd_sweep)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except StaforgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
