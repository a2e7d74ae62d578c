"""Deterministic file outputs: CSV traces, JSON reports, SVG plots.

Every writer goes through an atomic write-then-rename so concurrent
sweep workers never leave torn files, and all formatting is fixed
(12-significant-digit CSV numbers, sorted JSON keys, salted SVG ids,
no timestamps) so reruns with the same seed are byte-identical.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

__all__ = [
    "atomic_write_text",
    "write_json",
    "write_csv",
    "write_trace_csv",
    "write_pulse_csv",
    "write_spectrum_csv",
    "write_output_csv",
    "write_efficiency_csv",
    "new_figure",
    "save_figure",
    "jsonable",
]

_FMT = "%.12g"


def atomic_write_text(path, text: str) -> None:
    path = os.fspath(path)
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and complex values for JSON."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (complex, np.complexfloating)):
        c = complex(obj)
        return [c.real, c.imag]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def write_json(path, obj) -> None:
    atomic_write_text(path, json.dumps(jsonable(obj), sort_keys=True, indent=2) + "\n")


def write_csv(path, header: list[str], columns: list[np.ndarray]) -> None:
    cols = [np.asarray(c) for c in columns]
    if len(cols) != len(header):
        raise ValueError("one header entry per column")
    rows = [",".join(header)]
    for i in range(cols[0].size):
        rows.append(",".join(_FMT % c[i] for c in cols))
    atomic_write_text(path, "\n".join(rows) + "\n")


def write_trace_csv(path, times, alphas) -> None:
    alphas = np.atleast_2d(np.asarray(alphas, dtype=complex))
    header = ["time_ns"]
    cols = [np.asarray(times, dtype=float)]
    for k in range(alphas.shape[1]):
        header += [f"re_alpha_{k}", f"im_alpha_{k}"]
        cols += [alphas[:, k].real, alphas[:, k].imag]
    write_csv(path, header, cols)


def write_pulse_csv(path, times, values) -> None:
    v = np.asarray(values, dtype=complex)
    write_csv(path, ["time_ns", "re_eps", "im_eps"], [np.asarray(times), v.real, v.imag])


def write_spectrum_csv(path, freq_ghz, s21) -> None:
    s = np.asarray(s21, dtype=complex)
    write_csv(
        path,
        ["freq_ghz", "re_s21", "im_s21", "abs_s21"],
        [np.asarray(freq_ghz), s.real, s.imag, np.abs(s)],
    )


def write_output_csv(path, times, r_out) -> None:
    r = np.asarray(r_out, dtype=complex)
    write_csv(
        path,
        ["time_ns", "re_ro", "im_ro", "abs_ro"],
        [np.asarray(times), r.real, r.imag, np.abs(r)],
    )


def write_efficiency_csv(path, delta_alpha, eta_direct, eta_cd, eta_max) -> None:
    write_csv(
        path,
        ["delta_alpha", "eta_direct", "eta_cd", "eta_max"],
        [np.asarray(delta_alpha), np.asarray(eta_direct), np.asarray(eta_cd), np.asarray(eta_max)],
    )


def new_figure(**kwargs):
    """Figure on the headless backend with deterministic SVG settings."""
    import matplotlib

    matplotlib.use("Agg", force=True)
    matplotlib.rcParams["svg.hashsalt"] = "staforge"
    import matplotlib.pyplot as plt

    return plt.figure(**kwargs)


def save_figure(fig, path) -> None:
    path = os.fspath(path)
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".", suffix=".svg")
    os.close(fd)
    try:
        fig.savefig(tmp, format="svg", metadata={"Date": None})
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    finally:
        import matplotlib.pyplot as plt

        plt.close(fig)
