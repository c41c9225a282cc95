"""The four figure commands.

Every plot returns the dict of numbers it annotated so callers (and the
acceptance test) can compare them against harness statistics.  Slope
annotations are the harness value when one is supplied and otherwise the
same least-squares fit the harness runs on the same rows, to the digit.
Empty inputs produce a "no data" watermark figure and succeed.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .bundle import read_rows

_FIGSIZE = (6.4, 4.2)
_DPI = 130


def _no_data_figure(out_path: Path, title: str) -> dict:
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.set_title(title)
    ax.text(0.5, 0.5, "no data", ha="center", va="center",
            transform=ax.transAxes, fontsize=24, color="0.6", rotation=20)
    fig.savefig(out_path, dpi=_DPI)
    plt.close(fig)
    return {"no_data": True}


def _loglog_fit(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def plot_holder(csv_path: str | Path, out_path: str | Path,
                eta_c: float | None = None, harness_slope: float | None = None) -> dict:
    """Log-log sup-increment scatter, per-replica median fit, eta_c reference.

    CSV schema: lag, sup_increment, replica.
    """
    rows = read_rows(Path(csv_path))
    out_path = Path(out_path)
    if not rows:
        return _no_data_figure(out_path, "spatial regularity")
    lag = np.array([float(r["lag"]) for r in rows])
    sup = np.array([float(r["sup_increment"]) for r in rows])
    rep = np.array([int(r["replica"]) for r in rows])

    slopes = []
    for r in np.unique(rep):
        m = (rep == r) & (sup > 0)
        if np.count_nonzero(m) >= 2:
            slopes.append(_loglog_fit(lag[m], sup[m]))
    fitted = float(np.median(slopes)) if slopes else math.nan
    slope = fitted if harness_slope is None else float(harness_slope)

    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.loglog(lag, sup, ".", color="0.65", ms=3, alpha=0.5, label="sup increments")
    xs = np.array([lag.min(), lag.max()])
    med = np.exp(np.median(np.log(sup[sup > 0]))) if np.any(sup > 0) else 1.0
    anchor = np.exp(np.median(np.log(lag)))
    ax.loglog(xs, med * (xs / anchor) ** slope, "C0-",
              label=f"fit: slope = {slope:.6f}")
    if eta_c is not None:
        ax.loglog(xs, med * (xs / anchor) ** eta_c, "C3--",
                  label=f"reference slope = {eta_c:.6f}")
    ax.set_xlabel("lag h")
    ax.set_ylabel("sup |X(x+h) - X(x)|")
    ax.set_title("spatial regularity: log sup-increment vs log lag")
    ax.legend(frameon=False, fontsize=8)
    fig.savefig(out_path, dpi=_DPI)
    plt.close(fig)
    return {"slope": slope, "median_fit": fitted, "eta_c": eta_c}


def plot_moment_decay(csv_path: str | Path, out_path: str | Path,
                      p_bar: float = 1.0, harness_slope: float | None = None) -> dict:
    """Moment means vs t with the -p_bar/2 reference slope.

    CSV schema: t, mean_moment, stderr, n_replicas.
    """
    rows = read_rows(Path(csv_path))
    out_path = Path(out_path)
    if not rows:
        return _no_data_figure(out_path, "moment decay")
    t = np.array([float(r["t"]) for r in rows])
    mean = np.array([float(r["mean_moment"]) for r in rows])
    err = np.array([float(r.get("stderr", 0.0) or 0.0) for r in rows])
    order = np.argsort(t)
    t, mean, err = t[order], mean[order], err[order]
    fitted = _loglog_fit(t, mean)
    slope = fitted if harness_slope is None else float(harness_slope)
    ref = -p_bar / 2.0

    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.errorbar(t, mean, yerr=err, fmt="o", ms=4, capsize=2, label="ensemble mean")
    ax.set_xscale("log")
    ax.set_yscale("log")
    anchor = mean[0] * (t / t[0]) ** slope
    ax.plot(t, anchor, "C0-", label=f"fit: slope = {slope:.6f}")
    ax.plot(t, mean[0] * (t / t[0]) ** ref, "C3--", label=f"reference slope = {ref:.1f}")
    ax.set_xlabel("t")
    ax.set_ylabel("E[X_t(x0)^p]")
    ax.set_title("moment decay from point-mass data")
    ax.legend(frameon=False, fontsize=8)
    fig.savefig(out_path, dpi=_DPI)
    plt.close(fig)
    return {"slope": slope, "fit": fitted, "reference": ref}


def plot_field(csv_path: str | Path, out_path: str | Path) -> dict:
    """One panel row per snapshot time.  CSV schema: t, x, value."""
    rows = read_rows(Path(csv_path))
    out_path = Path(out_path)
    if not rows:
        return _no_data_figure(out_path, "field snapshots")
    t = np.array([float(r["t"]) for r in rows])
    x = np.array([float(r["x"]) for r in rows])
    v = np.array([float(r["value"]) for r in rows])
    times = np.unique(t)
    fig, axes = plt.subplots(len(times), 1, sharex=True,
                             figsize=(_FIGSIZE[0], 1.5 * len(times)), squeeze=False)
    for ax, ti in zip(axes[:, 0], times):
        m = t == ti
        order = np.argsort(x[m])
        ax.fill_between(x[m][order], v[m][order], color="C0", alpha=0.6, lw=0.5)
        ax.set_ylabel(f"t = {ti:g}", fontsize=8)
    axes[-1, 0].set_xlabel("x")
    axes[0, 0].set_title("field snapshots")
    fig.savefig(out_path, dpi=_DPI)
    plt.close(fig)
    return {"n_panels": int(len(times))}


def plot_diagnostic_ladder(csv_path: str | Path, out_path: str | Path) -> dict:
    """Localized smoothing functional against the sequence index n.

    CSV schema: n, m, functional.
    """
    rows = read_rows(Path(csv_path))
    out_path = Path(out_path)
    if not rows:
        return _no_data_figure(out_path, "diagnostic ladder")
    n = np.array([int(r["n"]) for r in rows])
    vals = np.array([float(r["functional"]) for r in rows])
    ms = np.array([float(r["m"]) for r in rows])
    order = np.argsort(n)
    n, vals, ms = n[order], vals[order], ms[order]

    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.plot(n, vals, "o-", label="localized functional")
    for ni, mi, vi in zip(n, ms, vals):
        ax.annotate(f"m={mi:.3g}", (ni, vi), textcoords="offset points",
                    xytext=(4, 6), fontsize=7, color="0.4")
    ax.set_xlabel("n")
    ax.set_ylabel("<phi_n(<U, Phi^m>), Psi>")
    ax.set_xticks(list(n))
    ax.set_title("coupling diagnostic ladder (monitored)")
    ax.legend(frameon=False, fontsize=8)
    fig.savefig(out_path, dpi=_DPI)
    plt.close(fig)
    return {"values": [float(vv) for vv in vals], "monotone_decreasing": bool(np.all(np.diff(vals) <= 0))}
