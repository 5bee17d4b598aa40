"""Figures written next to the CSV output.

Uses the Agg backend with fixed metadata and SVG hash salt, so a figure
rendered twice from the same data is byte-identical.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

FORMATS = ("png", "svg", "pdf")
STYLE = {
    "figure.figsize": (6.0, 3.6),
    "figure.dpi": 100,
    "savefig.dpi": 150,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.2,
    "svg.hashsalt": "quenchtopo",
    "path.simplify": False,
}
_METADATA = {
    "png": {"Software": None},
    "svg": {"Date": None, "Creator": None},
    "pdf": {"CreationDate": None, "ModDate": None, "Creator": None, "Producer": None},
}
_PI_TICKS = ([-np.pi, -np.pi / 2, 0, np.pi / 2, np.pi],
             [r"$-\pi$", r"$-\pi/2$", "0", r"$\pi/2$", r"$\pi$"])


def _save(fig, path, fmt):
    if fmt not in FORMATS:
        raise ValueError(f"plot format: expected one of {FORMATS}, got {fmt!r}")
    path = Path(path).with_suffix("." + fmt)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format=fmt, metadata=_METADATA[fmt])
    plt.close(fig)
    return path


def _k_axis(ax, label="$k$"):
    ax.set_xlim(-np.pi, np.pi)
    ax.set_xticks(*_PI_TICKS)
    ax.set_xlabel(label)


def plot_model(k, e_plus, e_minus, angle, title, path, fmt="png"):
    with plt.rc_context(STYLE):
        fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(8.0, 3.2), layout="constrained")
        ax0.plot(k, e_plus, color="C3", label="$E_+$")
        ax0.plot(k, e_minus, color="C0", label="$E_-$")
        ax0.set_ylabel("energy")
        ax0.legend(frameon=False)
        _k_axis(ax0)
        ax1.plot(k, angle / np.pi, color="k")
        ax1.set_ylabel(r"band angle / $\pi$")
        _k_axis(ax1)
        fig.suptitle(title)
        return _save(fig, path, fmt)


def plot_overlap(profile, title, path, fmt="png"):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(layout="constrained")
        ax.plot(profile.k, profile.c_plus_sq, color="C0")
        ax.set_ylim(-0.03, 1.03)
        ax.set_ylabel(r"$|c_+(k)|^2$")
        _k_axis(ax)
        ax.set_title(title)
        return _save(fig, path, fmt)


def plot_emission(spec, truth_k, title, path, fmt="png"):
    """Spectral density, recovered occupation in omega and the k-domain reference."""
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, 3, figsize=(10.0, 3.2), layout="constrained")
        axes[0].plot(spec.omega_centers, spec.density, color="C1")
        axes[0].set_xlabel(r"$\omega$")
        axes[0].set_ylabel(r"$I(\omega)$")
        axes[1].plot(spec.omega_centers, spec.c_plus_4, color="C0")
        axes[1].set_xlabel(r"$\omega$")
        axes[1].set_ylabel(r"$|c_+(\omega)|^4$")
        axes[1].set_ylim(-0.03, 1.03)
        axes[2].plot(spec.k, truth_k, color="C2")
        axes[2].set_ylabel(r"$|c_+(k)|^4$")
        axes[2].set_ylim(-0.03, 1.03)
        _k_axis(axes[2])
        fig.suptitle(title)
        return _save(fig, path, fmt)


def plot_densities(q, estimate, truth, title, path, fmt="png"):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(layout="constrained")
        ax.plot(q, estimate, ".", ms=2, color="C0", label="measured")
        if truth is not None:
            ax.plot(q, truth, color="k", lw=0.8, label="exact")
        ax.set_ylim(-0.03, 1.03)
        ax.set_ylabel(r"$n_\uparrow / (n_\uparrow + n_\downarrow)$")
        _k_axis(ax, "$q$")
        ax.legend(frameon=False, loc="upper right")
        ax.set_title(title)
        return _save(fig, path, fmt)


def plot_sweep(rows, path, fmt="png"):
    """Exact and peak counts against the expected count, one marker per row."""
    expected = np.array([r["expected"] for r in rows])
    exact = np.array([r["exact_count"] for r in rows])
    peak = np.array([r["peak_count"] for r in rows])
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(layout="constrained")
        top = int(max(expected.max(), exact.max(), peak.max())) + 1
        ax.plot([0, top], [0, top], color="0.7", lw=0.8)
        ax.plot(expected - 0.08, exact, "o", ms=4, mfc="none", label="winding advance")
        ax.plot(expected + 0.08, peak, "x", ms=4, label="peak counter")
        ax.set_xlabel(r"$|\nu_i - \nu_f|$")
        ax.set_ylabel("CP count")
        ax.legend(frameon=False)
        return _save(fig, path, fmt)
