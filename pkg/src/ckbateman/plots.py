"""Static figures written next to JSON/CSV outputs (Agg backend, write-only)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def expectations_plot(times, series: dict, path, title: str = "") -> Path:
    fig, axes = plt.subplots(len(series), 1, figsize=(6, 2.2 * len(series)), sharex=True, squeeze=False)
    for ax, (name, vals) in zip(axes[:, 0], series.items()):
        ax.plot(times, vals, lw=1.2)
        ax.set_ylabel(f"<{name}>")
        ax.grid(alpha=0.3)
    axes[-1, 0].set_xlabel("t")
    if title:
        axes[0, 0].set_title(title)
    return _save(fig, path)


def density_plot(xs, snapshots, path, labels=None) -> Path:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for j, psi in enumerate(snapshots):
        ax.plot(xs, np.abs(psi) ** 2, lw=1, label=None if labels is None else labels[j])
    ax.set_xlabel("x")
    ax.set_ylabel("|psi|^2")
    if labels is not None:
        ax.legend(fontsize=7)
    ax.grid(alpha=0.3)
    return _save(fig, path)


def trajectory_plot(times, states, path, names=("x", "y", "p_x", "p_y"), reference=None) -> Path:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for j, name in enumerate(names):
        ax.plot(times, states[:, j], lw=1.1, label=name)
    if reference is not None:
        ax.plot(times, reference, "k--", lw=0.8, label="x (closed form)")
    ax.set_xlabel("t")
    ax.legend(fontsize=7)
    ax.grid(alpha=0.3)
    return _save(fig, path)


def spectrum_plot(rows, path, hbar_omega: float) -> Path:
    fig, ax = plt.subplots(figsize=(5, 4))
    lams = sorted({r["lambda"] for r in rows})
    for lam in lams:
        es = [r["E"] / hbar_omega for r in rows if r["lambda"] == lam]
        ax.plot([lam] * len(es), es, "o", ms=4)
    ax.set_xlabel("lambda")
    ax.set_ylabel("E / (hbar Omega)")
    ax.grid(alpha=0.3)
    return _save(fig, path)


def branch_plot(rows, path) -> Path:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    t = [r["t"] for r in rows]
    ax.plot(t, [r["tau_chain"] for r in rows], label="tau (reduction chain)")
    ax.plot(t, [r["tau_closed_form"] for r in rows], "--", label="tau (closed form)")
    ax.set_xlabel("t")
    ax.set_ylabel("tau")
    ax.legend(fontsize=7)
    ax.grid(alpha=0.3)
    return _save(fig, path)
