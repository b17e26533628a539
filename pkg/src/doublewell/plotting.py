"""Figures written next to the CSV/JSON outputs of the CLI."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

LEVEL_COLORS = {"a": "#1565C0", "b": "#C62828", "c": "#2E7D32", "d": "#E65100"}
GRAY = "#616161"


def setup_style():
    plt.rcParams.update({
        "font.family": "DejaVu Sans",
        "font.size": 10,
        "axes.labelsize": 10,
        "axes.titlesize": 11,
        "axes.spines.top": False,
        "axes.spines.right": False,
        "legend.frameon": False,
        "figure.facecolor": "white",
        "savefig.facecolor": "white",
        "savefig.dpi": 150,
        "svg.hashsalt": "doublewell",
    })


def _save(fig, path):
    # no Software/date chunks, so reruns give byte-identical files
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)


def plot_spectrum(path, x, potential, states, scale=None):
    """Potential with each eigenfunction drawn at its energy."""
    setup_style()
    fig, ax = plt.subplots(figsize=(6, 4))
    energies = [s.energy for s in states]
    span = (max(energies) - min(energies)) or max(abs(energies[0]), 1.0)
    scale = scale or 0.4 * span / max(len(states), 1)
    ax.plot(x, potential, color=GRAY, lw=1.2, label="V(x)")
    for j, s in enumerate(states):
        amp = s.amplitudes / np.max(np.abs(s.amplitudes))
        ax.axhline(s.energy, color=GRAY, lw=0.5, ls=":")
        ax.plot(x, s.energy + scale * amp, lw=1.2, label=f"n={j + 1} ({s.parity})")
    top = max(energies) + 2 * scale
    ax.set_ylim(min(0.0, min(potential)) - 0.05 * top, top)
    ax.set_xlabel("x")
    ax.set_ylabel("energy")
    ax.legend(fontsize=8, loc="upper right")
    _save(fig, path)


def plot_tunneling(path, times, populations, omega):
    setup_style()
    fig, ax = plt.subplots(figsize=(6, 3.5))
    t = np.asarray(times)
    ax.plot(t, populations, color=LEVEL_COLORS["a"], lw=1.4, label="left-well population")
    ax.plot(t, np.cos(0.5 * omega * t) ** 2, color=LEVEL_COLORS["b"], lw=1, ls="--",
            label=r"$\cos^2(\Omega t/2)$")
    ax.set_xlabel("t")
    ax.set_ylabel("P_L(t)")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(fontsize=8, loc="lower right")
    _save(fig, path)


def plot_level_diagram(path, barriers, energies, reference=None):
    """Energies of states a-d against barrier height, relative to state a at the highest barrier."""
    setup_style()
    fig, ax = plt.subplots(figsize=(6, 4))
    e = np.asarray(energies)
    ref = e[np.argmax(barriers), 0] if reference is None else reference
    for k, lab in enumerate("abcd"):
        ax.plot(barriers, e[:, k] - ref, color=LEVEL_COLORS[lab], lw=1.4, label=lab)
    ax.set_xlabel("barrier height $V_b$")
    ax.set_ylabel("$E - E_a(V_{high})$")
    ax.legend(fontsize=8)
    _save(fig, path)


def plot_gate(path, times, barrier, energies_ab, trajectory):
    """Barrier schedule, the a/b levels along it (shaded area = phase) and the |01> readout."""
    setup_style()
    fig, axes = plt.subplots(3, 1, figsize=(6, 7), sharex=True)
    t = np.asarray(times)
    axes[0].plot(t, barrier, color=GRAY, lw=1.4)
    axes[0].set_ylabel("$V_b(t)$")
    ea, eb = np.asarray(energies_ab).T
    axes[1].plot(t, ea, color=LEVEL_COLORS["a"], lw=1.3, label="a")
    axes[1].plot(t, eb, color=LEVEL_COLORS["b"], lw=1.3, label="b")
    axes[1].fill_between(t, ea, eb, color=LEVEL_COLORS["a"], alpha=0.15)
    axes[1].set_ylabel("energy")
    axes[1].legend(fontsize=8)
    if len(trajectory):
        tr = np.asarray(trajectory)
        p01 = tr[:, 5] ** 2 + tr[:, 6] ** 2
        p10 = tr[:, 7] ** 2 + tr[:, 8] ** 2
        axes[2].plot(tr[:, 0], p01, color=LEVEL_COLORS["a"], lw=1.0, label="|01>")
        axes[2].plot(tr[:, 0], p10, color=LEVEL_COLORS["b"], lw=1.0, label="|10>")
        axes[2].legend(fontsize=8)
    axes[2].set_ylabel("population")
    axes[2].set_xlabel("t")
    _save(fig, path)


def plot_sweep(path, header, rows):
    setup_style()
    fig, ax = plt.subplots(figsize=(6, 4))
    if rows:
        data = np.asarray(rows, dtype=float)
        for k in range(1, data.shape[1]):
            ax.plot(data[:, 0], data[:, k], lw=1.3, marker="o", ms=3, label=header[k])
        ax.legend(fontsize=8)
    ax.set_xlabel(header[0])
    _save(fig, path)


def plot_two_body_densities(path, grid, levels, labels=None):
    setup_style()
    k = len(levels)
    fig, axes = plt.subplots(1, k, figsize=(2.4 * k, 2.6), squeeze=False)
    ext = (grid.x_min, grid.x_max, grid.x_min, grid.x_max)
    for j, (e, s) in enumerate(levels):
        ax = axes[0, j]
        ax.imshow(np.abs(s.amplitudes) ** 2, origin="lower", extent=ext, cmap="Blues")
        tag = labels[j] if labels and labels[j] else s.exchange_symmetry[:4]
        ax.set_title(f"{tag}: E={e:.4g}", fontsize=9)
        ax.set_xlabel("$x_2$")
        if j == 0:
            ax.set_ylabel("$x_1$")
    _save(fig, path)
