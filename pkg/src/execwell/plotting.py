"""Figure rendering for the command-line report paths."""

from __future__ import annotations

import numpy as np


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["figure.dpi"] = 120
    plt.rcParams["axes.grid"] = True
    plt.rcParams["grid.alpha"] = 0.3
    return plt


def save_trajectory_plot(traj, path: str) -> None:
    """Inventory and trading velocity against time, written to an image file."""
    plt = _plt()
    fig, (ax_pos, ax_vel) = plt.subplots(2, 1, sharex=True, figsize=(6.4, 6.0))
    ax_pos.plot(traj.times, traj.zeta, color="tab:blue")
    ax_pos.set_ylabel("inventory")
    ax_pos.set_title(f"initial velocity {traj.initial_velocity:.6g}, cash {traj.cash:.6g}")
    ax_vel.plot(traj.times, traj.zeta_dot, color="tab:red")
    ax_vel.axhline(0.0, color="black", lw=0.8)
    ax_vel.set_ylabel("velocity")
    ax_vel.set_xlabel("time")
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)


def save_sweep_heatmap(spec, cells, path: str, field: str = "initial_velocity") -> None:
    """Heatmap of one cell field over the sweep axes, admissible region outlined."""
    plt = _plt()
    xs = spec.axis1.values()
    ys = spec.axis2.values()
    data = np.array([getattr(c, field) for c in cells], dtype=float).reshape(xs.size, ys.size)
    adm = np.array([1.0 if c.admissible else 0.0 for c in cells]).reshape(xs.size, ys.size)
    fig, ax = plt.subplots(figsize=(6.4, 5.0))
    mesh = ax.pcolormesh(xs, ys, data.T, shading="nearest", cmap="coolwarm")
    if 0.0 < adm.mean() < 1.0:
        ax.contour(xs, ys, adm.T, levels=[0.5], colors="black", linewidths=1.2)
    if spec.axis2.scale == "log":
        ax.set_yscale("log")
    ax.set_xlabel(spec.axis1.name)
    ax.set_ylabel(spec.axis2.name)
    ax.set_title(f"{spec.family} / {spec.mode}: {field}")
    fig.colorbar(mesh, ax=ax)
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
