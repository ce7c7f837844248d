"""Figure rendering for the report paths.  Matplotlib stays behind this
module so headless runs only pay for it when figures are requested."""

from __future__ import annotations

import numpy as np


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def render_state(snapshot, path, schedule=None, title=None):
    """Two-panel profile: intensity (with the pump shape) above the mirror
    displacements."""
    plt = _pyplot()
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7.2, 5.4), sharex=True)
    x = snapshot.xbar
    ax1.plot(x, snapshot.intensity, color="tab:blue", lw=1.4, label="$|F|^2$")
    if schedule is not None:
        pump = np.abs(schedule.base_profile(x)) ** 2
        ax1.plot(x, pump, color="tab:red", ls="--", lw=1.0, label="$E^2$")
    ax1.set_ylabel("intensity")
    ax1.legend(loc="upper right", frameon=False)
    if title:
        ax1.set_title(title)

    if snapshot.points_per_mirror > 1:
        ax2.step(x, snapshot.zgrid, where="mid", color="tab:green", lw=1.2)
    else:
        ax2.plot(x, snapshot.zgrid, color="tab:green", lw=1.2)
    ax2.set_xlabel(r"$\bar{x}$")
    ax2.set_ylabel("Z")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_bistability(points, path, title=None):
    """Steady-state intensity vs pump, stable branches solid."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    stable = [(p.pump_sq, p.intensity) for p in points if p.stable]
    unstable = [(p.pump_sq, p.intensity) for p in points if not p.stable]
    if stable:
        e, i = zip(*stable)
        ax.plot(e, i, ".", ms=3, color="tab:blue", label="stable")
    if unstable:
        e, i = zip(*unstable)
        ax.plot(e, i, ".", ms=3, color="tab:red", label="unstable")
    ax.set_xlabel("$E_0^2$")
    ax.set_ylabel("$I$")
    ax.legend(frameon=False)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_convergence(rows, path, xlabel, ylabel, title=None):
    """Log-log error plot from (x, y) rows."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    xs = [r[0] for r in rows]
    ys = [r[1] for r in rows]
    ax.loglog(xs, ys, "o-", color="tab:blue")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, which="both", alpha=0.3)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_growth(kbars, growth, path, title=None):
    """Linear growth rate versus transverse wavenumber."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.plot(kbars, growth, color="tab:blue", lw=1.4)
    ax.axhline(0.0, color="k", lw=0.8, alpha=0.5)
    ax.set_xlabel(r"$\bar{k}$")
    ax.set_ylabel(r"max Re $\lambda$")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
