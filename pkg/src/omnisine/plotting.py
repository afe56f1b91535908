"""Figures written next to the CSV/JSON outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .sinusoid import model_eval  # noqa: E402


def plot_fit(result, model, path, title=None):
    """Measured du/dv per column with the fitted sinusoids overlaid."""
    fig, axes = plt.subplots(2, 1, figsize=(8, 5.5), sharex=True)
    u = np.linspace(0, model.u_max, 400)
    series = (("du", result.fit_u, r"$\Delta u$ [px]"),
              ("dv", result.fit_v, r"$\Delta v$ [px]"))
    for ax, (name, rep, label) in zip(axes, series):
        ax.plot(result.raw_field.u_p, getattr(result.raw_field, name), "o",
                ms=3, color="0.7", label="measured")
        ax.plot(result.field.u_p, getattr(result.field, name), ".",
                color="C0", label="median filtered")
        ax.plot(u, model_eval(rep.params, model.gamma, u), "-", color="C3",
                label=f"fit A={rep.params.A:.3f} phi={rep.params.phi:.3f} "
                      f"B={rep.params.B:.3f}")
        for q in (0.25, 0.5, 0.75):
            ax.axvline(q * model.u_max, color="0.85", lw=0.8, zorder=0)
        ax.set_ylabel(label)
        ax.legend(fontsize=7, loc="upper right")
    axes[-1].set_xlabel(r"column $u_p$ [px]")
    axes[-1].set_xlim(0, model.u_max)
    p = result.pose
    fig.suptitle(title or f"roll={p.roll:.4f} pitch={p.pitch:.4f} yaw={p.yaw:.4f} rad",
                 fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_trajectory(estimates, truth, path, rmse=None):
    """Per-pair roll/pitch/yaw estimates against ground truth."""
    est = np.asarray(estimates, dtype=float).reshape(-1, 3)
    ref = np.asarray(truth, dtype=float).reshape(-1, 3)
    idx = np.arange(len(est))
    fig, axes = plt.subplots(1, 3, figsize=(11, 3.2))
    for k, (ax, name) in enumerate(zip(axes, ("roll", "pitch", "yaw"))):
        ax.plot(idx, ref[:, k], "k-", lw=1, label="truth")
        lab = "estimate" if rmse is None else f"estimate, $\\mu$={rmse[k]:.4f}"
        ax.plot(idx, est[:, k], "o-", ms=3, color="C0", label=lab)
        ax.set_title(name, fontsize=9)
        ax.set_xlabel("pair")
        ax.legend(fontsize=7)
    axes[0].set_ylabel("angle [rad]")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_envelope(thetas, envelope, path, limit=0.02):
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.plot(thetas, 100 * np.asarray(envelope), "o-", ms=3)
    ax.axhline(100 * limit, color="C3", ls="--", lw=1, label=f"{100 * limit:g}% bound")
    ax.set_xlabel(r"roll $\theta$ [rad]")
    ax.set_ylabel("max |exact - small-angle| / amplitude [%]")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
