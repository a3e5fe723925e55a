"""Figure rendering for run directories.

Static SVG output only.  Rendering is deterministic for identical inputs:
text stays text (no path conversion), the SVG hash salt is pinned, and the
creation date is stripped.  Decay annotations are copied verbatim from
summary.json; nothing here refits or recomputes rates.
"""

from __future__ import annotations

import numpy as np
import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.fonttype"] = "none"
matplotlib.rcParams["svg.hashsalt"] = "runreport"

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .frames import SeriesFrame

DRIFT_FLOOR = 1e-18   # plotting floor so exactly-conserved series stay visible
_SAVE_OPTS = dict(format="svg", metadata={"Date": None})


def _finish(fig, out_path):
    fig.savefig(out_path, **_SAVE_OPTS)
    plt.close(fig)


def render_decay(series: SeriesFrame, summary: dict, out_path: str) -> dict:
    """Semilog energy decay with the fitted line and rate annotation.

    Returns a record of what was drawn; when the energy column has no
    positive decay to show (an equilibrium run) or the summary carries no
    fit, a placeholder figure is emitted instead of an error.
    """
    t = series.t
    e = series["E"]
    fit = summary.get("fit")
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    if fit is None or np.any(e <= 0.0):
        ax.set_axis_off()
        ax.text(0.5, 0.5, "no decay to plot", ha="center", va="center",
                fontsize=14)
        _finish(fig, out_path)
        return {"placeholder": True, "annotation": None}
    lam = float(fit["lambda_fit"])
    amp = float(fit["amplitude"])
    window = fit.get("window", [t[0], t[-1]])
    ax.semilogy(t, e, label="E(t)", lw=1.2)
    tw = np.linspace(window[0], window[1], 200)
    ax.semilogy(tw, amp * np.exp(-lam * tw), "--", lw=1.0,
                label="fitted line")
    annotation = f"lambda = {lam!r}"
    ax.annotate(annotation, xy=(0.97, 0.95), xycoords="axes fraction",
                ha="right", va="top")
    ax.set_xlabel("t")
    ax.set_ylabel("E")
    ax.set_title("energy decay")
    ax.legend(loc="lower left")
    _finish(fig, out_path)
    return {"placeholder": False, "annotation": annotation, "lambda": lam}


def render_conservation(series: SeriesFrame, out_path: str) -> dict:
    """Conserved-quantity drift |Q(t) - Q(0)| on a log axis."""
    t = series.t
    drifts = {}
    for name in ("mass_f", "mass_rho", *series.momentum_names()):
        col = series[name]
        drifts[name] = np.abs(col - col[0])
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for name, vals in drifts.items():
        ax.semilogy(t, np.maximum(vals, DRIFT_FLOOR), label=name, lw=1.0)
    ax.set_xlabel("t")
    ax.set_ylabel("|drift|")
    ax.set_title("conserved-quantity drift")
    ax.legend(loc="best", fontsize=8)
    _finish(fig, out_path)
    return {"drifts": drifts}


def render_entropy(series: SeriesFrame, out_path: str) -> dict:
    """Entropy balance residual (log axis) and dissipation sign check."""
    t = series.t
    resid = np.abs(series["entropy_residual"])
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6.4, 6.0), sharex=True)
    ax1.semilogy(t, np.maximum(resid, DRIFT_FLOOR), lw=1.0)
    ax1.set_ylabel("|balance residual|")
    ax1.set_title("entropy balance")
    if "entropy_rhs" in series.columns:
        ax2.plot(t, series["entropy_rhs"], lw=1.0)
        ax2.axhline(0.0, color="k", lw=0.5)
        ax2.set_ylabel("dissipation (must be <= 0)")
    ax2.set_xlabel("t")
    _finish(fig, out_path)
    return {"residual": resid}


def write_text_summary(series: SeriesFrame, summary: dict, out_path: str):
    """One-page plain-text digest of the run."""
    t = series.t
    e = series["E"]
    lines = ["run report", "=========", ""]
    cfg = summary.get("config", {})
    if cfg:
        lines.append(
            f"configuration: dim={cfg.get('dim')}, n={cfg.get('n')}, "
            f"order={cfg.get('order')}, dt={cfg.get('dt')}, "
            f"steps={cfg.get('n_steps')}, preset={cfg.get('preset')}, "
            f"epsilon={cfg.get('epsilon')}, seed={cfg.get('seed')}"
        )
    lines.append(f"time span: {t[0]:g} .. {t[-1]:g} ({len(t)} reports)")
    lines.append(f"energy: E(0) = {e[0]:.6e}, E(end) = {e[-1]:.6e}")
    fit = summary.get("fit")
    if fit:
        lines.append(
            f"fitted decay: lambda = {fit['lambda_fit']!r}, "
            f"r^2 = {fit['r_squared']:.6f}, window = {fit.get('window')}"
        )
    else:
        lines.append("fitted decay: none (no positive decay in the window)")
    drift = summary.get("drift", {})
    if drift:
        worst = max(drift.values())
        lines.append(f"max conserved-quantity drift: {worst:.3e} ({drift})")
    lines.append(f"min phase-space density over run: {series['F_min'].min():.3e}")
    lines.append(
        f"entropy residual max: {np.abs(series['entropy_residual']).max():.3e}"
    )
    if "entropy_rhs" in series.columns:
        lines.append(
            f"entropy dissipation max (sign check): {series['entropy_rhs'].max():.3e}"
        )
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
