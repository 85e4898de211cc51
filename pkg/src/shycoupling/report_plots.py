"""Matplotlib figure rendering for run reports (file output only)."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def render_report_figures(report, result, out_dir):
    """Write the report figures next to the JSON/CSV outputs."""
    rep = result.get("shyness")
    if rep is not None:
        _survival_figure(rep, report.scenario, out_dir / "survival.png")
        _min_trend_figure(rep, report.scenario, out_dir / "min_distance.png")
    path0 = result.get("path0")
    if path0 is not None and hasattr(path0, "dist"):
        _distance_trace_figure(path0, report, out_dir / "path0_distance.png")


def _survival_figure(rep, title, path):
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.plot(rep.eps_grid, rep.survival, "o-", color="tab:blue")
    lo = rep.survival_ci[:, 0]
    hi = rep.survival_ci[:, 1]
    ax.fill_between(rep.eps_grid, lo, hi, alpha=0.25, color="tab:blue",
                    label="95% band")
    ax.set_xlabel(r"$\epsilon$")
    ax.set_ylabel(r"P(min distance > $\epsilon$)")
    ax.set_ylim(-0.02, 1.02)
    ax.set_title(f"{title}: min-distance survival")
    ax.legend(loc="best")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def _min_trend_figure(rep, title, path):
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.plot(rep.ckpt_times, rep.median_min_by_ckpt, color="tab:red")
    ax.set_xlabel("t")
    ax.set_ylabel("median running min distance")
    ax.set_title(f"{title}: approach trend ({rep.verdict})")
    if np.all(rep.median_min_by_ckpt > 0):
        ax.set_yscale("log")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def _distance_trace_figure(path0, report, path):
    fig, ax = plt.subplots(figsize=(6.5, 4))
    ax.plot(path0.t, path0.dist, lw=0.7, color="tab:green")
    ax.set_xlabel("t")
    ax.set_ylabel("pair distance")
    ax.set_title(f"{report.scenario}: path 0 distance")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
