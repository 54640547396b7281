"""Figure rendering for the report path.

One PNG per experiment subcommand, drawn next to the CSV it illustrates.
Uses the Agg backend so headless runs work.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _grouped(rows, keys):
    """Ordered {key tuple: [rows]} preserving first-appearance order."""
    out = {}
    for r in rows:
        out.setdefault(tuple(r[k] for k in keys), []).append(r)
    return out


def plot_p_conn(report, path) -> None:
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    for (n,), rows in _grouped(report.rows, ("n",)).items():
        g = [r["gamma_db"] for r in rows]
        p = [r["p_conn"] for r in rows]
        err = [r["stderr"] for r in rows]
        ax.errorbar(g, p, yerr=err, marker="o", capsize=2, label=f"N = {n}")
    ax.set_xlabel("threshold $\\gamma$ (dB)")
    ax.set_ylabel("connection probability")
    ax.set_ylim(-0.02, 1.02)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_localization(report, path) -> None:
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    styles = {"single_hop": "--", "multi_hop": "-"}
    for (mode, m), rows in _grouped(report.rows, ("mode", "m")).items():
        g = [r["gamma_db"] for r in rows]
        u = [r["u_bar_m"] for r in rows]
        err = [r["stderr"] for r in rows]
        ax.errorbar(
            g, u, yerr=err, marker=".", capsize=2,
            linestyle=styles.get(mode, "-"), label=f"{mode}, M = {m}",
        )
    ax.set_xlabel("threshold $\\gamma$ (dB)")
    ax.set_ylabel("mean localization error (m)")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_line_scenario(histograms, report, path) -> None:
    """One joint-density panel per (mode, algorithm), held-out error in the title."""
    keys = list(histograms)
    errors = {
        (r["mode"], r["algorithm"]): (r["u_bar_m"], r["stderr"]) for r in report.rows
    }
    fig, axes = plt.subplots(
        1, len(keys), figsize=(4.6 * len(keys), 4.2), squeeze=False, sharey=True
    )
    for ax, key in zip(axes[0], keys):
        h = histograms[key]
        total = h.total()
        density = h.counts / total if total > 0 else h.counts
        mesh = ax.pcolormesh(h.pos_edges, h.ratio_edges, density.T, cmap="viridis")
        fig.colorbar(mesh, ax=ax, label="fraction of samples")
        mode = getattr(key[0], "value", key[0])
        alg = getattr(key[1], "value", key[1])
        title = f"{mode} / {alg}"
        if (mode, alg) in errors:
            u, se = errors[(mode, alg)]
            title += f"\nheld-out error {u:.1f} ± {se:.1f} m"
        ax.set_title(title, fontsize=10)
        ax.set_xlabel("UE position (m)")
    axes[0][0].set_ylabel("flow-ratio fraction $\\beta/(1+\\beta)$")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_rates(report, path) -> None:
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    styles = {"single_hop": "--", "multi_hop": "-"}
    markers = {"umf": "o", "ppmf": "x"}
    for (s, mode, alg), rows in _grouped(report.rows, ("s", "mode", "algorithm")).items():
        m = [r["m"] for r in rows]
        c = [r["c_tot"] for r in rows]
        err = [r["stderr"] for r in rows]
        ax.errorbar(
            m, c, yerr=err, capsize=2,
            linestyle=styles.get(mode, "-"), marker=markers.get(alg, "o"),
            label=f"S = {s}, {mode}, {alg}",
        )
    ax.set_xlabel("number of UEs M")
    ax.set_ylabel("mean total rate (bit/s/Hz)")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render(report, path, histograms=None) -> None:
    """Dispatch on the report's metric name."""
    metric = report.metric
    if metric == "p_conn":
        plot_p_conn(report, path)
    elif metric == "localization_error":
        plot_localization(report, path)
    elif metric == "line_localization_error":
        plot_line_scenario(histograms or {}, report, path)
    elif metric == "total_rate":
        plot_rates(report, path)
    else:
        raise ValueError(f"no figure defined for metric {metric!r}")
