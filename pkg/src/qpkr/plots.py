"""Matplotlib rendering of the report figures (written to files)."""

from __future__ import annotations

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .analysis import ALPHA


def plot_distributions(entries_dists, path):
    """Final-time momentum distributions on a log scale."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for entry, dist in entries_dists:
        label = (f"K={entry['K']:g}, hbar={entry['hbar_eff']:g}, "
                 f"eps={entry['epsilon']:g}")
        ax.semilogy(dist.sites, np.maximum(dist.probs, 1e-30), label=label)
    ax.set_xlabel(r"$p\,/\,2\hbar k_L$")
    ax.set_ylabel(r"$\Pi(p)$")
    ax.set_ylim(bottom=1e-12)
    ax.legend(fontsize=6)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_energy_vs_epsilon(energies, path):
    """E_kin(t_final) vs epsilon per (K, hbar) pair, log scale."""
    fig, ax = plt.subplots(figsize=(6, 4))
    pairs = {}
    for K, hbar, eps, _t, e_kin in energies:
        pairs.setdefault((K, hbar), []).append((eps, e_kin))
    for (K, hbar), rows in sorted(pairs.items()):
        rows.sort()
        eps = [r[0] for r in rows]
        e = [r[1] for r in rows]
        ax.semilogy(eps, e, "o-", label=f"K={K:g}, hbar={hbar:g}")
    ax.set_xlabel(r"$\varepsilon$")
    ax.set_ylabel(r"$E_{\mathrm{kin}}$")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_scaling(points, path):
    """E_kin ratio vs the scaling parameter with the exp(2 alpha x) line."""
    fig, ax = plt.subplots(figsize=(6, 4))
    x = np.array([p.x for p in points])
    y = np.array([p.y for p in points])
    ax.semilogy(x, y, "o", label="simulation")
    xs = np.linspace(0.0, max(x.max(), 1.0), 200)
    ax.semilogy(xs, np.exp(2.0 * ALPHA * xs), "r--",
                label=r"$\exp(2\alpha x)$, $\alpha=\pi/\sqrt{32}$")
    ax.set_xlabel(r"$\varepsilon K^2 / \hbar_{\mathrm{eff}}^2$")
    ax.set_ylabel(r"$E_{\mathrm{kin}}(\varepsilon)/E_{\mathrm{kin}}(0)$")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
