"""Figure rendering for the report paths (ROC curves, benchmark AUC summaries)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from duovad.metrics import RocCurve


def plot_roc(curves: dict[str, tuple[RocCurve, float]], path, title: str | None = None) -> None:
    """Render one or more ROC curves (label -> (curve, auc)) to an image file."""
    fig, ax = plt.subplots(figsize=(5.0, 4.5))
    for label, (curve, auc_value) in curves.items():
        ax.plot(curve.far, curve.sdr, label=f"{label} (AUC {auc_value:.3f})", linewidth=1.5)
    ax.plot([0, 1], [0, 1], "k--", linewidth=0.8, alpha=0.5)
    ax.set_xlabel("false acceptance rate")
    ax.set_ylabel("speech detection rate")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1.02)
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_auc_lines(
    aucs: dict[str, dict[float, float]], path, title: str | None = None
) -> None:
    """AUC versus SNR, one line per pipeline mode."""
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    for label, by_snr in aucs.items():
        snrs = sorted(by_snr)
        ax.plot(snrs, [by_snr[s] for s in snrs], marker="o", markersize=4, label=label)
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("AUC")
    ax.set_ylim(0.4, 1.02)
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
