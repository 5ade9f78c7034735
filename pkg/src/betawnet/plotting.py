"""Figure files for command-line reports.

Everything here renders straight to disk through the Agg backend, so the
command-line tools work the same on headless machines.  Each saver takes
plain arrays plus an output path and returns the path it wrote.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_DPI = 120


def _finish(fig, path: str) -> str:
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_curve_plot(x, y, path: str, title: str = "", ylabel: str = "") -> str:
    """Single line plot, e.g. one wavelet over its support."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.plot(np.asarray(x, dtype=float), np.asarray(y, dtype=float), lw=1.5)
    ax.set_xlabel("x")
    if ylabel:
        ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    return _finish(fig, path)


def save_fit_plot(x, target, output, path: str, title: str = "") -> str:
    """Target curve and the network's reconstruction on shared axes."""
    x = np.asarray(x, dtype=float)
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.plot(x, np.asarray(target, dtype=float), lw=1.5, label="target")
    ax.plot(x, np.asarray(output, dtype=float), lw=1.2, ls="--", label="network")
    ax.set_xlabel("x")
    ax.set_ylabel("value")
    if title:
        ax.set_title(title)
    ax.legend()
    ax.grid(True, alpha=0.3)
    return _finish(fig, path)


def save_history_plot(histories, path: str, title: str = "training error") -> str:
    """Per-epoch MSE on a log scale; accepts one history or a dict of them."""
    if not isinstance(histories, dict):
        histories = {"": histories}
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for label, history in sorted(histories.items()):
        epochs = np.arange(1, len(history) + 1)
        ax.plot(epochs, np.asarray(history, dtype=float), lw=1.2,
                label=label if label else None)
    ax.set_yscale("log")
    ax.set_xlabel("epoch")
    ax.set_ylabel("mse")
    ax.set_title(title)
    if any(histories):
        ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3, which="both")
    return _finish(fig, path)


def save_rates_plot(per_class_rates: dict[str, float], path: str) -> str:
    """Bar chart of per-class recognition rates in label order."""
    labels = sorted(per_class_rates)
    rates = [per_class_rates[label] for label in labels]
    fig, ax = plt.subplots(figsize=(max(4.0, 0.9 * len(labels) + 2.0), 4.0))
    ax.bar(range(len(labels)), rates, color="#4878b0")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=8)
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("recognition rate")
    ax.grid(True, axis="y", alpha=0.3)
    return _finish(fig, path)


def save_confusion_plot(labels: list[str], confusion, path: str) -> str:
    """Heatmap of the confusion counts, rows = true class."""
    counts = np.asarray(confusion, dtype=float)
    fig, ax = plt.subplots(figsize=(max(4.0, 0.6 * len(labels) + 2.0),) * 2)
    image = ax.imshow(counts, cmap="Blues")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=8)
    ax.set_yticks(range(len(labels)))
    ax.set_yticklabels(labels, fontsize=8)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    threshold = counts.max() / 2.0 if counts.size else 0.0
    for i in range(counts.shape[0]):
        for j in range(counts.shape[1]):
            ax.text(j, i, f"{int(counts[i, j])}", ha="center", va="center",
                    fontsize=8, color="white" if counts[i, j] > threshold else "black")
    fig.colorbar(image, ax=ax, fraction=0.046)
    return _finish(fig, path)
