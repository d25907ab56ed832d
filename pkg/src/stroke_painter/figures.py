"""Report figures rendered alongside the delimited metrics output."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def save_progress_figure(path, trajectory: np.ndarray, layer_marks=()) -> None:
    """Reconstruction error against painted stroke count, layer switches marked."""
    fig, ax = plt.subplots(figsize=(6, 3.5), constrained_layout=True)
    ax.plot(np.arange(len(trajectory)), trajectory, lw=1.5)
    for mark in layer_marks:
        ax.axvline(mark, color="0.6", ls="--", lw=0.8)
    ax.set_xlabel("strokes painted")
    ax.set_ylabel("mean squared error")
    ax.set_yscale("log")
    ax.grid(True, alpha=0.3)
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_layer_strip(path, target: np.ndarray, layer_canvases, final: np.ndarray) -> None:
    """Target, per-layer terminal canvases and the final canvas in one row."""
    panels = [("target", target)]
    panels += [(f"layer {i}", c) for i, c in enumerate(layer_canvases)]
    panels.append(("final", final))
    fig, axes = plt.subplots(1, len(panels), figsize=(2.6 * len(panels), 2.9),
                             constrained_layout=True)
    if len(panels) == 1:
        axes = [axes]
    for ax, (title, image) in zip(axes, panels):
        ax.imshow(np.clip(image, 0.0, 1.0))
        ax.set_title(title, fontsize=9)
        ax.axis("off")
    fig.savefig(path, dpi=150)
    plt.close(fig)
