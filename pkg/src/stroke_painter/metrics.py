"""Quantitative evaluation of painting sequences.

Reports the pixel-space reconstruction error, descriptive statistics for the
two painting-style penalties (window movement and color transitions between
consecutive active strokes), stroke-budget accounting and a small multiscale
error used for relative comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch
from .geometry import Stroke, Window
from .renderer import DEFAULT_SETTINGS, RasterSettings, blank_canvas, render_sequence
from .sequence import StrokeSequence


@dataclass(frozen=True)
class SequenceReport:
    height: int
    width: int
    layers: int
    stroke_count_total: int
    stroke_count_active: int
    l_pixel: float
    l_ms: float
    spatial_penalty_sum: float
    color_penalty_sum: float
    layer_l2: tuple[float, ...] = field(default_factory=tuple)

    def lines(self) -> list[str]:
        """Flat key=value rendering with a stable key order."""
        out = [
            f"height={self.height}",
            f"width={self.width}",
            f"layers={self.layers}",
            f"stroke_count_total={self.stroke_count_total}",
            f"stroke_count_active={self.stroke_count_active}",
            f"l_pixel={self.l_pixel!r}",
            f"l_ms={self.l_ms!r}",
            f"spatial_penalty_sum={self.spatial_penalty_sum!r}",
            f"color_penalty_sum={self.color_penalty_sum!r}",
        ]
        out += [f"layer_l2_{i}={v!r}" for i, v in enumerate(self.layer_l2)]
        return out


def l_pixel(image: np.ndarray, canvas: np.ndarray) -> float:
    """Mean squared error over all pixels and channels, inputs in [0, 1]."""
    if image.shape != canvas.shape:
        raise DimensionMismatch(f"{image.shape} vs {canvas.shape}")
    diff = image - canvas
    return float(np.mean(diff * diff))


def r_spatial(window_prev: Window, window_next: Window) -> float:
    """Penalty for moving the coarse window: negative distance between (x, y, w, h)."""
    return -float(np.linalg.norm(window_next.as_array() - window_prev.as_array()))


def r_color(stroke_prev: Stroke, stroke_next: Stroke) -> float:
    """Penalty for switching colors between consecutive strokes."""
    a = np.array([stroke_prev.r, stroke_prev.g, stroke_prev.b])
    b = np.array([stroke_next.r, stroke_next.g, stroke_next.b])
    return -float(np.linalg.norm(b - a))


def _box_downsample(image: np.ndarray) -> np.ndarray:
    h2, w2 = image.shape[0] // 2, image.shape[1] // 2
    trimmed = image[: h2 * 2, : w2 * 2]
    return trimmed.reshape(h2, 2, w2, 2, -1).mean(axis=(1, 3))


def l_multiscale(image: np.ndarray, canvas: np.ndarray, levels: int = 3) -> float:
    """Mean of per-level MSEs on a box-downsampled pyramid; relative use only."""
    if image.shape != canvas.shape:
        raise DimensionMismatch(f"{image.shape} vs {canvas.shape}")
    a, b = image, canvas
    values = []
    for level in range(levels):
        values.append(l_pixel(a, b))
        if min(a.shape[0], a.shape[1]) < 2:
            break
        a, b = _box_downsample(a), _box_downsample(b)
    return float(np.mean(values))


def report(seq: StrokeSequence, target: np.ndarray,
           init_color=(1.0, 1.0, 1.0), num_layers: int | None = None,
           settings: RasterSettings = DEFAULT_SETTINGS) -> SequenceReport:
    """Render the sequence and aggregate every metric into one report.

    Penalties pair consecutive *active* strokes in (layer, t) order, which is
    the sequence a viewer of the pruned painting would see.
    """
    height, width = target.shape[:2]
    init = blank_canvas(height, width, init_color)
    layers = num_layers if num_layers is not None else max(seq.num_layers(), 1)
    final, layer_canvases = render_sequence(seq, height, width, init,
                                            num_layers=layers, settings=settings)
    active = seq.active()
    spatial = 0.0
    color = 0.0
    for prev, nxt in zip(active, active[1:]):
        spatial += r_spatial(prev.window, nxt.window)
        color += r_color(prev.stroke, nxt.stroke)
    return SequenceReport(
        height=height,
        width=width,
        layers=layers,
        stroke_count_total=len(seq),
        stroke_count_active=len(active),
        l_pixel=l_pixel(target, final),
        l_ms=l_multiscale(target, final),
        spatial_penalty_sum=spatial,
        color_penalty_sum=color,
        layer_l2=tuple(l_pixel(target, c) for c in layer_canvases),
    )


def l2_trajectory(seq: StrokeSequence, target: np.ndarray,
                  init_color=(1.0, 1.0, 1.0),
                  settings: RasterSettings = DEFAULT_SETTINGS) -> np.ndarray:
    """Full-image MSE after each active stroke, replayed independently.

    Index 0 is the blank canvas; one value follows per active stroke.
    """
    from .renderer import composite_gated, rasterize

    height, width = target.shape[:2]
    canvas = blank_canvas(height, width, init_color)
    values = [l_pixel(target, canvas)]
    for e in seq.active():
        alpha, cmap = rasterize(e.stroke, height, width, settings)
        canvas = composite_gated(canvas, alpha, cmap, e.beta)
        values.append(l_pixel(target, canvas))
    return np.asarray(values)
