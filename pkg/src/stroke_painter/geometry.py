"""Brushstroke and attention-window types plus the window algebra.

Coordinates live in a resolution-independent unit frame: positions and
extents are canvas fractions in [0, 1], with (0, 0) the top-left corner.
A window is an axis-aligned rectangle given by its top-left corner and
extent.  All operations here are pure functions over immutable values.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import DegenerateWindow, LengthMismatch, NonConvexCoefficients

CONVEX_SUM_TOL = 1e-6

# Field order used everywhere a stroke is flattened to a vector.
STROKE_FIELDS = (
    "x0", "y0", "x1", "y1", "x2", "y2",
    "z0", "z2", "w0", "w2", "r", "g", "b",
)


@dataclass(frozen=True)
class Stroke:
    """A quadratic Bezier brushstroke described by 13 unit-range parameters.

    (x0, y0), (x1, y1), (x2, y2) are the curve control points as canvas
    fractions; z0/z2 are endpoint opacities; w0/w2 are endpoint half-widths
    as fractions of min(height, width); r/g/b is the stroke color.
    """

    x0: float
    y0: float
    x1: float
    y1: float
    x2: float
    y2: float
    z0: float
    z2: float
    w0: float
    w2: float
    r: float
    g: float
    b: float

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, f) for f in STROKE_FIELDS], dtype=np.float64)

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "Stroke":
        if len(values) != len(STROKE_FIELDS):
            raise LengthMismatch(f"expected {len(STROKE_FIELDS)} values, got {len(values)}")
        return cls(**{f: float(v) for f, v in zip(STROKE_FIELDS, values)})

    def validate(self) -> "Stroke":
        for f in STROKE_FIELDS:
            v = getattr(self, f)
            if not np.isfinite(v) or v < 0.0 or v > 1.0:
                raise ValueError(f"stroke field {f}={v!r} outside [0, 1]")
        return self

    def clamped(self) -> "Stroke":
        return Stroke.from_array(np.clip(self.as_array(), 0.0, 1.0))


@dataclass(frozen=True)
class Window:
    """Axis-aligned rectangle in canvas fractions: top-left corner and extent."""

    x: float
    y: float
    w: float
    h: float

    @property
    def cx(self) -> float:
        return self.x + 0.5 * self.w

    @property
    def cy(self) -> float:
        return self.y + 0.5 * self.h

    @property
    def diag(self) -> float:
        return float(np.hypot(self.w, self.h))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.w, self.h], dtype=np.float64)

    def contains(self, other: "Window", tol: float = 1e-9) -> bool:
        return (
            other.x >= self.x - tol
            and other.y >= self.y - tol
            and other.x + other.w <= self.x + self.w + tol
            and other.y + other.h <= self.y + self.h + tol
        )

    def pixel_rect(self, height: int, width: int) -> tuple[int, int, int, int]:
        """Window as integer pixel bounds (y0, y1, x0, x1), always >= 1 px."""
        x0 = min(max(int(np.floor(self.x * width)), 0), width - 1)
        y0 = min(max(int(np.floor(self.y * height)), 0), height - 1)
        x1 = min(max(int(np.ceil((self.x + self.w) * width)), x0 + 1), width)
        y1 = min(max(int(np.ceil((self.y + self.h) * height)), y0 + 1), height)
        return y0, y1, x0, x1


FULL_WINDOW = Window(0.0, 0.0, 1.0, 1.0)


@dataclass(frozen=True)
class WindowDelta:
    """Signed offsets applied by one Markov window update, each in [-1, 1]."""

    dx: float = 0.0
    dy: float = 0.0
    dw: float = 0.0
    dh: float = 0.0

    def validate(self) -> "WindowDelta":
        for name in ("dx", "dy", "dw", "dh"):
            v = getattr(self, name)
            if not np.isfinite(v) or abs(v) > 1.0:
                raise ValueError(f"delta component {name}={v!r} outside [-1, 1]")
        return self


@dataclass(frozen=True)
class AttentionState:
    """Coarse window, local window, and the normalized schedule clock."""

    coarse: Window
    local: Window
    t_norm: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.t_norm <= 1.0:
            raise ValueError(f"t_norm={self.t_norm!r} outside [0, 1]")
        if not self.coarse.contains(self.local):
            raise ValueError("local window must lie inside the coarse window")


def clamp_window(window: Window, bounds: Window) -> Window:
    """Clamp a window into bounds: translate first, shrink only if it still overflows.

    Never produces a negative extent.
    """
    w = max(min(window.w, bounds.w), 0.0)
    h = max(min(window.h, bounds.h), 0.0)
    x = min(max(window.x, bounds.x), bounds.x + bounds.w - w)
    y = min(max(window.y, bounds.y), bounds.y + bounds.h - h)
    return Window(x, y, w, h)


def object_select(alphas: Sequence[float], boxes: Sequence[Window],
                  renormalize: bool = False) -> Window:
    """Blend candidate boxes into one coarse window by convex combination.

    ``boxes[0]`` is conventionally the whole canvas so weight can be shifted
    toward backdrop areas.  Coefficients must be non-negative and sum to one
    within CONVEX_SUM_TOL; with ``renormalize`` a positive off-sum is rescaled
    instead of rejected.
    """
    if len(alphas) != len(boxes):
        raise LengthMismatch(f"{len(alphas)} coefficients vs {len(boxes)} boxes")
    a = np.asarray(alphas, dtype=np.float64)
    if a.size == 0:
        raise LengthMismatch("empty coefficient list")
    if np.any(a < 0.0) or not np.all(np.isfinite(a)):
        raise NonConvexCoefficients(f"negative or non-finite coefficient in {alphas!r}")
    total = float(a.sum())
    if abs(total - 1.0) > CONVEX_SUM_TOL:
        if not renormalize or total <= 0.0:
            raise NonConvexCoefficients(f"coefficients sum to {total!r}, expected 1")
        a = a / total
    stacked = np.stack([b.as_array() for b in boxes])
    combo = a @ stacked
    return Window(*(float(v) for v in combo))


def markov_update(coarse_next: Window, local_prev: Window, delta: WindowDelta,
                  t_norm: float, w_min: float = 0.2, h_min: float = 0.2,
                  coarse_prev: Window | None = None) -> Window:
    """Advance the local attention window one step inside a coarse window.

    The previous local position is re-expressed in the previous coarse
    window's unit frame, offset by the delta, and mapped into the next coarse
    window; extents shrink with the schedule clock down to (w_min, h_min)
    fractions of the coarse extent.  The result is clamped into
    ``coarse_next`` intersected with the unit canvas.
    """
    if coarse_next.w <= 0.0 or coarse_next.h <= 0.0:
        raise DegenerateWindow(f"coarse window has empty extent: {coarse_next}")
    if not 0.0 <= t_norm <= 1.0:
        raise ValueError(f"t_norm={t_norm!r} outside [0, 1]")
    if not (0.0 < w_min <= 1.0 and 0.0 < h_min <= 1.0):
        raise ValueError("w_min and h_min must lie in (0, 1]")
    ref = coarse_prev if coarse_prev is not None else coarse_next
    if ref.w <= 0.0 or ref.h <= 0.0:
        raise DegenerateWindow(f"previous coarse window has empty extent: {ref}")

    x_prev = (local_prev.x - ref.x) / ref.w
    y_prev = (local_prev.y - ref.y) / ref.h
    x = coarse_next.x + (x_prev + delta.dx) * coarse_next.w
    y = coarse_next.y + (y_prev + delta.dy) * coarse_next.h
    w = (max(1.0 - t_norm, w_min) + delta.dw) * coarse_next.w
    h = (max(1.0 - t_norm, h_min) + delta.dh) * coarse_next.h

    bounds = clamp_window(coarse_next, FULL_WINDOW)
    return clamp_window(Window(x, y, max(w, 0.0), max(h, 0.0)), bounds)


def param_adjust(stroke: Stroke, window: Window) -> Stroke:
    """Remap a stroke given in window-unit coordinates into canvas coordinates.

    All three control points are mapped affinely into the window and the
    half-widths are scaled by the mean window extent; opacity and color pass
    through.  Output fields are clamped to [0, 1].
    """
    scale = 0.5 * (window.w + window.h)
    adjusted = replace(
        stroke,
        x0=window.x + stroke.x0 * window.w,
        y0=window.y + stroke.y0 * window.h,
        x1=window.x + stroke.x1 * window.w,
        y1=window.y + stroke.y1 * window.h,
        x2=window.x + stroke.x2 * window.w,
        y2=window.y + stroke.y2 * window.h,
        w0=stroke.w0 * scale,
        w2=stroke.w2 * scale,
    )
    return adjusted.clamped()
