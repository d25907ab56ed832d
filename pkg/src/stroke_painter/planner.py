"""Sequential painting planner.

Produces an ordered, layered brushstroke sequence for a target image:
background layer first, then foreground objects in decreasing saliency, each
painted through a chain of shrinking local attention windows.  Window
placement follows the residual error (largest remaining mistake wins,
subject to a jump limit that keeps consecutive windows spatially close), and
the strokes inside each window are fitted by projected gradient descent
through the differentiable rasterizer.  A stroke is kept only if it strictly
reduces the masked distance, so the masked error is non-increasing across
the whole run.

Everything is deterministic given the task and a seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import EmptyResidual
from .geometry import (FULL_WINDOW, Stroke, Window, WindowDelta, markov_update,
                       param_adjust)
from .layering import (layered_mask, layered_mask_ranked, mean_box_saliency,
                       rank_saliency_regions)
from .renderer import (DEFAULT_SETTINGS, RasterSettings, blank_canvas,
                       raster_patch, _patch_backward)
from .sequence import SequenceEntry, StrokeSequence


@dataclass(frozen=True)
class SaliencyBundle:
    """Foreground evidence for one target: saliency map, optional ranked
    region masks, and object bounding boxes."""

    saliency: np.ndarray
    boxes: tuple[Window, ...] = ()
    ranked: tuple[np.ndarray, ...] | None = None

    def __post_init__(self) -> None:
        for box in self.boxes:
            if not FULL_WINDOW.contains(box):
                raise ValueError(f"box outside unit canvas: {box}")


@dataclass(frozen=True)
class PlanConfig:
    """Planner knobs; the defaults are what the CLI ships with."""

    w_min: float = 0.2
    h_min: float = 0.2
    descent_steps: int = 40
    descent_lr: float = 0.02
    grad_clip: float = 1.0
    jump_limit: float = 0.5
    init_width: float = 0.3
    init_opacity: float = 0.8
    init_color: tuple[float, float, float] = (1.0, 1.0, 1.0)
    residual_blur: float | None = None  # default: min(H, W) / 64, at least 1 px


@dataclass(frozen=True)
class PaintingTask:
    """A full painting problem: target, saliency, budget and schedule shape."""

    target: np.ndarray
    bundle: SaliencyBundle
    num_layers: int = 2
    episode_length: int = 100
    strokes_per_window: int = 5
    config: PlanConfig = field(default_factory=PlanConfig)

    def __post_init__(self) -> None:
        if self.num_layers < 1:
            raise ValueError("need at least one layer")
        if self.episode_length % self.num_layers != 0:
            raise ValueError("episode length must divide evenly across layers")
        if not 1 <= self.strokes_per_window <= self.episode_length // self.num_layers:
            raise ValueError("strokes per window must fit inside one layer's budget")


def _blur_sigma(config: PlanConfig, height: int, width: int) -> float:
    if config.residual_blur is not None:
        return config.residual_blur
    return max(1.0, min(height, width) / 64.0)


def _split_evenly(total: int, parts: int) -> list[int]:
    base, rem = divmod(total, parts)
    return [base + (1 if i < rem else 0) for i in range(parts)]


def masked_residual(target: np.ndarray, canvas: np.ndarray,
                    mask: np.ndarray) -> np.ndarray:
    """Per-pixel squared masked error, averaged over channels."""
    diff = (target - canvas) * mask[:, :, None]
    return np.mean(diff * diff, axis=2)


def schedule_objects(bundle: SaliencyBundle, layer: int) -> list[Window]:
    """Coarse windows to visit in one layer.

    Layer 0 paints the backdrop through the whole-canvas window; foreground
    layers visit object boxes by descending mean in-box saliency, ties broken
    by larger area, then original index.
    """
    if layer == 0 or not bundle.boxes:
        return [FULL_WINDOW]
    order = sorted(
        range(len(bundle.boxes)),
        key=lambda i: (-mean_box_saliency(bundle.saliency, bundle.boxes[i]),
                       -(bundle.boxes[i].w * bundle.boxes[i].h), i),
    )
    return [bundle.boxes[i] for i in order]


def propose_window(residual: np.ndarray, coarse: Window, prev_local: Window,
                   t_norm: float, w_min: float = 0.2, h_min: float = 0.2,
                   jump_limit: float = 0.5, blur_sigma: float = 2.0) -> Window:
    """Place the next local window on the worst remaining error.

    The window extent follows the coarse-to-fine shrink schedule; its center
    seeks the argmax of the blurred residual inside the coarse window but may
    move at most ``jump_limit`` * diag(coarse) from the previous center.
    Ambiguous argmaxes resolve to the candidate nearest the previous center.
    """
    height, width = residual.shape
    y0, y1, x0, x1 = coarse.pixel_rect(height, width)
    crop = residual[y0:y1, x0:x1]
    if not np.any(crop):
        raise EmptyResidual("no residual left inside the coarse window")
    blurred = ndimage.gaussian_filter(crop, sigma=blur_sigma)

    prev_cx = prev_local.cx * width
    prev_cy = prev_local.cy * height
    ys, xs = np.nonzero(blurred == blurred.max())
    px = xs + x0 + 0.5
    py = ys + y0 + 0.5
    best = int(np.argmin((px - prev_cx) ** 2 + (py - prev_cy) ** 2))
    want_cx = px[best] / width
    want_cy = py[best] / height

    max_jump = jump_limit * coarse.diag
    move = np.array([want_cx - prev_local.cx, want_cy - prev_local.cy])
    dist = float(np.linalg.norm(move))
    if dist > max_jump > 0.0:
        move *= max_jump / dist
    cx = prev_local.cx + move[0]
    cy = prev_local.cy + move[1]

    w = max(1.0 - t_norm, w_min) * coarse.w
    h = max(1.0 - t_norm, h_min) * coarse.h
    dx = (cx - 0.5 * w - coarse.x) / coarse.w - (prev_local.x - coarse.x) / coarse.w
    dy = (cy - 0.5 * h - coarse.y) / coarse.h - (prev_local.y - coarse.y) / coarse.h
    delta = WindowDelta(dx=float(np.clip(dx, -1.0, 1.0)),
                        dy=float(np.clip(dy, -1.0, 1.0)))
    return markov_update(coarse, prev_local, delta, t_norm, w_min, h_min)


def confine_stroke(stroke: Stroke, window: Window, height: int, width: int,
                   settings: RasterSettings = DEFAULT_SETTINGS) -> Stroke:
    """Project a stroke so its rendered support lies inside the window.

    Control points are pulled into the window inset by the stroke's support
    radius (rendered radius plus the soft edge), and half-widths are capped
    so such an inset exists.  Applied after every descent step this keeps
    the full alpha mass of planner strokes inside their window.
    """
    mindim = float(min(height, width))
    half_edge = 0.5 * settings.edge_width
    win_w_px = window.w * width
    win_h_px = window.h * height

    r_cap = 0.5 * min(win_w_px, win_h_px) - half_edge - 0.5
    w_cap = max(r_cap, 0.0) / mindim
    w0 = min(stroke.w0, w_cap)
    w2 = min(stroke.w2, w_cap)

    support = max(max(w0, w2) * mindim, settings.floor_radius) + half_edge
    margin_x = support / width
    margin_y = support / height
    lo_x, hi_x = window.x + margin_x, window.x + window.w - margin_x
    lo_y, hi_y = window.y + margin_y, window.y + window.h - margin_y
    if lo_x > hi_x:
        lo_x = hi_x = window.cx
    if lo_y > hi_y:
        lo_y = hi_y = window.cy

    vals = stroke.as_array()
    vals[0:6:2] = np.clip(vals[0:6:2], lo_x, hi_x)
    vals[1:6:2] = np.clip(vals[1:6:2], lo_y, hi_y)
    vals[8] = w0
    vals[9] = w2
    return Stroke.from_array(np.clip(vals, 0.0, 1.0))


INIT_SPREAD = 0.25  # control-point scatter around the seed, in window units


def _init_stroke(rng: np.random.Generator, window: Window, target: np.ndarray,
                 seed_point: tuple[float, float], config: PlanConfig,
                 settings: RasterSettings) -> Stroke:
    """Sample a fresh stroke around a seed point (window units), color-warmed.

    Seeding at the window's current residual peak keeps stroke patches small
    and gives descent a head start; the color starts at the mean target color
    under the initial footprint.
    """
    height, width = target.shape[:2]
    sx, sy = seed_point
    offs = rng.uniform(-INIT_SPREAD, INIT_SPREAD, size=6)
    pts = np.clip([sx + offs[0], sy + offs[1], sx + offs[2],
                   sy + offs[3], sx + offs[4], sy + offs[5]], 0.0, 1.0)
    stroke = Stroke(x0=pts[0], y0=pts[1], x1=pts[2], y1=pts[3],
                    x2=pts[4], y2=pts[5],
                    z0=config.init_opacity, z2=config.init_opacity,
                    w0=config.init_width, w2=config.init_width,
                    r=0.5, g=0.5, b=0.5)
    stroke = confine_stroke(param_adjust(stroke, window), window, height, width,
                            settings)
    patch = raster_patch(stroke, height, width, settings)
    if patch is not None:
        (y0, y1, x0, x1), alpha = patch
        total = float(alpha.sum())
        if total > 1e-9:
            rgb = np.tensordot(alpha, target[y0:y1, x0:x1], axes=([0, 1], [0, 1]))
            rgb = np.clip(rgb / total, 0.0, 1.0)
            vals = stroke.as_array()
            vals[10:13] = rgb
            stroke = Stroke.from_array(vals)
    return stroke


def _sq_error(canvas: np.ndarray, target: np.ndarray, mask2: np.ndarray) -> float:
    d = canvas - target
    return float(np.sum(d * d * mask2))


def _descend_stroke(stroke: Stroke, base: np.ndarray, target: np.ndarray,
                    mask2: np.ndarray, window: Window,
                    rect: tuple[int, int, int, int], steps: int, lr: float,
                    grad_clip: float, settings: RasterSettings,
                    height: int, width: int) -> tuple[Stroke, float]:
    """Fit one stroke to the window rect by projected gradient descent.

    ``base``/``target``/``mask2`` are rect-sized crops (mask2 the squared
    mask, channel-broadcast).  The loss is the masked squared error over the
    rect; only the stroke's bounding patch is recomputed per step.  Returns
    the best stroke seen and the loss it achieves when composited, on the
    exact arithmetic used for the acceptance comparison.
    """
    ry0, ry1, rx0, rx1 = rect
    inv_n = 1.0 / target.size
    base_total = _sq_error(base, target, mask2)
    params = stroke.as_array()
    best_params = params.copy()
    best_loss = math.inf

    for step in range(steps):
        cur = Stroke.from_array(params)
        patch = raster_patch(cur, height, width, settings)
        if patch is None:
            break
        (py0, py1, px0, px1), alpha = patch
        iy0, iy1 = max(py0, ry0), min(py1, ry1)
        ix0, ix1 = max(px0, rx0), min(px1, rx1)
        if iy0 >= iy1 or ix0 >= ix1:
            break
        acrop = alpha[iy0 - py0:iy1 - py0, ix0 - px0:ix1 - px0]
        sl = np.s_[iy0 - ry0:iy1 - ry0, ix0 - rx0:ix1 - rx0]
        region = base[sl]
        tgt_crop = target[sl]
        m2_crop = mask2[sl]
        rgb = params[10:13]
        a = acrop[:, :, None]
        painted = region * (1.0 - a) + a * rgb
        loss = (base_total - _sq_error(region, tgt_crop, m2_crop)
                + _sq_error(painted, tgt_crop, m2_crop)) * inv_n
        if loss < best_loss:
            best_loss = loss
            best_params = params.copy()

        grad_c = (2.0 * inv_n) * ((painted - tgt_crop) * m2_crop)
        galpha_crop = (np.tensordot(grad_c, rgb, axes=([2], [0]))
                       - np.sum(grad_c * region, axis=2))
        galpha = np.zeros_like(alpha)
        galpha[iy0 - py0:iy1 - py0, ix0 - px0:ix1 - px0] = galpha_crop
        _, partials = _patch_backward(cur, height, width, patch[0], galpha,
                                      alpha_patch=alpha, settings=settings)
        partials[10:13] = np.tensordot(grad_c, acrop, axes=([0, 1], [0, 1]))
        norm = float(np.linalg.norm(partials))
        if norm > grad_clip:
            partials *= grad_clip / norm
        lr_t = lr * 0.5 * (1.0 + math.cos(math.pi * step / steps))
        params = np.clip(params - lr_t * partials, 0.0, 1.0)
        params = confine_stroke(Stroke.from_array(params), window, height, width,
                                settings).as_array()
    return Stroke.from_array(best_params), best_loss


def optimize_window_strokes(canvas: np.ndarray, target: np.ndarray,
                            mask: np.ndarray, window: Window, k: int,
                            steps: int = 40, lr: float = 0.02,
                            rng: np.random.Generator | None = None,
                            config: PlanConfig | None = None,
                            settings: RasterSettings = DEFAULT_SETTINGS,
                            ) -> tuple[list[Stroke], np.ndarray]:
    """Fit up to k strokes inside one window, keeping only strict improvements.

    Strokes are fitted one at a time against the masked distance restricted
    to the window's pixel rectangle; each accepted stroke is composited
    before the next is initialized, so the distance decreases monotonically.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    rng = rng if rng is not None else np.random.default_rng(0)
    config = config if config is not None else PlanConfig()
    height, width = target.shape[:2]
    rect = window.pixel_rect(height, width)
    ry0, ry1, rx0, rx1 = rect
    tgt = target[ry0:ry1, rx0:rx1]
    msk = mask[ry0:ry1, rx0:rx1]
    mask2 = (msk * msk)[:, :, None]
    inv_n = 1.0 / tgt.size

    win_x0 = window.x * width
    win_y0 = window.y * height
    win_w = max(window.w * width, 1e-9)
    win_h = max(window.h * height, 1e-9)

    out = canvas.copy()
    kept: list[Stroke] = []
    for _ in range(k):
        base = out[ry0:ry1, rx0:rx1].copy()
        d_before = _sq_error(base, tgt, mask2) * inv_n
        err = np.sum(((tgt - base) * mask2) * (tgt - base), axis=2)
        if err.max() > 0.0:
            iy, ix = np.unravel_index(int(np.argmax(err)), err.shape)
            seed = (min(max((rx0 + ix + 0.5 - win_x0) / win_w, 0.0), 1.0),
                    min(max((ry0 + iy + 0.5 - win_y0) / win_h, 0.0), 1.0))
        else:
            seed = (0.5, 0.5)
        stroke = _init_stroke(rng, window, target, seed, config, settings)
        stroke, d_after = _descend_stroke(
            stroke, base, tgt, mask2, window, rect, steps, lr,
            config.grad_clip, settings, height, width)
        if not (d_after < d_before):
            continue
        patch = raster_patch(stroke, height, width, settings)
        if patch is None:
            continue
        (py0, py1, px0, px1), alpha = patch
        rgb = np.array([stroke.r, stroke.g, stroke.b])
        a = alpha[:, :, None]
        out[py0:py1, px0:px1] = out[py0:py1, px0:px1] * (1.0 - a) + a * rgb
        kept.append(stroke)
    return kept, out


def _layer_mask(task: PaintingTask, layer: int) -> np.ndarray:
    height, width = task.target.shape[:2]
    if task.num_layers == 1:
        return np.ones((height, width), dtype=np.float64)
    if task.num_layers == 2:
        return layered_mask(task.bundle.saliency, layer)
    if task.bundle.ranked is not None:
        ranked = list(task.bundle.ranked)
    else:
        ranked = rank_saliency_regions(task.bundle.saliency,
                                       list(task.bundle.boxes), task.num_layers)
    return layered_mask_ranked(ranked, layer, task.num_layers)


def plan(task: PaintingTask, seed: int = 0,
         settings: RasterSettings = DEFAULT_SETTINGS,
         ) -> tuple[StrokeSequence, list[np.ndarray]]:
    """Run the full layered, window-guided painting schedule.

    Returns the stroke sequence (all gates open) and each layer's terminal
    canvas.  At most ``episode_length`` strokes are emitted.
    """
    cfg = task.config
    target = task.target
    height, width = target.shape[:2]
    rng = np.random.default_rng(seed)
    canvas = blank_canvas(height, width, cfg.init_color)
    per_layer = task.episode_length // task.num_layers
    n_windows = math.ceil(per_layer / task.strokes_per_window)
    sigma = _blur_sigma(cfg, height, width)

    entries: list[SequenceEntry] = []
    layer_canvases: list[np.ndarray] = []
    for layer in range(task.num_layers):
        mask = _layer_mask(task, layer)
        coarse_list = schedule_objects(task.bundle, layer)
        alloc = _split_evenly(n_windows, len(coarse_list))
        budget = per_layer
        t_idx = 0
        for coarse, visit_windows in zip(coarse_list, alloc):
            local_prev = coarse
            for widx in range(visit_windows):
                if budget <= 0:
                    break
                t_norm = widx / (visit_windows - 1) if visit_windows > 1 else 0.0
                k = min(task.strokes_per_window, budget)
                residual = masked_residual(target, canvas, mask)
                try:
                    win = propose_window(residual, coarse, local_prev, t_norm,
                                         cfg.w_min, cfg.h_min, cfg.jump_limit,
                                         sigma)
                except EmptyResidual:
                    continue
                strokes, canvas = optimize_window_strokes(
                    canvas, target, mask, win, k, cfg.descent_steps,
                    cfg.descent_lr, rng, cfg, settings)
                for s in strokes:
                    entries.append(SequenceEntry(layer, t_idx, s, 1.0, win))
                    t_idx += 1
                budget -= k
                local_prev = win
        layer_canvases.append(canvas.copy())
    return StrokeSequence.from_entries(entries), layer_canvases


def plan_uniform_grid(task: PaintingTask, seed: int = 0, grid: int = 4,
                      settings: RasterSettings = DEFAULT_SETTINGS,
                      ) -> tuple[StrokeSequence, list[np.ndarray]]:
    """Baseline comparator: the same stroke optimizer on a fixed grid.

    The canvas is divided into grid x grid cells painted row-major with an
    even share of the stroke budget, no layering, no saliency and no window
    movement.  Differences against :func:`plan` therefore isolate the value
    of the layered, residual-guided schedule.
    """
    cfg = task.config
    target = task.target
    height, width = target.shape[:2]
    rng = np.random.default_rng(seed)
    canvas = blank_canvas(height, width, cfg.init_color)
    mask = np.ones((height, width), dtype=np.float64)
    shares = _split_evenly(task.episode_length, grid * grid)

    entries: list[SequenceEntry] = []
    t_idx = 0
    for row in range(grid):
        for col in range(grid):
            cell = Window(col / grid, row / grid, 1.0 / grid, 1.0 / grid)
            left = shares[row * grid + col]
            while left > 0:
                k = min(task.strokes_per_window, left)
                strokes, canvas = optimize_window_strokes(
                    canvas, target, mask, cell, k, cfg.descent_steps,
                    cfg.descent_lr, rng, cfg, settings)
                for s in strokes:
                    entries.append(SequenceEntry(0, t_idx, s, 1.0, cell))
                    t_idx += 1
                left -= k
    return StrokeSequence.from_entries(entries), [canvas.copy()]
