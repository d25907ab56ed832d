"""Inference-time brushstroke pruning and refinement.

Every stroke gets a binary importance gate driven by a real logit: the gate
is the hard step of the logit, and gradients reach the logit through the
smooth sigmoid-derivative surrogate.  Gradient descent then minimizes the
reconstruction error of the gated rendering plus an L1 penalty on open
gates, jointly over all stroke parameters and logits.  Strokes whose removal
barely changes the canvas feel only the penalty and close; load-bearing
strokes receive a restoring gradient and stay open.

The returned sequence keeps pruned entries annotated with beta = 0 so the
painting provenance (layer, window, timestep) survives; rendering treats
them as absent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionMismatch, NonFiniteGradient
from .geometry import Stroke
from .renderer import (DEFAULT_SETTINGS, RasterSettings, _patch_backward,
                       blank_canvas, raster_patch, render_sequence)
from .sequence import StrokeSequence

GATE_INIT_VARIANCE = 1e-3


@dataclass(frozen=True)
class RegConfig:
    """Gate-regularization settings.

    ``gamma`` trades reconstruction fidelity against stroke count; None
    calibrates it per image as ``calibration_scale`` times the mean
    leave-one-out error increase of a stroke sample.  ``gate_init`` is
    "all_active" (every gate open, with a tiny descending tiebreak so exact
    duplicates close latest-first) or "random" (zero-mean logits, roughly
    half the gates start closed).
    """

    gamma: float | None = None
    iterations: int = 300
    step_size: float = 0.01
    gate_init: str = "all_active"
    calibration_scale: float = 0.25

    def __post_init__(self) -> None:
        if self.iterations < 0:
            raise ValueError("iterations must be non-negative")
        if self.gamma is not None and not (self.gamma >= 0.0 and math.isfinite(self.gamma)):
            raise ValueError("gamma must be finite and non-negative")
        if self.gate_init not in ("all_active", "random"):
            raise ValueError(f"unknown gate_init mode {self.gate_init!r}")


@dataclass(frozen=True)
class GateState:
    """Per-stroke logits; the gates are their hard step values."""

    logits: np.ndarray

    @property
    def betas(self) -> np.ndarray:
        return gates_from_logits(self.logits)


def gates_from_logits(logits: np.ndarray) -> np.ndarray:
    """Hard gates: open iff the logit is strictly positive (ties close)."""
    return (logits > 0.0).astype(np.float64)


def surrogate_gate_grad(x: float | np.ndarray):
    """Smooth stand-in for the step derivative: sigma(x) * (1 - sigma(x))."""
    s = 1.0 / (1.0 + np.exp(-np.asarray(x, dtype=np.float64)))
    out = s * (1.0 - s)
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(out)
    return out


def init_logits(n: int, mode: str, rng: np.random.Generator,
                step_size: float = 0.01) -> np.ndarray:
    """Starting logits for the gates.

    "random" draws zero-mean logits (about half the gates start closed).
    "all_active" starts every gate open with a strictly decreasing ramp;
    the per-index gap is a fraction of one optimizer step, so strokes whose
    gate gradients are identical (exact duplicates) cross zero later-first
    instead of oscillating in lock-step, while every logit stays positive.
    """
    sigma = math.sqrt(GATE_INIT_VARIANCE)
    if mode == "random":
        return rng.normal(0.0, sigma, size=n)
    gap = 0.5 * step_size
    return 3.0 * sigma + gap * np.arange(n - 1, -1, -1, dtype=np.float64)


def total_loss(seq: StrokeSequence, gates: GateState, target: np.ndarray,
               gamma: float, init_color=(1.0, 1.0, 1.0),
               settings: RasterSettings = DEFAULT_SETTINGS) -> float:
    """Gated-rendering MSE plus gamma per open gate."""
    if len(gates.logits) != len(seq):
        raise DimensionMismatch(f"{len(gates.logits)} logits for {len(seq)} strokes")
    height, width = target.shape[:2]
    betas = gates.betas
    gated = seq.with_betas(betas)
    canvas, _ = render_sequence(gated, height, width,
                                blank_canvas(height, width, init_color),
                                settings=settings)
    diff = canvas - target
    return float(np.mean(diff * diff)) + gamma * float(betas.sum())


def _forward(params: np.ndarray, betas: np.ndarray, target: np.ndarray,
             init_color, settings: RasterSettings):
    """Composite all strokes; cache (bounds, alpha, canvas-before) per stroke."""
    height, width = target.shape[:2]
    canvas = blank_canvas(height, width, init_color)
    cache: list[tuple | None] = []
    for i in range(params.shape[0]):
        stroke = Stroke.from_array(params[i])
        patch = raster_patch(stroke, height, width, settings)
        if patch is None:
            cache.append(None)
            continue
        (y0, y1, x0, x1), alpha = patch
        pre = canvas[y0:y1, x0:x1].copy()
        cache.append(((y0, y1, x0, x1), alpha, pre))
        if betas[i] > 0.0:
            a = alpha[:, :, None]
            canvas[y0:y1, x0:x1] = pre * (1.0 - a) + a * params[i, 10:13]
    return canvas, cache


def _backward(params: np.ndarray, betas: np.ndarray, cache, canvas: np.ndarray,
              target: np.ndarray, settings: RasterSettings):
    """Reverse the compositing chain; returns stroke grads and gate render grads."""
    n = params.shape[0]
    grad_canvas = (2.0 / target.size) * (canvas - target)
    g_params = np.zeros_like(params)
    g_gate = np.zeros(n)
    for i in range(n - 1, -1, -1):
        item = cache[i]
        if item is None:
            continue
        (y0, y1, x0, x1), alpha, pre = item
        g = grad_canvas[y0:y1, x0:x1]
        rgb = params[i, 10:13]
        a = alpha[:, :, None]
        delta = rgb - pre
        g_gate[i] = float(np.sum(g * (a * delta)))
        if betas[i] > 0.0:
            galpha = np.sum(g * delta, axis=2)
            stroke = Stroke.from_array(params[i])
            _, partials = _patch_backward(stroke, target.shape[0], target.shape[1],
                                          (y0, y1, x0, x1), galpha,
                                          alpha_patch=alpha, settings=settings)
            partials[10:13] = np.tensordot(g, alpha, axes=([0, 1], [0, 1]))
            g_params[i] = partials
            grad_canvas[y0:y1, x0:x1] = g * (1.0 - a)
    return g_params, g_gate


def calibrate_gamma(seq: StrokeSequence, target: np.ndarray,
                    init_color=(1.0, 1.0, 1.0),
                    settings: RasterSettings = DEFAULT_SETTINGS,
                    scale: float = 0.5) -> float:
    """Image-adaptive penalty weight from the sequence's own progress.

    Replays the sequence and takes ``scale`` times the mean positive
    per-stroke error reduction.  The positive part matters: redundant
    strokes contribute nothing, so a heavily redundant sequence still yields
    a penalty on the scale of one useful stroke's worth of progress (a
    leave-one-out marginal would collapse to zero exactly there).
    """
    entries = seq.active()
    n = len(entries)
    if n == 0:
        return 0.0
    height, width = target.shape[:2]
    canvas = blank_canvas(height, width, init_color)
    prev = float(np.mean((canvas - target) ** 2))
    gains = []
    for e in entries:
        patch = raster_patch(e.stroke, height, width, settings)
        if patch is not None:
            (y0, y1, x0, x1), alpha = patch
            a = alpha[:, :, None]
            rgb = np.array([e.stroke.r, e.stroke.g, e.stroke.b])
            canvas[y0:y1, x0:x1] = canvas[y0:y1, x0:x1] * (1.0 - a) + a * rgb
        cur = float(np.mean((canvas - target) ** 2))
        gains.append(max(prev - cur, 0.0))
        prev = cur
    return scale * float(np.mean(gains))


def stroke_reg(seq: StrokeSequence, target: np.ndarray,
               config: RegConfig | None = None, init_color=(1.0, 1.0, 1.0),
               seed: int = 0,
               settings: RasterSettings = DEFAULT_SETTINGS) -> StrokeSequence:
    """Refine stroke parameters and prune redundant strokes.

    Runs shared Adam over all stroke parameters (projected into [0, 1]) and
    gate logits for ``config.iterations`` steps and returns the best state
    seen, measured by the total loss.  With gamma = 0 this degenerates to
    pure refinement and can never end worse than the input.
    """
    config = config if config is not None else RegConfig()
    if target.ndim != 3 or target.shape[2] != 3:
        raise DimensionMismatch(f"target must be (H, W, 3), got {target.shape}")
    n = len(seq)
    if n == 0:
        return seq
    rng = np.random.default_rng(seed)
    params = np.stack([e.stroke.as_array() for e in seq.entries])
    logits = init_logits(n, config.gate_init, rng, config.step_size)
    gamma = (config.gamma if config.gamma is not None else
             calibrate_gamma(seq, target, init_color, settings,
                             config.calibration_scale))

    lr = config.step_size
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    m_p = np.zeros_like(params)
    v_p = np.zeros_like(params)
    m_x = np.zeros(n)
    v_x = np.zeros(n)

    best_loss = math.inf
    best_params = params.copy()
    best_logits = logits.copy()
    for it in range(config.iterations + 1):
        betas = gates_from_logits(logits)
        canvas, cache = _forward(params, betas, target, init_color, settings)
        diff = canvas - target
        loss = float(np.mean(diff * diff)) + gamma * float(betas.sum())
        if not math.isfinite(loss):
            raise NonFiniteGradient("rendering loss became non-finite")
        if loss < best_loss:
            best_loss = loss
            best_params = params.copy()
            best_logits = logits.copy()
        if it == config.iterations:
            break

        g_params, g_gate = _backward(params, betas, cache, canvas, target,
                                     settings)
        g_logits = (g_gate + gamma) * surrogate_gate_grad(logits)
        if not (np.all(np.isfinite(g_params)) and np.all(np.isfinite(g_logits))):
            raise NonFiniteGradient("non-finite gradient during regularization")

        t = it + 1
        bias1 = 1.0 - beta1 ** t
        bias2 = 1.0 - beta2 ** t
        m_p = beta1 * m_p + (1.0 - beta1) * g_params
        v_p = beta2 * v_p + (1.0 - beta2) * g_params * g_params
        params = np.clip(
            params - lr * (m_p / bias1) / (np.sqrt(v_p / bias2) + eps), 0.0, 1.0)
        m_x = beta1 * m_x + (1.0 - beta1) * g_logits
        v_x = beta2 * v_x + (1.0 - beta2) * g_logits * g_logits
        logits = logits - lr * (m_x / bias1) / (np.sqrt(v_x / bias2) + eps)

    final_betas = gates_from_logits(best_logits)
    return StrokeSequence.from_entries(
        replace(e, stroke=Stroke.from_array(best_params[i]),
                beta=float(final_betas[i]))
        for i, e in enumerate(seq.entries))
