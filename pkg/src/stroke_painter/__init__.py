"""Stroke-based rendering engine.

Decomposes a target image into an ordered brushstroke sequence with a
painterly structure: background first, foreground objects by decreasing
saliency, coarse-to-fine local attention windows, and an inference-time
pruning pass that removes redundant strokes.
"""

from .errors import (DegenerateWindow, DimensionMismatch, EmptyResidual,
                     LayerOutOfRange, LengthMismatch, NonConvexCoefficients,
                     NonFiniteGradient, PainterError, StrokeFileError)
from .geometry import (FULL_WINDOW, AttentionState, Stroke, Window,
                       WindowDelta, clamp_window, markov_update, object_select,
                       param_adjust)
from .layering import (heuristic_saliency, layer_reward, layered_mask,
                       layered_mask_ranked, masked_distance,
                       rank_saliency_regions, saliency_bounding_box)
from .metrics import (SequenceReport, l_multiscale, l_pixel, l2_trajectory,
                      r_color, r_spatial, report)
from .planner import (PaintingTask, PlanConfig, SaliencyBundle, confine_stroke,
                      optimize_window_strokes, plan, plan_uniform_grid,
                      propose_window, schedule_objects)
from .regularizer import (GateState, RegConfig, calibrate_gamma, stroke_reg,
                          surrogate_gate_grad, total_loss)
from .renderer import (DEFAULT_SETTINGS, RasterSettings, StrokeGradient,
                       blank_canvas, composite, composite_gated, rasterize,
                       rasterize_with_grad, render_sequence)
from .sequence import SequenceEntry, StrokeSequence

__version__ = "0.1.0"

__all__ = [
    "AttentionState", "DEFAULT_SETTINGS", "DegenerateWindow",
    "DimensionMismatch", "EmptyResidual", "FULL_WINDOW", "GateState",
    "LayerOutOfRange", "LengthMismatch", "NonConvexCoefficients",
    "NonFiniteGradient", "PainterError", "PaintingTask", "PlanConfig",
    "RasterSettings", "RegConfig", "SaliencyBundle", "SequenceEntry",
    "SequenceReport", "Stroke", "StrokeFileError", "StrokeGradient",
    "StrokeSequence", "Window", "WindowDelta", "blank_canvas",
    "calibrate_gamma", "clamp_window", "composite", "composite_gated",
    "confine_stroke", "heuristic_saliency", "l2_trajectory", "l_multiscale",
    "l_pixel", "layer_reward", "layered_mask", "layered_mask_ranked",
    "markov_update", "masked_distance", "object_select",
    "optimize_window_strokes", "param_adjust", "plan", "plan_uniform_grid",
    "propose_window", "r_color", "r_spatial", "rank_saliency_regions",
    "rasterize", "rasterize_with_grad", "render_sequence", "report",
    "saliency_bounding_box", "schedule_objects", "stroke_reg",
    "surrogate_gate_grad", "total_loss",
]
