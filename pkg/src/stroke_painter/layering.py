"""Saliency-driven layered masks, masked distances and the layer reward.

A painting episode runs background first: the layer-0 mask suppresses
salient regions so early strokes are judged only on the backdrop, and later
layers see progressively more of the image.  The two-layer mask works on a
soft saliency map directly; for more layers a ranked stack of binary region
masks is used, ordered so the most salient region is revealed first after
the background.

The distance behind the reward is a masked mean squared error kept behind
small functions so a different comparator can be swapped in later.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .errors import DimensionMismatch, LayerOutOfRange, LengthMismatch
from .geometry import Window

SALIENCY_BINARIZE_THRESHOLD = 0.5


def _check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionMismatch(f"shape mismatch: {a.shape} vs {b.shape}")


def layered_mask(saliency: np.ndarray, layer: int, num_layers: int = 2) -> np.ndarray:
    """Two-layer mask: layer 0 sees 1 - saliency, the final layer sees everything."""
    if num_layers != 2:
        raise ValueError("layered_mask is the two-layer rule; use layered_mask_ranked")
    if layer not in (0, 1):
        raise LayerOutOfRange(f"layer {layer} outside [0, 2)")
    return 1.0 - saliency * (1.0 - layer)


def layered_mask_ranked(ranked: list[np.ndarray], layer: int,
                        num_layers: int) -> np.ndarray:
    """Multi-layer mask from a saliency-ranked stack of binary region masks.

    ``ranked[k]`` holds the region of rank k + 1, ranks increasing with
    saliency.  Layer l hides the union of the lowest num_layers - l ranks,
    so each successive layer reveals the next most salient region.
    """
    if len(ranked) != num_layers:
        raise LengthMismatch(f"{len(ranked)} ranked masks for {num_layers} layers")
    if not 0 <= layer < num_layers:
        raise LayerOutOfRange(f"layer {layer} outside [0, {num_layers})")
    excluded = np.zeros_like(ranked[0], dtype=np.float64)
    for k in range(num_layers - layer):
        _check_same_shape(ranked[k], ranked[0])
        excluded = np.maximum(excluded, ranked[k])
    return 1.0 - excluded


def masked_distance(image: np.ndarray, canvas: np.ndarray,
                    mask: np.ndarray) -> float:
    """Mean squared distance over the masked difference, all pixels and channels."""
    _check_same_shape(image, canvas)
    if mask.shape != image.shape[:2]:
        raise DimensionMismatch(f"mask {mask.shape} vs image {image.shape}")
    diff = (image - canvas) * mask[:, :, None]
    return float(np.mean(diff * diff))


def layer_reward(image: np.ndarray, canvas_before: np.ndarray,
                 canvas_after: np.ndarray, mask: np.ndarray) -> float:
    """Improvement of the masked fit caused by one canvas update.

    Positive means the update moved the masked region closer to the image.
    """
    return (masked_distance(image, canvas_before, mask)
            - masked_distance(image, canvas_after, mask))


def binarize_saliency(saliency: np.ndarray,
                      threshold: float = SALIENCY_BINARIZE_THRESHOLD) -> np.ndarray:
    return (saliency >= threshold).astype(np.float64)


def mean_box_saliency(saliency: np.ndarray, box: Window) -> float:
    """Mean saliency inside a box's pixel rectangle (used for ranking objects)."""
    height, width = saliency.shape
    y0, y1, x0, x1 = box.pixel_rect(height, width)
    return float(np.mean(saliency[y0:y1, x0:x1]))


def rank_saliency_regions(saliency: np.ndarray, boxes: list[Window],
                          num_layers: int,
                          threshold: float = SALIENCY_BINARIZE_THRESHOLD,
                          ) -> list[np.ndarray]:
    """Build the ranked mask stack for ``layered_mask_ranked`` from object boxes.

    Each object's region is the binarized saliency restricted to its box.
    The most salient object takes the top rank (revealed right after the
    background); when there are more objects than foreground layers the
    least salient ones share the lowest occupied rank.  Rank 1 stays empty
    so the final layer sees the whole image.
    """
    if num_layers < 2:
        raise LayerOutOfRange("ranked masks need at least two layers")
    height, width = saliency.shape
    binary = binarize_saliency(saliency, threshold)
    order = sorted(
        range(len(boxes)),
        key=lambda i: (-mean_box_saliency(saliency, boxes[i]),
                       -(boxes[i].w * boxes[i].h), i),
    )
    maps = [np.zeros((height, width), dtype=np.float64) for _ in range(num_layers)]
    for pos, i in enumerate(order):
        rank_idx = max(num_layers - 1 - pos, 1)
        y0, y1, x0, x1 = boxes[i].pixel_rect(height, width)
        maps[rank_idx][y0:y1, x0:x1] = np.maximum(
            maps[rank_idx][y0:y1, x0:x1], binary[y0:y1, x0:x1])
    return maps


def saliency_bounding_box(saliency: np.ndarray,
                          threshold: float = SALIENCY_BINARIZE_THRESHOLD,
                          ) -> Window | None:
    """Tight box around the thresholded saliency mask, or None when empty."""
    ys, xs = np.nonzero(saliency > threshold)
    if ys.size == 0:
        return None
    height, width = saliency.shape
    x0 = xs.min() / width
    y0 = ys.min() / height
    return Window(float(x0), float(y0),
                  float((xs.max() + 1) / width - x0),
                  float((ys.max() + 1) / height - y0))


def heuristic_saliency(image: np.ndarray, working_size: int = 64,
                       smooth_sigma: float = 2.5) -> np.ndarray:
    """Spectral-residual saliency: a weights-free foreground estimate.

    The log-amplitude spectrum of the downscaled intensity image is compared
    against its local average; the residual is transformed back, squared,
    smoothed, upsampled and min-max normalized.  Degenerate images with no
    dynamic range map to all zeros.
    """
    if image.ndim == 3:
        gray = image.mean(axis=2)
    else:
        gray = image
    height, width = gray.shape
    if float(gray.max() - gray.min()) < 1e-9:
        return np.zeros((height, width), dtype=np.float64)

    scale = working_size / max(height, width)
    if scale < 1.0:
        small = ndimage.zoom(gray, scale, order=1)
    else:
        small = gray

    spectrum = np.fft.fft2(small)
    amplitude = np.abs(spectrum)
    # the floor keeps exact spectral nulls (common in synthetic images) from
    # blowing up the residual of their neighbors
    log_amp = np.log(amplitude + 1e-3 * amplitude.max())
    residual = log_amp - ndimage.uniform_filter(log_amp, size=3, mode="wrap")
    phase = np.angle(spectrum)
    back = np.fft.ifft2(np.exp(residual + 1j * phase))
    sal = np.abs(back) ** 2
    sal = ndimage.gaussian_filter(sal, sigma=smooth_sigma)

    if sal.shape != (height, width):
        sal = ndimage.zoom(sal, (height / sal.shape[0], width / sal.shape[1]),
                           order=1)
        sal = sal[:height, :width]
        if sal.shape != (height, width):
            pad_h = height - sal.shape[0]
            pad_w = width - sal.shape[1]
            sal = np.pad(sal, ((0, pad_h), (0, pad_w)), mode="edge")

    sal = np.clip(sal, 0.0, None)
    span = float(sal.max() - sal.min())
    if span < 1e-9:
        return np.zeros_like(sal)
    return (sal - sal.min()) / span
