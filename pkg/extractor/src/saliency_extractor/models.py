"""Pluggable saliency and detector backends.

Two registries, one per role.  The default pairing needs no model weights:
spectral-residual saliency plus no detector, in which case the exported box
list is just the tight box around the thresholded mask.  Pretrained models
plug in as TorchScript exports (see the README for export recipes); loading
them is the only code path that imports torch.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage


class ModelError(RuntimeError):
    """Weights missing or a backend produced unusable output."""


# --- saliency backends ----------------------------------------------------

class SpectralSaliency:
    """Weights-free spectral-residual saliency estimate."""

    name = "spectral"

    def __init__(self, working_size: int = 64, smooth_sigma: float = 2.5):
        self.working_size = working_size
        self.smooth_sigma = smooth_sigma

    def __call__(self, image: np.ndarray) -> np.ndarray:
        gray = image.mean(axis=2)
        height, width = gray.shape
        if float(gray.max() - gray.min()) < 1e-9:
            return np.zeros((height, width))
        scale = self.working_size / max(height, width)
        small = ndimage.zoom(gray, scale, order=1) if scale < 1.0 else gray
        spectrum = np.fft.fft2(small)
        amplitude = np.abs(spectrum)
        log_amp = np.log(amplitude + 1e-3 * amplitude.max())
        residual = log_amp - ndimage.uniform_filter(log_amp, size=3, mode="wrap")
        back = np.fft.ifft2(np.exp(residual + 1j * np.angle(spectrum)))
        sal = ndimage.gaussian_filter(np.abs(back) ** 2, sigma=self.smooth_sigma)
        if sal.shape != (height, width):
            sal = ndimage.zoom(sal, (height / sal.shape[0], width / sal.shape[1]),
                               order=1)[:height, :width]
            if sal.shape != (height, width):
                sal = np.pad(sal, ((0, height - sal.shape[0]),
                                   (0, width - sal.shape[1])), mode="edge")
        sal = np.clip(sal, 0.0, None)
        span = float(sal.max() - sal.min())
        if span < 1e-12:
            return np.zeros((height, width))
        return (sal - sal.min()) / span


class TorchScriptSaliency:
    """Salient-object model exported with torch.jit (e.g. U-2-Net).

    Contract: the scripted module maps a (1, 3, H, W) float tensor in [0, 1]
    to a (1, 1, H, W) map; the output is min-max normalized here.
    """

    name = "torchscript"

    def __init__(self, weights_path: str):
        try:
            import torch
        except ImportError as exc:
            raise ModelError("torch is required for TorchScript models") from exc
        try:
            self.module = torch.jit.load(weights_path, map_location="cpu")
        except (OSError, RuntimeError, ValueError) as exc:
            raise ModelError(f"cannot load saliency weights: {exc}") from exc
        self.module.eval()
        self._torch = torch

    def __call__(self, image: np.ndarray) -> np.ndarray:
        torch = self._torch
        tensor = torch.from_numpy(image.astype(np.float32)).permute(2, 0, 1)[None]
        with torch.no_grad():
            out = self.module(tensor)
        if isinstance(out, (list, tuple)):
            out = out[0]
        sal = out.squeeze().numpy().astype(np.float64)
        if sal.shape != image.shape[:2]:
            raise ModelError(f"saliency model returned shape {sal.shape}")
        span = float(sal.max() - sal.min())
        if span < 1e-12:
            return np.zeros_like(sal)
        return (sal - sal.min()) / span


# --- detector backends ----------------------------------------------------

class NoDetector:
    """Placeholder detector: contributes no boxes."""

    name = "none"

    def __call__(self, image: np.ndarray) -> list[tuple[str, float, float, float, float, float]]:
        return []


class TorchScriptDetector:
    """Object detector exported with torch.jit (e.g. a YOLO variant).

    Contract: the scripted module maps a (1, 3, H, W) float tensor in [0, 1]
    to an (N, 6) tensor of post-NMS detections, columns (x1, y1, x2, y2,
    confidence, class_id) with coordinates normalized to [0, 1].
    """

    name = "torchscript"

    def __init__(self, weights_path: str, confidence: float = 0.25):
        try:
            import torch
        except ImportError as exc:
            raise ModelError("torch is required for TorchScript models") from exc
        try:
            self.module = torch.jit.load(weights_path, map_location="cpu")
        except (OSError, RuntimeError, ValueError) as exc:
            raise ModelError(f"cannot load detector weights: {exc}") from exc
        self.module.eval()
        self.confidence = confidence
        self._torch = torch

    def __call__(self, image: np.ndarray) -> list[tuple[str, float, float, float, float, float]]:
        torch = self._torch
        tensor = torch.from_numpy(image.astype(np.float32)).permute(2, 0, 1)[None]
        with torch.no_grad():
            out = self.module(tensor)
        if isinstance(out, (list, tuple)):
            out = out[0]
        rows = np.asarray(out).reshape(-1, 6)
        boxes = []
        for x1, y1, x2, y2, conf, cls in rows:
            if conf < self.confidence:
                continue
            x1, y1 = max(float(x1), 0.0), max(float(y1), 0.0)
            x2, y2 = min(float(x2), 1.0), min(float(y2), 1.0)
            if x2 <= x1 or y2 <= y1:
                continue
            boxes.append((f"obj{int(cls)}", x1, y1, x2 - x1, y2 - y1,
                          min(max(float(conf), 0.0), 1.0)))
        return boxes


def build_saliency(spec: str):
    """Resolve a saliency backend from its registry spec.

    "spectral" or "torchscript:<weights-path>".
    """
    if spec == "spectral":
        return SpectralSaliency()
    if spec.startswith("torchscript:"):
        return TorchScriptSaliency(spec.split(":", 1)[1])
    raise ModelError(f"unknown saliency model {spec!r}")


def build_detector(spec: str, confidence: float = 0.25):
    """Resolve a detector backend: "none" or "torchscript:<weights-path>"."""
    if spec == "none":
        return NoDetector()
    if spec.startswith("torchscript:"):
        return TorchScriptDetector(spec.split(":", 1)[1], confidence)
    raise ModelError(f"unknown detector {spec!r}")
