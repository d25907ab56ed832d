"""Shared fixtures: synthetic targets and a small natural-photo corpus."""

from __future__ import annotations

import numpy as np
import pytest

# Bundled photographs used as the natural-image corpus (loaded via
# scikit-image so the repository carries no binary fixtures).
NATURAL_IMAGE_NAMES = ("astronaut", "chelsea", "coffee", "rocket",
                       "immunohistochemistry")


def natural_image(name: str, size: int) -> np.ndarray:
    import skimage.data
    from PIL import Image

    data = getattr(skimage.data, name)()
    img = Image.fromarray(data).convert("RGB").resize((size, size),
                                                      Image.BILINEAR)
    return np.asarray(img, dtype=np.float64) / 255.0


def disk_target(size: int, center=(0.5, 0.5), radius: float = 0.2,
                color=(0.8, 0.1, 0.1)) -> np.ndarray:
    """Solid disk over a vertical two-tone gradient; the standard synthetic task."""
    ys, xs = np.mgrid[0:size, 0:size]
    top = np.array([0.55, 0.7, 0.85])
    bottom = np.array([0.3, 0.5, 0.25])
    frac = (ys / (size - 1))[:, :, None]
    canvas = top * (1 - frac) + bottom * frac
    cx, cy = center[0] * size, center[1] * size
    inside = (xs + 0.5 - cx) ** 2 + (ys + 0.5 - cy) ** 2 <= (radius * size) ** 2
    canvas[inside] = color
    return canvas


def disk_saliency(size: int, center=(0.5, 0.5), radius: float = 0.2) -> np.ndarray:
    ys, xs = np.mgrid[0:size, 0:size]
    cx, cy = center[0] * size, center[1] * size
    inside = (xs + 0.5 - cx) ** 2 + (ys + 0.5 - cy) ** 2 <= (radius * size) ** 2
    return inside.astype(np.float64)


@pytest.fixture(scope="session")
def natural_64():
    return [natural_image(name, 64) for name in NATURAL_IMAGE_NAMES]
