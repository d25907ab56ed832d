"""Core extraction: image in, mask image and box file out.

The outputs follow the stroke painter's ingestion formats exactly: a
single-channel 8-bit mask image and a text box file with one
``label x y w h confidence`` line per object, coordinates as canvas
fractions.  The box list is the union of detector outputs and the tight
bounding box of the thresholded saliency mask, deduplicated by overlap.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

IOU_DEDUP_THRESHOLD = 0.9

Box = tuple[str, float, float, float, float, float]  # label, x, y, w, h, conf


@dataclass(frozen=True)
class ExtractionResult:
    mask_path: Path
    boxes_path: Path
    boxes: tuple[Box, ...]
    ranks: tuple[int, ...]  # per box, 1 = most salient


def load_image(path) -> np.ndarray:
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0


def mask_bounding_box(mask: np.ndarray, threshold: float) -> Box | None:
    ys, xs = np.nonzero(mask > threshold)
    if ys.size == 0:
        return None
    height, width = mask.shape
    x0 = xs.min() / width
    y0 = ys.min() / height
    w = (xs.max() + 1) / width - x0
    h = (ys.max() + 1) / height - y0
    return ("salient", float(x0), float(y0), float(w), float(h), 1.0)


def box_iou(a: Box, b: Box) -> float:
    ax0, ay0, aw, ah = a[1:5]
    bx0, by0, bw, bh = b[1:5]
    ix = max(0.0, min(ax0 + aw, bx0 + bw) - max(ax0, bx0))
    iy = max(0.0, min(ay0 + ah, by0 + bh) - max(ay0, by0))
    inter = ix * iy
    union = aw * ah + bw * bh - inter
    return inter / union if union > 0.0 else 0.0


def dedupe_boxes(boxes: list[Box]) -> list[Box]:
    """Greedy overlap dedup, keeping the higher-confidence box of a pair."""
    kept: list[Box] = []
    for box in sorted(boxes, key=lambda b: -b[5]):
        if all(box_iou(box, other) <= IOU_DEDUP_THRESHOLD for other in kept):
            kept.append(box)
    return kept


def rank_boxes(boxes: list[Box], saliency: np.ndarray) -> list[int]:
    """1-based ranks by mean in-box saliency, most salient first."""
    height, width = saliency.shape
    means = []
    for _, x, y, w, h, _ in boxes:
        x0 = min(max(int(np.floor(x * width)), 0), width - 1)
        y0 = min(max(int(np.floor(y * height)), 0), height - 1)
        x1 = min(max(int(np.ceil((x + w) * width)), x0 + 1), width)
        y1 = min(max(int(np.ceil((y + h) * height)), y0 + 1), height)
        means.append(float(saliency[y0:y1, x0:x1].mean()))
    order = sorted(range(len(boxes)), key=lambda i: -means[i])
    ranks = [0] * len(boxes)
    for rank, i in enumerate(order, start=1):
        ranks[i] = rank
    return ranks


def write_mask(path: Path, saliency: np.ndarray) -> None:
    data = np.clip(np.rint(saliency * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(data, mode="L").save(path)


def write_boxes(path: Path, boxes: list[Box], ranks: list[int]) -> None:
    lines = ["# label x y w h confidence"]
    for box, rank in zip(boxes, ranks):
        label, x, y, w, h, conf = box
        lines.append(f"# saliency_rank={rank}")
        lines.append(f"{label} {x!r} {y!r} {w!r} {h!r} {conf!r}")
    path.write_text("\n".join(lines) + "\n")


def extract(image_path, out_dir, saliency_model, detector,
            threshold: float = 0.5) -> ExtractionResult:
    """Run both models on one image and write the painter-format outputs."""
    image = load_image(image_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(image_path).stem

    saliency = saliency_model(image)
    boxes = list(detector(image))
    sal_box = mask_bounding_box(saliency, threshold)
    if sal_box is not None:
        boxes.append(sal_box)
    boxes = dedupe_boxes(boxes)
    ranks = rank_boxes(boxes, saliency)

    mask_path = out / f"{stem}.mask.png"
    boxes_path = out / f"{stem}.boxes.txt"
    write_mask(mask_path, saliency)
    write_boxes(boxes_path, boxes, ranks)
    return ExtractionResult(mask_path=mask_path, boxes_path=boxes_path,
                            boxes=tuple(boxes), ranks=tuple(ranks))
