"""On-disk formats: stroke-sequence files, box files, images and masks.

The stroke file is line-oriented text: a ``key=value`` header terminated by
``---``, then one whitespace-separated record per stroke entry.  Floats are
written with Python's shortest round-trip representation, so parsing a
written file reproduces the in-memory sequence exactly (and certainly to
more than nine significant digits).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import StrokeFileError
from .geometry import FULL_WINDOW, Stroke, Window
from .sequence import SequenceEntry, StrokeSequence

FORMAT_VERSION = 1

RECORD_COLUMNS = ("layer", "t",
                  "x0", "y0", "x1", "y1", "x2", "y2",
                  "z0", "z2", "w0", "w2", "r", "g", "b",
                  "beta", "wx", "wy", "ww", "wh")

MASK_MODES = {"1", "L", "I", "I;16", "F"}
ASPECT_TOLERANCE = 0.02


@dataclass(frozen=True)
class StrokeFileHeader:
    height: int
    width: int
    layers: int
    budget: int
    seed: int
    config_digest: str
    init_color: tuple[float, float, float] = (1.0, 1.0, 1.0)
    version: int = FORMAT_VERSION


def config_digest(config: dict) -> str:
    """Short stable digest of a flat config mapping."""
    blob = json.dumps(config, sort_keys=True, default=repr)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _fmt(v: float) -> str:
    return repr(float(v))


def write_stroke_file(path, seq: StrokeSequence, header: StrokeFileHeader,
                      drop_pruned: bool = False) -> None:
    if drop_pruned:
        seq = seq.drop_pruned()
    lines = [
        f"version={header.version}",
        f"height={header.height}",
        f"width={header.width}",
        f"layers={header.layers}",
        f"budget={header.budget}",
        f"seed={header.seed}",
        f"config={header.config_digest}",
        "init=" + " ".join(_fmt(c) for c in header.init_color),
        "columns=" + " ".join(RECORD_COLUMNS),
        "---",
    ]
    for e in seq:
        s = e.stroke
        fields = [str(e.layer), str(e.t)]
        fields += [_fmt(v) for v in s.as_array()]
        fields.append(_fmt(e.beta))
        fields += [_fmt(v) for v in e.window.as_array()]
        lines.append(" ".join(fields))
    Path(path).write_text("\n".join(lines) + "\n")


def read_stroke_file(path) -> tuple[StrokeFileHeader, StrokeSequence]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise StrokeFileError(f"cannot read stroke file: {exc}") from exc
    lines = text.splitlines()
    fields: dict[str, str] = {}
    body_start = None
    for i, line in enumerate(lines):
        if line.strip() == "---":
            body_start = i + 1
            break
        if "=" not in line:
            raise StrokeFileError(f"malformed header line {i + 1}: {line!r}")
        key, _, value = line.partition("=")
        fields[key.strip()] = value.strip()
    if body_start is None:
        raise StrokeFileError("missing header terminator '---'")

    try:
        version = int(fields["version"])
        if version != FORMAT_VERSION:
            raise StrokeFileError(f"unsupported format version {version}")
        init = tuple(float(v) for v in fields.get("init", "1 1 1").split())
        if len(init) != 3:
            raise StrokeFileError("init color needs three components")
        header = StrokeFileHeader(
            height=int(fields["height"]),
            width=int(fields["width"]),
            layers=int(fields["layers"]),
            budget=int(fields["budget"]),
            seed=int(fields["seed"]),
            config_digest=fields.get("config", ""),
            init_color=init,
            version=version,
        )
    except StrokeFileError:
        raise
    except (KeyError, ValueError) as exc:
        raise StrokeFileError(f"invalid header: {exc}") from exc
    if fields.get("columns", " ".join(RECORD_COLUMNS)) != " ".join(RECORD_COLUMNS):
        raise StrokeFileError("unsupported column layout")
    if header.height < 1 or header.width < 1 or header.layers < 1:
        raise StrokeFileError("non-positive dimensions in header")

    entries = []
    for lineno, line in enumerate(lines[body_start:], start=body_start + 1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != len(RECORD_COLUMNS):
            raise StrokeFileError(
                f"line {lineno}: expected {len(RECORD_COLUMNS)} fields, "
                f"got {len(parts)}")
        try:
            layer, t = int(parts[0]), int(parts[1])
            values = [float(v) for v in parts[2:]]
        except ValueError as exc:
            raise StrokeFileError(f"line {lineno}: {exc}") from exc
        if not all(np.isfinite(values)):
            raise StrokeFileError(f"line {lineno}: non-finite value")
        entries.append(SequenceEntry(
            layer=layer, t=t,
            stroke=Stroke.from_array(values[0:13]),
            beta=values[13],
            window=Window(*values[14:18]),
        ))
    try:
        seq = StrokeSequence.from_entries(entries)
    except ValueError as exc:
        raise StrokeFileError(str(exc)) from exc
    return header, seq


def read_box_file(path) -> list[tuple[str, Window, float]]:
    """Parse ``label x y w h confidence`` lines; '#' comments are skipped."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise StrokeFileError(f"cannot read box file: {exc}") from exc
    boxes = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if len(parts) != 6:
            raise StrokeFileError(
                f"line {lineno}: expected 'label x y w h confidence'")
        label = parts[0]
        try:
            x, y, w, h, conf = (float(v) for v in parts[1:])
        except ValueError as exc:
            raise StrokeFileError(f"line {lineno}: {exc}") from exc
        window = Window(x, y, w, h)
        if w < 0 or h < 0 or not FULL_WINDOW.contains(window, tol=1e-6):
            raise StrokeFileError(f"line {lineno}: box outside unit canvas")
        if not 0.0 <= conf <= 1.0:
            raise StrokeFileError(f"line {lineno}: confidence outside [0, 1]")
        boxes.append((label, window, conf))
    return boxes


def load_image_rgb(path, size: int | None = None) -> np.ndarray:
    """Load an 8-bit RGB raster image as float64 in [0, 1], optionally resized."""
    with Image.open(path) as img:
        img = img.convert("RGB")
        if size is not None and img.size != (size, size):
            img = img.resize((size, size), Image.BILINEAR)
        return np.asarray(img, dtype=np.float64) / 255.0


def load_mask(path, height: int, width: int) -> np.ndarray:
    """Load a single-channel mask, check aspect ratio, resample to render size."""
    with Image.open(path) as img:
        if img.mode not in MASK_MODES:
            raise StrokeFileError(
                f"mask must be single-channel, got mode {img.mode!r}")
        src_w, src_h = img.size
        if abs(src_w / src_h - width / height) > ASPECT_TOLERANCE * (width / height):
            raise StrokeFileError(
                f"mask aspect ratio {src_w}x{src_h} does not match render "
                f"size {width}x{height}")
        img = img.convert("F")
        if img.size != (width, height):
            img = img.resize((width, height), Image.BILINEAR)
        values = np.asarray(img, dtype=np.float64)
    peak = float(values.max())
    if peak > 1.0:
        values = values / 255.0
    return np.clip(values, 0.0, 1.0)


def save_image(path, canvas: np.ndarray) -> None:
    """Write a [0, 1] float canvas as an 8-bit PNG (or whatever the suffix says)."""
    data = np.clip(np.rint(canvas * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(data).save(path)
