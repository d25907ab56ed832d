"""Extractor outputs and their compatibility with the painter's ingestion."""

import subprocess
import sys

import numpy as np
import pytest
from PIL import Image

from saliency_extractor import (ModelError, NoDetector, SpectralSaliency,
                                build_detector, build_saliency, extract)
from saliency_extractor.extract import box_iou, dedupe_boxes


def synthetic_corpus(rng, count=10, size=96):
    """Shapes over gradients: a small stand-in for natural photographs."""
    images = []
    for k in range(count):
        ys, xs = np.mgrid[0:size, 0:size]
        top = rng.uniform(0.2, 0.9, 3)
        bottom = rng.uniform(0.1, 0.8, 3)
        img = (top[None, None] * (1 - ys / size)[:, :, None]
               + bottom[None, None] * (ys / size)[:, :, None])
        cx, cy = rng.uniform(0.3, 0.7, 2) * size
        r = rng.uniform(0.12, 0.22) * size
        if k % 2 == 0:
            hit = (xs - cx) ** 2 + (ys - cy) ** 2 <= r ** 2
        else:
            hit = (np.abs(xs - cx) <= r) & (np.abs(ys - cy) <= r)
        img[hit] = rng.uniform(0, 1, 3)
        images.append(np.clip(img, 0, 1))
    return images


@pytest.fixture(scope="session")
def corpus(tmp_path_factory):
    rng = np.random.default_rng(7)
    root = tmp_path_factory.mktemp("corpus")
    paths = []
    for i, img in enumerate(synthetic_corpus(rng)):
        path = root / f"img_{i:02d}.png"
        Image.fromarray((img * 255).astype(np.uint8)).save(path)
        paths.append(path)
    return paths


class TestSpectralSaliency:
    def test_blank_image_empty_mask(self, tmp_path):
        path = tmp_path / "white.png"
        Image.fromarray(np.full((64, 64, 3), 255, dtype=np.uint8)).save(path)
        result = extract(path, tmp_path, SpectralSaliency(), NoDetector())
        mask = np.asarray(Image.open(result.mask_path))
        assert mask.max() == 0
        assert len(result.boxes) == 0

    def test_dominant_object_single_box(self, tmp_path):
        img = np.zeros((96, 96, 3), dtype=np.uint8)
        img[30:60, 40:70] = 255
        path = tmp_path / "obj.png"
        Image.fromarray(img).save(path)
        result = extract(path, tmp_path, SpectralSaliency(), NoDetector())
        assert len(result.boxes) == 1
        label, x, y, w, h, conf = result.boxes[0]
        assert label == "salient"
        # the box covers the thresholded mask extent by construction
        mask = np.asarray(Image.open(result.mask_path), dtype=np.float64) / 255
        ys, xs = np.nonzero(mask > 0.5)
        assert x <= xs.min() / 96 + 1e-9
        assert x + w >= (xs.max() + 1) / 96 - 1e-9
        assert result.ranks == (1,)


class TestBoxAlgebra:
    def test_iou(self):
        a = ("a", 0.0, 0.0, 0.5, 0.5, 1.0)
        assert box_iou(a, a) == pytest.approx(1.0)
        b = ("b", 0.5, 0.5, 0.5, 0.5, 1.0)
        assert box_iou(a, b) == 0.0

    def test_dedupe_keeps_higher_confidence(self):
        a = ("a", 0.1, 0.1, 0.4, 0.4, 0.6)
        b = ("b", 0.1, 0.1, 0.4, 0.4, 0.9)
        c = ("c", 0.6, 0.6, 0.3, 0.3, 0.5)
        kept = dedupe_boxes([a, b, c])
        assert ("b", 0.1, 0.1, 0.4, 0.4, 0.9) in kept
        assert all(k[0] != "a" for k in kept)
        assert len(kept) == 2


class TestRegistry:
    def test_spectral_default(self):
        assert isinstance(build_saliency("spectral"), SpectralSaliency)
        assert isinstance(build_detector("none"), NoDetector)

    def test_unknown_specs_rejected(self):
        with pytest.raises(ModelError):
            build_saliency("wavelets")
        with pytest.raises(ModelError):
            build_detector("hough")

    def test_missing_weights_rejected(self, tmp_path):
        with pytest.raises(ModelError):
            build_saliency(f"torchscript:{tmp_path / 'missing.pt'}")


class TestCli:
    def test_cli_writes_outputs(self, tmp_path, corpus):
        out = tmp_path / "out"
        proc = subprocess.run(
            [sys.executable, "-m", "saliency_extractor.cli",
             str(corpus[0]), "--out", str(out)],
            capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        assert (out / f"{corpus[0].stem}.mask.png").exists()
        assert (out / f"{corpus[0].stem}.boxes.txt").exists()

    def test_cli_unreadable_image(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "saliency_extractor.cli",
             str(tmp_path / "missing.png"), "--out", str(tmp_path)],
            capture_output=True, text=True)
        assert proc.returncode == 1
        assert "error" in proc.stderr


class TestPainterIntegration:
    """The painter must ingest every corpus output without complaint."""

    def test_outputs_feed_the_painter(self, tmp_path, corpus):
        for image_path in corpus:
            out = tmp_path / image_path.stem
            result = extract(image_path, out, SpectralSaliency(), NoDetector())
            paint_out = out / "paint"
            args = ["stroke-painter", "paint", str(image_path),
                    "-o", str(paint_out), "--size", "48", "--strokes", "10",
                    "--strokes-per-window", "5", "--no-strokereg",
                    "--saliency", str(result.mask_path)]
            if result.boxes:
                args += ["--boxes", str(result.boxes_path)]
            proc = subprocess.run(args, capture_output=True, text=True)
            assert proc.returncode == 0, (image_path.name, proc.stderr)
            assert (paint_out / "strokes.txt").exists()

    def test_mask_values_map_into_unit_range(self, tmp_path, corpus):
        for image_path in corpus[:3]:
            result = extract(image_path, tmp_path, SpectralSaliency(),
                             NoDetector())
            mask = np.asarray(Image.open(result.mask_path))
            assert mask.dtype == np.uint8
            assert 0 <= mask.min() and mask.max() <= 255

    def test_boxes_inside_unit_canvas(self, tmp_path, corpus):
        for image_path in corpus:
            result = extract(image_path, tmp_path / image_path.stem,
                             SpectralSaliency(), NoDetector())
            for _, x, y, w, h, conf in result.boxes:
                assert 0.0 <= x and 0.0 <= y
                assert x + w <= 1.0 + 1e-9 and y + h <= 1.0 + 1e-9
                assert 0.0 <= conf <= 1.0
