"""Evaluation metrics and the aggregate sequence report."""

import numpy as np
import pytest

from stroke_painter import (SequenceEntry, Stroke, StrokeSequence, Window,
                            blank_canvas, l_pixel, l2_trajectory, r_color,
                            r_spatial, render_sequence, report)
from stroke_painter.errors import DimensionMismatch


def make_stroke(rng, color=None):
    vals = rng.uniform(0, 1, 13)
    vals[6:8] = rng.uniform(0.5, 1.0, 2)
    if color is not None:
        vals[10:13] = color
    return Stroke.from_array(vals)


class TestLPixel:
    def test_identical_zero(self):
        rng = np.random.default_rng(50)
        img = rng.uniform(0, 1, (8, 8, 3))
        assert l_pixel(img, img.copy()) == 0.0

    def test_opposite_extremes(self):
        assert l_pixel(np.ones((4, 4, 3)), np.zeros((4, 4, 3))) == 1.0

    def test_half_difference(self):
        a = np.zeros((4, 4, 3))
        b = np.zeros((4, 4, 3))
        b[:2] = 1.0
        assert l_pixel(a, b) == pytest.approx(0.5)

    def test_dim_mismatch(self):
        with pytest.raises(DimensionMismatch):
            l_pixel(np.zeros((4, 4, 3)), np.zeros((4, 5, 3)))


class TestPenalties:
    def test_identical_windows_zero(self):
        w = Window(0.1, 0.2, 0.3, 0.4)
        assert r_spatial(w, w) == 0.0

    def test_shift_norm(self):
        assert r_spatial(Window(0, 0, 0.5, 0.5),
                         Window(0.3, 0.4, 0.5, 0.5)) == pytest.approx(-0.5)

    def test_spatial_symmetric(self):
        rng = np.random.default_rng(51)
        for _ in range(50):
            a = Window(*rng.uniform(0, 0.5, 4))
            b = Window(*rng.uniform(0, 0.5, 4))
            assert r_spatial(a, b) == pytest.approx(r_spatial(b, a))

    def test_same_color_zero(self):
        rng = np.random.default_rng(52)
        s = make_stroke(rng, color=(0.3, 0.6, 0.9))
        t = make_stroke(rng, color=(0.3, 0.6, 0.9))
        assert r_color(s, t) == 0.0

    def test_primary_swap(self):
        rng = np.random.default_rng(53)
        s = make_stroke(rng, color=(1, 0, 0))
        t = make_stroke(rng, color=(0, 1, 0))
        assert r_color(s, t) == pytest.approx(-np.sqrt(2))

    def test_color_penalty_bounded(self):
        rng = np.random.default_rng(54)
        for _ in range(200):
            s = make_stroke(rng)
            t = make_stroke(rng)
            assert -np.sqrt(3) - 1e-12 <= r_color(s, t) <= 0.0


class TestReport:
    def test_empty_sequence(self):
        rng = np.random.default_rng(55)
        target = rng.uniform(0, 1, (16, 16, 3))
        rep = report(StrokeSequence(), target)
        assert rep.stroke_count_total == 0
        assert rep.stroke_count_active == 0
        assert rep.spatial_penalty_sum == 0.0
        assert rep.color_penalty_sum == 0.0
        assert rep.l_pixel == pytest.approx(
            l_pixel(target, blank_canvas(16, 16)))

    def test_single_stroke_no_pairs(self):
        rng = np.random.default_rng(56)
        target = rng.uniform(0, 1, (16, 16, 3))
        seq = StrokeSequence((SequenceEntry(0, 0, make_stroke(rng)),))
        rep = report(seq, target)
        assert rep.spatial_penalty_sum == 0.0
        assert rep.color_penalty_sum == 0.0
        assert rep.stroke_count_active == 1

    def test_gate_counting(self):
        rng = np.random.default_rng(57)
        target = rng.uniform(0, 1, (16, 16, 3))
        entries = []
        for t in range(8):
            entries.append(SequenceEntry(0, t, make_stroke(rng),
                                         beta=float(t % 2 == 0)))
        rep = report(StrokeSequence(tuple(entries)), target)
        assert rep.stroke_count_total == 8
        assert rep.stroke_count_active == 4

    def test_l_pixel_matches_render(self):
        rng = np.random.default_rng(58)
        target = rng.uniform(0, 1, (24, 24, 3))
        entries = tuple(SequenceEntry(0, t, make_stroke(rng)) for t in range(5))
        seq = StrokeSequence(entries)
        rep = report(seq, target)
        final, _ = render_sequence(seq, 24, 24, blank_canvas(24, 24))
        assert rep.l_pixel == l_pixel(target, final)

    def test_pruning_keeps_survivor_penalties(self):
        rng = np.random.default_rng(59)
        target = rng.uniform(0, 1, (16, 16, 3))
        keep = [SequenceEntry(0, 2 * t, make_stroke(rng),
                              window=Window(*rng.uniform(0, 0.4, 4)))
                for t in range(5)]
        noise = [SequenceEntry(0, 2 * t + 1, make_stroke(rng), beta=0.0,
                               window=Window(*rng.uniform(0, 0.4, 4)))
                 for t in range(5)]
        mixed = StrokeSequence(tuple(sorted(keep + noise, key=lambda e: e.t)))
        survivors = StrokeSequence(tuple(keep))
        rep_mixed = report(mixed, target)
        rep_surv = report(survivors, target)
        assert rep_mixed.spatial_penalty_sum == rep_surv.spatial_penalty_sum
        assert rep_mixed.color_penalty_sum == rep_surv.color_penalty_sum

    def test_penalty_signs_and_lines(self):
        rng = np.random.default_rng(60)
        target = rng.uniform(0, 1, (16, 16, 3))
        entries = tuple(SequenceEntry(0, t, make_stroke(rng),
                                      window=Window(*rng.uniform(0, 0.4, 4)))
                        for t in range(6))
        rep = report(StrokeSequence(entries), target)
        assert rep.spatial_penalty_sum <= 0.0
        assert rep.color_penalty_sum <= 0.0
        assert rep.l_pixel >= 0.0
        keys = [line.split("=")[0] for line in rep.lines()]
        assert keys[:9] == ["height", "width", "layers", "stroke_count_total",
                            "stroke_count_active", "l_pixel", "l_ms",
                            "spatial_penalty_sum", "color_penalty_sum"]

    def test_trajectory_replay(self):
        rng = np.random.default_rng(61)
        target = rng.uniform(0, 1, (16, 16, 3))
        entries = tuple(SequenceEntry(0, t, make_stroke(rng)) for t in range(4))
        seq = StrokeSequence(entries)
        traj = l2_trajectory(seq, target)
        assert len(traj) == 5
        rep = report(seq, target)
        assert traj[-1] == pytest.approx(rep.l_pixel)
