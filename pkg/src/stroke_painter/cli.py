"""Command-line interface: paint, render, background, metrics.

Exit codes: 0 success, 2 unreadable input image, 3 invalid mask / boxes /
stroke file, 4 numerical failure.  All commands are deterministic for a
fixed seed and configuration; the stroke file header records both.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click
import numpy as np

from .errors import NonFiniteGradient, StrokeFileError
from .fileio import (StrokeFileHeader, config_digest, load_image_rgb,
                     load_mask, read_box_file, read_stroke_file, save_image,
                     write_stroke_file)
from .layering import heuristic_saliency, saliency_bounding_box
from .metrics import l2_trajectory, report
from .planner import PaintingTask, PlanConfig, SaliencyBundle, plan
from .regularizer import RegConfig, stroke_reg
from .renderer import blank_canvas, render_sequence
from .sequence import StrokeSequence

EXIT_UNREADABLE = 2
EXIT_INVALID = 3
EXIT_NUMERIC = 4

INIT_COLORS = {"white": (1.0, 1.0, 1.0), "black": (0.0, 0.0, 0.0)}


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _apply_thread_cap() -> None:
    """Honor STROKE_PAINTER_THREADS as an upper bound on worker threads."""
    value = os.environ.get("STROKE_PAINTER_THREADS")
    if not value:
        return
    try:
        cap = max(1, int(value))
    except ValueError:
        return
    import numba

    numba.set_num_threads(min(cap, numba.config.NUMBA_NUM_THREADS))


def _load_config_file(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        _fail(EXIT_INVALID, f"config file: {exc}")
    if not isinstance(data, dict):
        _fail(EXIT_INVALID, "config file must hold a JSON object")
    return data


def _resolve(ctx: click.Context, config_path, names: tuple[str, ...]) -> dict:
    """Merge defaults, config-file values and explicit flags (flags win)."""
    merged = {name: ctx.params[name] for name in names}
    if config_path is None:
        return merged
    from_file = _load_config_file(config_path)
    unknown = set(from_file) - set(names)
    if unknown:
        _fail(EXIT_INVALID, f"unknown config keys: {sorted(unknown)}")
    for name, value in from_file.items():
        source = ctx.get_parameter_source(name)
        if source is not None and source.name == "COMMANDLINE":
            continue
        merged[name] = value
    return merged


@click.group()
def main() -> None:
    """Decompose images into ordered, layered brushstroke sequences."""
    _apply_thread_cap()


PAINT_OPTION_NAMES = ("layers", "strokes", "strokes_per_window", "gamma",
                      "reg_iters", "no_strokereg", "seed", "size", "init",
                      "drop_pruned")


@main.command()
@click.argument("target_path", type=click.Path())
@click.option("-o", "--out", "out_dir", type=click.Path(), default="paint_out",
              show_default=True, help="Output directory.")
@click.option("--layers", default=2, show_default=True, help="Painting layers.")
@click.option("--strokes", default=300, show_default=True,
              help="Total stroke budget.")
@click.option("--strokes-per-window", default=5, show_default=True,
              help="Strokes fitted per attention window.")
@click.option("--gamma", default=None, type=float,
              help="Gate penalty weight; omit for per-image calibration.")
@click.option("--reg-iters", default=300, show_default=True,
              help="Regularization iterations.")
@click.option("--no-strokereg", is_flag=True,
              help="Skip regularization; every gate stays open.")
@click.option("--seed", default=0, show_default=True)
@click.option("--size", default=256, show_default=True,
              help="Render resolution (square).")
@click.option("--init", default="white", type=click.Choice(sorted(INIT_COLORS)),
              show_default=True, help="Blank canvas color.")
@click.option("--saliency", "saliency_path", type=click.Path(), default=None,
              help="Single-channel saliency mask; omit for the built-in estimate.")
@click.option("--boxes", "boxes_path", type=click.Path(), default=None,
              help="Object box file; omit to derive one box from the mask.")
@click.option("--drop-pruned", is_flag=True,
              help="Drop pruned strokes from the output file.")
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON config file; explicit flags win.")
@click.pass_context
def paint(ctx, target_path, out_dir, saliency_path, boxes_path, config_path,
          **_options):
    """Plan and regularize a stroke sequence for TARGET_PATH."""
    opts = _resolve(ctx, config_path, PAINT_OPTION_NAMES)
    size = int(opts["size"])
    seed = int(opts["seed"])
    layers = int(opts["layers"])
    init_color = INIT_COLORS[opts["init"]]

    try:
        target = load_image_rgb(target_path, size)
    except OSError as exc:
        _fail(EXIT_UNREADABLE, f"target image: {exc}")

    try:
        if saliency_path is not None:
            saliency = load_mask(saliency_path, size, size)
        else:
            saliency = heuristic_saliency(target)
        if boxes_path is not None:
            boxes = tuple(w for _, w, _ in read_box_file(boxes_path))
        else:
            box = saliency_bounding_box(saliency)
            boxes = (box,) if box is not None else ()
    except StrokeFileError as exc:
        _fail(EXIT_INVALID, str(exc))

    try:
        task = PaintingTask(
            target=target,
            bundle=SaliencyBundle(saliency=saliency, boxes=boxes),
            num_layers=layers,
            episode_length=int(opts["strokes"]),
            strokes_per_window=int(opts["strokes_per_window"]),
            config=PlanConfig(init_color=init_color),
        )
    except ValueError as exc:
        _fail(EXIT_INVALID, str(exc))

    try:
        seq, _ = plan(task, seed=seed)
        if not opts["no_strokereg"]:
            reg = RegConfig(gamma=opts["gamma"], iterations=int(opts["reg_iters"]))
            seq = stroke_reg(seq, target, reg, init_color=init_color, seed=seed)
        final, layer_canvases = render_sequence(
            seq, size, size, blank_canvas(size, size, init_color),
            num_layers=layers)
    except NonFiniteGradient as exc:
        _fail(EXIT_NUMERIC, str(exc))
    if not np.all(np.isfinite(final)):
        _fail(EXIT_NUMERIC, "final canvas contains non-finite values")

    digest = config_digest({k: opts[k] for k in PAINT_OPTION_NAMES if k != "seed"})
    header = StrokeFileHeader(height=size, width=size, layers=layers,
                              budget=int(opts["strokes"]), seed=seed,
                              config_digest=digest, init_color=init_color)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_stroke_file(out / "strokes.txt", seq, header,
                      drop_pruned=bool(opts["drop_pruned"]))
    save_image(out / "final.png", final)
    for i, canvas in enumerate(layer_canvases):
        save_image(out / f"layer_{i}.png", canvas)
    _write_report(out, seq, target, layers, init_color)
    active = len(seq.active())
    click.echo(f"painted {active} strokes ({len(seq)} planned) -> {out}")


def _write_report(out: Path, seq: StrokeSequence, target: np.ndarray,
                  layers: int, init_color) -> None:
    from .figures import save_layer_strip, save_progress_figure

    rep = report(seq, target, init_color=init_color, num_layers=layers)
    (out / "report.txt").write_text("\n".join(rep.lines()) + "\n")
    trajectory = l2_trajectory(seq, target, init_color=init_color)
    active = seq.active()
    marks = []
    for boundary in range(1, layers):
        marks.append(sum(1 for e in active if e.layer < boundary))
    save_progress_figure(out / "progress.png", trajectory, marks)
    height, width = target.shape[:2]
    final, layer_canvases = render_sequence(
        seq, height, width, blank_canvas(height, width, init_color),
        num_layers=layers)
    save_layer_strip(out / "layers.png", target, layer_canvases, final)


@main.command()
@click.argument("stroke_file", type=click.Path())
@click.option("-o", "--out", "out_dir", type=click.Path(), default="render_out",
              show_default=True, help="Output directory.")
@click.option("--at", "at_count", type=int, default=None,
              help="Render the canvas after this many active strokes.")
@click.option("--frames", "every_n", type=int, default=None,
              help="Write a frame every N active strokes (timelapse).")
def render(stroke_file, out_dir, at_count, every_n):
    """Replay a stroke file into images."""
    try:
        header, seq = read_stroke_file(stroke_file)
    except StrokeFileError as exc:
        _fail(EXIT_INVALID, str(exc))
    height, width = header.height, header.width
    active = seq.active()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    def canvas_after(count: int) -> np.ndarray:
        partial = StrokeSequence.from_entries(active[:count])
        canvas, _ = render_sequence(partial, height, width,
                                    blank_canvas(height, width, header.init_color),
                                    num_layers=header.layers)
        return canvas

    if at_count is not None:
        if not 0 <= at_count <= len(active):
            _fail(EXIT_INVALID,
                  f"--at {at_count} outside [0, {len(active)}] active strokes")
        save_image(out / f"at_{at_count:05d}.png", canvas_after(at_count))
        click.echo(f"wrote {out / f'at_{at_count:05d}.png'}")
        return

    if every_n is not None:
        if every_n < 1:
            _fail(EXIT_INVALID, "--frames must be positive")
        count = every_n
        frames = 0
        while count <= len(active):
            save_image(out / f"frame_{count:05d}.png", canvas_after(count))
            frames += 1
            count += every_n
        save_image(out / "final.png", canvas_after(len(active)))
        click.echo(f"wrote {frames} frames + final -> {out}")
        return

    save_image(out / "final.png", canvas_after(len(active)))
    click.echo(f"wrote {out / 'final.png'}")


@main.command()
@click.argument("stroke_file", type=click.Path())
@click.option("-o", "--out", "out_path", type=click.Path(),
              default="background.png", show_default=True)
def background(stroke_file, out_path):
    """Export the painted background: the layer-0 terminal canvas.

    Foreground regions appear as layer-0 strokes painted them, i.e. filled
    with surrounding scenery rather than object detail.
    """
    try:
        header, seq = read_stroke_file(stroke_file)
    except StrokeFileError as exc:
        _fail(EXIT_INVALID, str(exc))
    if header.layers < 2:
        _fail(EXIT_INVALID, "background export needs a multi-layer stroke file")
    _, layer_canvases = render_sequence(
        seq, header.height, header.width,
        blank_canvas(header.height, header.width, header.init_color),
        num_layers=header.layers)
    save_image(out_path, layer_canvases[0])
    click.echo(f"wrote {out_path}")


@main.command()
@click.argument("stroke_file", type=click.Path())
@click.argument("target_path", type=click.Path())
@click.option("-o", "--out", "out_dir", type=click.Path(), default=None,
              help="Also write report.txt and figures here.")
def metrics(stroke_file, target_path, out_dir):
    """Evaluate a stroke file against its target image."""
    try:
        header, seq = read_stroke_file(stroke_file)
    except StrokeFileError as exc:
        _fail(EXIT_INVALID, str(exc))
    try:
        target = load_image_rgb(target_path, header.height)
    except OSError as exc:
        _fail(EXIT_UNREADABLE, f"target image: {exc}")
    if target.shape[:2] != (header.height, header.width):
        _fail(EXIT_INVALID, "target cannot be resampled to the stroke file size")

    rep = report(seq, target, init_color=header.init_color,
                 num_layers=header.layers)
    for line in rep.lines():
        click.echo(line)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_report(out, seq, target, header.layers, header.init_color)


if __name__ == "__main__":
    main()
