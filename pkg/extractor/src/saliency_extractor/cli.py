"""Command-line entry point for the extractor."""

from __future__ import annotations

import sys

import click

from .extract import extract
from .models import ModelError, build_detector, build_saliency


@click.command()
@click.argument("image_path", type=click.Path())
@click.option("--out", "out_dir", type=click.Path(), default=".",
              show_default=True, help="Directory for <stem>.mask.png and "
              "<stem>.boxes.txt.")
@click.option("--threshold", default=0.5, show_default=True,
              help="Saliency threshold for the mask bounding box.")
@click.option("--saliency-model", default="spectral", show_default=True,
              help='"spectral" or "torchscript:<weights.pt>".')
@click.option("--detector", default="none", show_default=True,
              help='"none" or "torchscript:<weights.pt>".')
@click.option("--confidence", default=0.25, show_default=True,
              help="Detector confidence cutoff.")
def main(image_path, out_dir, threshold, saliency_model, detector, confidence):
    """Write a saliency mask and object box file for IMAGE_PATH."""
    try:
        sal = build_saliency(saliency_model)
        det = build_detector(detector, confidence)
    except ModelError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    try:
        result = extract(image_path, out_dir, sal, det, threshold)
    except OSError as exc:
        click.echo(f"error: cannot read image: {exc}", err=True)
        sys.exit(1)
    except ModelError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(f"wrote {result.mask_path} and {result.boxes_path} "
               f"({len(result.boxes)} boxes)")


if __name__ == "__main__":
    main()
