"""Companion preprocessing tool for the stroke painter.

Produces the saliency mask and object box files the painter ingests, either
from a weights-free spectral estimate or from pretrained models plugged in
as TorchScript exports.
"""

from .extract import ExtractionResult, extract
from .models import (ModelError, NoDetector, SpectralSaliency,
                     TorchScriptDetector, TorchScriptSaliency, build_detector,
                     build_saliency)

__version__ = "0.1.0"

__all__ = [
    "ExtractionResult", "ModelError", "NoDetector", "SpectralSaliency",
    "TorchScriptDetector", "TorchScriptSaliency", "build_detector",
    "build_saliency", "extract",
]
