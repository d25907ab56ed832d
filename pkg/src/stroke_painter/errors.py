"""Exception types shared across the engine.

Every error raised on purpose by this package derives from PainterError so
callers (and the CLI exit-code mapping) can catch one base class.
"""


class PainterError(Exception):
    """Base class for all stroke-painter errors."""


class NonConvexCoefficients(PainterError):
    """Selection coefficients are negative or do not sum to one."""


class LengthMismatch(PainterError):
    """Paired lists (coefficients/boxes, ranked masks/layers) disagree in length."""


class DegenerateWindow(PainterError):
    """A window with non-positive extent was used where area is required."""


class DimensionMismatch(PainterError):
    """Image-like operands do not share the same shape."""


class NonFiniteGradient(PainterError):
    """A gradient computation produced NaN or Inf."""


class LayerOutOfRange(PainterError):
    """Layer index outside [0, num_layers)."""


class EmptyResidual(PainterError):
    """The residual inside a coarse window is identically zero."""


class StrokeFileError(PainterError):
    """A stroke-sequence or box file is malformed."""
