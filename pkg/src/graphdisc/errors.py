"""Shared exception types."""


class ConfigurationError(ValueError):
    """Invalid configuration (bad counts, out-of-range split index, ...)."""


class ShapeError(ValueError):
    """Dimension mismatch between operands."""


class DegenerateInputError(ValueError):
    """Input is degenerate for the requested operation (all-zero matrix,
    vanishing projection, ...)."""


class NumericalError(RuntimeError):
    """A numerical procedure failed (non-convergence, internal
    inconsistency between two routes that must agree)."""
