"""Error types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid model/experiment configuration (bad prior, scheme mismatch, ...)."""


class InputError(ValueError):
    """Invalid data passed to an operation (wrong length, NaN, non-integer counts, ...)."""


class NumericError(RuntimeError):
    """A numerical routine produced no usable result (underflow, failed quadrature)."""
