"""Exception types shared across the package."""


class BundleFormatError(ValueError):
    """Raised when a model bundle file cannot be parsed or fails validation."""


class NumericError(RuntimeError):
    """Raised when an iterative procedure produces non-finite numbers."""
