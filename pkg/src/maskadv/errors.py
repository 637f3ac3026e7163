"""Exception hierarchy shared across the package."""


class MaskAdvError(Exception):
    """Base class for all errors raised by this package."""


class InputError(MaskAdvError):
    """Invalid arguments: shape mismatches, out-of-range parameters."""


class NumericError(MaskAdvError):
    """Non-finite intermediates or degenerate numeric situations."""


class ModelFormatError(MaskAdvError):
    """Malformed or inconsistent model / tensor files."""


class SolverError(MaskAdvError):
    """The constrained subproblem has no meaningful solution."""


class DatasetError(MaskAdvError):
    """Dataset files missing, truncated or with bad magic numbers."""
