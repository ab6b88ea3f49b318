"""Exception types raised by dirac_spectra."""

from typing import Optional, Sequence


class DiracSpectraError(Exception):
    """Base class for all package errors."""


class SpecValidationError(DiracSpectraError, ValueError):
    """Rejected model input (signs, non-finite coefficients, grid layout)."""


class ConfigError(SpecValidationError):
    """Run configuration violates the schema.

    Attributes:
        path: JSON path of the offending field (e.g. ``boundary.rows[1][3]``)
        line: Line number for JSON syntax errors, None otherwise
    """

    def __init__(self, message: str, path: str = "", line: Optional[int] = None):
        self.path = path
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if path:
            where.append(path)
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}")


class DerivativeOrderError(SpecValidationError):
    """Requested λ-derivative order exceeds the solver capability."""


class AsymptoteRegionError(SpecValidationError):
    """Leading-term prediction requested too close to the real axis."""


class DynamicRangeError(DiracSpectraError, ArithmeticError):
    """Solver samples left the representable range."""

    def __init__(self, message: str = "dynamic range exceeded; reduce |Im λ|"):
        super().__init__(message)


class ZeroOnContourError(DiracSpectraError):
    """Characteristic function vanishes on every dilation of a contour."""


class ExclusionError(DiracSpectraError):
    """Exclusion set of the requested size cannot respect chain closure.

    Attributes:
        achievable: Exclusion sizes that can be reached
    """

    def __init__(self, message: str, achievable: Sequence[int] = ()):
        self.achievable = list(achievable)
        super().__init__(f"{message} (achievable sizes: {self.achievable})")


class EnumerationMismatchError(DiracSpectraError):
    """Eigenfunction and reference enumerations do not line up."""
