"""Exception types shared across the package.

Every error carries a short machine-readable ``kind`` so the CLI can emit
single-line JSON error objects with stable vocabulary.
"""

from __future__ import annotations


class CantorStringError(Exception):
    """Base class for all package errors."""

    kind = "error"


class ValidationError(CantorStringError):
    """Bad input data (ladder spec, split interval, argument ranges)."""

    kind = "validation"


class OverlapError(ValidationError):
    kind = "overlap"


class RangeError(ValidationError):
    kind = "range"


class WeightError(ValidationError):
    kind = "weight"


class DomainError(ValidationError):
    kind = "domain"


class DepthError(CantorStringError):
    """Requested refinement depth exceeds the atom budget."""

    kind = "depth"


class DegenerateError(CantorStringError):
    """Problem has no discrete spectrum (empty measure under Robin ends)."""

    kind = "degenerate"


class ToleranceError(ValidationError):
    kind = "tolerance"


class StructureError(CantorStringError):
    """Ladder lacks the structure an operation requires."""

    kind = "structure"


class ResolutionError(CantorStringError):
    """Requested scale lies beyond what the discretization resolves."""

    kind = "resolution"


class EventCollisionError(CantorStringError):
    """Spectral events coincide within solver resolution and cannot be ordered."""

    kind = "collision"


class QuadratureError(CantorStringError):
    kind = "quadrature"


class NonMonotoneError(CantorStringError):
    """Monotonicity assumption of an inversion failed; holds bracketing data."""

    kind = "monotonicity"

    def __init__(self, message, probes=None):
        super().__init__(message)
        self.probes = tuple(probes) if probes is not None else ()
