"""Exception hierarchy shared by every module, with CLI exit codes."""
from __future__ import annotations


class BarnesError(Exception):
    """Base class for every error raised by the package."""

    exit_code = 1


class ParseError(BarnesError, ValueError):
    exit_code = 2


class DomainError(BarnesError, ValueError):
    """Argument outside the region where the requested formula is valid."""

    exit_code = 3


class PoleError(DomainError):
    pass


class GeometryError(DomainError):
    """Invalid truncation geometry (x, y, N, L, M)."""


class BranchMismatchError(DomainError):
    """Requested dependent/independent branch disagrees with the parameters."""


class InsufficientSpanError(DomainError):
    pass


class InvariantViolationError(DomainError):
    """A derivative envelope does not satisfy the window hypotheses."""


class SizeError(DomainError):
    """A brute-force request exceeds the configured size cap."""


class PrecisionError(BarnesError, ArithmeticError):
    """The requested accuracy cannot be met at the configured limits."""

    exit_code = 4


class PrecisionMismatchError(PrecisionError, TypeError):
    """Arithmetic between values carrying different precisions."""


class NearResonanceError(PrecisionError):
    """A residue denominator e^{2 pi i n w/v} - 1 is numerically zero."""


class AmbiguityError(PrecisionError):
    """An integrality test could not be decided inside the numeric guard band."""


class ScanFailure(BarnesError):
    """Every row of a scan failed."""

    exit_code = 5
