"""Exception types shared across the package."""

from __future__ import annotations


class CKBatemanError(Exception):
    """Base class for all package errors."""


class OverdampedUnsupported(CKBatemanError, ValueError):
    """Raised when a real reduced frequency is required but omega <= gamma/2."""


class CausticCrossed(CKBatemanError, ValueError):
    """Raised when u2(t) <= 0, outside the domain of the Arnold map."""


class TimeOutOfRange(CKBatemanError, ValueError):
    """Raised when a free time has no preimage on the valid interval."""


class DegenerateParams(CKBatemanError, ValueError):
    """Raised when a map's normalization vanishes (gamma = 0 or Omega = 0)."""


class BoundaryLeak(CKBatemanError, RuntimeError):
    """Raised when a propagated state reaches the fixed-zero boundary."""


class UnsupportedOperator(CKBatemanError, ValueError):
    """Raised for operators outside the supported expectation class."""


class OriginSingular(CKBatemanError, ValueError):
    """Raised when evaluating a z-eigenfunction at z = 0."""


class OffConstraintSurface(CKBatemanError, ValueError):
    """Raised when a wavefunction is not in the constrained subspace."""


class BranchSingularity(CKBatemanError, ValueError):
    """Raised when a time lies inside the guard band of a singular point."""


class InconsistentTable(CKBatemanError, ValueError):
    """Raised when the Jacobi conditions on central charges admit no solution."""


class ConfigError(CKBatemanError, ValueError):
    """Raised for malformed run configurations; the message names the field."""


class MismatchReport(CKBatemanError, AssertionError):
    """Raised when a verification finds disagreeing entries.

    The full report is kept in ``report`` so callers can still serialize it.
    """

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report
