"""Exception hierarchy for the capillary solvers.

All solver-specific failures derive from :class:`CapillaryError` so callers
(and the CLI) can catch one base class and serialize the payload.  Programmer
errors (bad array shapes, out-of-range indices, malformed arguments) raise the
ordinary ``ValueError`` / ``IndexError`` built-ins instead.
"""

from __future__ import annotations

from typing import Any


class CapillaryError(Exception):
    """Base class for all domain errors raised by this package.

    Parameters
    ----------
    message : str
        Human-readable description.
    **detail
        Machine-readable payload (step index, residual, bound violated, ...);
        stored in :attr:`detail` and serialized by the CLI.
    """

    def __init__(self, message: str, **detail: Any):
        super().__init__(message)
        self.detail = detail

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "error": type(self).__name__,
            "message": str(self),
            "detail": {k: _plain(v) for k, v in self.detail.items()},
        }


def _plain(v: Any) -> Any:
    """Coerce numpy scalars to plain Python for JSON output."""
    try:
        return v.item()
    except AttributeError:
        return v


class DomainError(CapillaryError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class DomainExitError(CapillaryError):
    """A contact point left the substrate's declared domain."""


class SingularSystemError(CapillaryError):
    """Bordered linear system has a (numerically) singular Schur pivot."""


class NonConvergenceError(CapillaryError):
    """Iterative solver exhausted its iteration budget.

    ``detail`` carries ``residual`` and ``iterations``.
    """


class NumericalBlowupError(CapillaryError):
    """NaN/Inf appeared in a residual or state."""


class DropletCollapseError(CapillaryError):
    """Moving boundaries crossed (b <= a)."""


class NegativeHeightError(CapillaryError):
    """Capillary surface dipped below the substrate beyond tolerance."""


class ConstraintViolationError(CapillaryError):
    """Volume-constraint residual exceeded its tolerance after a solve."""


class RegimeError(CapillaryError):
    """State left the regime in which a formula or bound is valid."""


class DesingularizationError(CapillaryError):
    """Desingularized quadrature hit a non-positive radicand."""


class StabilityBoundError(CapillaryError):
    """A provable moving-boundary bound was violated at runtime."""


class UnknownScenarioError(CapillaryError, KeyError):
    """Scenario name not present in the registry."""
