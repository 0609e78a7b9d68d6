"""Exception hierarchy.

Numerical failures derive from :class:`NumericalError` (CLI exit code 3);
configuration problems raise :class:`ConfigError` (exit code 2).
"""

from __future__ import annotations


class CocycleError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(CocycleError):
    """Malformed or schema-violating run configuration."""


class NumericalError(CocycleError):
    """A computation could not meet its contract or tolerance."""


class EvaluationError(NumericalError):
    """A provider returned a non-finite value."""

    def __init__(self, message: str, lam: float | None = None, t: float | None = None):
        super().__init__(message)
        self.lam = lam
        self.t = t


class OrderDomainError(NumericalError):
    """Operation called with a cocycle order outside its domain."""


class ConvergenceError(NumericalError):
    """Series truncation could not reach the requested tail bound."""

    def __init__(self, message: str, achieved: float):
        super().__init__(message)
        self.achieved = achieved


class InconsistencyError(NumericalError):
    """Values that must agree across lambda disagree beyond tolerance."""

    def __init__(self, message: str, spread: float):
        super().__init__(message)
        self.spread = spread


class DegenerateLambdaError(NumericalError):
    """No admissible lambda survived the conditioning guard."""


class SubtractionError(NumericalError):
    """The value at t = 0 did not vanish after subtracting the extracted term."""


class DecompositionError(NumericalError):
    """Reassembled decomposition fails to reproduce the input cocycle."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class InvalidInputError(NumericalError):
    """Arguments are inconsistent with each other (e.g. c != 0 off the integers)."""


class QuadratureError(NumericalError):
    """Adaptive quadrature did not converge."""


class NotTraceClassError(NumericalError):
    """Direct symbol integral requested for a non-integrable symbol."""


class BranchError(NumericalError):
    """Wodzicki/KV branch requested at an order where it does not apply."""


class PoleLocusError(BranchError):
    """Evaluation requested on the pole lattice of a holomorphic family."""
