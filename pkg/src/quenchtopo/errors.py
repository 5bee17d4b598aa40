"""Exception hierarchy.

Errors split into two families so the CLI can map them onto exit codes:
``ConfigError`` subclasses mean the request itself is invalid, while
``NumericalFailure`` subclasses mean the numerics could not certify a result.
"""


class QuenchTopoError(Exception):
    """Base class for all package errors."""


class ConfigError(QuenchTopoError, ValueError):
    """Invalid model, grid or run configuration."""


class NumericalFailure(QuenchTopoError, ArithmeticError):
    """A computation ran but could not certify its result."""


class GaplessPoint(NumericalFailure):
    """The d-vector vanishes (to ``gap_floor``) at some momentum."""


class CriticalPoint(NumericalFailure):
    """Parameters sit on a topological phase boundary."""


class Unsupported(ConfigError):
    """Operation not defined for this model family."""


class GridError(ConfigError):
    """A k-grid is too small or samples a forbidden momentum."""


class PlaneMismatch(ConfigError):
    """Initial and final models do not share a Pauli plane."""


class UnwrapFailure(NumericalFailure):
    """Phase unwrapping met a step too large to resolve; refine the grid."""


class NonIntegerWinding(NumericalFailure):
    """Accumulated winding is not close to an integer."""


class SingularK(NumericalFailure):
    """Dipole element evaluated where d_x vanishes."""


class MultiMinimum(NumericalFailure):
    """Gap frequency is not monotone on the half zone; inversion refused."""


class RootFindFailure(NumericalFailure):
    """Bisection could not bracket a root."""


class ZeroShots(ConfigError):
    """A density sample carries no measured atoms."""


class Disagreement(NumericalFailure):
    """Two independent methods returned different integers."""
