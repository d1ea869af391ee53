"""Exception hierarchy shared across the package."""


class CfMapsError(Exception):
    """Base class for all package-specific errors."""


class SchemaError(CfMapsError):
    """Feature schema violated: bad dimension, unknown feature, invalid bounds."""


class DomainError(CfMapsError):
    """A coordinate falls outside the feature's declared domain interval."""


class ModelFormatError(CfMapsError):
    """Malformed, unversioned, or invariant-violating model/partition document."""


class InvalidTargetError(CfMapsError):
    """The requested target class equals the current prediction."""


class InfeasibleTargetError(CfMapsError):
    """No admissible region carries the target class (empty class or all frozen out)."""


class GridCapExceededError(CfMapsError):
    """Exact-grid extraction refused: the threshold grid has too many cells."""


class NotBuiltError(CfMapsError):
    """Query-time operation attempted before the build pipeline completed."""
