"""Shared exception types for the phpipe package."""


class DomainError(ValueError):
    """An input lies outside the physical or numerical domain of an operation."""


class RankDeficiencyError(ValueError):
    """A design matrix has linearly dependent columns, so the least-squares
    solution is not unique."""


class ConfigError(ValueError):
    """A run configuration file or override is malformed or names unknown keys."""


class ObjectiveEvaluationError(RuntimeError):
    """An objective function raised during optimization.

    Attributes:
        position: the candidate position (or batch of positions) that was
            being evaluated when the underlying error occurred.
    """

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position
