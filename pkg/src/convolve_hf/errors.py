"""Exception and warning types shared across the package."""


class GridMismatchError(ValueError):
    """Two fields that must live on the same grid do not."""


class SingularPointError(ValueError):
    """A singular kernel was evaluated exactly at its singularity."""


class ResolutionError(ValueError):
    """A kernel width is below the grid's resolution floor in strict mode."""


class ResolutionWarning(UserWarning):
    """A kernel width is below the resolution floor 2h; results are degraded."""


class SupportWarning(UserWarning):
    """A field carries significant mass near the box boundary."""


class IllConditionedBasisError(ValueError):
    """Basis Gram matrix condition number exceeds the projection limit."""


class ConfigError(ValueError):
    """A run configuration file is malformed or violates a precondition."""
