"""Exception types shared across the package."""


class DataError(ValueError):
    """Malformed or out-of-range input data."""


class InfeasibleError(ValueError):
    """A privacy parameterization that no mechanism instance can satisfy."""
