"""Exception types shared across modules, mapped to CLI exit codes."""


class ConfigError(ValueError):
    """Invalid experiment configuration or operation parameters (exit 2)."""


class ResourceCapError(RuntimeError):
    """A resource guard (atom count, grid cells, wall clock) tripped (exit 3)."""


class NumericError(ValueError):
    """Numeric failure: degenerate geometry, divergent sums, bad data (exit 4)."""


class DegenerateTriangleError(NumericError):
    """Side lengths violate the triangle inequality beyond clamping tolerance."""


class AdaptabilityError(NumericError):
    """A point family failed the thickened-energy admissibility check."""
