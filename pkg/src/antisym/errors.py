"""Exception types shared across the library."""


class AntisymError(Exception):
    """Base class for library-specific failures."""


class DimensionMismatch(AntisymError):
    """Input shape disagrees with the feature map's particle count or dimension."""


class CollidingInput(AntisymError):
    """Two particles coincide where distinct particles are required."""


class NoCollision(AntisymError):
    """A duplicated particle pair is required but none is present."""


class OrbitCheckInfeasible(AntisymError):
    """Exhaustive orbit comparison requested for more than 6 particles."""


class SpecTooSmall(AntisymError):
    """Feature dimension is smaller than the particle degrees of freedom."""


class IllConditioned(AntisymError):
    """Normal equations too ill-conditioned to solve reliably; increase the ridge."""


class DomainViolation(AntisymError):
    """Input lies outside a target function's domain."""


class NonpositiveEps(AntisymError):
    """Curve evaluation requires strictly positive epsilon values."""


class ConfigError(AntisymError):
    """Run configuration is missing, malformed, or inconsistent."""
