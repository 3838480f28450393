"""Exception hierarchy shared by all solver modules."""


class FBSDEError(Exception):
    """Base class for every error raised by this package."""


class LatticeError(FBSDEError, ValueError):
    pass


class MomentError(LatticeError):
    """Noise model violates the zero-mean / unit-variance conditions."""


class LatticeSizeError(LatticeError):
    """Node count would exceed the configured cap."""


class LevelMismatchError(LatticeError):
    """A node variable does not live on the expected level."""


class HorizonError(FBSDEError, ValueError):
    """Requested horizon exceeds the available levels."""


class WindowError(FBSDEError, ValueError):
    """Discount exponent outside the admissible window."""


class NonFiniteError(FBSDEError, FloatingPointError):
    """A recursion produced NaN or infinite values."""


class CaseMismatchError(FBSDEError, ValueError):
    """Certificate fields disagree with the declared case."""


class ContractionError(FBSDEError, RuntimeError):
    """Picard iteration of a continuation step failed to contract."""


class StepCollapseError(FBSDEError, RuntimeError):
    """Adaptive continuation step fell below its floor."""


class DivergenceError(FBSDEError, RuntimeError):
    """Direct fixed-point sweeps failed to reach tolerance."""


class SpecError(FBSDEError, ValueError):
    """Invalid LQ problem data."""


class ConfigError(FBSDEError, ValueError):
    """Malformed experiment configuration."""
