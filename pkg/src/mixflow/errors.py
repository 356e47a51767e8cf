"""Exception types shared across the package.

Config/input problems subclass ValueError (CLI exit code 2); numeric
failures during iteration subclass RuntimeError (CLI exit code 3).
"""


class ConfigError(ValueError):
    """Invalid configuration, resume mismatch, or malformed input file."""


class DomainError(ValueError):
    """Argument outside its mathematical domain (e.g. t outside [0, 1])."""


class ShapeError(ValueError):
    """Mismatched array shapes or grids."""


class SingularityError(ValueError):
    """Score conversion requested where the noise coefficient vanishes."""


class DegeneratePairError(ValueError):
    """Noise/data pair too close to define a projection direction."""


class DegenerateDataError(ValueError):
    """Sample set unusable for density estimation (too few / zero variance)."""


class NumericError(RuntimeError):
    """Non-finite loss during training.

    Carries the last good checkpoint so callers can persist it.
    """

    def __init__(self, message, checkpoint=None, loss_log=None):
        super().__init__(message)
        self.checkpoint = checkpoint
        self.loss_log = loss_log


class IntegrationError(RuntimeError):
    """Non-finite state produced by a sampler step."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step
