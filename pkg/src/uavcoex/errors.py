"""Exception types shared across the simulator."""


class ConfigurationError(ValueError):
    """Invalid scenario parameter or malformed configuration input."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field

    def __str__(self):
        base = super().__str__()
        return f"{self.field}: {base}" if self.field else base


class DeploymentError(RuntimeError):
    """Random placement could not satisfy the minimum-distance constraints."""


class PatternLoadError(ValueError):
    """Radiation-pattern file is missing, malformed, or incomplete."""


class ChannelModelError(RuntimeError):
    """A channel quantity was requested that is undefined for the link state."""


class BeamformingError(RuntimeError):
    """Beam computation failed, e.g. a covariance with no dominant direction."""


class PipelineError(RuntimeError):
    """Internal orchestration bug, e.g. a missing precomputed link quantity."""
