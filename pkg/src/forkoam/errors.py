"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class ForkOAMError(Exception):
    exit_code = 1


class ConfigError(ForkOAMError, ValueError):
    """Invalid parameters or configuration."""

    exit_code = 2


class DomainError(ConfigError):
    """Argument outside the domain of a physical formula."""


class ShapeError(ConfigError):
    """Grids or array shapes do not match."""


class SamplingError(ForkOAMError):
    """A geometry cannot be represented on the requested grid."""

    exit_code = 3


class AnalysisError(ForkOAMError):
    exit_code = 4


class ResolutionError(AnalysisError):
    """Analysis region falls outside the grid or is too coarsely sampled."""


class IndeterminateWindingError(AnalysisError):
    pass


class AmbiguousSortError(AnalysisError):
    """Two diffraction orders transmit nearly the same power through the pinhole."""

    def __init__(self, message, candidates, transmissions):
        super().__init__(message)
        self.candidates = tuple(candidates)
        self.transmissions = tuple(transmissions)


class OutputError(ForkOAMError, OSError):
    exit_code = 5
