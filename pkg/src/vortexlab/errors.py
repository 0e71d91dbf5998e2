"""Exception types raised across the package."""


class VortexLabError(Exception):
    """Base class for all package errors."""


class SolvabilityViolation(VortexLabError):
    """An n = 1 forcing has a nonzero first moment, so no inverse exists."""


class ConvergenceFailure(VortexLabError):
    """An iterative or boundary-value solve did not reach its tolerance."""


class UnknownKind(VortexLabError):
    """An external flow kind is not in the catalog."""


class StepSizeUnderflow(VortexLabError):
    """Adaptive step control shrank the step below its floor."""


class UnderResolved(VortexLabError):
    """A vortex core is too small for the grid spacing."""


class CFLViolation(VortexLabError):
    """A time step exceeds the advective stability limit."""


class StepInstability(VortexLabError):
    """A linear evolution step amplified the norm by more than a factor 10."""


class InsufficientDecay(VortexLabError):
    """A norm history does not decay enough to fit a rate."""


class NoDecayDetected(VortexLabError):
    """A relaxation history shows no decay above its plateau."""


class ZeroCirculation(VortexLabError):
    """Vorticity moments are undefined because the circulation vanishes."""


class WeightOverflowRisk(VortexLabError):
    """A field does not decay fast enough for the Gaussian weight."""


class ConfigError(VortexLabError):
    """Invalid or missing configuration entry; the message names the key."""


class RunError(VortexLabError):
    """A run failed inside a numerical module."""


class MissingArtifacts(VortexLabError):
    """A report was requested for a directory without run outputs."""
