"""Exception hierarchy shared by all modules."""


class AccyError(Exception):
    """Base class for every error raised by this package."""


class ZeroPoint(AccyError):
    pass


class OffVariety(AccyError):
    pass


class InsufficientSamples(AccyError):
    pass


class NonpositiveMagnitude(AccyError):
    pass


class DegenerateFit(AccyError):
    pass


class NewtonDiverged(AccyError):
    pass


class SingularJacobianMinor(AccyError):
    pass


class RankDeficient(AccyError):
    pass


class StepUnderflow(AccyError):
    pass


class NotPositiveDefinite(AccyError):
    pass


class GridTooCoarse(AccyError):
    pass


class NonpositiveT(AccyError):
    pass


class FrameDegenerate(AccyError):
    pass


class InsideCompactCore(AccyError):
    """Requested radius lies below twice the projection's inner cutoff."""


class BadDimension(AccyError):
    pass


class UnsortedSpectrum(AccyError):
    pass


class CutoffExceeded(AccyError):
    pass


class HypothesisViolated(AccyError):
    pass


class BadInitialRate(AccyError):
    pass


class Resonant(AccyError):
    pass


class EmptyPartition(AccyError):
    pass


class EmptyFlag(EmptyPartition):
    """Single-part partition: the parabolic is the whole group."""


class BadRank(AccyError):
    pass


class UnknownSubcommand(AccyError):
    pass


class InvalidOption(AccyError):
    pass
