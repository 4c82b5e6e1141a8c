"""Exception hierarchy for the DFS gate simulator."""


class DfsGatesError(Exception):
    """Base class for all errors raised by this package."""


class NonHermitianInput(DfsGatesError, ValueError):
    pass


class DimensionMismatch(DfsGatesError, ValueError):
    pass


class SiteOutOfRange(DfsGatesError, ValueError):
    pass


class NotDecoherenceFree(DfsGatesError):
    pass


class LeakageExceeded(DfsGatesError):
    pass


class StateNotCyclic(DfsGatesError):
    pass


class DegenerateGeometricPhase(DfsGatesError):
    pass


class NotUnitary(DfsGatesError, ValueError):
    pass


class StepTooLarge(DfsGatesError, ValueError):
    pass


class StateInvalid(DfsGatesError, ValueError):
    pass
