"""Exception hierarchy shared by the lmthresh modules."""


class LmomError(ValueError):
    """Base class for every error raised by this package."""


class InsufficientSampleError(LmomError):
    pass


class DegenerateSampleError(LmomError):
    pass


class DomainError(LmomError):
    pass


class NonexistentMomentError(LmomError):
    pass


class InfeasibleFitError(LmomError):
    pass


class ConvergenceError(LmomError):
    pass


class GridError(LmomError):
    pass
