"""Exception hierarchy shared by every module of the package."""


class SovBaxterError(Exception):
    """Base class for all errors raised by this package."""


class DuplicateNode(SovBaxterError):
    pass


class IllConditioned(SovBaxterError):
    pass


class DegenerateLeading(SovBaxterError):
    pass


class Singular(SovBaxterError):
    pass


class NoConvergence(SovBaxterError):
    pass


class SingularBoundary(SovBaxterError):
    """A boundary matrix has ``sinh(zeta) == 0`` (or the equivalent XXX degeneracy)."""


class PoleAtZero(SovBaxterError):
    pass


class DegenerateSpectrum(SovBaxterError):
    """Eigenvalue functions could not be separated at any anchor point."""


class SingularC(SovBaxterError):
    """The linear system for the node values of Q is numerically singular.

    ``near_zero`` lists the ``(i, 2r)`` labels of Y predicates that vanish
    for the boundary point under study; empty when the failure is purely
    numerical.
    """

    def __init__(self, message, det=0j, near_zero=()):
        super().__init__(message)
        self.det = det
        self.near_zero = tuple(near_zero)


class RootOnPole(SovBaxterError):
    pass


class StepFailure(SovBaxterError):
    pass


class ConfigError(SovBaxterError):
    pass
