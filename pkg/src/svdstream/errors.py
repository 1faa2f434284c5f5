"""Exception hierarchy shared by every module of the package."""


class SvdStreamError(Exception):
    """Base class for all errors raised by svdstream."""


class NonFinite(SvdStreamError, ValueError):
    pass


class NonSymmetric(SvdStreamError, ValueError):
    pass


class NonSquare(SvdStreamError, ValueError):
    pass


class DimensionMismatch(SvdStreamError, ValueError):
    pass


class SingularInput(SvdStreamError, ValueError):
    pass


class EmptyInput(SvdStreamError, ValueError):
    pass


class InvalidOrder(SvdStreamError, ValueError):
    pass


class DuplicateNode(SvdStreamError, ValueError):
    pass


class UnsupportedSize(SvdStreamError, ValueError):
    pass


class ParseError(SvdStreamError, ValueError):
    pass


class ZeroMatrix(SvdStreamError, ArithmeticError):
    pass


class ZeroColumn(SvdStreamError, ArithmeticError):
    pass


class PoleHit(SvdStreamError, ArithmeticError):
    pass


class PoleCollision(SvdStreamError, ArithmeticError):
    """A source/target pair of a Cauchy kernel coincides to machine spacing."""

    def __init__(self, i, j, msg=None):
        self.i = i
        self.j = j
        super().__init__(msg or f"pole collision between node {i} and pole {j}")


class NoConvergence(SvdStreamError, ArithmeticError):
    """The secular root finder failed to converge for one root."""

    def __init__(self, index, bracket, msg=None):
        self.index = index
        self.bracket = bracket
        super().__init__(
            msg or f"secular root {index} did not converge in bracket {bracket}")


class NegativeEigenvalue(UserWarning):
    """An updated eigenvalue of A A^T came out clearly negative and was clamped."""
