"""Exception hierarchy shared by all funcint modules."""


class FuncIntError(Exception):
    """Base class for every error raised by funcint."""


# cardinal
class ZeroBase(FuncIntError):
    pass


class Unsupported(FuncIntError):
    pass


class ResidualLambda(FuncIntError):
    pass


# wick
class OddOrder(FuncIntError):
    pass


class CapExceeded(FuncIntError):
    pass


class DegreeMismatch(FuncIntError):
    pass


# kernelalg
class GridMismatch(FuncIntError):
    pass


class NotSelfAdjoint(FuncIntError):
    pass


class NotPositiveDefinite(FuncIntError):
    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class ConvergenceFailure(FuncIntError):
    pass


# engine
class DSLSyntaxError(FuncIntError):
    def __init__(self, message, line=1, column=1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class UnknownToken(DSLSyntaxError):
    pass


class NotGaussian(FuncIntError):
    pass


class MixedFlavor(FuncIntError):
    pass


class UnsupportedKernel(FuncIntError):
    pass


class AssumptionUnsatisfied(FuncIntError):
    pass


class MissingBinding(FuncIntError):
    pass


# oracle
class EnvelopeFailure(FuncIntError):
    pass
