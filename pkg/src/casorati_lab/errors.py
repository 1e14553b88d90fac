"""Exception hierarchy shared by every module of the package."""


class CasoratiLabError(Exception):
    """Base class for all errors raised by casorati_lab."""


# expression layer
class SingularPoint(CasoratiLabError, ArithmeticError):
    pass


class EvalOverflow(CasoratiLabError, OverflowError):
    pass


class Unsupported(CasoratiLabError, NotImplementedError):
    pass


class ZeroScale(CasoratiLabError, ValueError):
    pass


class ParseError(CasoratiLabError, ValueError):
    def __init__(self, message, line=1, column=1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


# roots
class BoundaryContamination(CasoratiLabError):
    pass


class QuadratureDivergence(CasoratiLabError):
    pass


class ClusterUnresolved(CasoratiLabError):
    def __init__(self, message, cell=None):
        super().__init__(message)
        self.cell = cell


class UnknownFunction(CasoratiLabError, KeyError):
    pass


# nevanlinna
class DivisorTooSmall(CasoratiLabError, ValueError):
    pass


class CommonZeroSuspected(CasoratiLabError):
    pass


class GridTooSmall(CasoratiLabError, ValueError):
    pass


# casorati
class TooLarge(CasoratiLabError, ValueError):
    pass


class BadScale(CasoratiLabError, ValueError):
    pass


# hyperplanes
class DimensionMismatch(CasoratiLabError, ValueError):
    pass


class NotPrime(CasoratiLabError, ValueError):
    pass


class CoverageInsufficient(CasoratiLabError, ValueError):
    pass


class SampleDegeneracy(CasoratiLabError):
    pass


class UnsolvableConstants(CasoratiLabError):
    pass


# verify
class NonMonotoneInput(CasoratiLabError, ValueError):
    pass


class DependentCoordinates(CasoratiLabError):
    pass


class CoefficientDegeneracy(CasoratiLabError):
    pass


class SharingViolated(CasoratiLabError):
    def __init__(self, message, witness=None, condition=None):
        super().__init__(message)
        self.witness = witness
        self.condition = condition


class UnknownExample(CasoratiLabError, KeyError):
    pass
