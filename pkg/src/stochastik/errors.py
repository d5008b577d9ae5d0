"""Exception hierarchy.

Everything raised on bad mathematical input derives from :class:`DomainError`;
the CLI maps that family to exit status 1 and :class:`UsageError` to 2.
"""


class StochastikError(Exception):
    """Base class for all package errors."""


class UsageError(StochastikError):
    """Bad invocation: missing file, malformed spec, unknown option value."""


class DomainError(StochastikError, ValueError):
    """Input violates a mathematical precondition."""


# chain_core
class NegativeEntry(DomainError):
    def __init__(self, row, col, value):
        self.row, self.col, self.value = row, col, value
        super().__init__(f"negative or >1 entry {value} at ({row}, {col})")


class RowSumNotOne(DomainError):
    def __init__(self, row, deviation):
        self.row, self.deviation = row, deviation
        super().__init__(f"row {row} sums to 1{deviation:+.3g}")


class DimensionMismatch(DomainError):
    pass


class NoReturnPath(DomainError):
    pass


# absorbing / stationary / linear algebra
class NotAbsorbing(DomainError):
    pass


class SingularMatrix(DomainError):
    pass


class NotIrreducible(DomainError):
    pass


class DegenerateNullSpace(DomainError):
    pass


class ZeroMass(DomainError):
    pass


class NotReversible(DomainError):
    pass


class ConvergenceError(DomainError):
    pass


# distributions
class NonPositiveRate(DomainError):
    pass


# mcmc
class EmptyProposalSet(DomainError):
    pass


class BadSite(DomainError):
    pass


class UniformConfig(DomainError):
    pass


class BadDistanceMatrix(DomainError):
    pass


# poisson
class BadInterval(DomainError):
    pass


class HorizonMismatch(DomainError):
    pass


class Collision(DomainError):
    pass


# jump processes
class BadDiagonal(DomainError):
    pass


class NegativeRate(DomainError):
    pass


class RowSumNotZero(DomainError):
    def __init__(self, row, deviation):
        self.row, self.deviation = row, deviation
        super().__init__(f"generator row {row} sums to {deviation:.3g}")


class ToleranceUnachievable(DomainError):
    pass


class DivergentNormalizer(DomainError):
    pass


# queueing
class StabilityError(DomainError):
    pass


class CapTooSmall(DomainError):
    pass


class InsufficientData(DomainError):
    pass


# model zoo
class UnknownModel(UsageError, KeyError):
    def __str__(self):
        return Exception.__str__(self)
