"""Exception taxonomy.

Data errors (bad input files, invalid complexes, inconsistent chains) map to
CLI exit code 1; numerical-regime errors (stiffness budget, adiabatic
threshold, weight ties) map to exit code 2.
"""


class HypercurrentError(Exception):
    """Base class for all package errors."""


class DataError(HypercurrentError):
    """Invalid input data: malformed files, broken invariants, bad references."""


class InvalidComplexError(DataError):
    pass


class InvalidSubcomplexError(DataError):
    pass


class NotACycleError(DataError):
    pass


class NotABoundaryError(DataError):
    pass


class UnknownExampleError(DataError):
    pass


class ProtocolError(DataError):
    pass


class NumericalError(HypercurrentError):
    """Numerical-regime failures: expected, meaningful outcomes of hard inputs."""


class StiffnessError(NumericalError):
    """Explicit integration exceeded its step budget."""


class AdiabaticThresholdError(NumericalError):
    """I - U(1,0) is numerically singular; the driving time is too short."""


class MinimalTieError(NumericalError):
    """Weight sums tie, so no unique minimal spanning tree / co-tree exists."""


class BadParameterError(NumericalError):
    """The protocol leaves the good-parameter region (neither E nor W injective)."""
