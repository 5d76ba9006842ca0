"""Exception hierarchy.

Input problems subclass ``ValueError``; outcomes of a well-posed problem
(infeasible designs, solver trouble) subclass :class:`DesignError`.
"""


class InputError(ValueError):
    """Malformed or out-of-range input."""


class NegativeWeight(InputError):
    pass


class WeightsNotNormalized(InputError):
    pass


class DegreeBelowTwo(InputError):
    pass


class EpsilonOutOfRange(InputError):
    pass


class CrossoverOutOfRange(InputError):
    pass


class ParamOutOfRange(InputError):
    pass


class ZeroPolynomial(InputError):
    pass


class IndexSpaceMismatch(InputError):
    pass


class MalformedProgram(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class DesignError(Exception):
    """A valid problem without an acceptable solution."""


class Infeasible(DesignError):
    pass


class DEInfeasible(Infeasible):
    pass


class SourceIncompressible(Infeasible):
    pass


class CapNonpositive(Infeasible):
    pass


class SolverFailure(DesignError):
    pass
