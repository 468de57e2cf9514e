"""Exception hierarchy.

Algebraic/input problems derive from ``BCError`` or ``PotentialError``;
numerical breakdowns derive from ``NumericalFailure`` so the CLI can map
them to a distinct exit code.
"""


class SpectralError(Exception):
    pass


class ConfigError(SpectralError):
    pass


# boundary conditions
class BCError(SpectralError):
    pass


class DegenerateBC(BCError):
    pass


class NotReducible(BCError):
    pass


class ViolatesRegularity(BCError):
    pass


# potential / conditions
class PotentialError(SpectralError):
    pass


class UndefinedCondition(PotentialError):
    pass


class ConditionViolated(SpectralError):
    pass


class KindMismatch(SpectralError):
    pass


class NormViolation(SpectralError):
    pass


# numerics
class NumericalFailure(SpectralError):
    pass


class QuadratureFailure(NumericalFailure):
    pass


class StiffnessFailure(NumericalFailure):
    pass


class BoundaryZero(NumericalFailure):
    pass


class NonConvergence(NumericalFailure):
    pass


class DegenerateEigenfunction(NumericalFailure):
    pass


class SingularFactorization(NumericalFailure):
    pass
