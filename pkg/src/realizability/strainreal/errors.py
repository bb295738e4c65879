# src/realizability/strainreal/errors.py
"""
Exception taxonomy

HypothesisViolation subclasses mean the input does not satisfy a hypothesis of
the construction being attempted (exit code 2). NumericalFailure subclasses mean
the hypotheses hold but the numerics could not deliver a certified result
(exit code 1).
"""


class StrainRealError(Exception):
    """Base class for every error raised by the package"""

    exit_code = 1


class HypothesisViolation(StrainRealError):
    exit_code = 2


class NumericalFailure(StrainRealError):
    exit_code = 1


class InvalidInputError(HypothesisViolation):
    """Malformed or inadmissible input (bad matrix, non-periodic field, ...)"""


class StrainVanishesError(HypothesisViolation):
    pass


class DenominatorSignError(HypothesisViolation):
    """u_xx - u_yy changes sign on the requested disk; carries a radius advice"""

    def __init__(self, message: str, advised_radius: float):
        super().__init__(message)
        self.advised_radius = advised_radius


class DegenerateAverageError(HypothesisViolation):
    pass


class NonPositiveViscosityError(HypothesisViolation):
    def __init__(self, message: str, location: tuple):
        super().__init__(message)
        self.location = location


class LaminateIncompatibleError(HypothesisViolation):
    pass


class LaminateNotRealizableError(HypothesisViolation):
    pass


class PicardDivergenceError(NumericalFailure):
    pass


class NoAdmissibleSquareError(NumericalFailure):
    pass


class CharacteristicInversionError(NumericalFailure):
    pass


class RealizabilityNotEstablished(NumericalFailure):
    """Blow-up inside the region of interest. This is not a proof of non-realizability."""


class QuadratureToleranceError(NumericalFailure):
    pass


class ExpressionSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownIdentifierError(ExpressionSyntaxError):
    pass


class UsageError(Exception):
    """Bad command line, run-config file or preset name"""

    exit_code = 64
