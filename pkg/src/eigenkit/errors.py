"""Exception hierarchy.

Every error raised by eigenkit derives from EigenkitError so callers (and the
CLI exit-code mapping) can distinguish library failures from bugs.
"""


class EigenkitError(Exception):
    """Base class for all library errors."""


class ValidationError(EigenkitError):
    """Invalid argument or configuration (CLI exit code 2)."""


class ContextMismatch(ValidationError):
    """Operands belong to different p-adic contexts."""


class DivisionByZeroToPrecision(EigenkitError):
    """Divisor is indistinguishable from zero at its stored precision."""


class ZeroResidue(ValidationError):
    """Teichmueller lift requested for the zero residue class."""


class NotOneUnit(ValidationError):
    """Argument must satisfy v(x - 1) > 0."""


class ExponentNotIntegral(ValidationError):
    """Exponent of a one-unit power must lie in the Z_p part of the field."""


class OutsideConvergenceDomain(ValidationError):
    """Argument outside the convergence domain of log/exp."""


class NonUnitConstantTerm(ValidationError):
    """Newton polygon input must be normalized with a unit constant term."""


class AllCoefficientsZero(ValidationError):
    """Newton polygon of the zero series is undefined."""


class PrecisionExhausted(EigenkitError):
    """A computation ran out of certified digits (CLI exit code 3)."""


class NonUnitArgument(ValidationError):
    """Torus points must have unit coordinates."""


class NotWAnalytic(ValidationError):
    """Character is not analytic on the requested radius."""


class UnrepresentableExponent(ValidationError):
    """Required fractional valuation is not on the (1/e)Z grid."""


class NonUnitTorusPoint(NonUnitArgument):
    """Torus action requested at a non-unit point."""


class IndexOutOfRange(ValidationError):
    """Operator index outside 1..g."""


class NonIntegralPairing(ValidationError):
    """Theta operator needs a nonnegative integral coroot pairing."""


class TruncationTooSmall(EigenkitError):
    """Kernel dimension not yet stable at the requested truncation degree."""


class NotAnEigenvector(ValidationError):
    """Classicity filter input is not a joint delta eigenvector."""


class TailBoundMissing(ValidationError):
    """Compact operator lacks a tail bound beyond the stored truncation."""


class PrefixTooShort(EigenkitError):
    """Certified prefix of a Fredholm series is too short for the request."""


class SlopeOnBoundary(ValidationError):
    """Slope cut h hits a Newton slope and no side convention was given."""


class InsufficientPrecision(PrecisionExhausted):
    """Slope factorization could not be certified at working precision."""


class PrecisionLoss(PrecisionExhausted):
    """Projector defect exceeds the precision budget."""


class SpecializationOutsideDomain(ValidationError):
    """Family specialization point outside the closed unit polydisc."""


class RamifiedPoint(EigenkitError):
    """Eigenvalue is not a simple root; no family lift is claimed."""


class DivergentIteration(EigenkitError):
    """Newton iteration failed to contract."""


class NonCommutingInput(ValidationError):
    """Joint eigensystem extraction requires commuting operators."""


class NonSplitBlock(EigenkitError):
    """A joint block's characteristic series does not split over the base."""


class UnsupportedChart(ValidationError):
    """Unknown localization chart."""


class NonContracting(EigenkitError):
    """Cech splitting iteration failed to contract (norm bug indicator)."""


class NonInvertibleTransition(ValidationError):
    """Glueing transition matrix is not invertible with unit Gauss norm."""


class InternalInvariantViolation(EigenkitError):
    """An internal consistency check failed (CLI exit code 4)."""
