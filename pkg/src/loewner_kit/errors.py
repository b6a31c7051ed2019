"""Exception hierarchy for loewner-kit.

Every numerical failure mode raised by the toolkit derives from
:class:`LoewnerKitError`, so callers (and the CLI) can catch one base type.
"""


class LoewnerKitError(Exception):
    """Base class for all toolkit errors."""


class BoundaryEvaluation(LoewnerKitError):
    """Evaluation requested on or outside the declared domain boundary."""


class InvalidMap(LoewnerKitError):
    """Map construction violates an invariant (degenerate Moebius, etc.)."""


class NoConvergence(LoewnerKitError):
    """Newton iteration failed to converge within the iteration budget."""


class DerivativeVanishes(LoewnerKitError):
    """Newton iteration hit a point where the derivative is numerically zero."""


class Unstable(LoewnerKitError):
    """Extrapolation levels disagree beyond the requested tolerance."""


class Diverging(LoewnerKitError):
    """A sampled limit grows instead of settling (map outside expected class)."""


class QuadratureBudget(LoewnerKitError):
    """Adaptive quadrature exceeded the configured node limit."""


class FitResidual(LoewnerKitError):
    """Asymptotic-tail least squares misfits the sampled map."""


class RigidityViolation(LoewnerKitError):
    """A map with vanishing capacity functional is not the identity."""


class StepCollision(LoewnerKitError):
    """A trajectory point was absorbed by the hull at the driving point."""

    def __init__(self, message, time=None, index=None):
        super().__init__(message)
        self.time = time
        self.index = index


class SelfIntersection(LoewnerKitError):
    """Driving extraction detected a non-simple input curve."""


class LeftDomain(LoewnerKitError):
    """Disk ODE trajectory reached the unit circle mid-integration."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class PoleProximity(LoewnerKitError):
    """Field evaluation too close to its boundary pole."""


class ScheduleInvalid(LoewnerKitError):
    """Derivative schedule violates lambda(0) = 0 or monotonicity."""


class DomainEscape(LoewnerKitError):
    """Rescaled chain probe left the unit disk (inconsistent beta)."""


class RangeMismatch(LoewnerKitError):
    """Reparametrization target range is not contained in the profile range."""


class OracleFailure(LoewnerKitError):
    """Conformal-radius oracle failed (basepoint swallowed, no closed form)."""


class ParseError(LoewnerKitError):
    """Input file could not be parsed; message carries file and line."""


class MonotoneViolation(ParseError):
    """Driving CSV times are not strictly increasing."""


class EmptyFile(ParseError):
    """Input file contains no data rows."""
