class CurvedTwoBodyError(Exception):
    """Root of every error raised by the package."""


class ValidationError(CurvedTwoBodyError, ValueError):
    """A precondition of an operation is violated."""


class DomainError(ValidationError):
    """The separation q lies outside (or too close to the end of) its domain."""


class AttractivityViolation(ValidationError):

    def __init__(self, q: float):
        self.q = q
        super().__init__(f"Potential is not attractive at q={q!r}: U'(q) <= 0.")


class UnequalMasses(ValidationError):
    """An equal-mass family was requested for mu != 1."""


class ChartDomainError(ValidationError):
    """A leaf point lies outside the domain of the requested chart."""


class ConfigError(ValidationError):
    """A configuration file or override is malformed."""


class NumericalError(CurvedTwoBodyError, ArithmeticError):
    """A numerical procedure failed on valid input."""


class SingularityApproach(NumericalError):

    def __init__(self, t: float, q: float):
        self.t = t
        self.q = q
        super().__init__(f"Trajectory left the safety bounds at t={t!r} (q={q!r}).")


class StepFailure(NumericalError):
    """The adaptive step size underflowed."""


class ChartBreakdown(NumericalError):

    def __init__(self, t: float, message: str):
        self.t = t
        super().__init__(f"Euler chart breaks down at t={t!r}: {message}")


class ResonantLinearPart(NumericalError):
    """The two linear frequencies coincide (1:1 resonance)."""


class SmallDenominator(NumericalError):

    def __init__(self, k1: int, k2: int, value: float):
        self.k1 = k1
        self.k2 = k2
        super().__init__(
            f"Small denominator {k1}*alpha1 + {k2}*alpha2 = {value!r}."
        )


class NonEllipticEquilibrium(NumericalError):
    """The linearization at the equilibrium is not elliptic."""


class NoSolution(CurvedTwoBodyError):
    """A well-posed query that admits no relative equilibrium."""
