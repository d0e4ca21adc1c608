"""Exception types raised across odekit."""


class OdekitError(Exception):
    """Base class for every error raised by this package."""


class ParseError(OdekitError, ValueError):
    def __init__(self, message: str, offset: int, text: str = ""):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.text = text


class EvaluationError(OdekitError, ArithmeticError):
    """Evaluation left the domain of an expression or hit an unbound variable."""


class UnboundVariableError(EvaluationError, KeyError):
    def __init__(self, name: str):
        super().__init__(f"unbound variable {name!r}")
        self.name = name

    def __str__(self):
        return self.args[0]


class DomainError(EvaluationError):
    pass


class UnsupportedIntegral(OdekitError):
    """The integrand is outside the closed-form integration table."""


class RootFindingError(OdekitError):
    pass


class ImproperFractionError(OdekitError, ValueError):
    pass


class Unclassified(OdekitError):
    """No first-order method in the toolkit matches the equation."""


class NotExact(OdekitError):
    pass


class NotRiccati(OdekitError):
    pass


class BadParticular(OdekitError):
    """A supplied particular solution does not satisfy the equation."""


class ZeroSolutionRegion(OdekitError):
    pass


class VanishingKnownSolution(OdekitError):
    pass


class DependentBasis(OdekitError):
    pass


class UnsupportedForcing(OdekitError):
    pass


class UnsupportedProblem(OdekitError, ValueError):
    """Input lies outside what a solver accepts (e.g. Laplace IC away from 0)."""


class VerificationError(OdekitError):
    """A produced solution failed its independent residual check."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class NumericBlowup(OdekitError, FloatingPointError):
    def __init__(self, step: int, x: float, y: float):
        super().__init__(f"non-finite state at step {step} (x={x!r}, y={y!r})")
        self.step = step
        self.x = x
        self.y = y


class GridError(OdekitError, ValueError):
    """Requested abscissa is not on the trajectory grid, or the step count is invalid."""
