"""Exception hierarchy shared by all modules."""


class QuantDimError(Exception):
    """Base class for all errors raised by quantdim."""


class InvalidSystem(QuantDimError, ValueError):
    """The Markov system violates a standing assumption."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"invalid Markov system: {lines}")


class Reducible(QuantDimError):
    """The transition matrix is not irreducible."""


class NonConvergence(QuantDimError):
    """An iterative method exhausted its step budget."""


class BudgetExceeded(QuantDimError):
    """A requested enumeration would exceed the configured budget."""

    def __init__(self, message, estimate=None, budget=None):
        self.estimate = estimate
        self.budget = budget
        super().__init__(message)


class InadmissibleWord(QuantDimError, ValueError):
    """A symbol string contains a transition outside the edge set."""


class InvalidGeometry(QuantDimError, ValueError):
    """A layout cannot realize the separation condition."""


class InvalidFrostman(QuantDimError, ValueError):
    """Frostman constants are missing or non-positive."""


class DimensionNonPositive(QuantDimError, ValueError):
    pass


class LengthMismatch(QuantDimError, ValueError):
    pass
