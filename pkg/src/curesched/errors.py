"""Exception types shared across the solver toolkit."""


class CureschedError(Exception):
    """Base class for all toolkit errors."""


class UnproduciblePair(CureschedError):
    """Residual demand remains but no admissible mold pair can cover it."""


class NoFeasiblePlacement(CureschedError):
    """A tuple cannot be placed on any compatible heater."""


class Infeasible(CureschedError):
    """No schedule exists within the given horizon."""


class AdapterUnavailable(CureschedError):
    """No external solver adapter is configured or its executable is missing."""


class AdapterFailure(CureschedError):
    """The external solver exited with an unexpected status."""


class SolutionParseError(CureschedError):
    """A solver solution file could not be parsed."""


class InfeasibleAssignment(CureschedError):
    """A variable assignment violates the model constraints."""

    def __init__(self, violations):
        self.violations = list(violations)
        preview = "; ".join(self.violations[:5])
        more = "" if len(self.violations) <= 5 else f" (+{len(self.violations) - 5} more)"
        super().__init__(f"assignment violates constraints: {preview}{more}")
