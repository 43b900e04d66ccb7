"""Exception and warning types raised across the package."""


class InvalidInputError(ValueError):
    """Input has the wrong shape, sign, or contains non-finite values."""


class SingularMatrixError(ArithmeticError):
    """Matrix is singular to working precision."""


class CircuitSingularError(SingularMatrixError):
    """The programmed conductance network has no unique operating point."""


class CircuitFault(RuntimeError):
    """A circuit stage misbehaved and strict mode turned it into an error."""


class SaturationWarning(RuntimeWarning):
    """One or more amplifier outputs hit the supply rail."""


class DivergenceError(ArithmeticError):
    """An iterative series stopped converging."""


class ConfigError(ValueError):
    """Configuration file is malformed or violates an invariant."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
