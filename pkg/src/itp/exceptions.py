"""Exception hierarchy for the interval transportation toolkit."""


class ItpError(Exception):
    """Base class for all errors raised by :mod:`itp`."""


class DimensionMismatch(ItpError, ValueError):
    pass


class InvalidInterval(ItpError, ValueError):
    pass


class NegativeBound(ItpError, ValueError):
    pass


class NumericalFailure(ItpError, ArithmeticError):
    """Float simplex lost accuracy; retry with ``arithmetic="rational"``."""


class NotWeaklyFeasible(ItpError):
    pass


class CostsNotFixed(ItpError):
    pass


class RhsNotFixed(ItpError):
    pass


class InfeasibleScenario(ItpError):
    pass


class TooManyFreeVariables(ItpError):
    pass


class InstanceTooLarge(ItpError):
    pass


class NoIncumbent(ItpError):
    pass


class InvalidParams(ItpError, ValueError):
    pass


class ParseError(ItpError, ValueError):
    """Malformed instance or solution file.

    ``kind`` names the underlying problem (``"MissingField"``,
    ``"InvalidInterval"``, ...) and ``field`` the offending JSON path.
    """

    def __init__(self, message, kind="Malformed", field=None, line=None):
        self.kind = kind
        self.field = field
        self.line = line
        where = []
        if field is not None:
            where.append(f"field {field!r}")
        if line is not None:
            where.append(f"line {line}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(f"{kind}: {message}{suffix}")
