"""Exception hierarchy.

Everything raised on purpose by the library derives from ``PetriNetError``
so callers (the CLI in particular) can catch one type.
"""

from __future__ import annotations


class PetriNetError(Exception):
    """Base class for all library errors."""


# -- model construction -------------------------------------------------------


class ModelError(PetriNetError):
    pass


class InvalidName(ModelError):
    pass


class DuplicatePlace(ModelError):
    pass


class DuplicateRule(ModelError):
    pass


class DuplicateFunction(ModelError):
    pass


class NegativeInitialCount(ModelError):
    pass


class UnknownKind(ModelError):
    pass


class UnknownPlaceOrToken(ModelError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its message otherwise
        return Exception.__str__(self)


class UnresolvedFunction(ModelError):
    pass


# -- text parsing -------------------------------------------------------------


class ParseError(PetriNetError):
    """Malformed rule, condition or expression text.

    ``position`` is the byte offset into ``text`` where the problem was found.
    """

    def __init__(self, message: str, text: str = "", position: int = 0):
        self.message = message
        self.text = text
        self.position = position
        super().__init__(f"{message} (at offset {position})")


class ArityError(ParseError):
    pass


class UnknownOperator(ParseError):
    pass


# -- evaluation and simulation ------------------------------------------------


class DivisionByZero(PetriNetError, ZeroDivisionError):
    pass


class ConfigError(PetriNetError):
    pass


class SimulationError(PetriNetError):
    """A rule failed while computing its transfer amount.

    Carries the offending rule name and the 1-based step index.
    """

    def __init__(self, message: str, rule: str | None = None, step: int | None = None):
        self.rule = rule
        self.step = step
        where = []
        if rule is not None:
            where.append(f"rule {rule!r}")
        if step is not None:
            where.append(f"step {step}")
        suffix = f" [{', '.join(where)}]" if where else ""
        super().__init__(f"{message}{suffix}")


class NegativeTransfer(SimulationError):
    pass


class NonFiniteTransfer(SimulationError):
    pass


# -- reporting and model files -----------------------------------------------


class EmptyHistory(PetriNetError):
    pass


class DocumentSyntaxError(PetriNetError):
    """Model document could not be read or does not match the schema."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        if line is not None:
            loc = f"line {line}" + (f", column {column}" if column is not None else "")
            super().__init__(f"{loc}: {message}")
        else:
            super().__init__(message)
