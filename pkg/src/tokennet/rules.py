"""Transition arcs, guard conditions and the five rule kinds."""

from __future__ import annotations

import operator
import re
from dataclasses import dataclass, field
from typing import Callable, ClassVar, Mapping, Union

from .errors import InvalidName

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

OUROBOROS = "ouroboros"
OUROBOROS_TOKEN = "U"

COMPARATORS: dict[str, Callable[[float, float], bool]] = {
    "==": operator.eq,
    "!=": operator.ne,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}

KINDS = ("step", "ratio", "delay", "incubate", "function")


def check_name(name: object, what: str = "name") -> str:
    if not isinstance(name, str) or not NAME_RE.match(name):
        raise InvalidName(
            f"invalid {what} {name!r}: expected letters, digits and underscores, "
            "not starting with a digit"
        )
    return name


def fmt_number(x: float) -> str:
    """Shortest round-trip decimal; integral values drop the ``.0``."""
    x = float(x)
    if x.is_integer() and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


@dataclass(frozen=True)
class TransitionArc:
    source_place: str
    source_token: str
    dest_place: str
    dest_token: str

    @property
    def source(self) -> tuple[str, str]:
        return (self.source_place, self.source_token)

    @property
    def dest(self) -> tuple[str, str]:
        return (self.dest_place, self.dest_token)

    def __str__(self) -> str:
        return (
            f"{self.source_place}.{self.source_token} -> "
            f"{self.dest_place}.{self.dest_token}"
        )


@dataclass(frozen=True)
class Condition:
    place: str
    token: str
    operator: str
    threshold: float

    def test(self, count: float) -> bool:
        return COMPARATORS[self.operator](count, self.threshold)

    def __str__(self) -> str:
        return f"{self.place}.{self.token} {self.operator} {fmt_number(self.threshold)}"


# -- per-arc payloads ---------------------------------------------------------


@dataclass(frozen=True)
class StepArc:
    arc: TransitionArc
    amount: float


@dataclass(frozen=True)
class RatioArc:
    arc: TransitionArc
    ratio: float
    stop: Condition
    flush_target: float


@dataclass(frozen=True)
class DelayArc:
    arc: TransitionArc
    amount: float
    interval: int


# -- rules --------------------------------------------------------------------


@dataclass
class StepRule:
    """Moves a fixed amount along each arc on every step."""

    kind: ClassVar[str] = "step"
    name: str
    entries: tuple[StepArc, ...]

    @property
    def arcs(self) -> tuple[TransitionArc, ...]:
        return tuple(e.arc for e in self.entries)

    def specs(self) -> list:
        return [f"{e.arc}; {fmt_number(e.amount)}" for e in self.entries]


@dataclass
class RatioRule:
    """Moves a fraction of the source each step until the stop condition holds,
    then drives the source down to ``flush_target``."""

    kind: ClassVar[str] = "ratio"
    name: str
    entries: tuple[RatioArc, ...]

    @property
    def arcs(self) -> tuple[TransitionArc, ...]:
        return tuple(e.arc for e in self.entries)

    def specs(self) -> list:
        return [
            f"{e.arc}; {fmt_number(e.ratio)}; {e.stop}; {fmt_number(e.flush_target)}"
            for e in self.entries
        ]


@dataclass
class DelayRule:
    kind: ClassVar[str] = "delay"
    name: str
    entries: tuple[DelayArc, ...]

    @property
    def arcs(self) -> tuple[TransitionArc, ...]:
        return tuple(e.arc for e in self.entries)

    def specs(self) -> list:
        return [f"{e.arc}; {fmt_number(e.amount)}; {e.interval}" for e in self.entries]


@dataclass
class IncubateRule:
    """Waits for ``timer`` consecutive guard-holding steps, then empties the
    source of every arc into its destination."""

    kind: ClassVar[str] = "incubate"
    name: str
    timer: int
    arcs: tuple[TransitionArc, ...]
    guards: tuple[Condition, ...]
    elapsed: int = field(default=0, compare=False)

    def specs(self) -> list:
        guards = "; ".join(str(g) for g in self.guards)
        return [f"{self.timer}; {arc}; {guards}" for arc in self.arcs]


# A transfer function receives the read-only place mapping and returns the
# amount to move along each arc of its rule.
TransferFunction = Callable[[Mapping[str, object]], float]


@dataclass
class FunctionRule:
    kind: ClassVar[str] = "function"
    name: str
    function: Union[str, TransferFunction]
    arcs: tuple[TransitionArc, ...]
    guards: tuple[Condition, ...]

    def specs(self) -> list:
        return [str(a) for a in self.arcs] + [self.function] + [str(g) for g in self.guards]


Rule = Union[StepRule, RatioRule, DelayRule, IncubateRule, FunctionRule]


def conditions_of(rule: Rule) -> tuple[Condition, ...]:
    if isinstance(rule, RatioRule):
        return tuple(e.stop for e in rule.entries)
    if isinstance(rule, (IncubateRule, FunctionRule)):
        return rule.guards
    return ()
