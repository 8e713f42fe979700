"""The Petri net model: places holding named token counts, named rules and
named transfer functions."""

from __future__ import annotations

import math
import re
from numbers import Real
from types import MappingProxyType
from typing import Iterator, Mapping, Sequence

from . import dsl
from .errors import (
    DuplicateFunction,
    DuplicatePlace,
    DuplicateRule,
    InvalidName,
    NegativeInitialCount,
    UnknownPlaceOrToken,
    UnresolvedFunction,
)
from .rules import (
    OUROBOROS,
    OUROBOROS_TOKEN,
    FunctionRule,
    Rule,
    TransferFunction,
    TransitionArc,
    check_name,
    conditions_of,
)


class Place:
    """A named token store. ``attributes`` maps token name to count."""

    def __init__(self, name: str, tokens: Mapping[str, float], infinite: bool = False):
        self.name = name
        self.attributes: dict[str, float] = dict(tokens)
        self.infinite = infinite

    def __repr__(self) -> str:
        return f"Place({self.name!r}, {self.attributes!r})"


class PlaceView(Mapping):
    """Read-only copy of one place, as handed to transfer functions.

    Supports both ``view['tok']`` and ``view.attributes['tok']``.
    """

    __slots__ = ("name", "attributes", "infinite")

    def __init__(self, place: Place):
        self.name = place.name
        self.attributes = MappingProxyType(dict(place.attributes))
        self.infinite = place.infinite

    def __getitem__(self, token: str) -> float:
        return self.attributes[token]

    def __iter__(self) -> Iterator[str]:
        return iter(self.attributes)

    def __len__(self) -> int:
        return len(self.attributes)

    def __repr__(self) -> str:
        return f"PlaceView({self.name!r}, {dict(self.attributes)!r})"


Snapshot = Mapping[str, PlaceView]


def _real(value: object) -> bool:
    return isinstance(value, Real) and not isinstance(value, bool)


class PetriNet:
    """A time-stepped Petri net.

    A fresh net already holds the infinite ``ouroboros`` place with token
    ``U``: an unlimited source and a bottomless sink. Simulating twice
    continues from where the previous run stopped.
    """

    def __init__(self):
        self.places: dict[str, Place] = {
            OUROBOROS: Place(OUROBOROS, {OUROBOROS_TOKEN: math.inf}, infinite=True)
        }
        self.rules: dict[str, Rule] = {}
        self.functions: dict[str, TransferFunction] = {}
        self.step_index = 0
        self.clock = 0.0
        self.history: list[tuple[float, Snapshot]] = []

    def __repr__(self) -> str:
        return (f"<PetriNet places={len(self.places) - 1} rules={len(self.rules)} "
                f"step={self.step_index} clock={self.clock}>")

    # -- places -------------------------------------------------------------

    def add_place(self, name: str, initial_tokens: Mapping[str, float] | None = None) -> None:
        check_name(name, "place name")
        if name == OUROBOROS:
            raise InvalidName(f"{OUROBOROS!r} is reserved for the infinite place")
        if name in self.places:
            raise DuplicatePlace(f"place {name!r} already exists")
        tokens = {}
        for token, count in (initial_tokens or {}).items():
            check_name(token, "token name")
            if not _real(count) or not math.isfinite(count):
                raise NegativeInitialCount(
                    f"{name}.{token}: initial count must be a finite number, got {count!r}")
            if count < 0:
                raise NegativeInitialCount(f"{name}.{token}: initial count {count} is negative")
            tokens[token] = float(count)
        self.places[name] = Place(name, tokens)

    add_places = add_place

    def user_places(self) -> list[Place]:
        return [p for p in self.places.values() if not p.infinite]

    def has_token(self, place: str, token: str) -> bool:
        p = self.places.get(place)
        return p is not None and token in p.attributes

    def tokens(self, place: str) -> dict[str, float]:
        return dict(self.places[place].attributes)

    def count(self, place: str, token: str) -> float:
        try:
            return self.places[place].attributes[token]
        except KeyError:
            raise UnknownPlaceOrToken(f"unknown place or token {place}.{token}") from None

    def snapshot(self) -> Snapshot:
        return MappingProxyType({name: PlaceView(p) for name, p in self.places.items()})

    # -- functions and rules ----------------------------------------------------

    def register_function(self, name: str, fn: TransferFunction) -> None:
        check_name(name, "function name")
        if name in self.functions:
            raise DuplicateFunction(f"function {name!r} already registered")
        if not callable(fn):
            raise TypeError(f"transfer function {name!r} is not callable")
        self.functions[name] = fn

    def _require(self, place: str, token: str, rule: str) -> None:
        if not self.has_token(place, token):
            raise UnknownPlaceOrToken(f"rule {rule!r} refers to unknown {place}.{token}")

    def add_rule(self, name: str, kind: str, specs: Sequence) -> Rule:
        """Parse ``specs`` for a rule of ``kind`` and register it as ``name``.

        For ``function`` rules the spec list holds arc strings, then a
        callable or the name of a registered function, then guard strings.
        Nothing is registered if any part fails to parse or validate.
        """
        check_name(name, "rule name")
        if name in self.rules:
            raise DuplicateRule(f"rule {name!r} already exists")
        rule = dsl.parse_rule_spec(kind, specs, name)
        for arc in rule.arcs:
            self._require(arc.source_place, arc.source_token, name)
            self._require(arc.dest_place, arc.dest_token, name)
        for cond in conditions_of(rule):
            self._require(cond.place, cond.token, name)

        if isinstance(rule, FunctionRule) and callable(rule.function):
            fn = rule.function
            key = re.sub(r"\W", "", getattr(fn, "__name__", "")) or "fn"
            if self.functions.get(key, fn) is not fn:
                key = f"{name}__{key}"
            if self.functions.get(key, fn) is not fn:
                raise DuplicateFunction(f"function {key!r} already registered")
            self.functions[key] = fn
            rule.function = key
        self.rules[name] = rule
        return rule

    add_rules = add_rule

    def add_rate_rule(self, name: str, arc: str | TransitionArc, rate: float) -> Rule:
        """Mass-action transfer: move ``rate * source`` along ``arc`` each step.

        This is the Petri-net reading of an ODE flux term ``rate * X``.
        """
        if not _real(rate) or not rate >= 0 or math.isinf(rate):
            raise ValueError(f"rate must be a finite number >= 0, got {rate!r}")
        if isinstance(arc, str):
            arc = dsl.parse_arc(arc)
        from .expressions import ExpressionFunction

        fname = f"{name}_rate"
        self.register_function(
            fname, ExpressionFunction(f"{rate!r} * {arc.source_place}.{arc.source_token}"))
        try:
            return self.add_rule(
                name, "function",
                [str(arc), fname, f"{arc.source_place}.{arc.source_token} > 0"])
        except Exception:
            del self.functions[fname]
            raise

    def resolve(self, rule: FunctionRule) -> TransferFunction:
        try:
            return self.functions[rule.function]
        except KeyError:
            raise UnresolvedFunction(
                f"rule {rule.name!r} uses unregistered function {rule.function!r}") from None

    def check_ready(self) -> None:
        """Raise ``UnresolvedFunction`` if any function rule is dangling."""
        for rule in self.rules.values():
            if isinstance(rule, FunctionRule):
                self.resolve(rule)

    # -- simulation ---------------------------------------------------------------

    def simulate(self, length: float, timestep: float = 1, report_frequency: int = 1):
        """Run and keep every ``report_frequency``-th state; returns records."""
        from . import engine

        return engine.simulate(self, length, timestep, report_frequency)

    def simulate_stream(self, length: float, timestep: float = 1):
        """Generator of ``(clock, snapshot)``, one per step, nothing retained."""
        from . import engine

        return engine.simulate_stream(self, length, timestep)

    simulate_yield = simulate_stream

    def report_tokens(self, history=None):
        """Records for ``history`` (default: the last stored ``simulate`` run)."""
        from .reporting import report_tokens

        return report_tokens(self.history if history is None else history)


def new_net() -> PetriNet:
    return PetriNet()
