"""Time-step execution.

Each step works in two stages. First every rule computes its transfer
amounts from the same start-of-step snapshot (rules in registration order,
arcs in listed order). Then the plan is applied: withdrawals are taken in
plan order and clamped to whatever stock the source has left from its
start-of-step count, and deposits land after all withdrawals. Tokens
deposited during a step can therefore only be withdrawn on the next one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from numbers import Real
from typing import Iterator

from .dsl import eval_condition, lookup
from .errors import (
    ConfigError,
    NegativeTransfer,
    NonFiniteTransfer,
    PetriNetError,
    SimulationError,
)
from .net import PetriNet, Snapshot
from .reporting import SimulationRecord, report_tokens
from .rules import (
    DelayRule,
    FunctionRule,
    IncubateRule,
    RatioRule,
    StepRule,
    TransitionArc,
)


@dataclass(frozen=True)
class Transfer:
    rule: str
    arc: TransitionArc
    amount: float
    # ratio flush: when the source still holds ``basis``, leave it at exactly ``settle_to``
    settle_to: float | None = None
    basis: float | None = None


StepPlan = list[Transfer]


def step_count(length: float, timestep: float) -> int:
    q = length / timestep
    n = round(q)
    # absorb representation noise such as 0.3 / 0.1 == 2.9999999999999996
    if abs(q - n) <= 1e-9 * max(1.0, abs(q)):
        return max(int(n), 1)
    return math.ceil(q)


def _check_config(length, timestep, report_frequency=1) -> None:
    for label, value in (("length", length), ("timestep", timestep)):
        if not isinstance(value, Real) or isinstance(value, bool) or not (0 < value < math.inf):
            raise ConfigError(f"{label} must be a finite number > 0, got {value!r}")
    if (not isinstance(report_frequency, int) or isinstance(report_frequency, bool)
            or report_frequency < 1):
        raise ConfigError(f"report frequency must be a positive integer, got {report_frequency!r}")


def _function_amount(net: PetriNet, rule: FunctionRule, snapshot: Snapshot, step: int) -> float:
    fn = net.resolve(rule)
    try:
        amount = fn(snapshot)
    except PetriNetError as exc:
        raise SimulationError(f"transfer function failed: {exc}", rule.name, step) from exc
    except Exception as exc:
        raise SimulationError(
            f"transfer function raised {type(exc).__name__}: {exc}", rule.name, step) from exc
    if not isinstance(amount, Real) or isinstance(amount, bool):
        raise SimulationError(
            f"transfer function returned {type(amount).__name__}, expected a number",
            rule.name, step)
    if math.isnan(amount) or math.isinf(amount):
        raise NonFiniteTransfer(f"transfer function returned {amount}", rule.name, step)
    if amount < 0:
        raise NegativeTransfer(f"transfer function returned {amount}", rule.name, step)
    return float(amount)


def compute_step_plan(net: PetriNet, snapshot: Snapshot, step_index: int) -> StepPlan:
    """Transfer amounts for step ``step_index`` (1-based) from ``snapshot``.

    Advances incubate timers as a side effect.
    """
    plan: StepPlan = []
    for rule in net.rules.values():
        if isinstance(rule, StepRule):
            plan.extend(Transfer(rule.name, e.arc, e.amount) for e in rule.entries)
        elif isinstance(rule, DelayRule):
            plan.extend(
                Transfer(rule.name, e.arc, e.amount if step_index % e.interval == 0 else 0.0)
                for e in rule.entries)
        elif isinstance(rule, RatioRule):
            for e in rule.entries:
                count = lookup(snapshot, *e.arc.source)
                if eval_condition(e.stop, snapshot):
                    amount = max(count - e.flush_target, 0.0)
                    settle = e.flush_target if amount > 0 else None
                    plan.append(Transfer(rule.name, e.arc, amount, settle, count))
                else:
                    plan.append(Transfer(rule.name, e.arc, e.ratio * count))
        elif isinstance(rule, IncubateRule):
            fire = False
            if all(eval_condition(g, snapshot) for g in rule.guards):
                rule.elapsed += 1
                if rule.elapsed >= rule.timer:
                    fire = True
                    rule.elapsed = 0
            else:
                rule.elapsed = 0
            plan.extend(
                Transfer(rule.name, arc, lookup(snapshot, *arc.source) if fire else 0.0)
                for arc in rule.arcs)
        elif isinstance(rule, FunctionRule):
            if all(eval_condition(g, snapshot) for g in rule.guards):
                amount = _function_amount(net, rule, snapshot, step_index)
            else:
                amount = 0.0
            plan.extend(Transfer(rule.name, arc, amount) for arc in rule.arcs)
        else:  # pragma: no cover
            raise TypeError(f"unsupported rule {rule!r}")

    for t in plan:
        if not math.isfinite(t.amount):
            raise NonFiniteTransfer(f"amount {t.amount} on {t.arc}", t.rule, step_index)
    return plan


def apply_plan(net: PetriNet, plan: StepPlan) -> list[float]:
    """Move tokens per ``plan``; returns the amount actually moved per entry.

    No count goes negative. An exhausted store is left at exactly 0, the
    infinite place is never drawn down and swallows deposits.
    """
    places = net.places
    remaining: dict[tuple[str, str], float] = {}
    deposits: dict[tuple[str, str], list[float]] = {}
    moved_amounts = []

    for t in plan:
        src = places[t.arc.source_place]
        if src.infinite:
            moved = t.amount
        else:
            key = t.arc.source
            avail = remaining.get(key)
            if avail is None:
                avail = src.attributes[t.arc.source_token]
            moved = min(t.amount, avail)
            if moved >= avail:
                left = 0.0
            elif t.settle_to is not None and avail == t.basis:
                left = t.settle_to
            else:
                left = avail - moved
            remaining[key] = left
        moved_amounts.append(moved)
        if not places[t.arc.dest_place].infinite:
            deposits.setdefault(t.arc.dest, []).append(moved)

    for key in remaining.keys() | deposits.keys():
        place, token = key
        base = remaining.get(key, places[place].attributes[token])
        extra = deposits.get(key)
        # fsum is exactly rounded, so the result does not depend on rule order
        places[place].attributes[token] = math.fsum([base, *extra]) if extra else base
    return moved_amounts


def advance(net: PetriNet, timestep: float, start_clock: float, k: int) -> Snapshot:
    """Execute one step; returns the state after it."""
    index = net.step_index + 1
    plan = compute_step_plan(net, net.snapshot(), index)
    apply_plan(net, plan)
    net.step_index = index
    net.clock = start_clock + k * timestep
    return net.snapshot()


def _prepare(net: PetriNet, length, timestep, report_frequency=1) -> int:
    _check_config(length, timestep, report_frequency)
    net.check_ready()
    return step_count(length, timestep)


def simulate(net: PetriNet, length: float, timestep: float = 1,
             report_frequency: int = 1) -> list[SimulationRecord]:
    """Run ``ceil(length / timestep)`` steps, storing the initial state and the
    state after every ``report_frequency``-th step in ``net.history``."""
    n = _prepare(net, length, timestep, report_frequency)
    start = net.clock
    history = [(net.clock, net.snapshot())]
    for k in range(1, n + 1):
        snap = advance(net, timestep, start, k)
        if k % report_frequency == 0:
            history.append((net.clock, snap))
    net.history = history
    return report_tokens(history)


def _stream(net: PetriNet, n: int, timestep: float) -> Iterator[tuple[float, Snapshot]]:
    start = net.clock
    for k in range(1, n + 1):
        snap = advance(net, timestep, start, k)
        yield net.clock, snap


def simulate_stream(net: PetriNet, length: float,
                    timestep: float = 1) -> Iterator[tuple[float, Snapshot]]:
    """Yield ``(clock, snapshot)`` after each step.

    Arguments are validated immediately; steps run lazily as the iterator
    is consumed, so abandoning it leaves the net after the last yielded step.
    """
    n = _prepare(net, length, timestep)
    return _stream(net, n, timestep)


def stream_history(net: PetriNet, length: float, timestep: float = 1,
                   report_frequency: int = 1) -> Iterator[tuple[float, Snapshot]]:
    """Streaming counterpart of the stored history: the initial state, then
    every ``report_frequency``-th step."""
    n = _prepare(net, length, timestep, report_frequency)

    def gen():
        yield net.clock, net.snapshot()
        for k, item in enumerate(_stream(net, n, timestep), start=1):
            if k % report_frequency == 0:
                yield item

    return gen()
