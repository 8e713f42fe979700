"""Parsers for the textual rule language.

Spec strings have ``;``-separated fields, one transition arc per string::

    step      "src.tok -> dst.tok; amount"
    ratio     "src.tok -> dst.tok; ratio; place.tok < 1; flush_target"
    delay     "src.tok -> dst.tok; amount; interval"
    incubate  "timer; src.tok -> dst.tok; guard [; guard ...]"
    function  ["src.tok -> dst.tok", ..., fn_or_name, "guard", ...]

Whitespace, newlines and backslashes between tokens are ignored.
"""

from __future__ import annotations

import math
from typing import Callable, Mapping, Sequence

from .errors import ArityError, ParseError, UnknownKind, UnknownOperator, UnknownPlaceOrToken
from .lexer import Token, TokenStream, fail, tokenize
from .rules import (
    COMPARATORS,
    KINDS,
    NAME_RE,
    Condition,
    DelayArc,
    DelayRule,
    FunctionRule,
    IncubateRule,
    RatioArc,
    RatioRule,
    Rule,
    StepArc,
    StepRule,
    TransitionArc,
)


def lookup(snapshot: Mapping, place: str, token: str) -> float:
    """Read one token count out of a snapshot (or any nested mapping)."""
    try:
        return snapshot[place][token]
    except KeyError:
        raise UnknownPlaceOrToken(f"unknown place or token {place}.{token}") from None


# -- field-level grammar ------------------------------------------------------


def _ref(ts: TokenStream) -> tuple[str, str]:
    place = ts.expect("name", None, "a place name").value
    ts.expect("punct", ".", "'.' between place and token")
    token = ts.expect("name", None, "a token name").value
    return place, token


def _arc(ts: TokenStream) -> TransitionArc:
    src = _ref(ts)
    ts.expect("arrow", None, "'->'")
    dst = _ref(ts)
    return TransitionArc(*src, *dst)


def _number(ts: TokenStream) -> float:
    sign = 1.0
    if ts.at("op", "-") or ts.at("op", "+"):
        sign = -1.0 if ts.next().value == "-" else 1.0
    tok = ts.expect("num", None, "a number")
    return sign * float(tok.value)


def _condition(ts: TokenStream) -> Condition:
    place, token = _ref(ts)
    tok = ts.peek()
    if tok.kind != "cmp":
        ts.error(f"expected a comparison operator, found {tok.value or 'end of input'!r}", tok)
    if tok.value not in COMPARATORS:
        ts.error(f"unknown operator {tok.value!r}", tok, UnknownOperator)
    ts.next()
    return Condition(place, token, tok.value, _number(ts))


def _nonneg(ts: TokenStream, what: str) -> float:
    tok = ts.peek()
    x = _number(ts)
    if not x >= 0 or math.isinf(x):
        ts.error(f"{what} must be a finite number >= 0, got {x}", tok)
    return x


def _positive_int(ts: TokenStream, what: str) -> int:
    tok = ts.peek()
    if tok.kind != "num" or not tok.value.isdigit() or int(tok.value) < 1:
        ts.error(f"{what} must be a positive integer, found {tok.value or 'end of input'!r}", tok)
    ts.next()
    return int(tok.value)


def _whole(text: str, parse: Callable[[TokenStream], object]):
    ts = TokenStream(text, tokenize(text))
    result = parse(ts)
    ts.expect_end()
    return result


def parse_arc(text: str) -> TransitionArc:
    """Parse ``"place.token -> place.token"``."""
    return _whole(text, _arc)


def parse_condition(text: str) -> Condition:
    """Parse ``"place.token OP number"`` with OP one of ``== != < <= > >=``."""
    return _whole(text, _condition)


# -- whole spec strings -------------------------------------------------------


def _fields(text: str) -> list[TokenStream]:
    """Split a spec string on ``;`` into one token stream per field."""
    tokens = tokenize(text)
    fields, current = [], []
    for tok in tokens:
        if tok.kind == "end" or (tok.kind == "punct" and tok.value == ";"):
            current.append(Token("end", "", tok.pos))
            fields.append(TokenStream(text, current))
            current = []
        else:
            current.append(tok)
    return fields


def _field(stream: TokenStream, parse, *args):
    result = parse(stream, *args)
    stream.expect_end()
    return result


# kind -> (field layout, field count; incubate takes at least that many)
_SHAPES = {
    "step": ("ARC; amount", 2),
    "ratio": ("ARC; ratio; CONDITION; flush_target", 4),
    "delay": ("ARC; amount; interval", 3),
    "incubate": ("timer; ARC; CONDITION [; CONDITION ...]", 3),
}


def _arity(kind: str, text: str, got: int, fields: list[TokenStream]) -> None:
    shape, expected = _SHAPES[kind]
    ok = got >= expected if kind == "incubate" else got == expected
    if not ok:
        at = fields[min(expected, got) - 1].peek().pos if fields else 0
        fail(text, at, f"{kind} spec takes fields '{shape}', got {got} field(s)", ArityError)


def _parse_step(text: str) -> StepArc:
    f = _fields(text)
    _arity("step", text, len(f), f)
    return StepArc(_field(f[0], _arc), _field(f[1], _nonneg, "amount"))


def _parse_ratio(text: str) -> RatioArc:
    f = _fields(text)
    _arity("ratio", text, len(f), f)
    arc = _field(f[0], _arc)
    tok = f[1].peek()
    ratio = _field(f[1], _nonneg, "ratio")
    if ratio > 1:
        fail(text, tok.pos, f"ratio must lie in [0, 1], got {ratio}")
    stop = _field(f[2], _condition)
    return RatioArc(arc, ratio, stop, _field(f[3], _nonneg, "flush target"))


def _parse_delay(text: str) -> DelayArc:
    f = _fields(text)
    _arity("delay", text, len(f), f)
    return DelayArc(
        _field(f[0], _arc),
        _field(f[1], _nonneg, "amount"),
        _field(f[2], _positive_int, "interval"),
    )


def _parse_incubate(text: str) -> tuple[int, TransitionArc, tuple[Condition, ...]]:
    f = _fields(text)
    _arity("incubate", text, len(f), f)
    timer = _field(f[0], _positive_int, "timer")
    arc = _field(f[1], _arc)
    guards = tuple(_field(s, _condition) for s in f[2:])
    return timer, arc, guards


def _spec_list(specs) -> list:
    if isinstance(specs, str):
        return [specs]
    specs = list(specs)
    if not specs:
        raise ArityError("a rule needs at least one spec", "", 0)
    return specs


def _parse_function_specs(name: str, specs: list) -> FunctionRule:
    arcs: list[TransitionArc] = []
    guards: list[Condition] = []
    function = None
    for item in specs:
        if callable(item) or (isinstance(item, str) and NAME_RE.match(item.strip())):
            if function is not None:
                raise ArityError("function rule takes exactly one function", str(item), 0)
            if not arcs:
                raise ArityError("function rule lists its arcs before the function", str(item), 0)
            function = item.strip() if isinstance(item, str) else item
        elif not isinstance(item, str):
            raise ParseError(f"expected a spec string or a callable, got {type(item).__name__}", "", 0)
        elif function is None:
            arcs.append(parse_arc(item))
        else:
            guards.append(parse_condition(item))
    if function is None:
        raise ArityError("function rule needs a function or function name", "", 0)
    if not guards:
        raise ArityError("function rule needs at least one guard condition", "", 0)
    return FunctionRule(name, function, tuple(arcs), tuple(guards))


def parse_rule_spec(kind: str, specs: Sequence, name: str = "") -> Rule:
    """Parse the spec list for one rule of the given kind.

    Returns a rule object; ``name`` is only carried through.
    """
    if kind not in KINDS:
        raise UnknownKind(f"unknown rule kind {kind!r}; expected one of {', '.join(KINDS)}")
    specs = _spec_list(specs)
    if kind == "function":
        return _parse_function_specs(name, specs)
    for s in specs:
        if not isinstance(s, str):
            raise ParseError(f"{kind} specs must be strings, got {type(s).__name__}", "", 0)
    if kind == "step":
        return StepRule(name, tuple(_parse_step(s) for s in specs))
    if kind == "ratio":
        return RatioRule(name, tuple(_parse_ratio(s) for s in specs))
    if kind == "delay":
        return DelayRule(name, tuple(_parse_delay(s) for s in specs))

    parsed = [_parse_incubate(s) for s in specs]
    timer, _, guards = parsed[0]
    for s, (t, _, g) in zip(specs[1:], parsed[1:]):
        # one elapsed counter drives every arc, so all strings must agree
        if t != timer or g != guards:
            raise ParseError("incubate specs of one rule must share timer and guards", s, 0)
    return IncubateRule(name, timer, tuple(p[1] for p in parsed), guards)


def eval_condition(cond: Condition, snapshot: Mapping) -> bool:
    return cond.test(lookup(snapshot, cond.place, cond.token))
