"""YAML model documents and the built-in models.

A document looks like::

    name: demo
    defaults: {length: 10, timestep: 1, report_frequency: 1}
    places:
      - name: a
        tokens: {t: 5}
      - name: b
        tokens: {t: 0}
    functions:
      - name: half
        expression: 0.5 * a.t
    rules:
      - name: move
        kind: step
        specs: ["a.t -> b.t; 1"]
      - name: drain
        kind: function
        function: half
        specs: ["a.t -> b.t", "a.t > 0"]

``defaults`` and ``functions`` are optional. Function rules list their arcs
and guard conditions in ``specs`` and name an expression function in
``function``. Rules are registered in file order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Optional

import yaml
from yaml.nodes import MappingNode, SequenceNode

from .errors import DocumentSyntaxError, ParseError, PetriNetError, UnknownPlaceOrToken, UnresolvedFunction
from .expressions import ExpressionFunction, references
from .net import PetriNet
from .rules import KINDS, fmt_number


@dataclass
class PlaceDecl:
    name: str
    tokens: dict[str, float]


@dataclass
class FunctionDecl:
    name: str
    expression: str


@dataclass
class RuleDecl:
    name: str
    kind: str
    specs: list[str]
    function: Optional[str] = None


@dataclass
class Defaults:
    length: Optional[float] = None
    timestep: Optional[float] = None
    report_frequency: Optional[int] = None


@dataclass
class ModelDocument:
    name: str
    places: list[PlaceDecl]
    rules: list[RuleDecl]
    functions: list[FunctionDecl] = field(default_factory=list)
    defaults: Defaults = field(default_factory=Defaults)


# -- reading ------------------------------------------------------------------


class _Locator:
    """Maps document paths like ('rules', 3, 'specs', 0) to line/column."""

    def __init__(self, text: str):
        try:
            self.root = yaml.compose(text)
        except yaml.YAMLError:
            self.root = None

    def __call__(self, *path) -> tuple[int | None, int | None]:
        node = self.root
        for key in path:
            if isinstance(node, MappingNode):
                node = next((v for k, v in node.value if k.value == key), None)
            elif isinstance(node, SequenceNode) and isinstance(key, int) and key < len(node.value):
                node = node.value[key]
            else:
                node = None
            if node is None:
                break
        if node is None:
            return None, None
        return node.start_mark.line + 1, node.start_mark.column + 1


def _fail(loc: _Locator, path: tuple, message: str):
    line, col = loc(*path)
    raise DocumentSyntaxError(message, line, col)


def _number(loc, path, value, what, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(loc, path, f"{what} must be a number, got {value!r}")
    if integer and not isinstance(value, int):
        _fail(loc, path, f"{what} must be an integer, got {value!r}")
    return value


def _mapping(loc, path, value, what) -> dict:
    if not isinstance(value, dict):
        _fail(loc, path, f"{what} must be a mapping")
    return value


def _list(loc, path, value, what) -> list:
    if not isinstance(value, list):
        _fail(loc, path, f"{what} must be a list")
    return value


def _string(loc, path, value, what) -> str:
    if not isinstance(value, str) or not value.strip():
        _fail(loc, path, f"{what} must be a non-empty string, got {value!r}")
    return value


def _keys(loc, path, data: dict, allowed: set, required: set, what: str) -> None:
    for key in data:
        if key not in allowed:
            _fail(loc, path + (key,), f"unknown key {key!r} in {what}")
    for key in required:
        if key not in data:
            _fail(loc, path, f"{what} is missing {key!r}")


def parse_document(text: str) -> ModelDocument:
    """Read and schema-check a YAML model document (no net is built)."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        problem = getattr(exc, "problem", None) or str(exc)
        raise DocumentSyntaxError(
            f"invalid YAML: {problem}",
            mark.line + 1 if mark else None,
            mark.column + 1 if mark else None,
        ) from None
    if data is None:
        raise DocumentSyntaxError("empty model document")
    loc = _Locator(text)
    _mapping(loc, (), data, "model document")
    _keys(loc, (), data, {"name", "defaults", "places", "functions", "rules"},
          {"places", "rules"}, "model document")

    name = data.get("name", "model")
    if not isinstance(name, str):
        _fail(loc, ("name",), "model name must be a string")

    places = []
    for i, p in enumerate(_list(loc, ("places",), data["places"], "places")):
        _mapping(loc, ("places", i), p, "a place entry")
        _keys(loc, ("places", i), p, {"name", "tokens"}, {"name"}, "a place entry")
        tokens = _mapping(loc, ("places", i, "tokens"), p.get("tokens") or {}, "tokens")
        for tok, count in tokens.items():
            _number(loc, ("places", i, "tokens", tok), count, f"count of {tok!r}")
        places.append(PlaceDecl(p["name"], dict(tokens)))

    functions = []
    for i, f in enumerate(_list(loc, ("functions",), data.get("functions") or [], "functions")):
        _mapping(loc, ("functions", i), f, "a function entry")
        _keys(loc, ("functions", i), f, {"name", "expression"}, {"name", "expression"},
              "a function entry")
        expr = f["expression"]
        if isinstance(expr, (int, float)) and not isinstance(expr, bool):
            expr = fmt_number(expr)
        functions.append(FunctionDecl(f["name"], _string(loc, ("functions", i, "expression"),
                                                         expr, "expression")))

    rules = []
    for i, r in enumerate(_list(loc, ("rules",), data["rules"], "rules")):
        _mapping(loc, ("rules", i), r, "a rule entry")
        _keys(loc, ("rules", i), r, {"name", "kind", "specs", "function"},
              {"name", "kind", "specs"}, "a rule entry")
        if r["kind"] not in KINDS:
            _fail(loc, ("rules", i, "kind"),
                  f"unknown rule kind {r['kind']!r}; expected one of {', '.join(KINDS)}")
        specs = r["specs"]
        if isinstance(specs, str):
            specs = [specs]
        specs = _list(loc, ("rules", i, "specs"), specs, "specs")
        for j, s in enumerate(specs):
            _string(loc, ("rules", i, "specs", j), s, "a spec")
        fn = r.get("function")
        if fn is not None:
            _string(loc, ("rules", i, "function"), fn, "function")
            if r["kind"] != "function":
                _fail(loc, ("rules", i, "function"), "only function rules take 'function'")
        rules.append(RuleDecl(r["name"], r["kind"], list(specs), fn))

    defaults = Defaults()
    if data.get("defaults") is not None:
        d = _mapping(loc, ("defaults",), data["defaults"], "defaults")
        _keys(loc, ("defaults",), d, {"length", "timestep", "report_frequency"}, set(), "defaults")
        for key in ("length", "timestep"):
            if key in d:
                setattr(defaults, key, _number(loc, ("defaults", key), d[key], key))
        if "report_frequency" in d:
            defaults.report_frequency = _number(loc, ("defaults", "report_frequency"),
                                                d["report_frequency"], "report_frequency",
                                                integer=True)

    return ModelDocument(name, places, rules, functions, defaults)


def _rule_specs(rule: RuleDecl) -> list:
    if rule.kind != "function" or rule.function is None:
        return list(rule.specs)
    arcs = [s for s in rule.specs if "->" in s]
    guards = [s for s in rule.specs if "->" not in s]
    return arcs + [rule.function] + guards


def build_net(doc: ModelDocument, text: str | None = None) -> PetriNet:
    """Construct and validate a net from ``doc``.

    Errors carry ``line``/``column`` attributes when ``text`` (the source
    the document came from) is given.
    """
    loc = _Locator(text) if text is not None else (lambda *path: (None, None))
    net = PetriNet()

    def located(exc: PetriNetError, *path):
        line, col = loc(*path)
        if getattr(exc, "line", None) is None:
            exc.line, exc.column = line, col
        return exc

    for i, p in enumerate(doc.places):
        try:
            net.add_place(p.name, p.tokens)
        except PetriNetError as exc:
            raise located(exc, "places", i)

    declared = set()
    for i, f in enumerate(doc.functions):
        try:
            fn = ExpressionFunction(f.expression)
            for ref in references(fn.expr):
                if not net.has_token(ref.place, ref.token):
                    raise UnknownPlaceOrToken(
                        f"function {f.name!r} refers to unknown {ref.place}.{ref.token}")
            net.register_function(f.name, fn)
        except PetriNetError as exc:
            raise located(exc, "functions", i, "expression")
        declared.add(f.name)

    for i, r in enumerate(doc.rules):
        try:
            rule = net.add_rule(r.name, r.kind, _rule_specs(r))
            if r.kind == "function" and rule.function not in declared:
                del net.rules[r.name]
                raise located(UnresolvedFunction(
                    f"rule {r.name!r} uses undeclared function {rule.function!r}"),
                    "rules", i, "function")
        except ParseError as exc:
            j = next((j for j, s in enumerate(r.specs) if s == exc.text), None)
            raise located(exc, *(("rules", i, "specs", j) if j is not None else ("rules", i)))
        except PetriNetError as exc:
            raise located(exc, "rules", i)
    return net


def load_model(text: str) -> tuple[PetriNet, Defaults]:
    """Parse, validate and build; every rule string is parsed here."""
    doc = parse_document(text)
    return build_net(doc, text), doc.defaults


def load_model_file(path: str | Path) -> tuple[PetriNet, Defaults]:
    return load_model(Path(path).read_text(encoding="utf-8"))


# -- writing ------------------------------------------------------------------


def document_to_dict(doc: ModelDocument) -> dict[str, Any]:
    out: dict[str, Any] = {"name": doc.name}
    d = {k: v for k, v in vars(doc.defaults).items() if v is not None}
    if d:
        out["defaults"] = d
    out["places"] = [{"name": p.name, "tokens": dict(p.tokens)} for p in doc.places]
    if doc.functions:
        out["functions"] = [{"name": f.name, "expression": f.expression} for f in doc.functions]
    rules = []
    for r in doc.rules:
        entry: dict[str, Any] = {"name": r.name, "kind": r.kind}
        if r.function is not None:
            entry["function"] = r.function
        entry["specs"] = list(r.specs)
        rules.append(entry)
    out["rules"] = rules
    return out


def serialize(doc: ModelDocument) -> str:
    return yaml.safe_dump(document_to_dict(doc), sort_keys=False, allow_unicode=True)


# -- built-in models ----------------------------------------------------------


def _packaged(name: str) -> str:
    return resources.files("tokennet").joinpath("models", name).read_text(encoding="utf-8")


def builtin_bread() -> ModelDocument:
    """The bread-baking recipe model (9 places, 10 rules, 90 steps)."""
    return parse_document(_packaged("bread.yaml"))


def _check_rates(**rates: float) -> None:
    for name, rate in rates.items():
        if isinstance(rate, bool) or not isinstance(rate, (int, float)) or not rate >= 0:
            raise ValueError(f"{name} must be a number >= 0, got {rate!r}")


def _flux(name, src, dst, fn, expression):
    return (
        FunctionDecl(fn, expression),
        RuleDecl(name, "function", [f"{src}.{src} -> {dst}.{dst}", f"{src}.{src} > 0"], fn),
    )


def builtin_sirs(beta: float = 0.01, gamma: float = 0.005, xi: float = 0.01,
                 population: float = 100, length: float = 500) -> ModelDocument:
    """SIRS model with per-step infection ``beta``, recovery ``gamma`` and
    loss of immunity ``xi``. ``xi = 0`` gives the SIR model."""
    _check_rates(beta=beta, gamma=gamma, xi=xi)
    fluxes = [
        _flux("infection", "susceptible", "infected", "susceptible_infected",
              f"{fmt_number(beta)} * susceptible.susceptible"),
        _flux("recovery", "infected", "recovered", "infected_recovered",
              f"{fmt_number(gamma)} * infected.infected"),
        _flux("resusceptible", "recovered", "susceptible", "recovered_susceptible",
              f"{fmt_number(xi)} * recovered.recovered"),
    ]
    return ModelDocument(
        name="sirs" if xi else "sir",
        places=[
            PlaceDecl("susceptible", {"susceptible": population}),
            PlaceDecl("infected", {"infected": 0}),
            PlaceDecl("recovered", {"recovered": 0}),
        ],
        functions=[f for f, _ in fluxes],
        rules=[r for _, r in fluxes],
        defaults=Defaults(length, 1, 1),
    )


def builtin_sis(beta: float = 0.01, gamma: float = 0.005,
                population: float = 100, length: float = 500) -> ModelDocument:
    """SIS model: recovered individuals return straight to susceptible."""
    _check_rates(beta=beta, gamma=gamma)
    fluxes = [
        _flux("infection", "susceptible", "infected", "susceptible_infected",
              f"{fmt_number(beta)} * susceptible.susceptible"),
        _flux("recovery", "infected", "susceptible", "infected_susceptible",
              f"{fmt_number(gamma)} * infected.infected"),
    ]
    return ModelDocument(
        name="sis",
        places=[
            PlaceDecl("susceptible", {"susceptible": population}),
            PlaceDecl("infected", {"infected": 0}),
        ],
        functions=[f for f, _ in fluxes],
        rules=[r for _, r in fluxes],
        defaults=Defaults(length, 1, 1),
    )


BUILTINS = {
    "bread": builtin_bread,
    "sirs": builtin_sirs,
    "sir": lambda: builtin_sirs(0.01, 0.005, 0, length=2000),
    "sis": builtin_sis,
}


def builtin(name: str) -> ModelDocument:
    try:
        factory = BUILTINS[name]
    except KeyError:
        raise KeyError(f"no built-in model {name!r}; choose from {', '.join(BUILTINS)}") from None
    return factory()
