import math

import pytest

from tokennet import (
    OUROBOROS,
    DuplicateFunction,
    DuplicatePlace,
    DuplicateRule,
    InvalidName,
    NegativeInitialCount,
    ParseError,
    PetriNet,
    UnknownKind,
    UnknownPlaceOrToken,
    UnresolvedFunction,
    new_net,
)


def test_new_net_has_only_ouroboros():
    net = new_net()
    assert list(net.places) == [OUROBOROS]
    assert net.places[OUROBOROS].attributes == {"U": math.inf}
    assert net.rules == {}
    assert (net.step_index, net.clock) == (0, 0.0)


def test_nets_are_independent():
    a, b = new_net(), new_net()
    a.add_place("x", {"t": 1})
    a.places[OUROBOROS].attributes["U"] = 0
    assert "x" not in b.places
    assert b.places[OUROBOROS].attributes["U"] == math.inf


def test_add_place():
    net = PetriNet()
    net.add_place("bowl", {"red_beans": 100, "green_beans": 100})
    assert net.tokens("bowl") == {"red_beans": 100.0, "green_beans": 100.0}
    net.add_places("infected", {"infected": 0})
    assert net.count("infected", "infected") == 0.0


def test_place_errors():
    net = PetriNet()
    net.add_place("bowl", {"beans": 1})
    with pytest.raises(DuplicatePlace):
        net.add_place("bowl", {"beans": 1})
    with pytest.raises(NegativeInitialCount):
        net.add_place("b2", {"beans": -1})
    with pytest.raises(NegativeInitialCount):
        net.add_place("b3", {"beans": float("nan")})
    with pytest.raises(InvalidName):
        net.add_place(OUROBOROS, {"U": 1})
    for bad in ["a.b", "a b", "a;b", "a->b", "", "1a"]:
        with pytest.raises(InvalidName):
            net.add_place(bad, {})
        with pytest.raises(InvalidName):
            net.add_place("ok_" + str(len(net.places)), {bad: 1})


def test_registration_order_preserved():
    net = PetriNet()
    names = ["zeta", "alpha", "mid", "beta"]
    for n in names:
        net.add_place(n, {"t": 1})
    for i, n in enumerate(reversed(names)):
        net.add_rule(f"r{n}", "step", [f"{n}.t -> {names[i]}.t; 1"])
    assert [p.name for p in net.user_places()] == names
    assert list(net.rules) == [f"r{n}" for n in reversed(names)]


def test_add_rule_two_arcs(beans):
    rule = beans.add_rule("swap_bean", "step", ["B1.red -> B2.red; 1", "B2.green -> B1.green; 1"])
    assert len(rule.arcs) == 2
    assert list(beans.rules) == ["swap_bean"]


def test_add_rule_errors(beans):
    beans.add_rule("x", "step", ["B1.red -> B2.red; 1"])
    with pytest.raises(DuplicateRule):
        beans.add_rule("x", "step", ["B1.red -> B2.red; 1"])
    with pytest.raises(UnknownPlaceOrToken):
        beans.add_rule("y", "step", ["nowhere.tok -> B2.red; 1"])
    with pytest.raises(UnknownPlaceOrToken):
        beans.add_rule("y", "step", ["B1.red -> B2.blue; 1"])
    with pytest.raises(UnknownPlaceOrToken):
        beans.add_rule("y", "ratio", ["B1.red -> B2.red; 0.1; B9.red < 1; 0"])
    with pytest.raises(UnknownKind):
        beans.add_rule("y", "teleport", ["B1.red -> B2.red; 1"])


def test_add_rule_is_atomic(beans):
    before = (dict(beans.rules), dict(beans.functions))

    def f(places):
        return 1.0

    with pytest.raises(ParseError):
        beans.add_rule("bad", "step", ["B1.red -> B2.red; 1", "B1.red ->"])
    with pytest.raises(UnknownPlaceOrToken):
        beans.add_rule("bad", "function", ["B1.red -> B2.red", f, "B7.red > 0"])
    assert (beans.rules, beans.functions) == before


def test_ouroboros_arcs_accepted(beans):
    beans.add_rule("birth", "step", ["ouroboros.U -> B1.red; 5"])
    beans.add_rule("loop", "step", ["ouroboros.U -> ouroboros.U; 5"])


def test_function_registration(beans):
    def cooling(places):
        return 0.0

    beans.register_function("cooling", cooling)
    rule = beans.add_rule("cool", "function", ["B1.red -> B2.red", "cooling", "B1.red > 0"])
    assert beans.resolve(rule) is cooling
    with pytest.raises(DuplicateFunction):
        beans.register_function("cooling", cooling)


def test_unregistered_function_fails_at_simulation(beans):
    beans.add_rule("r", "function", ["B1.red -> B2.red", "missing", "B1.red > 0"])
    with pytest.raises(UnresolvedFunction):
        beans.simulate(1)
    assert beans.step_index == 0


def test_callable_registered_under_its_name(beans):
    def bean_swap(places):
        return 0.0

    beans.add_rule("a", "function", ["B1.red -> B2.red", bean_swap, "B1.red > 0"])
    beans.add_rule("b", "function", ["B1.green -> B2.green", bean_swap, "B1.red > 0"])
    beans.add_rule("c", "function", ["B1.red -> B2.red", lambda p: 0.0, "B1.red > 0"])
    beans.add_rule("d", "function", ["B1.red -> B2.red", lambda p: 0.0, "B1.red > 0"])
    assert beans.rules["a"].function == beans.rules["b"].function == "bean_swap"
    assert beans.rules["c"].function != beans.rules["d"].function
    beans.check_ready()


def test_snapshot_is_read_only_copy(beans):
    snap = beans.snapshot()
    with pytest.raises(TypeError):
        snap["B1"].attributes["red"] = 0
    beans.places["B1"].attributes["red"] = 5
    assert snap["B1"]["red"] == 100


def test_rate_rule(beans):
    beans.add_rate_rule("leak", "B1.red -> B2.red", 0.25)
    assert beans.rules["leak"].function == "leak_rate"
    beans.simulate(1)
    assert beans.count("B1", "red") == 75
    with pytest.raises(ValueError):
        beans.add_rate_rule("neg", "B1.red -> B2.red", -1)
