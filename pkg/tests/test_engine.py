import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tokennet import (
    ConfigError,
    NegativeTransfer,
    NonFiniteTransfer,
    PetriNet,
    SimulationError,
    apply_plan,
    build_net,
    builtin_bread,
    compute_step_plan,
    parse_arc,
)
from tokennet.engine import Transfer, step_count

from netgen import build, random_net
from oracles import euler_sirs


def amounts(net, step):
    snap = net.snapshot()
    return [t.amount for t in compute_step_plan(net, snap, step)]


def test_step_amount():
    net = PetriNet()
    net.add_place("flour", {"flour": 1000})
    net.add_place("mixer", {"flour": 0})
    net.add_rule("add_flour", "step", ["flour.flour -> mixer.flour; 100"])
    for step in (1, 7, 50):
        assert amounts(net, step) == [100]


def test_delay_fires_on_multiples_of_interval():
    net = PetriNet()
    net.add_place("yeast", {"yeast": 1})
    net.add_place("mixer", {"yeast": 0})
    net.add_rule("add_yeast", "delay", ["yeast.yeast -> mixer.yeast; 0.5; 5"])
    fired = [k for k in range(1, 11) if amounts(net, k) == [0.5]]
    assert fired == [5, 10]
    assert amounts(net, 4) == [0.0]


def _oven(dough):
    net = PetriNet()
    net.add_place("oven", {"dough": dough, "bread": 0})
    net.add_rule("bake", "ratio", ["oven.dough -> oven.bread; 0.3; oven.dough < 1; 0"])
    return net


def test_ratio_amounts():
    assert amounts(_oven(100), 1) == [30.0]
    net = _oven(0.7)
    assert amounts(net, 1) == [0.7]
    net.simulate(1)
    assert net.count("oven", "dough") == 0.0
    assert net.count("oven", "bread") == 0.7


def test_ratio_geometric_decay_then_flush():
    # 100 * 0.7**k first drops below 1 at k = 13
    k = next(k for k in range(100) if 100 * 0.7 ** k < 1)
    assert k == 13
    net = _oven(100)
    rows = net.simulate(20)
    dough = [r.values[0] for r in rows]
    for i in range(1, 14):
        assert dough[i] == pytest.approx(dough[i - 1] * 0.7, rel=1e-12)
    assert 0 < dough[13] < 1
    assert dough[14] == 0.0
    assert rows[14].values[1] == pytest.approx(100, rel=1e-12)


def test_ratio_flush_to_nonzero_target():
    net = PetriNet()
    net.add_place("a", {"t": 10})
    net.add_place("b", {"t": 0})
    net.add_rule("r", "ratio", ["a.t -> b.t; 0.5; a.t < 100; 2.3"])
    net.simulate(3)
    assert net.count("a", "t") == 2.3
    assert net.count("b", "t") == pytest.approx(7.7)


def test_incubate_fires_after_timer_consecutive_steps():
    net = PetriNet()
    net.add_place("src", {"flour": 30})
    net.add_place("mixer", {"flour": 0, "dough": 50})
    net.add_place("pan", {"dough": 0})
    net.add_rule("feed", "step", ["src.flour -> mixer.flour; 10"])
    net.add_rule("use", "step", ["mixer.flour -> mixer.dough; 10"])
    net.add_rule("rise", "incubate", ["10; mixer.dough -> pan.dough; mixer.flour == 0"])
    rows = net.simulate(30)
    pan = [r.values[-1] for r in rows]
    # mixer.flour is 10 after steps 1-3 and 0 from step 4 on; the first
    # holding start-of-step state is therefore at step s = 5
    first_fire = next(k for k, v in enumerate(pan) if v > 0)
    assert first_fire == 5 + 9
    assert pan[first_fire] == 80.0
    assert net.rules["rise"].elapsed == (30 - first_fire) % 10


def test_incubate_resets_when_guard_fails():
    net = PetriNet()
    net.add_place("a", {"t": 5, "flag": 1})
    net.add_place("b", {"t": 0})
    net.add_rule("inc", "incubate", ["3; a.t -> b.t; a.flag > 0"])
    snap = net.snapshot()
    compute_step_plan(net, snap, 1)
    compute_step_plan(net, snap, 2)
    assert net.rules["inc"].elapsed == 2
    net.places["a"].attributes["flag"] = 0
    compute_step_plan(net, net.snapshot(), 3)
    assert net.rules["inc"].elapsed == 0


def test_function_rule_applies_to_every_arc():
    net = PetriNet()
    net.add_place("a", {"x": 10, "y": 10})
    net.add_place("b", {"x": 0, "y": 0})
    net.add_rule("f", "function", ["a.x -> b.x", "a.y -> b.y", lambda p: p["a"]["x"] / 5, "a.x > 0"])
    assert amounts(net, 1) == [2.0, 2.0]


def test_function_guard_blocks():
    net = PetriNet()
    net.add_place("a", {"x": 0})
    net.add_place("b", {"x": 0})
    net.add_rule("f", "function", ["a.x -> b.x", lambda p: 1 / 0, "a.x > 0"])
    assert amounts(net, 1) == [0.0]


@pytest.mark.parametrize("fn,exc", [
    (lambda p: -1.0, NegativeTransfer),
    (lambda p: float("inf"), NonFiniteTransfer),
    (lambda p: float("nan"), NonFiniteTransfer),
    (lambda p: 1 / 0, SimulationError),
    (lambda p: "3", SimulationError),
])
def test_function_errors_carry_rule_and_step(fn, exc):
    net = PetriNet()
    net.add_place("a", {"x": 1})
    net.add_place("b", {"x": 0})
    net.add_rule("boom", "function", ["a.x -> b.x", fn, "a.x > 0"])
    with pytest.raises(exc) as err:
        net.simulate(3)
    assert err.value.rule == "boom"
    assert err.value.step == 1
    assert net.step_index == 0


def test_infinite_ratio_source_is_rejected():
    net = PetriNet()
    net.add_place("a", {"x": 0})
    net.add_rule("r", "ratio", ["ouroboros.U -> a.x; 0.1; a.x > 5; 0"])
    with pytest.raises(NonFiniteTransfer):
        net.simulate(1)


# -- apply_plan ----------------------------------------------------------------


def test_apply_clamps_in_plan_order():
    net = PetriNet()
    net.add_place("s", {"t": 150})
    net.add_place("d", {"t": 0, "u": 0})
    plan = [Transfer("r1", parse_arc("s.t -> d.t"), 100), Transfer("r2", parse_arc("s.t -> d.u"), 100)]
    assert apply_plan(net, plan) == [100, 50]
    assert net.count("s", "t") == 0.0
    assert net.tokens("d") == {"t": 100, "u": 50}


def test_exhaustion_is_exact_zero():
    net = PetriNet()
    net.add_place("s", {"t": 0.1 + 0.2})
    net.add_place("d", {"t": 0})
    moved = apply_plan(net, [Transfer("r", parse_arc("s.t -> d.t"), 0.1),
                             Transfer("r", parse_arc("s.t -> d.t"), 0.25)])
    assert moved[1] < 0.25
    assert net.count("s", "t") == 0.0
    assert math.copysign(1, net.count("s", "t")) == 1


def test_ouroboros_source_and_sink():
    net = PetriNet()
    net.add_place("d", {"t": 0})
    apply_plan(net, [Transfer("r", parse_arc("ouroboros.U -> d.t"), 100)])
    assert net.count("d", "t") == 100
    assert net.count("ouroboros", "U") == math.inf
    apply_plan(net, [Transfer("r", parse_arc("d.t -> ouroboros.U"), 40)])
    assert net.count("d", "t") == 60
    assert net.count("ouroboros", "U") == math.inf
    apply_plan(net, [Transfer("r", parse_arc("ouroboros.U -> ouroboros.U"), 5)])
    assert net.count("ouroboros", "U") == math.inf


def test_zero_plan_is_identity(beans):
    before = beans.snapshot()
    apply_plan(beans, [Transfer("r", parse_arc("B1.red -> B2.red"), 0.0)])
    assert beans.snapshot() == before


def test_deposits_are_available_next_step():
    net = PetriNet()
    net.add_place("a", {"t": 10})
    net.add_place("b", {"t": 0})
    net.add_place("c", {"t": 0})
    net.add_rule("ab", "step", ["a.t -> b.t; 10"])
    net.add_rule("bc", "step", ["b.t -> c.t; 10"])
    net.simulate(1)
    assert [net.count(p, "t") for p in "abc"] == [0, 10, 0]
    net.simulate(1)
    assert [net.count(p, "t") for p in "abc"] == [0, 0, 10]


# -- drivers -------------------------------------------------------------------


def test_record_counts(bread, sirs):
    rows = bread.simulate(90, 1, 1)
    assert len(rows) == 91
    assert [r.clock for r in rows] == list(range(91))
    assert len(sirs.simulate(500, 1, 1)) == 501


def test_empty_net_reporting_stride():
    rows = PetriNet().simulate(10, 1, 2)
    assert [r.clock for r in rows] == [0, 2, 4, 6, 8, 10]
    assert all(r.labels == [] and r.values == [] for r in rows)


def test_simulate_continues(sirs):
    sirs.simulate(10)
    rows = sirs.simulate(5)
    assert rows[0].clock == 10 and rows[-1].clock == 15
    assert sirs.step_index == 15


@pytest.mark.parametrize("length,dt,n", [(0.5, 1, 1), (10, 1, 10), (1, 0.1, 10), (0.3, 0.1, 3), (1, 0.3, 4)])
def test_step_count(length, dt, n):
    assert step_count(length, dt) == n


@pytest.mark.parametrize("args", [(0, 1, 1), (-1, 1, 1), (1, 0, 1), (1, 1, 0), (1, 1, 1.5), (float("inf"), 1, 1)])
def test_bad_config(args):
    with pytest.raises(ConfigError):
        PetriNet().simulate(*args)


def test_stream_matches_stored(bread):
    other = build_net(builtin_bread())
    final = bread.simulate(90, 1, 1)[-1]
    *_, (clock, snap) = other.simulate_stream(90, 1)
    assert clock == final.clock
    assert dict((f"{p}.{t}", v) for p, view in snap.items() if not view.infinite
                for t, v in view.items()) == dict(zip(final.labels, final.values))


def test_stream_is_lazy(sirs):
    it = sirs.simulate_yield(100, 1)
    assert sirs.step_index == 0
    for _ in range(3):
        next(it)
    assert sirs.step_index == 3


def test_stream_ceiling():
    items = list(PetriNet().simulate_stream(0.5, 1))
    assert [c for c, _ in items] == [1]


def test_stream_validates_eagerly():
    with pytest.raises(ConfigError):
        PetriNet().simulate_stream(-1, 1)


def test_sirs_is_forward_euler(sirs):
    rows = sirs.simulate(500)
    ref = euler_sirs(0.01, 0.005, 0.01)
    for row, expected in zip(rows, ref):
        assert row.values == pytest.approx(list(expected), abs=1e-9)


def test_determinism(bread):
    assert build_net(builtin_bread()).simulate(90) == bread.simulate(90)


# -- randomized properties -----------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_conservation_and_nonnegativity(seed):
    places, rules = random_net(random.Random(seed))
    net = build(places, rules)
    total = sum(sum(t.values()) for _, t in places)
    for clock, snap in net.simulate_stream(60, 1):
        counts = [v for p, view in snap.items() if not view.infinite for v in view.values()]
        assert all(v >= 0 for v in counts)
        assert math.fsum(counts) == pytest.approx(total, rel=1e-9, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.randoms(use_true_random=False))
def test_order_independence_without_contention(seed, shuffler):
    places, rules = random_net(random.Random(seed), exclusive_sources=True)
    shuffled = list(rules)
    shuffler.shuffle(shuffled)
    assert build(places, rules).simulate(40) == build(places, shuffled).simulate(40)
