import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from actionlogic import bayes, core
from actionlogic.bayes import EventRates, Node, SurvivalModel, TwoSliceNetwork
from actionlogic.core import ProbBelief, StateSpace, StochasticAction
from actionlogic.errors import CyclicSlice, NonMarkovian, ParseError, ResolutionError, SizeLimit

from conftest import DATA


def test_survive_cases():
    assert bayes.survive(0.7, SurvivalModel(0.0), 123.0) == 0.7
    assert bayes.survive(1.0, SurvivalModel(0.5), 200.0) < 1e-40
    assert bayes.survive(1.0, SurvivalModel(0.5), 2.0) == pytest.approx(0.36787944117144233, abs=1e-15)
    assert bayes.survive(0.0, SurvivalModel(0.5), 2.0, revival=0.3) == pytest.approx(0.3)
    with pytest.raises(ValueError):
        SurvivalModel(-1.0)


@settings(max_examples=50)
@given(st.floats(0, 1), st.floats(0, 5), st.floats(0, 5), st.floats(0, 5))
def test_survive_monotone(p0, rate, d1, d2):
    sm = SurvivalModel(rate)
    lo, hi = sorted((d1, d2))
    assert bayes.survive(p0, sm, hi) <= bayes.survive(p0, sm, lo) + 1e-15
    assert bayes.survive(p0, SurvivalModel(rate + 1.0), lo) <= bayes.survive(p0, sm, lo) + 1e-15


def test_persist_with_events_formula():
    sm = SurvivalModel(0.2)
    got = bayes.persist_with_events(0.6, EventRates(0.1, 0.3), sm)
    assert got == pytest.approx(0.1 + 0.9 * 0.7 * 0.6 * math.exp(-0.2))
    with pytest.raises(ValueError):
        EventRates(1.5, 0)


def _inertia(fluents):
    return TwoSliceNetwork({f: Node(((f, 0),), (0.0, 1.0)) for f in fluents})


def test_inertia_network_keeps_belief():
    net = _inertia(["a", "b", "c"])
    space = net.space
    b = ProbBelief({space.states[1]: 0.25, space.states[6]: 0.75})
    assert bayes.dbn_step(b, net).isclose(b)


def test_independent_fluents_factorize():
    net = TwoSliceNetwork({"a": Node((("a", 0),), (0.2, 0.9)), "b": Node((("b", 0),), (0.4, 0.7))})
    space = net.space
    pa, pb = 0.3, 0.8
    b = ProbBelief({s: (pa if s["a"] else 1 - pa) * (pb if s["b"] else 1 - pb) for s in space.states})
    after = bayes.dbn_step(b, net)
    qa = 0.2 * (1 - pa) + 0.9 * pa
    qb = 0.4 * (1 - pb) + 0.7 * pb
    for s in space.states:
        assert after.prob(s) == pytest.approx((qa if s["a"] else 1 - qa) * (qb if s["b"] else 1 - qb), abs=1e-12)


def _random_network(rng, n):
    fluents = [f"f{i}" for i in range(n)]
    nodes = {}
    for i, f in enumerate(fluents):
        parents = [(g, 0) for g in fluents if rng.random() < 0.4]
        parents += [(g, 1) for g in fluents[:i] if rng.random() < 0.3]
        nodes[f] = Node(tuple(parents), tuple(rng.random(1 << len(parents))))
    return TwoSliceNetwork(nodes)


def test_dbn_step_equals_matrix_step():
    rng = np.random.default_rng(8)
    for n in range(1, 7):
        net = _random_network(rng, n)
        m = net.matrix()
        assert np.allclose(m.sum(axis=1), 1.0, atol=1e-12)
        space = net.space
        w = rng.random(len(space))
        b = ProbBelief({s: w[i] / w.sum() for i, s in enumerate(space.states)})
        stepped = bayes.dbn_step(b, net)
        expected = b.vector(space.states) @ m
        assert np.allclose(stepped.vector(space.states), expected, atol=1e-12)
        assert abs(math.fsum(stepped.values()) - 1.0) <= 1e-9


def test_network_construction_errors():
    with pytest.raises(CyclicSlice):
        TwoSliceNetwork({"a": Node((("b", 1),), (0.1, 0.2)), "b": Node((("a", 1),), (0.3, 0.4))})
    with pytest.raises(NonMarkovian):
        TwoSliceNetwork({"a": Node((("a", -1),), (0.1, 0.2))})
    with pytest.raises(ResolutionError):
        TwoSliceNetwork({"a": Node((("z", 0),), (0.1, 0.2))})
    with pytest.raises(ValueError):
        TwoSliceNetwork({"a": Node((), (1.2,))})
    big = _inertia([f"f{i}" for i in range(13)])
    with pytest.raises(SizeLimit):
        bayes.dbn_step(ProbBelief.point(big.space.states[0]), big)


def test_parse_dbn_file():
    net = bayes.parse_dbn((DATA / "survival.dbn").read_text())
    assert net.fluents == ("Alive", "Seen")
    assert net.nodes["Seen"].parents == (("Alive", 1),)
    again = bayes.parse_dbn(str(net))
    assert np.array_equal(again.matrix(), net.matrix())


@pytest.mark.parametrize("text, error, line", [
    ("dbn {\n  node A parents: A@t-1 cpt: 0 1\n}", NonMarkovian, 2),
    ("dbn {\n  node A parents: A cpt: 0 x\n}", ParseError, 2),
    ("network { }", ParseError, 1),
])
def test_parse_dbn_errors(text, error, line):
    with pytest.raises(error) as info:
        bayes.parse_dbn(text)
    assert info.value.line == line


def test_chain_progress():
    states = list("abcd")
    rng = np.random.default_rng(2)
    m = rng.random((4, 4))
    m /= m.sum(axis=1, keepdims=True)
    action = StochasticAction.from_matrix("m", states, m)
    b = ProbBelief({"a": 0.5, "d": 0.5})
    assert bayes.chain_progress(b, action, 0) is b
    two = bayes.chain_progress(b, action, 2)
    assert np.allclose(two.vector(states), b.vector(states) @ np.linalg.matrix_power(m, 2), atol=1e-12)
    with pytest.raises(ValueError):
        bayes.chain_progress(b, action, -1)


def test_network_as_stochastic_action_agrees():
    net = bayes.parse_dbn((DATA / "survival.dbn").read_text())
    action = net.as_stochastic_action()
    b = ProbBelief.uniform(net.space.states)
    assert core.progress_prob(b, action).isclose(bayes.dbn_step(b, net))
