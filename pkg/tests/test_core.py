import random

import numpy as np
import pytest

from actionlogic import core
from actionlogic.core import (BinaryBelief, EpistemicAction, OnticAction, ProbBelief, Scenario,
                              StateSpace, Step, StochasticAction, NULL_OBSERVATION)
from actionlogic.errors import (EmptyResult, Inconsistent, Inexecutable, NoExplanation,
                                UnknownObservation, ZeroProbabilityObservation)
from actionlogic.logic import parse_formula as F

COMPUTER = ["c_on", "c_stand_by", "c_off"]


@pytest.fixture
def shut_down():
    return OnticAction("shut_down", {"c_on": {"c_on", "c_off"}, "c_stand_by": set(), "c_off": set()})


@pytest.fixture
def reads_power():
    return EpistemicAction.from_function("power", COMPUTER, lambda s: "off" if s == "c_off" else "on")


def test_state_space_order_and_lookup():
    space = StateSpace(["p", "q"])
    assert [str(s) for s in space.states] == ["{-p, -q}", "{-p, q}", "{p, -q}", "{p, q}"]
    s = space.state("p -q")
    assert space.index(s) == 2 and s.literals() == ["p", "-q"]
    assert space.models(F("p | q")) == frozenset(space.states[1:])
    with pytest.raises(ValueError):
        StateSpace(["p", "p"])


def test_beliefs_validate():
    with pytest.raises(ValueError):
        BinaryBelief([])
    with pytest.raises(ValueError):
        ProbBelief({"a": 0.5, "b": 0.6})
    assert ProbBelief.uniform("ab").prob("a") == 0.5


# progression and regression

def test_progress_shut_down(shut_down):
    assert core.progress({"c_on"}, shut_down) == {"c_on", "c_off"}
    with pytest.raises(EmptyResult):
        core.progress({"c_stand_by"}, shut_down)


def test_progress_identity():
    ident = OnticAction.identity(COMPUTER)
    assert core.progress({"c_off"}, ident) == {"c_off"}


def test_progress_prob():
    action = StochasticAction("shut_down", {"c_on": {"c_on": 0.1, "c_off": 0.9}}, COMPUTER)
    out = core.progress_prob(ProbBelief({"c_on": 1.0}), action)
    assert out.isclose({"c_on": 0.1, "c_off": 0.9})
    with pytest.raises(Inexecutable):
        core.progress_prob(ProbBelief({"c_off": 1.0}), action)
    b = ProbBelief.uniform(COMPUTER)
    assert core.progress_prob(b, StochasticAction.identity(COMPUTER)).isclose(b)


def test_two_steps_equal_squared_matrix():
    rng = np.random.default_rng(4)
    m = rng.random((4, 4))
    m /= m.sum(axis=1, keepdims=True)
    states = list("abcd")
    action = StochasticAction.from_matrix("m", states, m)
    b = ProbBelief(dict(zip(states, [0.1, 0.2, 0.3, 0.4])))
    twice = core.progress_prob(core.progress_prob(b, action), action)
    expected = b.vector(states) @ (m @ m)
    assert np.allclose(twice.vector(states), expected, atol=1e-12)


def test_regress_shut_down(shut_down):
    assert core.regress_weak({"c_off"}, shut_down) == {"c_on"}
    assert core.regress_strong({"c_off"}, shut_down) == set()
    assert core.regress_strong(set(COMPUTER), shut_down) == {"c_on"}


def test_regress_weak_is_progress_of_inverse():
    rng = random.Random(5)
    space = StateSpace([f"f{i}" for i in range(5)])
    states = space.states
    relation = {s: rng.sample(states, rng.randint(0, 3)) for s in states}
    action = OnticAction("r", relation)
    bp = frozenset(rng.sample(states, 6))
    inverse_image = set()
    for t in bp:
        inverse_image |= action.inverse()(t)
    assert core.regress_weak(bp, action) == inverse_image


def test_regress_toggle_full_goal():
    space = StateSpace(["f"])
    toggle = OnticAction.from_function("t", space.states, lambda s: s.replace(f=not s["f"]))
    assert core.regress_weak(space.states, toggle) == toggle.executable_states()


def test_strong_equals_weak_when_deterministic():
    rng = random.Random(6)
    states = list(range(6))
    for _ in range(50):
        fn = {s: rng.choice(states + [None]) for s in states}
        action = OnticAction.from_function("d", states, fn.get)
        bp = set(rng.sample(states, 3))
        assert core.regress_strong(bp, action) == core.regress_weak(bp, action)


# observations

def test_compatible_states(shut_down, reads_power):
    assert core.compatible_states(NULL_OBSERVATION, shut_down) == set(COMPUTER)
    assert core.compatible_states("off", reads_power) == {"c_off"}
    noisy = EpistemicAction("noisy", {s: {NULL_OBSERVATION, "beep"} for s in COMPUTER})
    assert core.compatible_states(NULL_OBSERVATION, noisy) == set(COMPUTER)
    with pytest.raises(UnknownObservation):
        core.compatible_states("maybe", reads_power)


def test_filter(shut_down, reads_power):
    assert core.filter({"c_on"}, shut_down, "off", reads_power) == {"c_off"}
    assert core.filter({"c_on"}, shut_down) == core.progress({"c_on"}, shut_down)
    with pytest.raises(Inconsistent):
        core.filter({"c_off"}, reads_power, "on")


def test_filter_prob_cases():
    states = list("abc")
    step = StochasticAction("next", {"a": {"b": 1.0}, "b": {"c": 1.0}, "c": {"a": 1.0}})
    perfect = EpistemicAction("see", prob_model={s: {s: 1.0} for s in states})
    post = core.filter_prob(ProbBelief.uniform(states), step, "b", perfect)
    assert post.isclose({"b": 1.0})
    flat = EpistemicAction("flat", prob_model={s: {"x": 0.5, "y": 0.5} for s in states})
    b = ProbBelief({"a": 0.2, "b": 0.3, "c": 0.5})
    assert core.filter_prob(b, step, "x", flat).isclose(core.progress_prob(b, step))
    with pytest.raises(ZeroProbabilityObservation):
        core.filter_prob(ProbBelief({"a": 1.0}), step, "a", perfect)


def test_offline_epistemic_progression():
    space = StateSpace(["f", "g"])
    sensor = EpistemicAction.from_function("f?", space.states, lambda s: s["f"])
    parts = core.progress_epistemic_offline(space.states, sensor)
    assert parts == {frozenset(space.models(F("f"))), frozenset(space.models(F("-f")))}
    assert core.progress_epistemic_offline({"x"}, OnticAction.identity(["x"])) == {frozenset({"x"})}


def test_offline_three_observations():
    model = {"s1": {"red"}, "s2": {"red", "green"}, "s3": {"blue"}}
    sensor = EpistemicAction("colour", model)
    parts = core.progress_epistemic_offline({"s1", "s2", "s3"}, sensor)
    # frozen from direct enumeration of the observation sets
    assert parts == {frozenset({"s1", "s2"}), frozenset({"s2"}), frozenset({"s3"})}


def test_abduce(shut_down):
    ident = OnticAction.identity(COMPUTER)
    assert core.abduce({"c_on"}, {"c_off"}, [shut_down, ident]) == {shut_down}
    assert core.abduce({"c_on"}, core.progress({"c_on"}, ident), [shut_down, ident]) == {shut_down, ident}
    assert core.abduce({"c_on"}, {"c_stand_by"}, [shut_down, ident]) == set()


# scenarios

def test_scenario_inertia_and_observation(shut_down, reads_power):
    model = {"shut_down": shut_down, "power": reads_power}
    quiet = core.run_scenario(Scenario({"c_on", "c_off"}, [Step(), Step()]), model)
    assert quiet.consistent and set(quiet.trajectory) == {frozenset({"c_on", "c_off"})}
    result = core.run_scenario(Scenario({"c_on"}, [Step("shut_down", "off", "power")]), model)
    assert result.final == {"c_off"}
    clash = core.run_scenario(Scenario({"c_on"}, [Step(), Step(None, "off", "power")]), model)
    assert clash.inconsistent_at == 2


def _lawn():
    states = ["dry", "wet"]
    rain = OnticAction.from_function("rain", states, lambda s: "wet")
    hose = OnticAction.from_function("hose", states, lambda s: "wet")
    looks = EpistemicAction.from_function("looks", states, lambda s: s)
    return states, rain, hose, looks


def test_extrapolate_lawn():
    _, rain, hose, looks = _lawn()
    sc = Scenario({"dry"}, [Step(None, "wet", "looks")])
    found = core.extrapolate(sc, [rain], {"looks": looks})
    assert [(e.events, e.final) for e in found] == [(((0, "rain"),), {"wet"})]


def test_extrapolate_no_event_needed_and_ties():
    _, rain, hose, looks = _lawn()
    calm = core.extrapolate(Scenario({"dry"}, [Step(None, "dry", "looks")]), [rain], {"looks": looks})
    assert [e.events for e in calm] == [()]
    both = core.extrapolate(Scenario({"dry"}, [Step(None, "wet", "looks")]), [rain, hose], {"looks": looks})
    assert [e.events for e in both] == [((0, "hose"),), ((0, "rain"),)]
    with pytest.raises(NoExplanation):
        core.extrapolate(Scenario({"wet"}, [Step(None, "dry", "looks")]), [rain], {"looks": looks})
