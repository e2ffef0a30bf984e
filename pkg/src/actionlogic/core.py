"""Explicit semantics of belief states and actions.

States may be any hashable, orderable values (the computer example uses plain
strings such as ``"c_on"``); :class:`StateSpace` builds the usual states over
a list of boolean fluents.  A binary belief state is a nonempty frozenset of
states, a Bayesian one a :class:`ProbBelief`.

Ontic actions are relations ``state -> frozenset of successor states`` (an
empty successor set means the action cannot be executed there); stochastic
actions are rows of a transition matrix; epistemic actions map each state to
the observations it may produce.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Mapping

import numpy as np

from . import logic
from .errors import (EmptyResult, Inconsistent, Inexecutable, NoExplanation,
                     ResolutionError, SizeLimit, UnknownObservation,
                     ZeroProbabilityObservation)
from .logic import Atom, Formula

NULL_OBSERVATION = "o*"
MAX_FLUENTS = 20
PROB_TOL = 1e-9

_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_']*(?:-[A-Za-z0-9_']+)*$")


def _canonical_order(states):
    try:
        return sorted(states)
    except TypeError:
        return sorted(states, key=repr)


# ---------------------------------------------------------------------------
# states

@dataclass(frozen=True, order=True)
class State:
    """Total truth assignment to an ordered list of fluents."""

    values: tuple
    fluents: tuple = field(repr=False)

    def __post_init__(self):
        if len(self.values) != len(self.fluents):
            raise ValueError("a state must assign every fluent exactly once")

    @cached_property
    def _index(self):
        return {f: i for i, f in enumerate(self.fluents)}

    def __getitem__(self, fluent: str) -> bool:
        return self.values[self._index[fluent]]

    def as_dict(self) -> dict:
        return dict(zip(self.fluents, self.values))

    def valuation(self, tag=None) -> dict:
        return {Atom(f, tag): v for f, v in zip(self.fluents, self.values)}

    def satisfies(self, phi: Formula, tag=None) -> bool:
        return phi.evaluate(self.valuation(tag))

    def literals(self) -> list:
        """Literals of the state, sorted by fluent name."""
        return [f if v else "-" + f for f, v in sorted(zip(self.fluents, self.values))]

    def formula(self, tag=None) -> Formula:
        return logic.minterm(self.values, [Atom(f, tag) for f in self.fluents])

    def replace(self, **changes) -> "State":
        values = list(self.values)
        for f, v in changes.items():
            values[self._index[f]] = bool(v)
        return State(tuple(values), self.fluents)

    def __str__(self):
        return "{" + ", ".join(f if v else "-" + f for f, v in zip(self.fluents, self.values)) + "}"


class StateSpace:
    """All states over an ordered fluent list, in canonical order.

    Canonical order is lexicographic over the declared fluent order with
    false < true, the same row order as :func:`logic.truth_table`.
    """

    def __init__(self, fluents: Iterable[str]):
        fluents = tuple(fluents)
        for f in fluents:
            if not isinstance(f, str) or not _IDENT.match(f):
                raise ValueError(f"invalid fluent name {f!r}")
        if len(set(fluents)) != len(fluents):
            raise ValueError("fluent names must be unique")
        if len(fluents) > MAX_FLUENTS:
            raise SizeLimit(f"{len(fluents)} fluents exceed the enumeration cap of {MAX_FLUENTS}")
        self.fluents = fluents

    def __len__(self):
        return 1 << len(self.fluents)

    def __eq__(self, other):
        return isinstance(other, StateSpace) and other.fluents == self.fluents

    def __hash__(self):
        return hash(self.fluents)

    def __repr__(self):
        return f"StateSpace({list(self.fluents)})"

    @cached_property
    def states(self) -> tuple:
        return tuple(State(bits, self.fluents)
                     for bits in itertools.product((False, True), repeat=len(self.fluents)))

    def index(self, state: State) -> int:
        i = 0
        for v in state.values:
            i = (i << 1) | int(v)
        return i

    def atoms(self, tag=None) -> list:
        return [Atom(f, tag) for f in self.fluents]

    def state(self, assignment) -> State:
        """Build a state from a mapping or from literal strings.

        ``space.state({"p": True, "q": False})`` and
        ``space.state(["p", "-q"])`` are equivalent; with literal strings,
        unmentioned fluents are false.
        """
        if isinstance(assignment, str):
            assignment = [t for t in re.split(r"[\s,{}]+", assignment) if t]
        if isinstance(assignment, Mapping):
            missing = set(self.fluents) - set(assignment)
            if missing:
                raise ValueError(f"assignment misses fluents {sorted(missing)}")
            extra = set(assignment) - set(self.fluents)
            if extra:
                raise ResolutionError(f"unknown fluents {sorted(extra)}")
            return State(tuple(bool(assignment[f]) for f in self.fluents), self.fluents)
        values = dict.fromkeys(self.fluents, False)
        for lit in assignment:
            positive = not lit.startswith(("-", "~", "¬"))
            name = lit.lstrip("-~¬")
            if name not in values:
                raise ResolutionError(f"unknown fluent {name!r}")
            values[name] = positive
        return State(tuple(values[f] for f in self.fluents), self.fluents)

    def models(self, phi: Formula, tag=None) -> frozenset:
        table = logic.truth_table(phi, self.atoms(tag))
        return frozenset(self.states[i] for i in np.flatnonzero(table))

    def formula(self, states: Iterable[State], tag=None) -> Formula:
        """Canonical DNF describing exactly ``states``."""
        table = np.zeros(len(self), dtype=bool)
        for s in states:
            table[self.index(s)] = True
        return logic.formula_from_table(table, self.atoms(tag))


# ---------------------------------------------------------------------------
# belief states

class BinaryBelief(frozenset):
    """Nonempty set of states."""

    def __new__(cls, states=()):
        self = super().__new__(cls, states)
        if not self:
            raise ValueError("a binary belief state must be nonempty")
        return self

    def __repr__(self):
        return "BinaryBelief({" + ", ".join(map(str, _canonical_order(self))) + "})"


class ProbBelief(Mapping):
    """Probability distribution over states; states with zero mass may be omitted."""

    def __init__(self, mass: Mapping, tol: float = PROB_TOL):
        mass = dict(mass)
        for s, p in mass.items():
            if not (p >= -tol):
                raise ValueError(f"negative probability {p} for {s}")
        total = math.fsum(mass.values())
        if abs(total - 1.0) > tol:
            raise ValueError(f"probabilities sum to {total}, not 1")
        self._mass = {s: max(float(p), 0.0) for s, p in mass.items()}

    @classmethod
    def point(cls, state):
        return cls({state: 1.0})

    @classmethod
    def uniform(cls, states):
        states = list(states)
        return cls({s: 1.0 / len(states) for s in states})

    def __getitem__(self, state):
        return self._mass[state]

    def __iter__(self):
        return iter(self._mass)

    def __len__(self):
        return len(self._mass)

    def prob(self, state) -> float:
        return self._mass.get(state, 0.0)

    def support(self) -> frozenset:
        return frozenset(s for s, p in self._mass.items() if p > 0)

    def isclose(self, other: Mapping, tol: float = PROB_TOL) -> bool:
        keys = set(self) | set(other)
        return all(abs(self.prob(s) - other.get(s, 0.0)) <= tol for s in keys)

    def vector(self, order) -> np.ndarray:
        return np.array([self.prob(s) for s in order])

    def __repr__(self):
        items = ", ".join(f"{s}: {p:.6g}" for s, p in
                          ((s, self._mass[s]) for s in _canonical_order(self._mass)))
        return "ProbBelief({" + items + "})"


# ---------------------------------------------------------------------------
# actions

class OnticAction:
    """Transition relation of a purely ontic action."""

    def __init__(self, name: str, relation: Mapping):
        self.name = name
        self.relation = {s: frozenset(t) for s, t in relation.items()}
        for s, targets in self.relation.items():
            stray = targets - self.relation.keys()
            if stray:
                raise ValueError(f"{name}: successors of {s} outside the state space: {stray}")

    @classmethod
    def identity(cls, states, name="identity"):
        return cls(name, {s: (s,) for s in states})

    @classmethod
    def from_function(cls, name, states, fn):
        """Deterministic action ``s -> fn(s)``; ``fn`` may return None (inexecutable)."""
        return cls(name, {s: () if fn(s) is None else (fn(s),) for s in states})

    @property
    def states(self) -> frozenset:
        return frozenset(self.relation)

    def __call__(self, state) -> frozenset:
        return self.relation[state]

    def executable_states(self) -> frozenset:
        return frozenset(s for s, t in self.relation.items() if t)

    def is_deterministic(self) -> bool:
        return all(len(t) <= 1 for t in self.relation.values())

    def inverse(self) -> "OnticAction":
        back = {s: set() for s in self.relation}
        for s, targets in self.relation.items():
            for t in targets:
                back[t].add(s)
        return OnticAction(self.name + "^-1", back)

    def __repr__(self):
        return f"OnticAction({self.name!r}, {len(self.relation)} states)"


class StochasticAction:
    """Rows ``p(. | s, action)``; a state without a row is inexecutable."""

    def __init__(self, name: str, rows: Mapping, states=None, tol: float = PROB_TOL):
        self.name = name
        self.rows = {}
        for s, row in rows.items():
            row = {t: float(p) for t, p in row.items()}
            if any(p < -tol for p in row.values()):
                raise ValueError(f"{name}: negative probability in row {s}")
            total = math.fsum(row.values())
            if abs(total - 1.0) > tol:
                raise ValueError(f"{name}: row {s} sums to {total}")
            self.rows[s] = row
        known = set(self.rows)
        for row in self.rows.values():
            known.update(row)
        self.states = frozenset(states) if states is not None else frozenset(known)

    @classmethod
    def identity(cls, states, name="identity"):
        return cls(name, {s: {s: 1.0} for s in states}, states)

    @classmethod
    def from_matrix(cls, name, states, matrix, executable=None):
        states = list(states)
        matrix = np.asarray(matrix, dtype=float)
        rows = {}
        for i, s in enumerate(states):
            if executable is not None and not executable[i]:
                continue
            rows[s] = {t: matrix[i, j] for j, t in enumerate(states) if matrix[i, j] != 0}
        return cls(name, rows, states)

    def matrix(self, order) -> np.ndarray:
        order = list(order)
        pos = {s: i for i, s in enumerate(order)}
        m = np.zeros((len(order), len(order)))
        for s, row in self.rows.items():
            for t, p in row.items():
                m[pos[s], pos[t]] = p
        return m

    def support_relation(self) -> OnticAction:
        """Binary model induced by the positive entries."""
        return OnticAction(self.name, {s: [t for t, p in self.rows.get(s, {}).items() if p > 0]
                                       for s in self.states})

    def __repr__(self):
        return f"StochasticAction({self.name!r}, {len(self.rows)} rows)"


class ObservationSpace(frozenset):
    """Finite observation set; always contains the null observation."""

    def __new__(cls, observations=()):
        return super().__new__(cls, set(observations) | {NULL_OBSERVATION})


class EpistemicAction:
    """Observation model of a purely epistemic action.

    ``binary_model`` maps each state to the nonempty set of observations it
    may produce; ``prob_model``, when given, maps each state to a
    distribution over observations.
    """

    def __init__(self, name: str, binary_model: Mapping = None, prob_model: Mapping = None,
                 observations=None, tol: float = PROB_TOL):
        if binary_model is None and prob_model is None:
            raise ValueError("an epistemic action needs a binary or a probabilistic model")
        self.name = name
        self.prob_model = None
        if prob_model is not None:
            self.prob_model = {}
            for s, row in prob_model.items():
                row = {o: float(p) for o, p in row.items()}
                total = math.fsum(row.values())
                if abs(total - 1.0) > tol or any(p < -tol for p in row.values()):
                    raise ValueError(f"{name}: observation row of {s} is not a distribution")
                self.prob_model[s] = row
            if binary_model is None:
                binary_model = {s: [o for o, p in row.items() if p > 0]
                                for s, row in self.prob_model.items()}
        self.binary_model = {s: frozenset(obs) for s, obs in binary_model.items()}
        for s, obs in self.binary_model.items():
            if not obs:
                raise ValueError(f"{name}: state {s} produces no observation")
        seen = set().union(*self.binary_model.values())
        if self.prob_model:
            for row in self.prob_model.values():
                seen.update(row)
        self.observations = ObservationSpace(observations if observations is not None else seen)
        if not seen <= self.observations:
            raise ValueError(f"{name}: observations {seen - self.observations} not declared")

    @classmethod
    def purely_ontic(cls, states, name="no-feedback"):
        return cls(name, {s: (NULL_OBSERVATION,) for s in states})

    @classmethod
    def from_function(cls, name, states, fn):
        """Reliable sensor: state ``s`` always yields the single observation ``fn(s)``."""
        return cls(name, {s: (fn(s),) for s in states})

    @property
    def states(self) -> frozenset:
        return frozenset(self.binary_model)

    def __repr__(self):
        return f"EpistemicAction({self.name!r}, {sorted(map(str, self.observations))})"


# ---------------------------------------------------------------------------
# prediction and postdiction

def _successors(action: OnticAction, state):
    try:
        return action.relation[state]
    except KeyError:
        raise ValueError(f"state {state} is not in the state space of {action.name}") from None


def progress(b: Iterable, action: OnticAction) -> BinaryBelief:
    """States reachable by ``action`` from some state of ``b``."""
    out = set()
    for s in b:
        out |= _successors(action, s)
    if not out:
        raise EmptyResult(f"{action.name} is not executable in any state of the belief")
    return BinaryBelief(out)


def progress_prob(b: ProbBelief, action: StochasticAction) -> ProbBelief:
    out = {}
    for s, p in b.items():
        if p <= 0:
            continue
        row = action.rows.get(s)
        if row is None:
            raise Inexecutable(f"{action.name} has no transition from {s}")
        for t, q in row.items():
            out[t] = out.get(t, 0.0) + p * q
    return ProbBelief({t: p for t, p in out.items() if p > 0})


def regress_weak(bp: Iterable, action: OnticAction) -> frozenset:
    """States from which ``action`` may lead into ``bp`` (possibly empty)."""
    bp = frozenset(bp)
    return frozenset(s for s, targets in action.relation.items() if targets & bp)


def regress_strong(bp: Iterable, action: OnticAction) -> frozenset:
    """Executable states all of whose successors lie in ``bp``."""
    bp = frozenset(bp)
    return frozenset(s for s, targets in action.relation.items() if targets and targets <= bp)


# ---------------------------------------------------------------------------
# observations and filtering

def compatible_states(o, action) -> frozenset:
    """``{s | o in O(s)}``; purely ontic actions only produce the null observation."""
    if isinstance(action, EpistemicAction):
        if o not in action.observations:
            raise UnknownObservation(f"{o!r} is not an observation of {action.name}")
        return frozenset(s for s, obs in action.binary_model.items() if o in obs)
    if o != NULL_OBSERVATION:
        raise UnknownObservation(f"ontic action {action.name} gives no feedback, got {o!r}")
    return action.states


def filter(b: Iterable, action, o=NULL_OBSERVATION, sensor: EpistemicAction = None) -> BinaryBelief:
    """Progress ``b`` by ``action`` and keep the states compatible with ``o``.

    For an epistemic ``action`` the progression is the identity and ``o`` is
    read against its own observation model; for an ontic one, ``o`` is read
    against ``sensor`` when given.
    """
    if isinstance(action, EpistemicAction):
        predicted = frozenset(b)
        compatible = compatible_states(o, action)
    else:
        predicted = progress(b, action)
        compatible = compatible_states(o, sensor if sensor is not None else action)
    out = predicted & compatible
    if not out:
        raise Inconsistent(f"observation {o!r} is impossible after {action.name}")
    return BinaryBelief(out)


def filter_prob(b: ProbBelief, action: StochasticAction, o, sensor: EpistemicAction) -> ProbBelief:
    """Bayesian filtering: predict with ``action``, condition on ``o`` via ``sensor``."""
    if sensor.prob_model is None:
        raise ValueError(f"{sensor.name} has no probabilistic observation model")
    if o not in sensor.observations:
        raise UnknownObservation(f"{o!r} is not an observation of {sensor.name}")
    predicted = progress_prob(b, action) if action is not None else b
    weights = {}
    for s, p in predicted.items():
        row = sensor.prob_model.get(s)
        if row is None:
            raise ValueError(f"{sensor.name} has no observation row for {s}")
        w = row.get(o, 0.0) * p
        if w > 0:
            weights[s] = w
    total = math.fsum(weights.values())
    if total <= 0:
        raise ZeroProbabilityObservation(f"observation {o!r} has probability 0")
    return ProbBelief({s: w / total for s, w in weights.items()})


def progress_epistemic_offline(b: Iterable, action) -> frozenset:
    """One belief per observation that ``b`` leaves possible."""
    b = frozenset(b)
    if not isinstance(action, EpistemicAction):
        return frozenset({BinaryBelief(b)})
    out = set()
    for o in action.observations:
        part = b & compatible_states(o, action)
        if part:
            out.add(BinaryBelief(part))
    return frozenset(out)


# ---------------------------------------------------------------------------
# abduction and scenarios

def abduce(b: Iterable, bp: Iterable, candidates: Iterable[OnticAction]) -> frozenset:
    """Candidate events ``a`` with ``bp`` included in ``progress(b, a)``."""
    bp = frozenset(bp)
    found = set()
    for action in candidates:
        try:
            reached = progress(b, action)
        except EmptyResult:
            continue
        if bp <= reached:
            found.add(action)
    return frozenset(found)


@dataclass(frozen=True)
class Step:
    """One time step: the action occurring just before it and what is observed at it."""

    action: str = None
    observation: Hashable = None
    sensor: str = None


@dataclass(frozen=True)
class Scenario:
    initial: frozenset
    steps: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "initial", BinaryBelief(self.initial))
        object.__setattr__(self, "steps", tuple(self.steps))

    @property
    def horizon(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class ScenarioResult:
    trajectory: tuple
    inconsistent_at: int = None

    @property
    def consistent(self) -> bool:
        return self.inconsistent_at is None

    @property
    def final(self):
        return self.trajectory[-1]


def _lookup(model, name, kind):
    try:
        return model[name]
    except KeyError:
        raise ResolutionError(f"undeclared {kind} {name!r}") from None


def _advance(belief, step, model):
    action = _lookup(model, step.action, "action") if step.action is not None else None
    sensor = _lookup(model, step.sensor, "sensor") if step.sensor is not None else None
    if action is None:
        if step.observation is None:
            return belief
        if sensor is None:
            raise ResolutionError("an observation needs a sensor when no action occurs")
        return filter(belief, sensor, step.observation)
    if step.observation is None:
        return progress(belief, action)
    if isinstance(action, EpistemicAction):
        return filter(belief, action, step.observation)
    return filter(belief, action, step.observation, sensor)


def run_scenario(scenario: Scenario, model: Mapping) -> ScenarioResult:
    """Fold filtering over the scenario.

    ``model`` maps names to ontic or epistemic actions.  Time points where
    nothing happens keep the belief (inertia).  An impossible observation or
    an inexecutable action stops the run and is reported by its time index.
    """
    trajectory = [scenario.initial]
    for t, step in enumerate(scenario.steps, start=1):
        try:
            trajectory.append(_advance(trajectory[-1], step, model))
        except (Inconsistent, EmptyResult):
            return ScenarioResult(tuple(trajectory), inconsistent_at=t)
    return ScenarioResult(tuple(trajectory))


@dataclass(frozen=True, order=True)
class Explanation:
    """Exogenous events as ``(time point, event name)`` pairs, plus the outcome."""

    events: tuple
    final: frozenset = field(compare=False)
    trajectory: tuple = field(compare=False, repr=False, default=())


def extrapolate(scenario: Scenario, exogenous: Iterable[OnticAction], model: Mapping = None) -> tuple:
    """Complete a scenario with as few exogenous events as possible.

    Every step without a recorded action may host at most one exogenous
    event.  An event labelled ``t`` happens between time points ``t`` and
    ``t + 1``.  All consistent completions using the minimum number of
    events are returned, sorted.
    """
    exogenous = sorted(exogenous, key=lambda a: a.name)
    merged = dict(model or {})
    for e in exogenous:
        merged[e.name] = e
    slots = [i for i, step in enumerate(scenario.steps) if step.action is None]
    for count in range(len(slots) + 1):
        found = []
        for chosen in itertools.combinations(slots, count):
            for events in itertools.product(exogenous, repeat=count):
                steps = list(scenario.steps)
                for i, e in zip(chosen, events):
                    steps[i] = Step(e.name, steps[i].observation, steps[i].sensor)
                result = run_scenario(Scenario(scenario.initial, steps), merged)
                if result.consistent:
                    found.append(Explanation(tuple((i, e.name) for i, e in zip(chosen, events)),
                                             result.final, result.trajectory))
        if found:
            return tuple(sorted(found))
    raise NoExplanation("no assignment of exogenous events makes the scenario consistent")
