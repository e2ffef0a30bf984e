"""Stochastic dynamics over enumerated states.

Survival-style persistence of a single fluent, Markov-chain progression and
exact stepping of two-slice dynamic Bayesian networks.

Network text format::

    dbn {
      node Alive parents: Alive@t cpt: 0.0 0.95
      node Seen parents: Alive@t1 cpt: 0.1 0.8
    }

A node lists its parents (``@t`` is the default slice) and one
probability of being true per parent assignment, with rows ordered like a
truth table over the parents (first parent most significant, false before
true).  A node without parents has a single row.
"""

from __future__ import annotations

import graphlib
import math
import re
from dataclasses import dataclass

import numpy as np

from .core import PROB_TOL, ProbBelief, StateSpace, StochasticAction, progress_prob
from .errors import CyclicSlice, NonMarkovian, ParseError, ResolutionError, SizeLimit

MAX_DBN_FLUENTS = 12


@dataclass(frozen=True)
class SurvivalModel:
    """Exponential decay ``exp(-rate * duration)``; ``resolution`` is one time step."""

    rate: float
    resolution: float = 1.0

    def __post_init__(self):
        if not self.rate >= 0:
            raise ValueError("decay rate must be nonnegative")
        if not self.resolution > 0:
            raise ValueError("resolution must be positive")

    def persistence(self, duration=None) -> float:
        """``Pr(f now | f duration ago)``."""
        duration = self.resolution if duration is None else duration
        if duration < 0:
            raise ValueError("duration must be nonnegative")
        return math.exp(-self.rate * duration)


def survive(p0: float, sm: SurvivalModel, duration=None, revival: float = 0.0) -> float:
    """Probability that the fluent holds after ``duration`` (default: one step).

    ``revival`` is the probability of becoming true again when it was false.
    """
    stay = sm.persistence(duration)
    return stay * p0 + revival * (1.0 - p0)


@dataclass(frozen=True)
class EventRates:
    """Per-step probabilities of an event making the fluent true / false."""

    p_make_true: float = 0.0
    p_make_false: float = 0.0

    def __post_init__(self):
        for p in (self.p_make_true, self.p_make_false):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"event probability {p} outside [0, 1]")


def persist_with_events(p_prev: float, er: EventRates, sm: SurvivalModel, duration=None) -> float:
    """Persistence combined with independent events.

    A make-false event, then a make-true event, may occur; the make-true
    event wins.  Without events the value decays as in :func:`survive`.
    """
    kept = survive(p_prev, sm, duration)
    return er.p_make_true + (1.0 - er.p_make_true) * (1.0 - er.p_make_false) * kept


# ---------------------------------------------------------------------------
# two-slice networks

@dataclass(frozen=True)
class Node:
    parents: tuple = ()  # (fluent, slice) with slice 0 (t) or 1 (t+1)
    cpt: tuple = (0.5,)


class TwoSliceNetwork:
    def __init__(self, nodes, fluents=None):
        self.nodes = {f: Node(tuple((p, int(s)) for p, s in n.parents), tuple(map(float, n.cpt)))
                      for f, n in dict(nodes).items()}
        self.fluents = tuple(fluents) if fluents is not None else tuple(self.nodes)
        missing = set(self.fluents) ^ set(self.nodes)
        if missing:
            raise ResolutionError(f"fluents without a node or nodes without a fluent: {sorted(missing)}")
        graph = {}
        for f, node in self.nodes.items():
            for p, s in node.parents:
                if p not in self.nodes:
                    raise ResolutionError(f"node {f}: unknown parent {p!r}")
                if s not in (0, 1):
                    raise NonMarkovian(f"node {f}: edge from {p} spans more than one step")
            if len(set(node.parents)) != len(node.parents):
                raise ValueError(f"node {f}: repeated parent")
            if len(node.cpt) != 1 << len(node.parents):
                raise ValueError(f"node {f}: expected {1 << len(node.parents)} CPT rows, got {len(node.cpt)}")
            for q in node.cpt:
                if not -PROB_TOL <= q <= 1 + PROB_TOL:
                    raise ValueError(f"node {f}: probability {q} outside [0, 1]")
            graph[f] = {p for p, s in node.parents if s == 1}
        try:
            self.order = tuple(graphlib.TopologicalSorter(graph).static_order())
        except graphlib.CycleError as e:
            raise CyclicSlice(f"cycle within the t+1 slice: {' -> '.join(e.args[1])}") from None

    @property
    def space(self) -> StateSpace:
        return StateSpace(self.fluents)

    def _check_size(self):
        if len(self.fluents) > MAX_DBN_FLUENTS:
            raise SizeLimit(f"{len(self.fluents)} fluents exceed the DBN cap of {MAX_DBN_FLUENTS}")

    def row(self, index: int) -> np.ndarray:
        """Distribution over next states (canonical order) from the state at ``index``."""
        n = len(self.fluents)
        size = 1 << n
        nxt = np.arange(size)
        pos = {f: j for j, f in enumerate(self.fluents)}

        def bit(value, f):
            return (value >> (n - 1 - pos[f])) & 1

        out = np.ones(size)
        for f in self.order:
            node = self.nodes[f]
            r = np.zeros(size, dtype=np.int64)
            for p, s in node.parents:
                r = (r << 1) | (bit(nxt, p) if s == 1 else bit(index, p))
            q = np.asarray(node.cpt)[r]
            out *= np.where(bit(nxt, f) == 1, q, 1.0 - q)
        return out

    def matrix(self) -> np.ndarray:
        self._check_size()
        return np.vstack([self.row(i) for i in range(1 << len(self.fluents))])

    def as_stochastic_action(self, name: str = "dbn") -> StochasticAction:
        return StochasticAction.from_matrix(name, self.space.states, self.matrix())

    def __str__(self):
        lines = ["dbn {"]
        for f in self.fluents:
            node = self.nodes[f]
            parents = " ".join(f"{p}@{'t1' if s else 't'}" for p, s in node.parents)
            cpt = " ".join(f"{q:g}" for q in node.cpt)
            lines.append(f"  node {f} parents: {parents} cpt: {cpt}".replace("parents:  ", "parents: "))
        lines.append("}")
        return "\n".join(lines)


def _aligned(b: ProbBelief, space: StateSpace):
    """Mass vector of ``b`` in the canonical order of ``space``."""
    vec = np.zeros(len(space))
    for s, p in b.items():
        if set(s.fluents) != set(space.fluents):
            raise ResolutionError(f"belief over {s.fluents} does not match network fluents {space.fluents}")
        vec[space.index(space.state(s.as_dict()))] += p
    return vec


def dbn_step(b: ProbBelief, net: TwoSliceNetwork) -> ProbBelief:
    """Exact one-step update of a joint distribution through the network."""
    net._check_size()
    space = net.space
    prior = _aligned(b, space)
    out = np.zeros(len(space))
    for i in np.flatnonzero(prior > 0):
        out += prior[i] * net.row(int(i))
    out /= math.fsum(out)
    states = space.states
    return ProbBelief({states[i]: float(out[i]) for i in np.flatnonzero(out > 0)})


def chain_progress(b: ProbBelief, action: StochasticAction, k: int) -> ProbBelief:
    """``k`` successive applications of the same stochastic action."""
    if k < 0:
        raise ValueError("number of steps must be nonnegative")
    for _ in range(k):
        b = progress_prob(b, action)
    return b


def marginal(b: ProbBelief, fluent: str) -> float:
    return math.fsum(p for s, p in b.items() if s[fluent])


# ---------------------------------------------------------------------------
# text format

_NODE = re.compile(r"node\s+(?P<name>\S+)\s*(?:parents\s*:(?P<parents>.*?))?\s*cpt\s*:(?P<cpt>[^}]*?)(?=\bnode\b|$)",
                   re.S)
_PARENT = re.compile(r"^([A-Za-z_][\w']*(?:-[\w']+)*)(?:@(\S+))?$")


def parse_dbn(text: str) -> TwoSliceNetwork:
    clean = "\n".join(line.split("#", 1)[0] for line in text.splitlines())
    m = re.fullmatch(r"\s*dbn\s*\{(?P<body>.*)\}\s*", clean, re.S)
    if m is None:
        raise ParseError("expected 'dbn { ... }'", 1, 1)
    body, base = m.group("body"), m.start("body")

    def where(offset):
        pos = base + offset
        line = clean.count("\n", 0, pos) + 1
        return line, pos - (clean.rfind("\n", 0, pos) + 1) + 1

    nodes = {}
    pos = 0
    for nm in _NODE.finditer(body):
        gap = body[pos:nm.start()].strip()
        if gap:
            raise ParseError(f"unexpected text {gap.split()[0]!r}", *where(pos + body[pos:].index(gap)))
        pos = nm.end()
        name = nm.group("name")
        if name in nodes:
            raise ParseError(f"second node for {name!r}", *where(nm.start("name")))
        parents = []
        for token in (nm.group("parents") or "").split():
            pm = _PARENT.match(token)
            if pm is None:
                raise ParseError(f"bad parent {token!r}", *where(nm.start("parents")))
            tag = pm.group(2) or "t"
            if tag not in ("t", "t1", "t+1"):
                raise NonMarkovian(f"node {name}: parent {token} is not in slice t or t+1",
                                   *where(nm.start("parents")))
            parents.append((pm.group(1), 0 if tag == "t" else 1))
        try:
            cpt = [float(x) for x in nm.group("cpt").split()]
        except ValueError:
            raise ParseError(f"node {name}: CPT entries must be decimals", *where(nm.start("cpt"))) from None
        nodes[name] = Node(tuple(parents), tuple(cpt))
    if body[pos:].strip():
        raise ParseError("unexpected trailing text", *where(pos))
    try:
        return TwoSliceNetwork(nodes)
    except (ValueError,) as e:
        raise ParseError(str(e)) from None
