"""Propositional situation calculus with successor state axioms.

A successor state axiom ``P(do(x, s)) <-> body`` is stored as its body: a
formula over plain fluent atoms (implicitly about ``s``) and equality atoms
``x = A`` / ``x != A`` between the action variable ``x`` and declared action
constants.  Distinct constants denote distinct actions, so once ``x`` is
instantiated every equality folds to a constant.

Theory file syntax::

    fluents: U_a U_b
    actions: T_a T_b
    ssa U_a: (-U_a & x = T_a) | (U_a & x != T_a)

Queries::

    regress U_a after T_a, T_a
    regress U_a(do(T_a, do(T_a, S0)))
    valid U_a -> [T_a][T_a] U_a
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping

from . import logic
from .core import State
from .errors import NonExplicitSSA, ParseError, ResolutionError
from .logic import BOTTOM, TOP, Atom, Formula, FormulaParser, Not, conj, neg

ACTION_VARIABLE = "x"


class Situation:
    """``S0`` or ``do(A, sigma)``, stored as the action sequence from ``S0``."""

    __slots__ = ("actions",)

    def __init__(self, actions=()):
        self.actions = tuple(actions)

    def do(self, *actions) -> "Situation":
        return Situation(self.actions + tuple(actions))

    @property
    def depth(self) -> int:
        return len(self.actions)

    @property
    def last(self):
        return self.actions[-1]

    @property
    def parent(self) -> "Situation":
        return Situation(self.actions[:-1])

    def __eq__(self, other):
        return isinstance(other, Situation) and other.actions == self.actions

    def __hash__(self):
        return hash(("situation", self.actions))

    def __str__(self):
        text = "S0"
        for a in self.actions:
            text = f"do({a}, {text})"
        return text

    __repr__ = __str__


S0 = Situation()


class ActionEq(Formula):
    """Equality atom between two action terms (the variable ``x`` or constants)."""

    __slots__ = ("left", "right")

    def __init__(self, left: str, right: str):
        self.left = left
        self.right = right
        self._hash = hash(("action-eq", left, right))

    __hash__ = Formula.__hash__

    def __eq__(self, other):
        return isinstance(other, ActionEq) and (other.left, other.right) == (self.left, self.right)

    @property
    def ground(self) -> bool:
        return ACTION_VARIABLE not in (self.left, self.right)

    def evaluate(self, valuation):
        left = valuation.get(self.left, self.left) if self.left == ACTION_VARIABLE else self.left
        right = valuation.get(self.right, self.right) if self.right == ACTION_VARIABLE else self.right
        if ACTION_VARIABLE in (left, right):
            raise ValueError(f"action variable unbound in {self}")
        return left == right

    def atoms(self):
        return frozenset()

    def _text(self):
        return f"{self.left} = {self.right}"

    def _negated_text(self):
        return f"{self.left} != {self.right}"


def _bind(phi: Formula, action: str, situation=None) -> Formula:
    """Instantiate ``x := action`` (folding equalities) and tag fluent atoms."""
    def fn(leaf):
        if isinstance(leaf, ActionEq):
            left = action if leaf.left == ACTION_VARIABLE else leaf.left
            right = action if leaf.right == ACTION_VARIABLE else leaf.right
            return TOP if left == right else BOTTOM
        if isinstance(leaf, Atom) and situation is not None:
            return Atom(leaf.name, situation)
        return leaf
    return logic.map_leaves(phi, fn)


def _constants(phi: Formula) -> set:
    found = set()

    def walk(node):
        if isinstance(node, ActionEq):
            found.update(t for t in (node.left, node.right) if t != ACTION_VARIABLE)
        for c in node.children():
            walk(c)

    walk(phi)
    return found


class SitcalcParser(FormulaParser):
    """Formula parser extended with ``x = A``, ``x != A`` and ``P(situation)`` atoms."""

    def parse_atom(self, tok):
        kind = self.peek()[0]
        if kind in ("eq", "neq"):
            self.advance()
            rhs = self.expect("ident", "an action name")[1]
            node = ActionEq(tok[1], rhs)
            return Not(node) if kind == "neq" else node
        if kind == "lpar" and self.peek(1)[0] == "ident" and self.peek(1)[1] in ("S0", "do"):
            self.advance()
            situation = self.parse_situation()
            self.expect("rpar", "')'")
            return Atom(tok[1], situation)
        return super().parse_atom(tok)

    def parse_situation(self) -> Situation:
        tok = self.expect("ident", "a situation")
        if tok[1] == "S0":
            return S0
        if tok[1] != "do":
            raise self.error(f"expected S0 or do(...), found {tok[1]!r}", tok)
        self.expect("lpar", "'('")
        action = self.expect("ident", "an action name")[1]
        self.expect("comma", "','")
        inner = self.parse_situation()
        self.expect("rpar", "')'")
        return inner.do(action)


def parse_sitcalc_formula(text: str, line=None, offset=0) -> Formula:
    return SitcalcParser(text, line, offset).parse()


@dataclass(frozen=True)
class SSA:
    fluent: str
    body: Formula

    def __str__(self):
        return f"ssa {self.fluent}: {self.body}"


@dataclass
class SSATheory:
    """One successor state axiom per fluent over a set of action constants."""

    fluents: tuple
    actions: tuple
    axioms: dict = field(default_factory=dict)

    def __post_init__(self):
        self.fluents = tuple(self.fluents)
        self.actions = tuple(self.actions)
        self.axioms = {f: (b.body if isinstance(b, SSA) else b) for f, b in self.axioms.items()}
        missing = [f for f in self.fluents if f not in self.axioms]
        if missing:
            raise ResolutionError(f"no successor state axiom for {missing}")
        for f, body in self.axioms.items():
            if f not in self.fluents:
                raise ResolutionError(f"axiom for undeclared fluent {f!r}")
            self._check_body(f, body)

    def _check_body(self, fluent, body):
        for a in body.atoms():
            if a.tag is not None or a.name not in self.fluents:
                raise ResolutionError(f"axiom for {fluent}: unknown fluent atom {a}")

        def walk(node):
            if isinstance(node, ActionEq):
                if ACTION_VARIABLE not in (node.left, node.right):
                    raise ParseError(f"axiom for {fluent}: equality {node} must mention {ACTION_VARIABLE}")
                for t in (node.left, node.right):
                    if t != ACTION_VARIABLE and t not in self.actions:
                        raise ResolutionError(f"axiom for {fluent}: undeclared action {t!r}")
            for c in node.children():
                walk(c)

        walk(body)

    def instance(self, fluent: str, action: str, situation=None) -> Formula:
        """Body of the axiom for ``fluent`` with ``x := action``, atoms at ``situation``."""
        if action not in self.actions:
            raise ResolutionError(f"undeclared action {action!r}")
        return _bind(self.axioms[fluent], action, situation)

    def successor(self, state: State, action: str) -> State:
        """Explicit transition function induced by the axioms."""
        v = state.valuation()
        return State(tuple(self.instance(f, action).evaluate(v) for f in state.fluents), state.fluents)

    def __str__(self):
        lines = [f"fluents: {' '.join(self.fluents)}", f"actions: {' '.join(self.actions)}"]
        lines += [f"ssa {f}: {self.axioms[f]}" for f in self.fluents]
        return "\n".join(lines)


def parse_ssa_theory(text: str) -> SSATheory:
    fluents, actions, axioms = [], [], {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        m = re.match(r"\s*(fluents|actions)\s*:(.*)$", line)
        if m:
            target = fluents if m.group(1) == "fluents" else actions
            target.extend(n for n in re.split(r"[\s,]+", m.group(2)) if n)
            continue
        m = re.match(r"\s*ssa\s+([A-Za-z_][\w']*(?:-[\w']+)*)\s*:(.*)$", line)
        if m:
            if m.group(1) in axioms:
                raise ParseError(f"second axiom for {m.group(1)!r}", number, m.start(1) + 1)
            axioms[m.group(1)] = (number, parse_sitcalc_formula(m.group(2), number, m.start(2)))
            continue
        raise ParseError(f"unrecognized statement {line.strip()!r}", number, 1)
    if not fluents:
        fluents = list(axioms)
    if not actions:
        for _, body in axioms.values():
            actions.extend(sorted(_constants(body) - set(actions)))
    for name, (number, body) in axioms.items():
        if name not in fluents:
            raise ResolutionError(f"axiom for undeclared fluent {name!r}", number)
    return SSATheory(fluents, actions, {f: body for f, (_, body) in axioms.items()})


# ---------------------------------------------------------------------------
# regression

def _check_situated(phi: Formula):
    for a in phi.atoms():
        if not isinstance(a.tag, Situation):
            raise ValueError(f"atom {a} has no situation argument")


def regress_once(phi: Formula, theory: SSATheory) -> Formula:
    """Unfold every ``P(do(A, s))`` atom by one axiom application."""
    _check_situated(phi)

    def fn(leaf):
        if isinstance(leaf, Atom) and leaf.tag.depth:
            return theory.instance(leaf.name, leaf.tag.last, leaf.tag.parent)
        return leaf

    return logic.map_leaves(phi, fn)


def regress(phi: Formula, theory: SSATheory) -> Formula:
    """Eliminate ``do`` entirely: the result only mentions ``S0``."""
    _check_situated(phi)
    memo = {}

    def fn(leaf):
        if not isinstance(leaf, Atom) or not leaf.tag.depth:
            return leaf
        if leaf not in memo:
            step = theory.instance(leaf.name, leaf.tag.last, leaf.tag.parent)
            memo[leaf] = logic.map_leaves(step, fn)
        return memo[leaf]

    return logic.map_leaves(phi, fn)


def at(phi: Formula, situation: Situation) -> Formula:
    """Attach ``situation`` to every plain fluent atom of ``phi``."""
    return logic.retag(phi, situation)


def strip_situation(phi: Formula, situation: Situation = S0) -> Formula:
    return logic.retag(phi, None, situation)


def holds_after(phi0: Formula, actions, psi: Formula, theory: SSATheory) -> bool:
    """Validity of ``phi0(S0) -> psi(do(actions, S0))``, decided by regression."""
    regressed = strip_situation(regress(at(psi, S0.do(*actions)), theory))
    alphabet = [Atom(f) for f in theory.fluents]
    return logic.is_valid(logic.implies(phi0, regressed), alphabet)


# ---------------------------------------------------------------------------
# assignment actions

@dataclass(frozen=True)
class AssignmentAction:
    """Simultaneous assignments ``P := phi``; unlisted fluents keep their value."""

    action: str
    assignments: Mapping

    def apply(self, state: State) -> State:
        v = state.valuation()
        new = {f: phi.evaluate(v) for f, phi in self.assignments.items()}
        return State(tuple(new.get(f, x) for f, x in zip(state.fluents, state.values)), state.fluents)

    def __str__(self):
        if not self.assignments:
            return "{}"
        return "{ " + ", ".join(f"{f} := {phi}" for f, phi in self.assignments.items()) + " }"


def to_assignments(action: str, theory: SSATheory) -> AssignmentAction:
    """Translate the axioms into assignments for one action constant.

    The axioms must be explicit for ``action``: an axiom whose body does not
    mention ``action`` must leave its fluent unchanged.
    """
    out = {}
    for f in theory.fluents:
        body = theory.axioms[f]
        value = theory.instance(f, action)
        inert = logic.equivalent(value, Atom(f))
        if action not in _constants(body) and not inert:
            raise NonExplicitSSA(f"axiom for {f} changes {f} under {action} without mentioning it")
        if not inert:
            out[f] = value
    return AssignmentAction(action, out)


# ---------------------------------------------------------------------------
# modularity

def _as_literal(effect) -> Formula:
    if isinstance(effect, str):
        effect = logic.parse_formula(effect)
    if isinstance(effect, Atom) or (isinstance(effect, Not) and isinstance(effect.arg, Atom)):
        return effect
    raise ValueError(f"effect {effect} is not a literal")


def modularity_check(effect_laws, executability: Mapping, statics=()) -> frozenset:
    """Static laws implied by the effect laws but not by the static laws.

    ``effect_laws`` holds triples ``(precondition, action, literal)`` read
    as ``precondition -> [action] literal``.  For two laws of one action
    with complementary literals, executability ``E`` of the action forces
    ``-(E & P1 & P2)``; it is reported when the static laws do not already
    entail it.
    """
    statics = conj([logic.as_formula(s) for s in statics])
    laws = [(logic.as_formula(pre), action, _as_literal(lit)) for pre, action, lit in effect_laws]
    found = set()
    for i, (p1, a1, l1) in enumerate(laws):
        for p2, a2, l2 in laws[i + 1:]:
            if a1 != a2 or neg(l1) != l2:
                continue
            executable = logic.as_formula(executability.get(a1, TOP))
            clash = conj(executable, p1, p2)
            if logic.is_satisfiable(conj(clash, statics)):
                found.add(neg(clash))
    return frozenset(found)


def modularity_of_domain(domain) -> frozenset:
    """:func:`modularity_check` on the rules, executability and static laws of a domain."""
    laws = []
    for name, action in domain.actions.items():
        for rules in action.branches:
            laws.extend((r.condition_formula(), name, r.effect.formula()) for r in rules)
    return modularity_check(laws, domain.executability, [law.formula for law in domain.statics])


# ---------------------------------------------------------------------------
# queries

_NAME = r"[A-Za-z_][\w']*(?:-[\w']+)*"


def parse_regress_query(text: str) -> Formula:
    """``<formula> after A1, A2`` (or a formula with explicit situations)."""
    m = re.match(rf"^\s*(?:regress\s+)?(.*?)\s+after\s+((?:{_NAME}\s*,\s*)*{_NAME})\s*$", text)
    if m:
        psi = logic.parse_formula(m.group(1))
        actions = [a.strip() for a in m.group(2).split(",")]
        return at(psi, S0.do(*actions))
    body = re.sub(r"^\s*regress\s+", "", text)
    return parse_sitcalc_formula(body)


def parse_valid_query(text: str):
    """``phi0 -> [A1][A2] psi`` into ``(phi0, [A1, A2], psi)``."""
    body = re.sub(r"^\s*valid\s+", "", text)
    start = body.find("[")
    if start < 0:
        raise ParseError("expected an action sequence [A1][A2]...", None, 1)
    head = body[:start].rstrip()
    phi0 = TOP
    if head:
        if not head.endswith("->"):
            raise ParseError("expected '<formula> -> [A]... <formula>'", None, start + 1)
        phi0 = logic.parse_formula(head[:-2])
    m = re.match(rf"((?:\[\s*{_NAME}\s*\]\s*)+)(.*)$", body[start:])
    if m is None:
        raise ParseError("malformed action sequence", None, start + 1)
    actions = re.findall(_NAME, m.group(1))
    psi = logic.parse_formula(m.group(2), None, start + m.start(2))
    return phi0, actions, psi
