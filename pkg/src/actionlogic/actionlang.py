"""Causal-rule action language: parser, compiler and symbolic reasoning.

A domain declares fluents (basic ones, on which actions act, and derived ones
fixed by static laws), actions described by causal rules ``if c causes l``,
optional nondeterministic branches, static laws and executability
conditions.  :func:`compile` turns an action into a two-slice formula over
``f@t`` and ``f@t1``; progression and regression are then conjunction
followed by forgetting one of the slices.

Domain file syntax, one statement per line (``#`` starts a comment, an
action body may span lines until its closing brace)::

    fluents: U_a U_b
    derived: L
    static: (U_a & U_b | -U_a & -U_b) <-> L
    static: Outside & -Umbrella & Rain causes -Dry
    action T_a { if U_a causes -U_a ; if -U_a causes U_a }
    action Toss { causes Heads | causes -Heads }
    executable T_a if <formula>
    strips A pre: p & -q eff: r, if s then -t

Inside an action body ``;`` separates rules and ``|`` separates
nondeterministic branches.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from . import logic
from .core import OnticAction, State, StateSpace
from .errors import (IncompleteLaws, Inexecutable, ParseError, PreconditionFailure,
                     ResolutionError, SizeLimit, UndefinedProgression)
from .logic import BOTTOM, T0, T1, TOP, Atom, Formula, Not, conj, disj, iff, neg

MAX_TRANSITION_FLUENTS = 12

NAME = r"[A-Za-z_][A-Za-z0-9_']*(?:-[A-Za-z0-9_']+)*"


@dataclass(frozen=True, order=True)
class Literal:
    fluent: str
    positive: bool = True

    def __neg__(self):
        return Literal(self.fluent, not self.positive)

    def formula(self, tag=None) -> Formula:
        return logic.literal(self.fluent, self.positive, tag)

    def holds_in(self, state: State) -> bool:
        return state[self.fluent] == self.positive

    def __str__(self):
        return self.fluent if self.positive else "-" + self.fluent


def _conjunction(literals, tag=None) -> Formula:
    return conj([lit.formula(tag) for lit in literals])


@dataclass(frozen=True)
class CausalRule:
    """``if condition then action causes effect``; an empty condition is true."""

    condition: tuple
    effect: Literal
    action: str = None

    def condition_formula(self, tag=None) -> Formula:
        return _conjunction(self.condition, tag)

    def fires_in(self, state: State) -> bool:
        return all(lit.holds_in(state) for lit in self.condition)

    def __str__(self):
        head = f"if {' & '.join(map(str, self.condition))} " if self.condition else ""
        return f"{head}causes {self.effect}"


@dataclass(frozen=True)
class CausalAction:
    """Action given by causal rules; more than one branch makes it nondeterministic."""

    name: str
    branches: tuple = ((),)

    @property
    def deterministic(self) -> bool:
        return len(self.branches) == 1

    @property
    def rules(self) -> tuple:
        return tuple(r for b in self.branches for r in b)


@dataclass(frozen=True)
class StripsAction:
    name: str
    precondition: tuple = ()
    effects: tuple = ()

    @property
    def branches(self) -> tuple:
        return (self.effects,)

    @property
    def rules(self) -> tuple:
        return self.effects

    deterministic = True


@dataclass(frozen=True)
class StaticLaw:
    """A state constraint (``kind="formula"``) or a causal static rule (``kind="causal"``)."""

    formula: Formula
    kind: str = "formula"
    rule: CausalRule = None

    @classmethod
    def causal(cls, rule: CausalRule):
        return cls(logic.implies(rule.condition_formula(), rule.effect.formula()), "causal", rule)


@dataclass
class Domain:
    fluents: tuple
    derived: frozenset = frozenset()
    actions: dict = field(default_factory=dict)
    statics: tuple = ()
    executability: dict = field(default_factory=dict)

    @property
    def basic(self) -> tuple:
        return tuple(f for f in self.fluents if f not in self.derived)

    def space(self) -> StateSpace:
        return StateSpace(self.fluents)

    def action(self, name):
        try:
            return self.actions[name]
        except KeyError:
            raise ResolutionError(f"undeclared action {name!r}") from None

    def static_formula(self, tag=None) -> Formula:
        """All static laws as one state constraint."""
        return logic.retag(conj([law.formula for law in self.statics]), tag)

    def strips_action(self, name) -> StripsAction:
        """View a deterministic causal-rule action as a STRIPS action."""
        action = self.action(name)
        if isinstance(action, StripsAction):
            return action
        if not action.deterministic:
            raise ValueError(f"{name} is nondeterministic, not STRIPS-expressible")
        pre = self.executability.get(name, TOP)
        try:
            precondition = _literals_of(pre)
        except ValueError:
            raise ValueError(f"executability of {name} is not a conjunction of literals") from None
        return StripsAction(name, precondition, action.branches[0])

    def progress_state(self, state: State, name) -> State:
        return strips_progress(state, self.strips_action(name), self.statics, self.derived)


@dataclass(frozen=True)
class CompiledActionTheory:
    """Two-slice formula ``sigma`` over ``f@t`` / ``f@t1`` for one action."""

    action: str
    fluents: tuple
    sigma: Formula
    executability: Formula = TOP
    deterministic: bool = True

    def atoms(self, tag) -> list:
        return [Atom(f, tag) for f in self.fluents]

    def space(self) -> StateSpace:
        return StateSpace(self.fluents)


# ---------------------------------------------------------------------------
# parser

def _literals_of(phi: Formula) -> tuple:
    if phi == TOP:
        return ()
    parts = phi.args if isinstance(phi, logic.And) else (phi,)
    out = []
    for p in parts:
        if isinstance(p, Atom) and p.tag is None:
            out.append(Literal(p.name, True))
        elif isinstance(p, Not) and isinstance(p.arg, Atom) and p.arg.tag is None:
            out.append(Literal(p.arg.name, False))
        else:
            raise ValueError(f"{p} is not a literal")
    return tuple(out)


class _DomainParser:
    def __init__(self, text):
        self.text = text
        self.fluents = []
        self.derived = []
        self.actions = {}
        self.statics = []
        self.executability = {}
        self.positions = {}

    def statements(self):
        pending = None
        for number, raw in enumerate(self.text.splitlines(), start=1):
            line = raw.split("#", 1)[0].rstrip()
            if pending is not None:
                start, buf = pending
                buf += " " + line.strip()
                if "}" in line:
                    pending = None
                    yield start, buf
                else:
                    pending = (start, buf)
                continue
            if not line.strip():
                continue
            if "{" in line and "}" not in line:
                pending = (number, line)
                continue
            yield number, line
        if pending is not None:
            raise ParseError("unterminated action body", pending[0], len(pending[1]) + 1)

    def formula(self, text, line, offset):
        return logic.parse_formula(text, line, offset)

    def literals(self, text, line, offset, what):
        phi = self.formula(text, line, offset)
        try:
            return _literals_of(phi)
        except ValueError:
            raise ParseError(f"{what} must be a conjunction of literals", line, offset + 1) from None

    def literal(self, text, line, offset):
        lits = self.literals(text, line, offset, "an effect")
        if len(lits) != 1:
            raise ParseError("an effect must be a single literal", line, offset + 1)
        return lits[0]

    def rule(self, text, line, offset, action=None):
        m = re.match(r"\s*(?:(?:if\s+)?(?P<cond>.*?)\s+(?:then\s+)?)?causes\s+(?P<eff>.*?)\s*$", text)
        if m is None:
            raise ParseError(f"expected 'if <condition> causes <literal>', found {text.strip()!r}",
                             line, offset + 1)
        cond = ()
        if m.group("cond"):
            cond = self.literals(m.group("cond"), line, offset + m.start("cond"), "a condition")
        effect = self.literal(m.group("eff"), line, offset + m.start("eff"))
        self.positions.setdefault(("effect", effect.fluent), (line, offset + m.start("eff") + 1))
        return CausalRule(cond, effect, action)

    def parse(self) -> Domain:
        for line, text in self.statements():
            self.statement(line, text)
        return self.finish()

    def statement(self, line, text):
        m = re.match(r"\s*(fluents|derived)\s*:(.*)$", text)
        if m:
            names = [n for n in re.split(r"[\s,]+", m.group(2)) if n]
            for n in names:
                if not re.fullmatch(NAME, n):
                    raise ParseError(f"invalid fluent name {n!r}", line, text.index(n) + 1)
            target = self.fluents if m.group(1) == "fluents" else self.derived
            for n in names:
                if n in target:
                    raise ParseError(f"fluent {n!r} declared twice", line, text.index(n) + 1)
                target.append(n)
            return
        m = re.match(r"\s*static\s*:(.*)$", text)
        if m:
            body = m.group(1)
            if re.search(r"\bcauses\b", body):
                rule = self.rule(body, line, m.start(1))
                self.statics.append((line, StaticLaw.causal(rule)))
            else:
                self.statics.append((line, StaticLaw(self.formula(body, line, m.start(1)))))
            return
        m = re.match(rf"\s*action\s+({NAME})\s*\{{(.*)\}}\s*$", text)
        if m:
            name = m.group(1)
            if name in self.actions:
                raise ParseError(f"action {name!r} declared twice", line, m.start(1) + 1)
            branches = []
            offset = m.start(2)
            for branch_text in m.group(2).split("|"):
                rules = []
                inner = offset
                for rule_text in branch_text.split(";"):
                    if rule_text.strip():
                        rules.append(self.rule(rule_text, line, inner, name))
                    inner += len(rule_text) + 1
                branches.append(tuple(rules))
                offset += len(branch_text) + 1
            self.actions[name] = (line, CausalAction(name, tuple(branches)))
            return
        m = re.match(rf"\s*executable\s+({NAME})(?:\s+if\s+(.*))?$", text)
        if m:
            cond = self.formula(m.group(2), line, m.start(2)) if m.group(2) else TOP
            prev = self.executability.get(m.group(1), (line, BOTTOM))[1]
            self.executability[m.group(1)] = (line, disj(prev, cond))
            return
        m = re.match(rf"\s*strips\s+({NAME})\s*(.*)$", text)
        if m:
            self.strips(line, text, m)
            return
        raise ParseError(f"unrecognized statement {text.strip()!r}", line, 1)

    def strips(self, line, text, m):
        name = m.group(1)
        if name in self.actions:
            raise ParseError(f"action {name!r} declared twice", line, m.start(1) + 1)
        rest, base = m.group(2), m.start(2)
        parts = re.match(r"(?:pre\s*:(?P<pre>.*?))?\s*(?:eff\s*:(?P<eff>.*))?$", rest)
        if parts is None or (parts.group("pre") is None and parts.group("eff") is None and rest.strip()):
            raise ParseError("expected 'pre: <literals> eff: <effects>'", line, base + 1)
        pre = ()
        if parts.group("pre") is not None and parts.group("pre").strip():
            pre = self.literals(parts.group("pre"), line, base + parts.start("pre"), "a precondition")
        effects = []
        if parts.group("eff") is not None:
            offset = base + parts.start("eff")
            for item in parts.group("eff").split(","):
                if item.strip():
                    cm = re.match(r"\s*if\s+(.*?)\s+then\s+(.*?)\s*$", item)
                    if cm:
                        cond = self.literals(cm.group(1), line, offset + cm.start(1), "a condition")
                        eff = self.literal(cm.group(2), line, offset + cm.start(2))
                    else:
                        cond, eff = (), self.literal(item, line, offset)
                    self.positions.setdefault(("effect", eff.fluent), (line, offset + 1))
                    effects.append(CausalRule(cond, eff, name))
                offset += len(item) + 1
        for rule in effects:
            if not logic.is_satisfiable(rule.condition_formula()):
                raise ParseError(f"inconsistent condition in {rule}", line, base + 1)
        self.actions[name] = (line, StripsAction(name, pre, tuple(effects)))

    def finish(self) -> Domain:
        fluents = list(self.fluents) + [d for d in self.derived if d not in self.fluents]
        derived = frozenset(self.derived)
        known = set(fluents)

        def check_atoms(phi, line):
            for a in phi.atoms():
                if a.tag is not None:
                    raise ParseError(f"time-tagged atom {a} outside a compiled theory", line)
                if a.name not in known:
                    raise ResolutionError(f"undeclared fluent {a.name!r}", line)

        actions = {}
        for name, (line, action) in self.actions.items():
            lits = list(getattr(action, "precondition", ()))
            for rule in action.rules:
                lits.extend(rule.condition)
                if rule.effect.fluent in derived:
                    where = self.positions.get(("effect", rule.effect.fluent), (line, None))
                    raise ParseError(f"derived fluent {rule.effect.fluent!r} cannot be an action effect",
                                     *where)
                lits.append(rule.effect)
            for lit in lits:
                if lit.fluent not in known:
                    raise ResolutionError(f"undeclared fluent {lit.fluent!r} in action {name}", line)
            actions[name] = action
        statics = []
        for line, law in self.statics:
            check_atoms(law.formula, line)
            statics.append(law)
        executability = {}
        for name, (line, cond) in self.executability.items():
            if name not in actions:
                raise ResolutionError(f"undeclared action {name!r}", line)
            check_atoms(cond, line)
            executability[name] = cond
        return Domain(tuple(fluents), derived, actions, tuple(statics), executability)


def parse_domain(text: str) -> Domain:
    return _DomainParser(text).parse()


def domain_to_text(domain: Domain) -> str:
    """Render a domain back into the DSL."""
    lines = [f"fluents: {' '.join(domain.basic)}"]
    if domain.derived:
        lines.append(f"derived: {' '.join(f for f in domain.fluents if f in domain.derived)}")
    for law in domain.statics:
        if law.kind == "causal":
            lines.append(f"static: {law.rule}")
        else:
            lines.append(f"static: {law.formula}")
    for name, action in domain.actions.items():
        if isinstance(action, StripsAction):
            effs = ", ".join(f"if {' & '.join(map(str, r.condition))} then {r.effect}" if r.condition
                             else str(r.effect) for r in action.effects)
            pre = " & ".join(map(str, action.precondition)) or "true"
            lines.append(f"strips {name} pre: {pre} eff: {effs}")
        else:
            body = " | ".join(" ; ".join(map(str, b)) for b in action.branches)
            lines.append(f"action {name} {{ {body} }}")
    for name, cond in domain.executability.items():
        lines.append(f"executable {name} if {cond}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# compilation

def gamma(rules, effect: Literal, tag=T0) -> Formula:
    """Disjunction of the conditions of ``rules`` whose conclusion is ``effect``."""
    return disj([r.condition_formula(tag) for r in rules if r.effect == effect])


def _branch_theory(domain: Domain, rules) -> Formula:
    causal_statics = [law.rule for law in domain.statics if law.kind == "causal"]
    frames = []
    for f in domain.basic:
        pos, neg_ = Literal(f, True), Literal(f, False)
        made_true = disj(gamma(rules, pos, T0), gamma(causal_statics, pos, T1))
        made_false = disj(gamma(rules, neg_, T0), gamma(causal_statics, neg_, T1))
        frames.append(iff(Atom(f, T1), disj(made_true, conj(Atom(f, T0), neg(made_false)))))
    return conj(frames)


def compile(action_name: str, domain: Domain) -> CompiledActionTheory:
    """Two-slice theory of an action.

    Per basic fluent ``f``:
    ``f@t1 <-> G(f) | (f@t & -G(-f))`` where ``G(l)`` disjoins the conditions
    of the rules concluding ``l`` (action rules read at ``t``, causal static
    rules at ``t1``).  State-constraint laws are conjoined at both slices,
    causal static rules only at ``t1``, executability only at ``t``.
    Nondeterministic actions disjoin their branch theories.
    """
    action = domain.action(action_name)
    executable = domain.executability.get(action_name, TOP)
    if isinstance(action, StripsAction):
        executable = conj(_conjunction(action.precondition), executable)
    constraints = [law.formula for law in domain.statics if law.kind == "formula"]
    causal_material = [law.formula for law in domain.statics if law.kind == "causal"]
    shared = conj(
        logic.retag(conj(constraints), T0),
        logic.retag(conj(constraints + causal_material), T1),
        logic.retag(executable, T0),
    )
    branches = [_branch_theory(domain, rules) for rules in action.branches]
    sigma = conj(disj(branches), shared)
    return CompiledActionTheory(action_name, tuple(domain.fluents), sigma, executable,
                                action.deterministic)


def compile_all(domain: Domain) -> dict:
    return {name: compile(name, domain) for name in domain.actions}


# ---------------------------------------------------------------------------
# symbolic progression and regression

def _check_untimed(phi: Formula, fluents):
    for a in phi.atoms():
        if a.tag is not None:
            raise ValueError(f"expected an untimed formula, found {a}")
        if a.name not in fluents:
            raise ResolutionError(f"undeclared fluent {a.name!r}")


def progress_formula(phi: Formula, theory: CompiledActionTheory) -> Formula:
    """``forget(phi@t & sigma, F@t)`` renamed back to untimed fluents."""
    _check_untimed(phi, theory.fluents)
    joint = conj(logic.retag(phi, T0), theory.sigma)
    result = logic.retag(logic.forget(joint, theory.atoms(T0)), None, T1)
    if not logic.is_satisfiable(result, [Atom(f) for f in theory.fluents]):
        raise Inexecutable(f"{theory.action} is not executable in any model of {phi}")
    return result


def regress_weak_formula(psi: Formula, theory: CompiledActionTheory) -> Formula:
    """States from which the action may reach ``psi``."""
    _check_untimed(psi, theory.fluents)
    joint = conj(logic.retag(psi, T1), theory.sigma)
    return logic.retag(logic.forget(joint, theory.atoms(T1)), None, T0)


def regress_strong_formula(psi: Formula, theory: CompiledActionTheory) -> Formula:
    """States where the action is executable and every outcome satisfies ``psi``."""
    _check_untimed(psi, theory.fluents)
    later = theory.atoms(T1)
    executable = logic.forget(theory.sigma, later)
    escapes = logic.forget(conj(theory.sigma, neg(logic.retag(psi, T1))), later)
    return logic.retag(conj(executable, neg(escapes)), None, T0)


def enumerate_transitions(theory: CompiledActionTheory) -> OnticAction:
    """Explicit relation ``R(s) = {s' | (s@t, s'@t1) satisfies sigma}``."""
    n = len(theory.fluents)
    if n > MAX_TRANSITION_FLUENTS:
        raise SizeLimit(f"{n} fluents exceed the transition enumeration cap of {MAX_TRANSITION_FLUENTS}")
    space = theory.space()
    states = space.states
    relation = {}
    if 2 * n <= 20:
        table = logic.truth_table(theory.sigma, theory.atoms(T0) + theory.atoms(T1))
        table = table.reshape(1 << n, 1 << n)
        for i, s in enumerate(states):
            relation[s] = [states[j] for j in np.flatnonzero(table[i])]
    else:
        later = theory.atoms(T1)
        for s in states:
            fixed = logic.substitute(theory.sigma, {Atom(f, T0): logic.TOP if v else BOTTOM
                                                    for f, v in zip(s.fluents, s.values)})
            relation[s] = [states[j] for j in np.flatnonzero(logic.truth_table(fixed, later))]
    return OnticAction(theory.action, relation)


# ---------------------------------------------------------------------------
# STRIPS with derived fluents

def _law_formula(law) -> Formula:
    return law.formula if isinstance(law, StaticLaw) else law


def strips_progress(state: State, action: StripsAction, laws=(), derived=()) -> State:
    """Progress one state by a STRIPS action, then complete derived fluents.

    Basic fluents not touched by a firing rule keep their value; derived
    fluents are recomputed from the static laws, which must determine them
    uniquely.
    """
    laws = conj([_law_formula(law) for law in laws])
    derived = [f for f in state.fluents if f in set(derived)]
    if not all(lit.holds_in(state) for lit in action.precondition):
        raise PreconditionFailure(f"{action.name}: precondition fails in {state}")
    if not state.satisfies(laws):
        raise ValueError(f"{state} violates the static laws")
    fired = [r for r in action.effects if r.fires_in(state)]
    effects = {}
    for r in fired:
        prev = effects.get(r.effect.fluent)
        if prev is not None and prev != r.effect.positive:
            raise UndefinedProgression(
                f"{action.name}: complementary effects on {r.effect.fluent} in {state}")
        effects[r.effect.fluent] = r.effect.positive
    bad = [f for f in effects if f in derived]
    if bad:
        raise ValueError(f"derived fluents {bad} cannot be action effects")
    basic = {f: effects.get(f, v) for f, v in state.as_dict().items() if f not in derived}
    completions = []
    for bits in np.ndindex(*(2,) * len(derived)):
        values = dict(basic)
        values.update({f: bool(b) for f, b in zip(derived, bits)})
        candidate = State(tuple(values[f] for f in state.fluents), state.fluents)
        if candidate.satisfies(laws):
            completions.append(candidate)
    if len(completions) != 1:
        raise IncompleteLaws(
            f"static laws admit {len(completions)} completions of the derived fluents after {action.name}")
    return completions[0]


def detect_inconsistent_rules(action_name: str, domain: Domain) -> frozenset:
    """Conjoint conditions of rules with complementary effects, when satisfiable."""
    action = domain.action(action_name)
    laws = domain.static_formula()
    alphabet = [Atom(f) for f in domain.fluents]
    found = set()
    for rules in action.branches:
        for i, r1 in enumerate(rules):
            for r2 in rules[i + 1:]:
                if r1.effect != -r2.effect:
                    continue
                both = conj(r1.condition_formula(), r2.condition_formula())
                if logic.is_satisfiable(conj(both, laws), alphabet):
                    found.add(both)
    return frozenset(found)
