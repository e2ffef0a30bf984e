"""Propositional formulas over (possibly time-tagged) atoms.

Formulas are immutable trees.  Two families of constructors exist: the node
classes themselves (:class:`And`, :class:`Or`, ...) build exactly what they
are given, which is what the parser uses so that text round-trips; the
lower-case helpers (:func:`conj`, :func:`disj`, :func:`neg`, :func:`implies`,
:func:`iff`) apply a fixed rewrite set on the fly: constant folding,
flattening, idempotence, complementary pairs and double negation.  Everything
that manufactures formulas (substitution, forgetting, compilation) goes
through the helpers.

Semantics is computed by truth tables: :func:`truth_table` evaluates a formula
on every assignment of an ordered atom list at once, as a numpy boolean
vector.  Row ``i`` assigns atom ``j`` the bit ``(i >> (n - 1 - j)) & 1``, so the
first atom is the most significant one and rows are in lexicographic order
with false < true.
"""

from __future__ import annotations

import re
from typing import Iterable, Mapping

import numpy as np

from .errors import ParseError, SizeLimit

# time tags of atoms inside two-slice action theories
T0 = 0
T1 = 1

MAX_TABLE_ATOMS = 24


class Formula:
    __slots__ = ("_hash", "_atoms")
    prec = 6

    def __and__(self, other):
        return conj(self, other)

    def __or__(self, other):
        return disj(self, other)

    def __invert__(self):
        return neg(self)

    def implies(self, other):
        return implies(self, other)

    def iff(self, other):
        return iff(self, other)

    def __hash__(self):
        return self._hash

    def __str__(self):
        return to_text(self)

    def __repr__(self):
        return f"{type(self).__name__}<{to_text(self)}>"

    def children(self):
        return ()

    def atoms(self) -> frozenset:
        """Propositional atoms occurring in the formula."""
        try:
            return self._atoms
        except AttributeError:
            pass
        if isinstance(self, Atom):
            found = frozenset((self,))
        else:
            found = frozenset().union(*(c.atoms() for c in self.children()))
        object.__setattr__(self, "_atoms", found)
        return found

    def is_leaf(self):
        return not self.children()


class Const(Formula):
    __slots__ = ("value",)

    def __init__(self, value: bool):
        self.value = bool(value)
        self._hash = hash(("const", self.value))

    __hash__ = Formula.__hash__

    def __eq__(self, other):
        return isinstance(other, Const) and other.value == self.value

    def evaluate(self, valuation):
        return self.value

    def _text(self):
        return "true" if self.value else "false"


TOP = Const(True)
BOTTOM = Const(False)


class Atom(Formula):
    """A propositional variable ``name`` with an optional tag.

    The tag is ``None`` for plain fluents, :data:`T0` / :data:`T1` for the two
    slices of an action theory, or any hashable object (a situation term, for
    instance) printed as ``name(tag)``.
    """

    __slots__ = ("name", "tag")

    def __init__(self, name: str, tag=None):
        self.name = name
        self.tag = tag
        self._hash = hash(("atom", name, tag))

    __hash__ = Formula.__hash__

    def __eq__(self, other):
        return (isinstance(other, Atom) and other._hash == self._hash
                and other.name == self.name and other.tag == self.tag)

    def evaluate(self, valuation):
        return bool(valuation[self])

    def sort_key(self):
        tag = self.tag
        if tag is None:
            return (self.name, 0, "")
        if tag in (T0, T1) and isinstance(tag, int):
            return (self.name, 1 + tag, "")
        return (self.name, 3, str(tag))

    def _text(self):
        if self.tag is None:
            return self.name
        if self.tag == T0 and isinstance(self.tag, int):
            return self.name + "@t"
        if self.tag == T1 and isinstance(self.tag, int):
            return self.name + "@t1"
        return f"{self.name}({self.tag})"


class Not(Formula):
    __slots__ = ("arg",)
    prec = 5

    def __init__(self, arg: Formula):
        self.arg = arg
        self._hash = hash(("not", arg))

    __hash__ = Formula.__hash__

    def __eq__(self, other):
        return isinstance(other, Not) and other._hash == self._hash and other.arg == self.arg

    def children(self):
        return (self.arg,)

    def evaluate(self, valuation):
        return not self.arg.evaluate(valuation)


class _NAry(Formula):
    __slots__ = ("args",)
    tag_name = ""

    def __init__(self, args):
        self.args = tuple(args)
        self._hash = hash((self.tag_name, self.args))

    __hash__ = Formula.__hash__

    def __eq__(self, other):
        return type(other) is type(self) and other._hash == self._hash and other.args == self.args

    def children(self):
        return self.args


class And(_NAry):
    __slots__ = ()
    prec = 4
    tag_name = "and"

    def evaluate(self, valuation):
        return all(a.evaluate(valuation) for a in self.args)


class Or(_NAry):
    __slots__ = ()
    prec = 3
    tag_name = "or"

    def evaluate(self, valuation):
        return any(a.evaluate(valuation) for a in self.args)


class _Binary(Formula):
    __slots__ = ("left", "right")
    tag_name = ""

    def __init__(self, left, right):
        self.left = left
        self.right = right
        self._hash = hash((self.tag_name, left, right))

    __hash__ = Formula.__hash__

    def __eq__(self, other):
        return (type(other) is type(self) and other._hash == self._hash
                and other.left == self.left and other.right == self.right)

    def children(self):
        return (self.left, self.right)


class Implies(_Binary):
    __slots__ = ()
    prec = 2
    tag_name = "implies"

    def evaluate(self, valuation):
        return (not self.left.evaluate(valuation)) or self.right.evaluate(valuation)


class Iff(_Binary):
    __slots__ = ()
    prec = 1
    tag_name = "iff"

    def evaluate(self, valuation):
        return self.left.evaluate(valuation) == self.right.evaluate(valuation)


# ---------------------------------------------------------------------------
# simplifying constructors

def neg(a: Formula) -> Formula:
    if isinstance(a, Const):
        return BOTTOM if a.value else TOP
    if isinstance(a, Not):
        return a.arg
    return Not(a)


def _complement(a, b):
    return (isinstance(a, Not) and a.arg == b) or (isinstance(b, Not) and b.arg == a)


def _nary(kind, args, unit, zero):
    flat = []
    for a in args:
        if isinstance(a, kind):
            candidates = a.args
        else:
            candidates = (a,)
        for c in candidates:
            if c == unit:
                continue
            if c == zero:
                return zero
            if c in flat:
                continue
            if any(_complement(c, other) for other in flat):
                return zero
            flat.append(c)
    if not flat:
        return unit
    if len(flat) == 1:
        return flat[0]
    return kind(flat)


def conj(*args: Formula) -> Formula:
    if len(args) == 1 and not isinstance(args[0], Formula):
        args = tuple(args[0])
    return _nary(And, args, TOP, BOTTOM)


def disj(*args: Formula) -> Formula:
    if len(args) == 1 and not isinstance(args[0], Formula):
        args = tuple(args[0])
    return _nary(Or, args, BOTTOM, TOP)


def implies(a: Formula, b: Formula) -> Formula:
    if a == TOP:
        return b
    if a == BOTTOM or b == TOP:
        return TOP
    if b == BOTTOM:
        return neg(a)
    if a == b:
        return TOP
    return Implies(a, b)


def iff(a: Formula, b: Formula) -> Formula:
    if a == TOP:
        return b
    if b == TOP:
        return a
    if a == BOTTOM:
        return neg(b)
    if b == BOTTOM:
        return neg(a)
    if a == b:
        return TOP
    if _complement(a, b):
        return BOTTOM
    return Iff(a, b)


def _rebuild(node, kids):
    if isinstance(node, Not):
        return neg(kids[0])
    if isinstance(node, And):
        return conj(kids)
    if isinstance(node, Or):
        return disj(kids)
    if isinstance(node, Implies):
        return implies(*kids)
    if isinstance(node, Iff):
        return iff(*kids)
    raise TypeError(f"cannot rebuild {type(node).__name__}")


def map_leaves(phi: Formula, fn) -> Formula:
    """Replace every leaf by ``fn(leaf)`` and re-simplify bottom-up.

    Shared subtrees are visited once.
    """
    memo = {}

    def walk(node):
        key = id(node)
        if key in memo:
            return memo[key]
        kids = node.children()
        if not kids:
            out = fn(node)
        else:
            out = _rebuild(node, [walk(k) for k in kids])
        memo[key] = out
        return out

    return walk(phi)


def simplify(phi: Formula) -> Formula:
    return map_leaves(phi, lambda leaf: leaf)


def substitute(phi: Formula, mapping: Mapping) -> Formula:
    return map_leaves(phi, lambda leaf: mapping.get(leaf, leaf))


def retag(phi: Formula, new_tag, old_tag=None) -> Formula:
    """Move every atom tagged ``old_tag`` to ``new_tag``."""
    def fn(leaf):
        if isinstance(leaf, Atom) and leaf.tag == old_tag and type(leaf.tag) is type(old_tag):
            return Atom(leaf.name, new_tag)
        return leaf
    return map_leaves(phi, fn)


def as_atom(v) -> Atom:
    return v if isinstance(v, Atom) else Atom(str(v))


def forget(phi: Formula, variables: Iterable) -> Formula:
    """Strongest consequence of ``phi`` not mentioning ``variables``.

    Computed by Shannon expansion, one variable at a time:
    ``forget(phi, {v}) = phi[v := true] | phi[v := false]``.  Plain strings
    are read as untimed atoms.
    """
    for v in variables:
        v = as_atom(v)
        if v not in phi.atoms():
            continue
        phi = disj(substitute(phi, {v: TOP}), substitute(phi, {v: BOTTOM}))
    return phi


def literal(name: str, positive: bool = True, tag=None) -> Formula:
    a = Atom(name, tag)
    return a if positive else Not(a)


# ---------------------------------------------------------------------------
# semantics

def sorted_atoms(atoms: Iterable[Atom]) -> list:
    return sorted(set(atoms), key=Atom.sort_key)


def _columns(n):
    rows = np.arange(1 << n, dtype=np.int64)
    return [((rows >> (n - 1 - j)) & 1).astype(bool) for j in range(n)]


def truth_table(phi: Formula, atoms) -> np.ndarray:
    """Boolean vector of ``phi`` over all assignments of ``atoms``."""
    atoms = list(atoms)
    n = len(atoms)
    if n > MAX_TABLE_ATOMS:
        raise SizeLimit(f"truth table over {n} atoms exceeds {MAX_TABLE_ATOMS}")
    cols = dict(zip(atoms, _columns(n)))
    size = 1 << n
    memo = {}

    def walk(node):
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, Atom):
            try:
                out = cols[node]
            except KeyError:
                raise ValueError(f"atom {node} not in the alphabet") from None
        elif isinstance(node, Not):
            out = ~walk(node.arg)
        elif isinstance(node, And):
            out = np.ones(size, dtype=bool)
            for a in node.args:
                out = out & walk(a)
        elif isinstance(node, Or):
            out = np.zeros(size, dtype=bool)
            for a in node.args:
                out = out | walk(a)
        elif isinstance(node, Implies):
            out = ~walk(node.left) | walk(node.right)
        elif isinstance(node, Iff):
            out = walk(node.left) == walk(node.right)
        else:
            # ground leaves (constants and the like)
            out = np.full(size, bool(node.evaluate({})), dtype=bool)
        memo[key] = out
        return out

    return np.array(walk(phi), dtype=bool, copy=True)


def _alphabet(*formulas, atoms=None):
    if atoms is not None:
        return list(atoms)
    return sorted_atoms(a for f in formulas for a in f.atoms())


def models(phi: Formula, atoms=None) -> list:
    """Models of ``phi`` as dicts ``Atom -> bool``, in canonical order."""
    atoms = _alphabet(phi, atoms=atoms)
    table = truth_table(phi, atoms)
    n = len(atoms)
    out = []
    for i in np.flatnonzero(table):
        out.append({a: bool((i >> (n - 1 - j)) & 1) for j, a in enumerate(atoms)})
    return out


def is_satisfiable(phi: Formula, atoms=None) -> bool:
    return bool(truth_table(phi, _alphabet(phi, atoms=atoms)).any())


def is_valid(phi: Formula, atoms=None) -> bool:
    return bool(truth_table(phi, _alphabet(phi, atoms=atoms)).all())


def entails(a: Formula, b: Formula) -> bool:
    atoms = _alphabet(a, b)
    return bool(np.all(~truth_table(a, atoms) | truth_table(b, atoms)))


def equivalent(a: Formula, b: Formula) -> bool:
    atoms = _alphabet(a, b)
    return bool(np.array_equal(truth_table(a, atoms), truth_table(b, atoms)))


def minterm(bits, atoms) -> Formula:
    return conj([a if b else Not(a) for a, b in zip(atoms, bits)])


def formula_from_table(table, atoms) -> Formula:
    """Canonical DNF: one full minterm per true row, in row order."""
    atoms = list(atoms)
    n = len(atoms)
    terms = []
    for i in np.flatnonzero(table):
        terms.append(minterm([(i >> (n - 1 - j)) & 1 for j in range(n)], atoms))
    return disj(terms)


def canonical(phi: Formula, atoms=None) -> Formula:
    atoms = _alphabet(phi, atoms=atoms)
    return formula_from_table(truth_table(phi, atoms), atoms)


def compact(phi: Formula, atoms=None, max_atoms: int = 10) -> Formula:
    """A small equivalent sum-of-products form, for display.

    Uses sympy's Quine-McCluskey minimizer; formulas over more than
    ``max_atoms`` atoms are returned simplified but otherwise unchanged.
    """
    atoms = _alphabet(phi, atoms=atoms)
    if len(atoms) > max_atoms:
        return simplify(phi)
    table = truth_table(phi, atoms)
    if table.all():
        return TOP
    if not table.any():
        return BOTTOM
    from sympy import Symbol
    from sympy.logic import SOPform
    from sympy.logic.boolalg import And as SAnd, Not as SNot, Or as SOr

    symbols = [Symbol(f"v{j}") for j in range(len(atoms))]
    back = dict(zip(symbols, atoms))
    n = len(atoms)
    rows = [[(int(i) >> (n - 1 - j)) & 1 for j in range(n)] for i in np.flatnonzero(table)]
    expr = SOPform(symbols, rows)

    def convert(e):
        if isinstance(e, Symbol):
            return back[e]
        if isinstance(e, SNot):
            return neg(convert(e.args[0]))
        parts = sorted((convert(a) for a in e.args), key=_display_key(atoms))
        if isinstance(e, SAnd):
            return conj(parts)
        if isinstance(e, SOr):
            return disj(parts)
        raise TypeError(f"unexpected sympy node {e!r}")

    return convert(expr)


def _display_key(atoms):
    order = {a: i for i, a in enumerate(atoms)}

    def key(f):
        first = next(iter(sorted(f.atoms(), key=lambda a: order[a])), None)
        return (order.get(first, -1), 0 if isinstance(f, Atom) else 1, to_text(f))

    return key


# ---------------------------------------------------------------------------
# text

def _wrap(child, cond):
    text = to_text(child)
    return f"({text})" if cond else text


def to_text(phi: Formula) -> str:
    if isinstance(phi, (Const, Atom)) or (phi.is_leaf() and hasattr(phi, "_text")):
        return phi._text()
    if isinstance(phi, Not):
        if hasattr(phi.arg, "_negated_text"):
            return phi.arg._negated_text()
        return "-" + _wrap(phi.arg, phi.arg.prec < Not.prec)
    if isinstance(phi, And):
        return " & ".join(_wrap(a, a.prec <= And.prec) for a in phi.args)
    if isinstance(phi, Or):
        return " | ".join(_wrap(a, a.prec <= Or.prec) for a in phi.args)
    if isinstance(phi, Implies):
        return f"{_wrap(phi.left, phi.left.prec <= 2)} -> {_wrap(phi.right, phi.right.prec < 2)}"
    if isinstance(phi, Iff):
        return f"{_wrap(phi.left, phi.left.prec < 1)} <-> {_wrap(phi.right, phi.right.prec <= 1)}"
    raise TypeError(f"cannot print {type(phi).__name__}")


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<iff><->|↔)
  | (?P<imp>->|→)
  | (?P<neq>!=|≠)
  | (?P<not>-|~|¬)
  | (?P<and>&|∧)
  | (?P<or>\||∨)
  | (?P<lpar>\()
  | (?P<rpar>\))
  | (?P<eq>=)
  | (?P<comma>,)
  | (?P<lbr>\[)
  | (?P<rbr>\])
  | (?P<top>⊤)
  | (?P<bot>⊥)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*(?:-[A-Za-z0-9_']+)*(?:@[A-Za-z0-9_+]+(?:-[0-9]+)?)?)
""", re.VERBOSE)

_TAGS = {"t": T0, "t1": T1, "t+1": T1}


def tokenize(text, line=None, offset=0):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, offset + pos + 1)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), offset + pos + 1))
        pos = m.end()
    tokens.append(("end", "", offset + len(text) + 1))
    return tokens


class FormulaParser:
    """Recursive-descent parser for the formula syntax.

    Precedence, loosest first: ``<->`` (left associative), ``->`` (right
    associative), ``|``, ``&``, prefix ``-``.  ``true`` / ``false`` are the
    constants, ``p@t`` / ``p@t1`` are time-tagged atoms.
    """

    def __init__(self, text, line=None, offset=0):
        self.text = text
        self.line = line
        self.tokens = tokenize(text, line, offset)
        self.pos = 0

    def error(self, message, token=None):
        token = token or self.peek()
        return ParseError(message, self.line, token[2])

    def peek(self, k=0):
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def accept(self, kind):
        if self.peek()[0] == kind:
            return self.advance()
        return None

    def expect(self, kind, what=None):
        tok = self.peek()
        if tok[0] != kind:
            found = tok[1] or "end of input"
            raise self.error(f"expected {what or kind}, found {found!r}")
        return self.advance()

    def parse(self):
        phi = self.parse_formula()
        if self.peek()[0] != "end":
            raise self.error(f"unexpected {self.peek()[1]!r}")
        return phi

    def parse_formula(self):
        left = self.parse_implication()
        while self.accept("iff"):
            left = Iff(left, self.parse_implication())
        return left

    def parse_implication(self):
        left = self.parse_or()
        if self.accept("imp"):
            return Implies(left, self.parse_implication())
        return left

    def parse_or(self):
        items = [self.parse_and()]
        while self.accept("or"):
            items.append(self.parse_and())
        return items[0] if len(items) == 1 else Or(items)

    def parse_and(self):
        items = [self.parse_unary()]
        while self.accept("and"):
            items.append(self.parse_unary())
        return items[0] if len(items) == 1 else And(items)

    def parse_unary(self):
        if self.accept("not"):
            return Not(self.parse_unary())
        return self.parse_primary()

    def parse_primary(self):
        tok = self.peek()
        if self.accept("lpar"):
            phi = self.parse_formula()
            self.expect("rpar", "')'")
            return phi
        if self.accept("top"):
            return TOP
        if self.accept("bot"):
            return BOTTOM
        if tok[0] == "ident":
            self.advance()
            return self.parse_atom(tok)
        found = tok[1] or "end of input"
        raise self.error(f"expected a formula, found {found!r}")

    def parse_atom(self, tok):
        name, _, tag = tok[1].partition("@")
        if not tag:
            if name == "true":
                return TOP
            if name == "false":
                return BOTTOM
            return Atom(name)
        if tag not in _TAGS:
            raise self.error(f"unknown time tag @{tag} (use @t or @t1)", tok)
        return Atom(name, _TAGS[tag])


def parse_formula(text: str, line=None, offset=0) -> Formula:
    return FormulaParser(text, line, offset).parse()


def as_formula(value) -> Formula:
    if isinstance(value, Formula):
        return value
    if isinstance(value, bool):
        return TOP if value else BOTTOM
    return parse_formula(str(value))
