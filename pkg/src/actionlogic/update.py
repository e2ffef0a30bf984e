"""Belief update operators, the U1-U9 postulate checker and faithful preorders.

Operators act on formulas but are defined model-wise.  Internally a set of
models over ``n`` atoms is an ``int`` bitmask whose bit ``i`` stands for the
state at row ``i`` of :func:`logic.truth_table` (first atom most significant),
so "implies" is a subset test and "or" is bitwise or.

Conventions: an unsatisfiable ``K`` or ``phi`` yields an unsatisfiable result.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import logic
from .errors import NoFaithfulFamily
from .logic import BOTTOM, Atom, Formula

MAX_CHECK_ATOMS = 3


# ---------------------------------------------------------------------------
# model sets

def _universe(*formulas, atoms=None) -> list:
    return logic._alphabet(*formulas, atoms=atoms)


def model_mask(phi: Formula, atoms) -> int:
    """Model set of ``phi`` as a bitmask over the rows of its truth table."""
    table = logic.truth_table(phi, atoms)
    return sum(1 << int(i) for i in np.flatnonzero(table))


def mask_formula(mask: int, atoms) -> Formula:
    """Canonical DNF of a model set."""
    size = 1 << len(atoms)
    return logic.formula_from_table([(mask >> i) & 1 for i in range(size)], atoms)


def _members(mask: int):
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


def diff(a, b) -> frozenset:
    """Fluents on which two states disagree."""
    return frozenset(f for f in a.fluents if a[f] != b[f])


def _pointwise(K, phi, atoms, select) -> Formula:
    atoms = _universe(K, phi, atoms=atoms)
    kmask, pmask = model_mask(K, atoms), model_mask(phi, atoms)
    targets = list(_members(pmask))
    out = 0
    for w in _members(kmask):
        for m in select(w, targets):
            out |= 1 << m
    return mask_formula(out, atoms) if out else BOTTOM


def _inclusion_minimal(w, targets):
    diffs = [w ^ m for m in targets]
    return [m for m, d in zip(targets, diffs)
            if not any(e != d and e & d == e for e in diffs)]


def _hamming_minimal(w, targets):
    if not targets:
        return []
    dist = [bin(w ^ m).count("1") for m in targets]
    best = min(dist)
    return [m for m, d in zip(targets, dist) if d == best]


def update_pma(K: Formula, phi: Formula, atoms=None) -> Formula:
    """Possible-models update: each model of ``K`` moves to its diff-inclusion-minimal ``phi``-models."""
    return _pointwise(K, phi, atoms, _inclusion_minimal)


def update_cardinality(K: Formula, phi: Formula, atoms=None) -> Formula:
    """Hamming-minimal update.

    A reconstruction: each model of ``K`` moves to the ``phi``-models at
    minimum Hamming distance.
    """
    return _pointwise(K, phi, atoms, _hamming_minimal)


def update_dependence(K: Formula, phi: Formula, dep=None, atoms=None) -> Formula:
    """Forget what ``K`` says about the atoms ``phi`` depends on, then add ``phi``.

    ``dep`` maps a formula to the atoms it depends on (default: the atoms
    occurring in it).
    """
    variables = dep(phi) if dep is not None else phi.atoms()
    variables = [logic.as_atom(v) for v in variables]
    if not logic.is_satisfiable(K):
        return BOTTOM
    return logic.simplify(logic.conj(logic.forget(K, variables), phi))


@dataclass(frozen=True)
class UpdateOperator:
    """A named update function ``(K, phi, atoms=None) -> formula``."""

    name: str
    function: Callable = field(compare=False)
    description: str = field(default="", compare=False)

    def __call__(self, K, phi, atoms=None) -> Formula:
        return self.function(logic.as_formula(K), logic.as_formula(phi), atoms=atoms)

    def __str__(self):
        return self.name


def _revision_like(K, phi, atoms=None):
    if not logic.is_satisfiable(K):
        return BOTTOM
    both = logic.conj(K, phi)
    return both if logic.is_satisfiable(both) else phi


def _ignore_base(K, phi, atoms=None):
    return phi if logic.is_satisfiable(K) else BOTTOM


OPERATORS = {
    "pma": UpdateOperator("pma", update_pma, "possible models approach (diff inclusion)"),
    "card": UpdateOperator("card", update_cardinality, "Hamming-minimal update (reconstruction)"),
    "dep": UpdateOperator("dep", lambda K, phi, atoms=None: update_dependence(K, phi),
                          "dependence-based update (forget the atoms of phi)"),
}

# operators that are not updates, kept for exercising the checker
REVISION_LIKE = UpdateOperator("revision-like", _revision_like, "K & phi when consistent, else phi")
RETURN_PHI = UpdateOperator("return-phi", _ignore_base, "ignores K")


def get_operator(name: str) -> UpdateOperator:
    try:
        return OPERATORS[name]
    except KeyError:
        raise ValueError(f"unknown update operator {name!r}; choose from {sorted(OPERATORS)}") from None


# ---------------------------------------------------------------------------
# postulates

POSTULATES = ("U1", "U2", "U3", "U4", "U5", "U6", "U7", "U8", "U9")

# argument roles, as named in counterexamples
_ROLES = {
    "U1": ("K", "phi"), "U2": ("K", "phi"), "U3": ("K", "phi"), "U4": ("K", "phi"),
    "U5": ("K", "phi", "psi"), "U6": ("K", "phi1", "phi2"), "U7": ("K", "phi1", "phi2"),
    "U8": ("K1", "K2", "phi"), "U9": ("K", "phi1", "phi2"),
}


def _complete(mask):
    return mask != 0 and mask & (mask - 1) == 0


def _subset(a, b):
    return a & ~b == 0


class _Evaluator:
    """Cached ``mask(K) x mask(phi) -> mask(K <> phi)`` for one operator and alphabet."""

    def __init__(self, op, atoms):
        self.op = op
        self.atoms = list(atoms)
        self.cache = {}

    def __call__(self, k, p):
        key = (k, p)
        if key not in self.cache:
            result = self.op(mask_formula(k, self.atoms), mask_formula(p, self.atoms), atoms=self.atoms)
            self.cache[key] = model_mask(result, self.atoms)
        return self.cache[key]

    def variants(self, k, p):
        """Results for syntactically different but equivalent inputs."""
        out = []
        for fk, fp in ((_cnf(k, self.atoms), mask_formula(p, self.atoms)),
                       (mask_formula(k, self.atoms), _cnf(p, self.atoms)),
                       (logic.compact(mask_formula(k, self.atoms), self.atoms),
                        logic.compact(mask_formula(p, self.atoms), self.atoms))):
            out.append((fk, fp, model_mask(self.op(fk, fp, atoms=self.atoms), self.atoms)))
        return out


def _cnf(mask, atoms):
    """Negated DNF of the complement: equivalent, written differently."""
    full = (1 << (1 << len(atoms))) - 1
    return logic.Not(mask_formula(full & ~mask, atoms))


def _holds(pid, ev: _Evaluator, args):
    """Truth of one postulate instance; ``args`` are model masks in role order."""
    if pid == "U1":
        k, p = args
        return _subset(ev(k, p), p)
    if pid == "U2":
        k, p = args
        return not _subset(k, p) or ev(k, p) == k
    if pid == "U3":
        k, p = args
        return not (k and p) or ev(k, p) != 0
    if pid == "U4":
        k, p = args
        return all(r == ev(k, p) for _, _, r in ev.variants(k, p))
    if pid == "U5":
        k, p, q = args
        return _subset(ev(k, p) & q, ev(k, p & q))
    if pid == "U6":
        k, p1, p2 = args
        r1, r2 = ev(k, p1), ev(k, p2)
        return not (_subset(r1, p2) and _subset(r2, p1)) or r1 == r2
    if pid == "U7":
        k, p1, p2 = args
        return not _complete(k) or _subset(ev(k, p1) & ev(k, p2), ev(k, p1 | p2))
    if pid == "U8":
        k1, k2, p = args
        return ev(k1 | k2, p) == ev(k1, p) | ev(k2, p)
    if pid == "U9":
        k, p1, p2 = args
        r = ev(k, p1) & p2
        return not _complete(k) or not r or _subset(ev(k, p1 & p2), r)
    raise ValueError(f"unknown postulate {pid!r}")


@dataclass(frozen=True)
class PostulateResult:
    postulate: str
    holds: bool
    checked: int
    counterexample: dict = None  # role -> formula

    def record(self) -> dict:
        out = {"postulate": self.postulate, "verdict": "holds" if self.holds else "fails",
               "checked": self.checked}
        if self.counterexample is not None:
            out["counterexample"] = {r: logic.to_text(f) for r, f in self.counterexample.items()}
        return out


@dataclass(frozen=True)
class PostulateReport:
    operator: str
    atoms: tuple
    mode: str
    results: tuple

    def __getitem__(self, pid) -> PostulateResult:
        for r in self.results:
            if r.postulate == pid:
                return r
        raise KeyError(pid)

    @property
    def satisfied(self) -> tuple:
        return tuple(r.postulate for r in self.results if r.holds)

    @property
    def violated(self) -> tuple:
        return tuple(r.postulate for r in self.results if not r.holds)

    def records(self) -> list:
        return [r.record() for r in self.results]

    def __str__(self):
        lines = [f"operator {self.operator} over {', '.join(map(str, self.atoms))} ({self.mode})"]
        for r in self.results:
            line = f"{r.postulate}: {'holds' if r.holds else 'fails'} ({r.checked} instances)"
            if r.counterexample is not None:
                line += "; counterexample " + ", ".join(
                    f"{role} = {logic.to_text(f)}" for role, f in r.counterexample.items())
            lines.append(line)
        return "\n".join(lines)


def default_atoms(n: int) -> list:
    return [Atom(name) for name in "abcdefgh"[:n]]


def check_postulates(op, n: int = 2, mode: str = "exhaustive", samples: int = 20000,
                     seed: int = 0, atoms=None, postulates=POSTULATES) -> PostulateReport:
    """Check U1-U9 for ``op`` over all (or sampled) model sets on ``n`` atoms.

    Exhaustive mode enumerates every tuple of model sets and is meant for
    ``n <= 2``; sampled mode draws ``samples`` tuples per postulate.  U7 and
    U9 only quantify over complete bases (exactly one model).
    """
    if isinstance(op, str):
        op = get_operator(op)
    atoms = list(atoms) if atoms is not None else default_atoms(n)
    n = len(atoms)
    if n > MAX_CHECK_ATOMS:
        raise ValueError(f"postulate checking is limited to {MAX_CHECK_ATOMS} atoms")
    if mode not in ("exhaustive", "sampled"):
        raise ValueError("mode must be 'exhaustive' or 'sampled'")
    ev = _Evaluator(op, atoms)
    sets = range(1 << (1 << n))
    singletons = [1 << i for i in range(1 << n)]
    rng = random.Random(seed)
    results = []
    for pid in postulates:
        roles = _ROLES[pid]
        first = singletons if pid in ("U7", "U9") else sets
        domains = [first] + [sets] * (len(roles) - 1)
        if mode == "exhaustive":
            instances = itertools.product(*domains)
        else:
            instances = ([rng.choice(d) for d in domains] for _ in range(samples))
        checked, witness = 0, None
        for args in instances:
            checked += 1
            if not _holds(pid, ev, args):
                witness = {r: mask_formula(m, atoms) for r, m in zip(roles, args)}
                break
        results.append(PostulateResult(pid, witness is None, checked, witness))
    return PostulateReport(op.name, tuple(atoms), mode, tuple(results))


def postulate_holds_on(op, pid: str, atoms=None, **formulas) -> bool:
    """Re-evaluate one postulate instance directly from formulas."""
    if isinstance(op, str):
        op = get_operator(op)
    roles = _ROLES[pid]
    args = [logic.as_formula(formulas[r]) for r in roles]
    atoms = _universe(*args, atoms=atoms)
    return _holds(pid, _Evaluator(op, atoms), [model_mask(f, atoms) for f in args])


# ---------------------------------------------------------------------------
# faithful preorders

class FaithfulPreorderFamily:
    """One preorder per state, as boolean matrices ``leq[w][a, b]`` meaning ``a <=_w b``."""

    def __init__(self, atoms, leq):
        self.atoms = list(atoms)
        size = 1 << len(self.atoms)
        self.leq = np.asarray(leq, dtype=bool)
        if self.leq.shape != (size, size, size):
            raise ValueError(f"expected {size} relations over {size} states")

    @property
    def size(self) -> int:
        return self.leq.shape[0]

    def strict(self, w, a, b) -> bool:
        return bool(self.leq[w, a, b] and not self.leq[w, b, a])

    @property
    def is_preorder(self) -> bool:
        for rel in self.leq:
            if not rel.diagonal().all():
                return False
            # transitivity: a <= b and b <= c imply a <= c
            comp = (rel.astype(np.int64) @ rel.astype(np.int64)) > 0
            if (comp & ~rel).any():
                return False
        return True

    @property
    def is_faithful(self) -> bool:
        return all(self.strict(w, w, v) for w in range(self.size) for v in range(self.size) if v != w)

    @property
    def is_total(self) -> bool:
        return bool(np.all(self.leq | self.leq.transpose(0, 2, 1)))

    def minimal(self, w, candidates) -> list:
        """Candidates not strictly dominated by another candidate under ``<=_w``."""
        return [m for m in candidates if not any(self.strict(w, c, m) for c in candidates)]

    def __eq__(self, other):
        return (isinstance(other, FaithfulPreorderFamily) and other.atoms == self.atoms
                and np.array_equal(other.leq, self.leq))

    def __str__(self):
        lines = []
        for w in range(self.size):
            pairs = [f"{a}<{b}" for a in range(self.size) for b in range(self.size)
                     if a != b and self.strict(w, a, b)]
            lines.append(f"{w}: " + " ".join(pairs))
        return "\n".join(lines)


def family_from_key(atoms, key) -> FaithfulPreorderFamily:
    """Total family ``a <=_w b iff key(w, a) <= key(w, b)``."""
    size = 1 << len(atoms)
    leq = np.zeros((size, size, size), dtype=bool)
    for w in range(size):
        k = [key(w, a) for a in range(size)]
        for a in range(size):
            for b in range(size):
                leq[w, a, b] = k[a] <= k[b]
    return FaithfulPreorderFamily(atoms, leq)


def pma_family(atoms) -> FaithfulPreorderFamily:
    """Diff-inclusion preorders: ``a <=_w b`` iff ``diff(w, a)`` is a subset of ``diff(w, b)``."""
    atoms = list(atoms)
    size = 1 << len(atoms)
    leq = np.zeros((size, size, size), dtype=bool)
    for w in range(size):
        for a in range(size):
            for b in range(size):
                da, db = w ^ a, w ^ b
                leq[w, a, b] = da & db == da
    return FaithfulPreorderFamily(atoms, leq)


def hamming_family(atoms) -> FaithfulPreorderFamily:
    return family_from_key(list(atoms), lambda w, a: bin(w ^ a).count("1"))


def operator_of(fam: FaithfulPreorderFamily, name: str = None) -> UpdateOperator:
    """Pointwise minimization: each model of ``K`` moves to its minimal ``phi``-models."""
    def function(K, phi, atoms=None):
        atoms = fam.atoms
        kmask, pmask = model_mask(K, atoms), model_mask(phi, atoms)
        targets = list(_members(pmask))
        out = 0
        for w in _members(kmask):
            for m in fam.minimal(w, targets):
                out |= 1 << m
        return mask_formula(out, atoms) if out else BOTTOM

    return UpdateOperator(name or "induced", function, "induced by a faithful preorder family")


def preorders_of(op, n: int = 2, atoms=None) -> FaithfulPreorderFamily:
    """Read a faithful preorder family off an operator.

    ``a <_w b`` holds when updating the complete base ``{w}`` by ``{a, b}``
    keeps only ``a``; when both survive the pair is left incomparable.  The
    family must be faithful and transitive and its induced operator must
    agree with ``op``; otherwise :class:`NoFaithfulFamily` is raised with a
    witness.
    """
    if isinstance(op, str):
        op = get_operator(op)
    atoms = list(atoms) if atoms is not None else default_atoms(n)
    n = len(atoms)
    if n > MAX_CHECK_ATOMS:
        raise ValueError(f"preorder extraction is limited to {MAX_CHECK_ATOMS} atoms")
    ev = _Evaluator(op, atoms)
    size = 1 << n
    leq = np.zeros((size, size, size), dtype=bool)

    def fail(reason, **inputs):
        witness = {"reason": reason}
        witness.update({k: logic.to_text(mask_formula(v, atoms)) if isinstance(v, int) else v
                        for k, v in inputs.items()})
        raise NoFaithfulFamily(f"no faithful family reproduces {op.name}: {reason}", witness)

    for w in range(size):
        leq[w] = np.eye(size, dtype=bool)
        for a, b in itertools.combinations(range(size), 2):
            r = ev(1 << w, (1 << a) | (1 << b))
            if r == 1 << a:
                leq[w, a, b] = True
            elif r == 1 << b:
                leq[w, b, a] = True
            elif r != (1 << a) | (1 << b):
                fail("update of a complete base by two models is not a nonempty subset of them",
                     K=1 << w, phi=(1 << a) | (1 << b), result=logic.to_text(mask_formula(r, atoms)))
    fam = FaithfulPreorderFamily(atoms, leq)
    for w in range(size):
        for v in range(size):
            if v != w and not fam.strict(w, w, v):
                fail("not faithful", K=1 << w, phi=(1 << w) | (1 << v))
    if not fam.is_preorder:
        fail("extracted relation is not transitive")
    induced = _Evaluator(operator_of(fam), atoms)
    bases = range(1 << size) if n <= 2 else [1 << w for w in range(size)]
    for k in bases:
        for p in range(1 << size):
            if ev(k, p) != induced(k, p):
                fail("induced operator disagrees", K=k, phi=p,
                     expected=logic.to_text(mask_formula(ev(k, p), atoms)),
                     induced=logic.to_text(mask_formula(induced(k, p), atoms)))
    return fam
