import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from actionlogic import logic
from actionlogic.errors import ParseError, SizeLimit
from actionlogic.logic import BOTTOM, TOP, Atom, T0, T1, parse_formula as F

import oracles

p, q, r = Atom("p"), Atom("q"), Atom("r")


def test_parse_precedence():
    assert F("p | q & r") == logic.Or([p, logic.And([q, r])])
    assert F("p -> q -> r") == logic.Implies(p, logic.Implies(q, r))
    assert F("-p & q") == logic.And([logic.Not(p), q])
    assert F("p <-> q <-> r") == logic.Iff(logic.Iff(p, q), r)


def test_tags_and_constants():
    assert F("p@t & q@t1") == logic.And([Atom("p", T0), Atom("q", T1)])
    assert F("p@t+1") == Atom("p", T1)
    assert F("true") is TOP and F("false") is BOTTOM
    assert F("Go-out") == Atom("Go-out")


@pytest.mark.parametrize("text, column", [("p &", 4), ("(p | q", 7), ("p @ q", 3), ("p@t2", 1)])
def test_parse_errors_carry_column(text, column):
    with pytest.raises(ParseError) as info:
        F(text)
    assert info.value.column == column


def test_smart_constructors_fold():
    assert logic.conj(p, TOP) == p
    assert logic.conj(p, logic.neg(p)) is BOTTOM
    assert logic.disj(p, logic.neg(p)) is TOP
    assert logic.neg(logic.neg(p)) == p
    assert logic.conj(p, logic.conj(q, p)) == logic.And([p, q])


def test_truth_table_row_order():
    # first atom is the most significant bit
    assert logic.truth_table(p, [p, q]).tolist() == [False, False, True, True]
    assert logic.truth_table(q, [p, q]).tolist() == [False, True, False, True]


def test_truth_table_size_limit():
    atoms = [Atom(f"x{i}") for i in range(25)]
    with pytest.raises(SizeLimit):
        logic.truth_table(logic.conj(atoms), atoms)


def test_forget_examples():
    assert logic.equivalent(logic.forget(F("p & q"), [p]), q)
    assert logic.forget(F("p | q"), [p]) is TOP


def _project(phi, atoms, forgotten):
    """Models of forget(phi, V) by projection: keep rows whose V-variants hit a model."""
    keep = [a for a in atoms if a not in forgotten]
    out = set()
    for m in logic.models(phi, atoms):
        out.add(tuple(m[a] for a in keep))
    return keep, out


def test_forget_matches_projection():
    rng = random.Random(3)
    for _ in range(200):
        names = [f"v{i}" for i in range(rng.randint(1, 6))]
        phi = oracles.random_formula(rng, names, 4)
        atoms = [Atom(n) for n in names]
        forgotten = rng.sample(atoms, rng.randint(0, len(atoms)))
        result = logic.forget(phi, forgotten)
        assert not (result.atoms() & set(forgotten))
        keep, projected = _project(phi, atoms, forgotten)
        got = {tuple(m[a] for a in keep) for m in logic.models(result, keep)} if keep else (
            {()} if logic.is_valid(result, []) else set())
        assert got == projected


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**16 - 1), st.sets(st.integers(0, 3)))
def test_forget_is_strongest_independent_consequence(bits, drop):
    atoms = [Atom(n) for n in "abcd"]
    table = np.array([(bits >> i) & 1 for i in range(16)], dtype=bool)
    phi = logic.formula_from_table(table, atoms)
    forgotten = [atoms[i] for i in drop]
    result = logic.forget(phi, forgotten)
    assert logic.entails(phi, result)
    # every consequence of phi not mentioning the forgotten atoms follows from the result
    keep = [a for a in atoms if a not in forgotten]
    for row in itertools.product((False, True), repeat=len(keep)):
        clause = logic.disj([logic.neg(a) if v else a for a, v in zip(keep, row)])
        if logic.entails(phi, clause):
            assert logic.entails(result, clause)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_print_parse_round_trip(seed):
    rng = random.Random(seed)
    phi = oracles.random_formula(rng, ["a", "b", "c", "Go-out"], 4)
    again = F(logic.to_text(phi))
    assert logic.equivalent(phi, again)
    assert logic.to_text(again) == logic.to_text(phi)


def test_canonical_and_compact_are_equivalent():
    phi = F("(p -> q) & (q -> r) & p")
    assert logic.equivalent(logic.canonical(phi), phi)
    assert logic.compact(phi) == F("p & q & r")
    assert logic.to_text(logic.canonical(F("p | q"))) == "-p & q | p & -q | p & q"


def test_retag_and_substitute():
    phi = F("p & -q")
    assert logic.retag(phi, T1) == F("p@t1 & -q@t1")
    assert logic.retag(F("p@t1 & q@t"), None, T1) == F("p & q@t")
    assert logic.substitute(phi, {p: TOP}) == F("-q")
