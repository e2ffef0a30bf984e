import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from actionlogic import logic, update
from actionlogic.core import StateSpace
from actionlogic.errors import NoFaithfulFamily
from actionlogic.logic import Atom, parse_formula as F

import oracles

AB = update.default_atoms(2)


def test_apple_banana_models():
    result = update.update_pma(F("(banana & -apple) | (apple & -banana)"), F("-banana"))
    space = StateSpace(["apple", "banana"])
    assert space.models(result) == space.models(F("-banana"))


def test_pma_keeps_base_when_already_true():
    K = F("a & (b | c)")
    assert logic.equivalent(update.update_pma(K, F("a | c")), K)


def _pma_oracle(K, phi, names):
    """Minimal-diff update computed from explicit states and diff sets."""
    space = StateSpace(names)
    targets = [t for t in space.states if t.satisfies(phi)]
    out = set()
    for w in space.states:
        if not w.satisfies(K):
            continue
        diffs = {t: update.diff(w, t) for t in targets}
        out |= {t for t in targets if not any(d < diffs[t] for d in diffs.values())}
    return frozenset(out)


def test_pma_matches_diff_oracle():
    rng = random.Random(31)
    names = ["a", "b", "c"]
    space = StateSpace(names)
    atoms = space.atoms()
    for _ in range(150):
        K, phi = oracles.random_formula(rng, names), oracles.random_formula(rng, names)
        got = space.models(update.update_pma(K, phi, atoms=atoms))
        assert got == _pma_oracle(K, phi, names)


def test_cardinality():
    assert logic.equivalent(update.update_cardinality(F("a & b & c"), F("-a | -b")), F("(-a & b | a & -b) & c"))
    assert logic.equivalent(update.update_cardinality(F("a & -b & -c"), F("b & (a | c)")), F("a & b & -c"))


def test_cardinality_strictly_below_pma():
    # from 0000: {a, b} and {c} are incomparable by inclusion, but {c} is closer
    K = F("-a & -b & -c & -d")
    phi = F("(a & b & -c & -d) | (-a & -b & c & -d)")
    space = StateSpace("abcd")
    pma = space.models(update.update_pma(K, phi, atoms=space.atoms()))
    card = space.models(update.update_cardinality(K, phi, atoms=space.atoms()))
    assert card < pma
    assert card == space.models(F("-a & -b & c & -d"))


def test_dependence():
    assert logic.equivalent(update.update_dependence(F("a & b"), F("-a")), F("-a & b"))
    assert logic.equivalent(update.update_dependence(F("a <-> b"), F("a")), F("a"))
    # a custom relation that also drags b along
    assert logic.equivalent(update.update_dependence(F("a & b"), F("-a"), dep=lambda phi: ["a", "b"]), F("-a"))


def test_dependence_preserves_independent_consequences():
    rng = random.Random(32)
    names = ["a", "b", "c", "d"]
    for _ in range(60):
        K = oracles.random_formula(rng, names)
        phi = oracles.random_formula(rng, names[:2], 2)
        if not logic.is_satisfiable(phi):
            continue
        result = update.update_dependence(K, phi)
        assert logic.entails(result, phi) or not logic.is_satisfiable(K)
        others = [Atom(n) for n in names if Atom(n) not in phi.atoms()]
        for row in itertools.product((False, True), repeat=len(others)):
            clause = logic.disj([logic.neg(a) if v else a for a, v in zip(others, row)])
            if logic.entails(K, clause):
                assert logic.entails(result, clause)


def test_dependence_on_literals_is_strips_progression():
    rng = random.Random(33)
    space = StateSpace(["a", "b", "c"])
    for _ in range(40):
        K = oracles.random_formula(rng, list(space.fluents))
        if not logic.is_satisfiable(K):
            continue
        lits = {f: rng.random() < 0.5 for f in rng.sample(space.fluents, rng.randint(1, 3))}
        phi = logic.conj([Atom(f) if v else logic.neg(Atom(f)) for f, v in lits.items()])
        expected = {s.replace(**lits) for s in space.models(K)}
        assert space.models(update.update_dependence(K, phi)) == expected


def test_inconsistent_inputs():
    for op in update.OPERATORS.values():
        assert not logic.is_satisfiable(op(F("a & -a"), F("b")))
    assert not logic.is_satisfiable(update.update_pma(F("a"), F("b & -b")))


# postulates

def test_pma_postulates():
    report = update.check_postulates("pma", 2)
    assert report.violated == ()
    assert report["U1"].checked == 256 and report["U8"].checked == 4096


@pytest.mark.parametrize("name", ["pma", "card", "dep"])
def test_success_and_decomposition_for_all(name):
    report = update.check_postulates(name, 2, postulates=("U1", "U8"))
    assert report.violated == ()


def test_dependence_is_syntax_sensitive():
    report = update.check_postulates("dep", 2)
    # frozen from the exhaustive run: forgetting every mentioned atom breaks U2,
    # and the result depends on how phi is written (U4)
    assert report.violated == ("U2", "U4")


def test_revision_like_violates_u8():
    report = update.check_postulates(update.REVISION_LIKE, 2)
    assert "U8" in report.violated
    cx = report["U8"].counterexample
    assert not update.postulate_holds_on(update.REVISION_LIKE, "U8", atoms=AB, **cx)
    # the counterexample splits a base into pieces; their union is disjunctive
    assert len(logic.models(logic.disj(cx["K1"], cx["K2"]), AB)) >= 2


def test_return_phi_violates_u2():
    report = update.check_postulates(update.RETURN_PHI, 2)
    assert report["U2"].holds is False
    assert not update.postulate_holds_on(update.RETURN_PHI, "U2", atoms=AB, **report["U2"].counterexample)


def test_sampled_mode_is_reproducible():
    a = update.check_postulates("pma", 3, "sampled", samples=300, seed=4)
    b = update.check_postulates("pma", 3, "sampled", samples=300, seed=4)
    assert a.records() == b.records()
    with pytest.raises(ValueError):
        update.check_postulates("pma", 4)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 255), st.integers(0, 255))
def test_success_hypothesis(k, p):
    atoms = update.default_atoms(3)
    K, phi = update.mask_formula(k, atoms), update.mask_formula(p, atoms)
    for op in update.OPERATORS.values():
        assert logic.entails(op(K, phi, atoms=atoms), phi)


# representation theorem

def test_preorders_of_pma():
    fam = update.preorders_of("pma", atoms=AB)
    assert fam == update.pma_family(AB)
    assert fam.is_faithful and fam.is_preorder and not fam.is_total


def _same_operator(op1, op2, atoms):
    n = 1 << len(atoms)
    for k in range(1 << n):
        for p in range(1 << n):
            K, phi = update.mask_formula(k, atoms), update.mask_formula(p, atoms)
            if update.model_mask(op1(K, phi, atoms=atoms), atoms) != update.model_mask(op2(K, phi, atoms=atoms), atoms):
                return False
    return True


def test_pma_family_induces_pma():
    assert _same_operator(update.operator_of(update.pma_family(AB)), update.get_operator("pma"), AB)


def test_cardinality_round_trip():
    card = update.get_operator("card")
    assert _same_operator(update.operator_of(update.preorders_of(card, atoms=AB)), card, AB)


def _linear_family(atoms, seed):
    rng = np.random.default_rng(seed)
    size = 1 << len(atoms)
    ranks = {}
    for w in range(size):
        others = [v for v in range(size) if v != w]
        rng.shuffle(others)
        ranks[w] = {v: i + 1 for i, v in enumerate(others)} | {w: 0}
    return update.family_from_key(atoms, lambda w, a: ranks[w][a])


@pytest.mark.parametrize("seed", range(5))
def test_total_family_round_trip(seed):
    fam = _linear_family(AB, seed)
    assert fam.is_total and fam.is_faithful
    assert update.preorders_of(update.operator_of(fam), atoms=AB) == fam


def test_total_family_operator_postulates():
    report = update.check_postulates(update.operator_of(_linear_family(AB, 9)), atoms=AB,
                                     postulates=("U1", "U2", "U3", "U4", "U5", "U8", "U9"))
    assert report.violated == ()


def test_degenerate_family():
    fam = update.family_from_key(AB, lambda w, a: 0 if a == w else 1)
    op = update.operator_of(fam)
    for w in range(4):
        for p in range(16):
            if p >> w & 1:
                continue
            K, phi = update.mask_formula(1 << w, AB), update.mask_formula(p, AB)
            assert update.model_mask(op(K, phi), AB) == p


def test_failure_witness():
    ignore_phi = update.UpdateOperator("keep", lambda K, phi, atoms=None: K)
    with pytest.raises(NoFaithfulFamily) as info:
        update.preorders_of(ignore_phi, atoms=AB)
    assert info.value.witness["reason"]
    with pytest.raises(NoFaithfulFamily):
        update.preorders_of(update.REVISION_LIKE, atoms=AB)
