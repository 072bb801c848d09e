import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdeform import fock
from qdeform.errors import SymbolError
from qdeform.ncalg import (
    NCPoly,
    RewriteSystem,
    builtin_system,
    commutator,
    dagger,
    inversions,
    jacobi_check,
    normal_form,
    random_ncpoly,
    verify_relation,
)
from qdeform.scalars import CRational

I = CRational(0, 1)
W = NCPoly.word
HBAR, BETA = Fraction(1, 10), Fraction(1)


def test_eq1_rule_and_cubic_normal_form():
    R = builtin_system("eq1", HBAR, BETA)
    q2 = 1 - HBAR / BETA
    assert normal_form(W("b", "b+"), R) == W("b+", "b", coef=q2) + NCPoly.const(HBAR)
    expected = W("b+", "b+", "b", coef=q2 * q2) + W("b+", coef=HBAR * (1 + q2))
    assert normal_form(W("b", "b+", "b+"), R) == expected
    ordered = W("b+", "b+", "b")
    assert normal_form(ordered, R) == ordered


@pytest.mark.parametrize("word", [("b", "b+", "b+"), ("b", "b", "b+"), ("b", "b", "b+", "b+"), ("b", "b+", "b", "b+")])
def test_normal_forms_agree_with_fock_matrices(word):
    R = builtin_system("eq1", HBAR, BETA)
    N = 14
    b, bd = fock.qoscillator_ops(N, float(HBAR), math.sqrt(float(1 - HBAR / BETA)))
    mats = {"b": b.matrix, "b+": bd.matrix}
    lhs = W(*word).evaluate(mats, np.eye(N))
    rhs = normal_form(W(*word), R).evaluate(mats, np.eye(N))
    cols = np.arange(N - len(word) - 1)  # far enough from the truncation edge
    assert np.max(np.abs((lhs - rhs)[:, cols])) < 1e-13


def test_commutators():
    b_sys = RewriteSystem.from_relations(("b+", "b"), [W("b", "b+") - W("b+", "b") - NCPoly.const(HBAR)])
    assert commutator(W("b"), W("b+"), b_sys) == NCPoly.const(HBAR)
    R = builtin_system("eq5", HBAR, BETA)
    x, p = W("x"), W("p")
    assert commutator(x, p, R) == normal_form(NCPoly.const(I * HBAR) + W("x", "p", coef=HBAR / BETA), R)
    f = W("x", "p") + W("p+", coef=3)
    assert commutator(f, f, R).is_zero()


@pytest.mark.parametrize("name", ["eq1", "eq5", "canonical", "qparticle"])
def test_jacobi_on_consistent_systems(name):
    R = builtin_system(name, Fraction(3, 7), Fraction(5, 2))
    for g in itertools.combinations_with_replacement(R.order, 3):
        assert jacobi_check(R, *g).is_zero()


def test_wrong_ordering_residual():
    res = jacobi_check(builtin_system("eq5-wrong", HBAR, BETA), "x", "p+", "p")
    assert not res.is_zero()
    assert res.generators() <= {"p", "p+"}


def test_rules_lower_inversions():
    for name in ("eq1", "eq5", "canonical", "qparticle"):
        R = builtin_system(name)
        for lhs, rhs in R.rules.items():
            for w in rhs.words():
                assert len(w) < 2 or inversions(w, R.rank) < inversions(lhs, R.rank)


def test_every_short_word_terminates():
    R = builtin_system("eq5")
    for length in range(7):
        for word in itertools.product(R.order, repeat=length):
            nf = normal_form(W(*word), R)
            assert all(R.is_normal(w) for w in nf.words())


def _random_polys(name):
    R = builtin_system(name)

    @st.composite
    def gen(draw):
        return random_ncpoly(R, random.Random(draw(st.integers(0, 10**9))), max_len=7)

    return R, gen()


@pytest.mark.parametrize("name", ["eq1", "eq5", "qparticle"])
def test_confluence_property(name):
    R, polys = _random_polys(name)

    @settings(max_examples=60, deadline=None)
    @given(polys)
    def check(f):
        assert normal_form(f, R, "leftmost") == normal_form(f, R, "rightmost")

    check()


def test_normal_form_is_linear_and_multiplicative():
    R = builtin_system("eq5")
    gen = random.Random(4)
    for _ in range(30):
        f, g = random_ncpoly(R, gen), random_ncpoly(R, gen)
        assert normal_form(f + g, R) == normal_form(f, R) + normal_form(g, R)
        assert normal_form(f * g, R) == normal_form(normal_form(f, R) * normal_form(g, R), R)


def test_dagger_is_an_antiautomorphism():
    R = builtin_system("eq5")
    gen = random.Random(8)
    for _ in range(30):
        f, g = random_ncpoly(R, gen), random_ncpoly(R, gen)
        assert dagger(f * g, R.adjoint) == dagger(g, R.adjoint) * dagger(f, R.adjoint)
        assert dagger(dagger(f, R.adjoint), R.adjoint) == f
    assert dagger(W("x", "p", coef=I), R.adjoint) == W("p+", "x", coef=-I)


def test_qparticle_relation_and_rescaling():
    R = builtin_system("qparticle", HBAR, BETA)
    eps = I * HBAR / (2 * BETA)
    q = (1 - eps) / (1 + eps)
    rhs = -I * HBAR / (1 + eps)
    assert verify_relation(W("p", "x") - W("x", "p", coef=q), NCPoly.const(rhs), R)
    assert not verify_relation(W("p", "x") - W("x", "p", coef=q), NCPoly.const(-I * HBAR), R)
    c = Fraction(3, 2)
    scaled = R.rescaled(c)
    assert verify_relation(W("p", "x") - W("x", "p", coef=q), NCPoly.const(rhs / (c * c)), scaled)


def test_json_roundtrip():
    R = builtin_system("eq5")
    R2 = RewriteSystem.from_json(R.to_json())
    assert R2.order == R.order and R2.rules == R.rules
    f = W("p", "p+", "x", "p")
    assert normal_form(f, R2) == normal_form(f, R)


def test_unknown_generator():
    with pytest.raises(SymbolError):
        normal_form(W("y", "x"), builtin_system("canonical"))


def test_printing():
    assert str(NCPoly()) == "0"
    assert "x p" in str(W("x", "p", coef=Fraction(1, 2)))
