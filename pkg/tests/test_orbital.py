import itertools
import warnings
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from glkloosterman.errors import BlockMismatch, DetNotUnit
from glkloosterman.group_geometry import RelevantWeyl, TorusDiag
from glkloosterman.kloosterman import CellSpec, kloosterman_sum
from glkloosterman.orbital import (CorootDecomposition, GermValue, decomposition_count_R,
                                   enumerate_decompositions, germ_longest, germ_relevant, kappa,
                                   orbital_bruteforce, orbital_integral_DR, r_estimate)
from glkloosterman.padic_core import CycloSum


def brute_decompositions(lam):
    # every weight vector on the positive coroots with entries up to the total height
    n = len(lam)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    bound = sum(x for x in lam if x > 0)
    out = set()
    for ws in itertools.product(range(bound + 1), repeat=len(pairs)):
        d = CorootDecomposition.from_dict(n, dict(zip(pairs, ws)))
        if d.cocharacter() == tuple(lam):
            out.add(d)
    return out


@given(st.integers(2, 4), st.lists(st.integers(-2, 2), min_size=4, max_size=4))
def test_decompositions_match_brute_force(n, raw):
    lam = tuple(raw[: n - 1]) + (-sum(raw[: n - 1]),)
    if max(map(abs, lam)) > 3:
        return
    got = enumerate_decompositions(lam)
    assert len(got) == len(set(got))
    assert set(got) == brute_decompositions(lam)


@given(st.integers(2, 4), st.lists(st.integers(0, 3), min_size=3, max_size=3))
def test_r_estimate_dominates(n, ladder):
    a = TorusDiag.from_ladder(2, ladder[: n - 1], (1,) * n)
    assert decomposition_count_R(a) <= r_estimate(a)


def test_anchors():
    assert orbital_integral_DR(TorusDiag(3, (1, -1), (1, 1))) == 2
    assert orbital_integral_DR(TorusDiag(2, (1, 0, -1), (1, 1, 1))) == 3
    assert decomposition_count_R(TorusDiag(2, (2, 0, -2), (1, 1, 1))) == 3
    assert orbital_integral_DR(TorusDiag(2, (-1, 1), (1, 1))) == 0


@pytest.mark.parametrize("p,want", [(2, 9), (3, 50)])
def test_gl4_point(p, want):
    a = TorusDiag(p, (1, 0, 0, -1), (1, 1, 1, 1))
    assert orbital_integral_DR(a) == want == orbital_bruteforce(a)


def test_dr_closed_form_gl2():
    # one decomposition with kappa = 1, so p^k (1 - 1/p)
    for p in (2, 3, 5):
        for k in range(1, 4):
            assert orbital_integral_DR(TorusDiag(p, (k, -k), (1, 1))) == p**k * (1 - Fraction(1, p))
            assert orbital_bruteforce(TorusDiag(p, (k, -k), (1, 1))) == p**k - p ** (k - 1)


def test_kappa():
    d = CorootDecomposition.from_dict(3, {(0, 1): 2, (0, 2): 0, (1, 2): 1})
    assert kappa(d) == 2 and d.cocharacter() == (2, -1, -1)


def germ_spec(p, a, units):
    return CellSpec(p, len(units), 1, a, units)


def test_germ_anchor_and_normalisation():
    g = germ_longest(germ_spec(3, (1,), (1, -1)))
    assert g == GermValue(CycloSum.root(3, 1), 3, Fraction(0))
    assert abs(g.magnitude() - 1) < 1e-12
    with pytest.warns(UserWarning):
        germ_longest(germ_spec(3, (1,), (1, 1)))


def test_germ_relevant_products():
    b1 = germ_spec(3, (1,), (1, -1))
    b2 = germ_spec(3, (2,), (-1, 1))
    single = germ_spec(3, (1, 2), (1, 1, -1))
    assert germ_relevant(RelevantWeyl((3,)), [single]) == germ_longest(single)
    assert germ_relevant(RelevantWeyl((2, 2)), [b1, b2]) == germ_longest(b1) * germ_longest(b2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        one = germ_spec(3, (), (1,))
        got = germ_relevant(RelevantWeyl((1, 2)), [one, b1])
    assert got == germ_longest(b1)


def test_germ_relevant_errors():
    b1 = germ_spec(3, (1,), (1, -1))
    with pytest.raises(BlockMismatch):
        germ_relevant(RelevantWeyl((3,)), [b1])
    with pytest.raises(BlockMismatch):
        germ_relevant(RelevantWeyl((2, 2)), [b1, germ_spec(2, (1,), (1, -1))])


def test_germ_value_equality_across_scales():
    a = GermValue(CycloSum.root(9, 3, 3), 3, Fraction(-1))
    b = GermValue(CycloSum.root(9, 3), 3, Fraction(0))
    assert a == b
    assert not a == GermValue(CycloSum.root(9, 3), 3, Fraction(1, 2))


def test_germ_is_normalised_conjugate():
    spec = germ_spec(2, (1, 1), (1, 1, -1))
    g = germ_longest(spec)
    assert g.value == kloosterman_sum(spec).conjugate()
    assert g.p_exp == -3
