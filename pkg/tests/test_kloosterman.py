import cmath
import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from glkloosterman.errors import ConfigError
from glkloosterman.kloosterman import (CellSpec, cell_size, enumerate_cell, kloosterman_sum,
                                       kloosterman_sum_and_size, orbit_decompose, s2_restricted,
                                       s2_twisted_decomposition, stevens_identity_check,
                                       unit_group_generators)
from glkloosterman.padic_core import CycloSum, PrimeContext, rational_vp


# -- an independent oracle over exact rationals ---------------------------------


def frac_p(x: Fraction, p: int) -> Fraction:
    den = x.denominator
    k = 0
    while den % p == 0:
        den //= p
        k += 1
    if k == 0:
        return Fraction(0)
    return Fraction(x.numerator * pow(den, -1, p**k) % p**k, p**k)


def matmul(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]))]
            for i in range(len(a))]


def ul_fractions(g):
    # g = U L by eliminating from the bottom-right corner upwards
    n = len(g)
    L = [row[:] for row in g]
    U = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for k in range(n - 1, -1, -1):
        piv = L[k][k]
        if piv == 0:
            return None
        for i in range(k):
            f = L[i][k] / piv
            U[i][k] = f
            L[i] = [x - f * y for x, y in zip(L[i], L[k])]
    return U, L


def inv_unipotent(U):
    n = len(U)
    X = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for j in range(n):
        for i in range(j - 1, -1, -1):
            X[i][j] = -sum(U[i][k] * X[k][j] for k in range(i + 1, j + 1))
    return X


def oracle_kl(spec: CellSpec) -> tuple[complex, int]:
    n, p, m, ell = spec.n, spec.p, spec.m, spec.ell
    d = [Fraction(v) * Fraction(p) ** e for e, v in zip(spec.torus.exponents, spec.units)]
    wc = [[d[j] if i + j == n - 1 else Fraction(0) for j in range(n)] for i in range(n)]
    pos = [(i, j) for i in range(n) for j in range(i + 1, n)]
    total, count = 0j, 0
    for rs in itertools.product(range(p ** (ell + m)), repeat=len(pos)):
        up = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
        for (i, j), r in zip(pos, rs):
            up[i][j] = Fraction(r, p**ell)
        res = ul_fractions(matmul(wc, up))
        if res is None:
            continue
        U, L = res
        if not all(L[i][j] - (i == j) == 0 or rational_vp(L[i][j] - (i == j), p) >= m
                   for i in range(n) for j in range(n)):
            continue
        u = inv_unipotent(U)
        arg = sum(nu * u[i][i + 1] for i, nu in enumerate(spec.nu))
        arg += sum(nu * up[i][i + 1] for i, nu in enumerate(spec.nu_prime))
        total += cmath.exp(2j * cmath.pi * float(frac_p(arg, p)))
        count += 1
    return total, count


ORACLE_CASES = [
    (2, 2, (1,), (1, -1)), (3, 2, (1,), (1, -1)), (3, 2, (2,), (2, 1)), (5, 2, (1,), (2, 2)),
    (2, 3, (1, 1), (1, 1, -1)), (3, 3, (1, 1), (1, 1, -1)), (2, 3, (2, 1), (-1, 1, 1)),
    (3, 3, (1, 1), (-1, -1, -1)), (2, 4, (1, 1, 1), (1, 1, 1, 1)),
]


@pytest.mark.parametrize("p,n,a,units", ORACLE_CASES)
def test_sum_matches_unpruned_oracle(p, n, a, units):
    spec = CellSpec(p, n, 1, a, units)
    kl, size = kloosterman_sum_and_size(spec)
    want, want_size = oracle_kl(spec)
    assert size == want_size == cell_size(spec)
    assert cmath.isclose(kl.value(), want, abs_tol=1e-7)


def test_oracle_with_characters():
    spec = CellSpec(3, 3, 1, (1, 1), (1, 1, -1), nu=(Fraction(1, 3), 2), nu_prime=(3, -1))
    want, size = oracle_kl(spec)
    assert cmath.isclose(kloosterman_sum(spec).value(), want, abs_tol=1e-7)


def test_gl2_anchor():
    spec = CellSpec(3, 2, 1, (1,), (1, -1))
    assert kloosterman_sum(spec) == CycloSum.root(27, 18, 3)
    assert [x.uprime.to_fractions()[(0, 1)] for x in enumerate_cell(spec)] == [
        Fraction(1, 3), Fraction(4, 3), Fraction(7, 3)]


@given(st.sampled_from([2, 3]), st.integers(1, 2), st.data())
def test_negated_characters_conjugate(p, a2, data):
    units = data.draw(st.sampled_from([(1, 1, -1), (-1, 1, 1), (-1, -1, -1)]))
    nu = tuple(data.draw(st.sampled_from([1, -1, p, Fraction(1, p)])) for _ in range(2))
    nup = tuple(data.draw(st.sampled_from([1, 2 if p == 3 else 3])) for _ in range(2))
    spec = CellSpec(p, 3, 1, (1, a2), units, nu, nup)
    neg = spec.replace(nu=tuple(-x for x in nu), nu_prime=tuple(-x for x in nup))
    assert kloosterman_sum(neg) == kloosterman_sum(spec).conjugate()


@pytest.mark.parametrize("k", [2, 3])
def test_sharding_is_a_partition(k):
    spec = CellSpec(3, 3, 1, (2, 1), (1, 1, -1))
    whole = [x.key for x in enumerate_cell(spec)]
    parts = [x.key for s in range(k) for x in enumerate_cell(spec, shard=(s, k))]
    assert sorted(parts) == sorted(whole)


def test_workers_agree():
    spec = CellSpec(2, 3, 1, (2, 2), (1, 1, -1))
    assert kloosterman_sum_and_size(spec, workers=2) == kloosterman_sum_and_size(spec)


def test_infeasible_is_empty():
    spec = CellSpec(3, 2, 1, (1,), (1, 1))
    assert not spec.feasible
    assert kloosterman_sum(spec).is_zero() and cell_size(spec) == 0


def test_gl1_is_a_point_mass():
    assert kloosterman_sum(CellSpec(3, 1, 1, (), (1,))) == CycloSum.root(27, 0)
    assert kloosterman_sum(CellSpec(3, 1, 1, (), (2,))).is_zero()


@pytest.mark.parametrize("kw", [
    dict(p=3, n=2, m=0, a=(1,), units=(1, -1)),
    dict(p=3, n=2, m=1, a=(1, 1), units=(1, -1)),
    dict(p=3, n=2, m=1, a=(-1,), units=(1, -1)),
    dict(p=3, n=2, m=1, a=(1,), units=(3, -1)),
    dict(p=3, n=2, m=1, a=(1,), units=(1, -1), nu=(Fraction(1, 9),)),
    dict(p=3, n=2, m=1, a=(2,), units=(1, -1), ell=1),
])
def test_spec_validation(kw):
    with pytest.raises(ConfigError):
        CellSpec(**kw)


@pytest.mark.parametrize("p,m", [(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (5, 2), (7, 1)])
def test_unit_group_generators(p, m):
    mod = p**m
    gens = unit_group_generators(p, m)
    assert math.prod(o for _, o in gens) == (p - 1) * p ** (m - 1)
    span = {math.prod(pow(g, e, mod) for (g, _), e in zip(gens, es)) % mod
            for es in itertools.product(*(range(o) for _, o in gens))}
    assert span == {u for u in range(mod) if u % p}


@given(st.sampled_from([2, 3, 5]), st.integers(1, 2), st.integers(0, 2),
       st.integers(-1, 1), st.integers(-1, 1), st.integers(1, 4), st.integers(1, 4))
def test_twisted_decomposition(p, m, ell, e1, e2, u1, u2):
    if u1 % p == 0 or u2 % p == 0:
        return
    nu, nup = Fraction(u1) * Fraction(p) ** e1, Fraction(u2) * Fraction(p) ** e2
    ctx = PrimeContext.for_cell(p, 2, ell, m)
    assert s2_twisted_decomposition(nu, nup, ell, m, ctx) == s2_restricted(nu, nup, ell, m, ctx)


@pytest.mark.parametrize("p,a,units", [(3, (2, 2), (1, 1, -1)), (2, (2, 1), (1, -1, 1))])
def test_orbits_cover_cell(p, a, units):
    spec = CellSpec(p, 3, 1, a, units)
    dec = orbit_decompose(spec)
    assert dec.total == cell_size(spec)
    assert stevens_identity_check(spec)


def test_orbit_identity_level_two():
    assert stevens_identity_check(CellSpec(2, 2, 2, (2,), (1, -1)))


@given(st.sampled_from([2, 3]), st.integers(1, 2), st.data())
def test_coset_normal_form_is_invariant(p, m, data):
    from glkloosterman._cellenum import normalize_uprime
    n, ell = 3, 2
    x = {(i, j): Fraction(data.draw(st.integers(-40, 40)), p**ell)
         for i in range(n) for j in range(i + 1, n)}
    # right multiplication by an element of N(p^m Z_p)
    k = {(i, j): p**m * data.draw(st.integers(-5, 5)) for i in range(n) for j in range(i + 1, n)}
    up = [[Fraction(int(i == j)) if i >= j else x[(i, j)] for j in range(n)] for i in range(n)]
    km = [[Fraction(int(i == j)) if i >= j else Fraction(k[(i, j)]) for j in range(n)]
          for i in range(n)]
    prod = matmul(up, km)
    y = {(i, j): prod[i][j] for i in range(n) for j in range(i + 1, n)}
    a = normalize_uprime(x, n, p, ell, m)
    assert a == normalize_uprime(y, n, p, ell, m)
    grid = {ij: Fraction(r, p**ell) for ij, r in a.items()}
    assert normalize_uprime(grid, n, p, ell, m) == a
