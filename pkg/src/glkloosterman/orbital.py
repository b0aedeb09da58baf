"""Coroot decompositions, the closed-form unipotent orbital integral and relative Shalika germs."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from . import _cellenum
from .errors import BlockMismatch, DetNotUnit
from .group_geometry import RelevantWeyl, TorusDiag
from .kloosterman import CellSpec, kloosterman_sum, warn_if_not_germ_normalized
from .padic_core import CycloSum

__all__ = [
    "Cocharacter",
    "CorootDecomposition",
    "GermValue",
    "cocharacter_of_torus",
    "enumerate_decompositions",
    "kappa",
    "orbital_integral_DR",
    "orbital_bruteforce",
    "decomposition_count_R",
    "r_estimate",
    "germ_longest",
    "germ_relevant",
]

Cocharacter = tuple


@dataclass(frozen=True)
class CorootDecomposition:
    """Weights m_{i,j} >= 0 (0-based i < j) on the positive coroots e_i - e_j."""

    n: int
    m: tuple  # sorted ((i, j), weight) pairs with weight > 0

    @classmethod
    def from_dict(cls, n: int, d: dict) -> CorootDecomposition:
        return cls(n, tuple(sorted((ij, w) for ij, w in d.items() if w)))

    def as_dict(self) -> dict:
        return dict(self.m)

    def cocharacter(self) -> Cocharacter:
        lam = [0] * self.n
        for (i, j), w in self.m:
            lam[i] += w
            lam[j] -= w
        return tuple(lam)


def cocharacter_of_torus(a: TorusDiag) -> Cocharacter:
    return tuple(a.exponents)


def _prefix_ok(vec) -> bool:
    s = 0
    for x in vec:
        s += x
        if s < 0:
            return False
    return s == 0


def _splits(total: int, k: int):
    # all k-tuples of nonnegative integers summing to total
    if k == 0:
        if total == 0:
            yield ()
        return
    if k == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _splits(total - first, k - 1):
            yield (first,) + rest


def enumerate_decompositions(lam) -> list[CorootDecomposition]:
    """All nonnegative coroot decompositions of lam, row by row with prefix-sum pruning.

    lam is decomposable iff every prefix sum is >= 0 and the total is 0; the same
    test on the residual vector prunes each branch.
    """
    lam = tuple(int(x) for x in lam)
    n = len(lam)
    if not _prefix_ok(lam):
        return []
    out = []

    def rec(i, resid, chosen):
        if i == n - 1:
            if resid[i] == 0:
                out.append(CorootDecomposition.from_dict(n, chosen))
            return
        # row i sends resid[i] units to the later coordinates
        for split in _splits(resid[i], n - 1 - i):
            nxt = list(resid)
            nxt[i] = 0
            for off, w in enumerate(split):
                nxt[i + 1 + off] += w
            if not _prefix_ok(nxt[i + 1:]):
                continue
            d = dict(chosen)
            for off, w in enumerate(split):
                if w:
                    d[(i, i + 1 + off)] = w
            rec(i + 1, nxt, d)

    rec(0, list(lam), {})
    return out


def kappa(d: CorootDecomposition) -> int:
    """Number of strictly positive weights."""
    return sum(1 for _, w in d.m if w > 0)


def _half_log_delta_inv(lam) -> int:
    # Delta^{-1/2}(a) = p^{A_1 + ... + A_{n-1} - A_n}, A_r the prefix sums of lam
    A = list(itertools.accumulate(lam))
    return sum(A[:-1]) - A[-1]


def orbital_integral_DR(a: TorusDiag, p: int | None = None) -> Fraction:
    """Delta^{-1/2}(a) * sum over decompositions of (1 - 1/p)^kappa, exactly."""
    p = a.p if p is None else p
    lam = cocharacter_of_torus(a)
    decs = enumerate_decompositions(lam)
    if not decs:
        return Fraction(0)
    q = 1 - Fraction(1, p)
    total = sum(q ** kappa(d) for d in decs)
    return Fraction(p) ** _half_log_delta_inv(lam) * total


def orbital_bruteforce(a: TorusDiag, ctx=None, budget: int = _cellenum.DEFAULT_BUDGET) -> int:
    """#{u' in N(Q_p)/N(Z_p) : w c u' in N(Q_p) GL_n(Z_p)} by exhaustive pruned search.

    Entries of u' run over p^{-ell} Z_p / Z_p with ell the largest prefix sum of
    the exponents, which bounds every denominator that can occur.
    """
    lam = cocharacter_of_torus(a)
    if sum(lam) != 0:
        return 0
    A = list(itertools.accumulate(lam))
    ell = max(0, max(A[:-1], default=0))
    return sum(1 for _ in _cellenum.enumerate_residues(a.p, a.exponents, a.units, ell, 0,
                                                       budget=budget))


def decomposition_count_R(a: TorusDiag) -> int:
    return len(enumerate_decompositions(cocharacter_of_torus(a)))


def r_estimate(a: TorusDiag) -> int:
    """prod_i (A_i + 1)^{i(n-i)} with A_i the prefix sums; an upper bound for R(a)."""
    lam = cocharacter_of_torus(a)
    n = len(lam)
    A = list(itertools.accumulate(lam))
    return math.prod((A[i - 1] + 1) ** (i * (n - i)) for i in range(1, n))


@dataclass(frozen=True)
class GermValue:
    """value * p^p_exp, with value an exact cyclotomic integer."""

    value: CycloSum
    p: int
    p_exp: Fraction

    def __eq__(self, other) -> bool:
        if not isinstance(other, GermValue):
            return NotImplemented
        if self.p != other.p and not (self.value.is_zero() and other.value.is_zero()):
            return False
        d = Fraction(self.p_exp) - Fraction(other.p_exp)
        if d.denominator != 1:
            # half-integral offsets: values can only agree if both vanish
            return self.value.is_zero() and other.value.is_zero()
        d = int(d)
        if d >= 0:
            return self.value * (self.p**d) == other.value
        return self.value == other.value * (self.p ** (-d))

    __hash__ = None

    def __mul__(self, other: GermValue) -> GermValue:
        if self.p != other.p:
            raise BlockMismatch("germ values at different primes")
        return GermValue(self.value * other.value, self.p, self.p_exp + other.p_exp)

    def complex(self) -> complex:
        return self.value.value() * float(self.p) ** float(self.p_exp)

    def magnitude(self) -> float:
        return self.value.magnitude() * float(self.p) ** float(self.p_exp)


def germ_longest(spec: CellSpec, budget: int = _cellenum.DEFAULT_BUDGET) -> GermValue:
    """K_e(c) = p^{-n(n-1)m/2} Kl_p(psi^{-1}; c, w), the conjugate taken on coefficients."""
    warn_if_not_germ_normalized(spec)
    kl = kloosterman_sum(spec, budget)
    return GermValue(kl.conjugate(), spec.p, Fraction(-spec.n * (spec.n - 1) * spec.m, 2))


def germ_relevant(w: RelevantWeyl, blocks: list, budget: int = _cellenum.DEFAULT_BUDGET) -> GermValue:
    """Product of the longest-element germs of the diagonal blocks of w."""
    sizes = tuple(b.n for b in blocks)
    if sizes != w.composition:
        raise BlockMismatch(f"block sizes {sizes} do not match composition {w.composition}")
    if len({b.p for b in blocks}) != 1:
        raise BlockMismatch("blocks at different primes")
    for b in blocks:
        if sum(b.torus.exponents) != 0:
            raise DetNotUnit(f"block {b} has non-unit determinant")
    out = None
    for b in blocks:
        g = germ_longest(b, budget)
        out = g if out is None else out * g
    return out
