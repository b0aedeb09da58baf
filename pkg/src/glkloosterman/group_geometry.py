"""Matrices over truncated p-adics, Weyl elements, minors and Bruhat extraction.

Indices are 0-based throughout: row ``i`` and column ``j`` of an n x n matrix run
over ``range(n)``.  Column subsets for minors are sorted tuples.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .errors import NotInBigCell, NotInvertible, PrecisionLoss
from .padic_core import PadicScaled, PrimeContext, padic

__all__ = [
    "PMatrix",
    "UpperUnipotent",
    "TorusDiag",
    "WeylPerm",
    "RelevantWeyl",
    "relevant_weyl_elements",
    "compositions",
    "principal_minor",
    "delta_big",
    "modulus_delta",
    "bottom_minors",
    "in_Km",
    "nk_membership",
    "ul_decompose",
    "bruhat_extract",
    "involution_iota",
]


def _det(rows: list[list]):
    # Laplace expansion along the first row; no divisions, fine for n <= 5
    n = len(rows)
    if n == 0:
        return 1
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    total = None
    for j in range(n):
        a = rows[0][j]
        if (a.is_exact_zero if isinstance(a, PadicScaled) else a == 0):
            continue
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        term = a * _det(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    if total is None:
        return rows[0][0] * 0
    return total


class PMatrix:
    """Square matrix of PadicScaled entries sharing one PrimeContext."""

    __slots__ = ("ctx", "rows")

    def __init__(self, rows, ctx: PrimeContext):
        self.ctx = ctx
        self.rows = [[padic(x, ctx) for x in r] for r in rows]
        n = len(self.rows)
        if any(len(r) != n for r in self.rows):
            raise ValueError("matrix must be square")

    @classmethod
    def identity(cls, n: int, ctx: PrimeContext) -> PMatrix:
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)], ctx)

    @property
    def n(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij) -> PadicScaled:
        i, j = ij
        return self.rows[i][j]

    def __matmul__(self, other: PMatrix) -> PMatrix:
        n = self.n
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = PadicScaled.zero(self.ctx)
                for k in range(n):
                    a, b = self.rows[i][k], other.rows[k][j]
                    if a.is_exact_zero or b.is_exact_zero:
                        continue
                    acc = acc + a * b
                row.append(acc)
            out.append(row)
        return PMatrix(out, self.ctx)

    def transpose(self) -> PMatrix:
        return PMatrix([list(c) for c in zip(*self.rows)], self.ctx)

    def sub(self, rows, cols) -> list[list[PadicScaled]]:
        return [[self.rows[i][j] for j in cols] for i in rows]

    def minor(self, rows, cols) -> PadicScaled:
        return _det(self.sub(rows, cols))

    def det(self) -> PadicScaled:
        return _det(self.rows)

    def inverse(self) -> PMatrix:
        n = self.n
        d = self.det()
        try:
            dinv = d.inverse()
        except (ZeroDivisionError, PrecisionLoss) as exc:
            raise NotInvertible(str(exc)) from exc
        if n == 1:
            return PMatrix([[dinv]], self.ctx)
        out = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                rows = [r for r in range(n) if r != j]
                cols = [c for c in range(n) if c != i]
                cof = self.minor(rows, cols)
                out[i][j] = (cof if (i + j) % 2 == 0 else -cof) * dinv
        return PMatrix(out, self.ctx)

    def __sub__(self, other: PMatrix) -> PMatrix:
        return PMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)],
                       self.ctx)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PMatrix) or other.n != self.n:
            return NotImplemented
        return all(a == b for r, s in zip(self.rows, other.rows) for a, b in zip(r, s))

    __hash__ = None

    def to_fractions(self) -> list[list[Fraction]]:
        return [[x.to_fraction() for x in r] for r in self.rows]

    def __repr__(self) -> str:
        body = "; ".join(", ".join(str(x.to_fraction()) for x in r) for r in self.rows)
        return f"PMatrix([{body}])"


class UpperUnipotent:
    """Upper unipotent matrix stored by its strictly upper entries {(i, j): value}."""

    def __init__(self, n: int, entries: dict, ctx: PrimeContext):
        self.n = n
        self.ctx = ctx
        self.entries = {}
        for (i, j), x in entries.items():
            if not 0 <= i < j < n:
                raise ValueError(f"({i},{j}) is not strictly upper triangular")
            self.entries[(i, j)] = padic(x, ctx)

    @classmethod
    def identity(cls, n: int, ctx: PrimeContext) -> UpperUnipotent:
        return cls(n, {}, ctx)

    @classmethod
    def from_matrix(cls, g: PMatrix) -> UpperUnipotent:
        n = g.n
        for i in range(n):
            if not g[i, i] == 1 or any(not g[i, j].is_zero_at_precision() for j in range(i)):
                raise ValueError("matrix is not upper unipotent")
        return cls(n, {(i, j): g[i, j] for i in range(n) for j in range(i + 1, n)}, g.ctx)

    def __getitem__(self, ij) -> PadicScaled:
        i, j = ij
        if i == j:
            return PadicScaled.one(self.ctx)
        if i > j:
            return PadicScaled.zero(self.ctx)
        return self.entries.get((i, j), PadicScaled.zero(self.ctx))

    def superdiagonal(self) -> list[PadicScaled]:
        return [self[i, i + 1] for i in range(self.n - 1)]

    def matrix(self) -> PMatrix:
        return PMatrix([[self[i, j] for j in range(self.n)] for i in range(self.n)], self.ctx)

    def to_fractions(self) -> dict:
        return {ij: x.to_fraction() for ij, x in sorted(self.entries.items())}

    def __eq__(self, other) -> bool:
        if not isinstance(other, UpperUnipotent):
            return NotImplemented
        return self.n == other.n and self.matrix() == other.matrix()

    __hash__ = None

    def __repr__(self) -> str:
        return f"UpperUnipotent({self.to_fractions()})"


@dataclass(frozen=True)
class TorusDiag:
    """diag(p**e_1 v_1, ..., p**e_n v_n) with p-adic units v_i given as integers."""

    p: int
    exponents: tuple
    units: tuple

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(int(e) for e in self.exponents))
        object.__setattr__(self, "units", tuple(int(v) for v in self.units))
        if len(self.exponents) != len(self.units):
            raise ValueError("exponents and units differ in length")
        if any(v % self.p == 0 for v in self.units):
            raise ValueError("torus units must be prime to p")

    @classmethod
    def from_ladder(cls, p: int, a, units) -> TorusDiag:
        """diag(p^{a_1}v_1, p^{a_2-a_1}v_2, ..., p^{-a_{n-1}}v_n)."""
        a = list(a)
        ext = [0] + a + [0]
        return cls(p, tuple(ext[i + 1] - ext[i] for i in range(len(a) + 1)), tuple(units))

    @property
    def n(self) -> int:
        return len(self.exponents)

    def ladder(self) -> tuple:
        """Partial sums (a_1, ..., a_{n-1}) of the exponents."""
        return tuple(itertools.accumulate(self.exponents))[:-1]

    def entries(self) -> list[Fraction]:
        return [Fraction(v) * Fraction(self.p) ** e for e, v in zip(self.exponents, self.units)]

    def matrix(self, ctx: PrimeContext) -> PMatrix:
        d = self.entries()
        return PMatrix([[d[i] if i == j else 0 for j in range(self.n)] for i in range(self.n)], ctx)


@dataclass(frozen=True)
class WeylPerm:
    """Permutation matrix sending e_j to e_{perm[j]}."""

    perm: tuple

    def __post_init__(self):
        object.__setattr__(self, "perm", tuple(self.perm))
        if sorted(self.perm) != list(range(len(self.perm))):
            raise ValueError(f"{self.perm} is not a permutation")

    @classmethod
    def longest(cls, n: int) -> WeylPerm:
        return cls(tuple(range(n - 1, -1, -1)))

    @property
    def n(self) -> int:
        return len(self.perm)

    def compose(self, other: WeylPerm) -> WeylPerm:
        return WeylPerm(tuple(self.perm[other.perm[j]] for j in range(self.n)))

    def int_matrix(self) -> list[list[int]]:
        n = self.n
        m = [[0] * n for _ in range(n)]
        for j, i in enumerate(self.perm):
            m[i][j] = 1
        return m

    def matrix(self, ctx: PrimeContext) -> PMatrix:
        return PMatrix(self.int_matrix(), ctx)


@dataclass(frozen=True)
class RelevantWeyl:
    """Block diagonal matrix of anti-diagonal blocks of sizes ``composition``."""

    composition: tuple

    def __post_init__(self):
        object.__setattr__(self, "composition", tuple(self.composition))
        if not self.composition or any(k < 1 for k in self.composition):
            raise ValueError(f"bad composition {self.composition}")

    @property
    def n(self) -> int:
        return sum(self.composition)

    def perm(self) -> WeylPerm:
        out, start = [], 0
        for k in self.composition:
            out.extend(start + k - 1 - j for j in range(k))
            start += k
        return WeylPerm(tuple(out))

    def block_matrix(self) -> list[list[int]]:
        return self.perm().int_matrix()

    def block_slices(self) -> list[slice]:
        out, start = [], 0
        for k in self.composition:
            out.append(slice(start, start + k))
            start += k
        return out


def compositions(n: int):
    """All compositions of n in lexicographic order."""
    if n == 0:
        yield ()
        return
    for first in range(1, n + 1):
        for rest in compositions(n - first):
            yield (first,) + rest


def relevant_weyl_elements(n: int) -> list[RelevantWeyl]:
    if n < 1:
        raise ValueError("n must be >= 1")
    return [RelevantWeyl(c) for c in compositions(n)]


# -- minors and measures -------------------------------------------------


def principal_minor(g: PMatrix, r: int) -> PadicScaled:
    """Determinant of the top-left r x r block."""
    if not 1 <= r <= g.n:
        raise ValueError(f"r={r} out of range")
    return g.minor(range(r), range(r))


def delta_big(g: PMatrix) -> Fraction:
    """|Delta_1^2 ... Delta_{n-1}^2 / Delta_n^2|, or 0 off the open cell."""
    p = g.ctx.p
    vals = []
    for r in range(1, g.n + 1):
        d = principal_minor(g, r)
        if d.is_exact_zero:
            return Fraction(0)
        vals.append(d.valuation())  # raises PrecisionLoss when undecidable
    v = 2 * sum(vals[:-1]) - 2 * vals[-1]
    return Fraction(p) ** (-v)


def modulus_delta(a: TorusDiag) -> Fraction:
    """delta(a) = |a_1^{n-1} a_2^{n-3} ... a_n^{1-n}|."""
    n = a.n
    v = sum((n + 1 - 2 * i) * e for i, e in enumerate(a.exponents, start=1))
    return Fraction(a.p) ** (-v)


def bottom_minors(g: PMatrix, k: int) -> dict:
    """det(g[I, J]) for I the last k rows and every k-subset J of columns."""
    n = g.n
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range")
    rows = list(range(n - k, n))
    return {J: g.minor(rows, J) for J in itertools.combinations(range(n), k)}


def in_Km(g: PMatrix, m: int) -> bool:
    """g in K_m: g = 1 mod p^m (m >= 1), or g in GL_n(Z_p) (m = 0)."""
    if m < 0:
        raise ValueError("m must be >= 0")
    if m == 0:
        if not all(x.is_integral() for r in g.rows for x in r):
            return False
        return g.det().is_unit()
    n = g.n
    return all((g[i, j] - (1 if i == j else 0)).in_pm(m) for i in range(n) for j in range(n))


def nk_membership(g: PMatrix, m: int) -> bool:
    """Is g in N(Q_p) K_m?  Decided by the bottom-row minors of g.

    For m >= 1 the tail minor (last k columns) must be 1 mod p^m and every other
    bottom k x k minor 0 mod p^m.  For m = 0 every bottom minor must be integral
    with at least one unit, for each k.
    """
    n = g.n
    for k in range(1, n + 1):
        tail = tuple(range(n - k, n))
        minors = bottom_minors(g, k)
        if m == 0:
            if not all(x.is_integral() for x in minors.values()):
                return False
            if not any(x.is_unit() for x in minors.values()):
                return False
        else:
            for J, x in minors.items():
                ok = x.congruent_one(m) if J == tail else x.in_pm(m)
                if not ok:
                    return False
    return True


def _lu_unit_lower(g: PMatrix):
    # g = L U with L unit lower triangular, no pivoting
    n, ctx = g.n, g.ctx
    a = [list(r) for r in g.rows]
    lower = [[PadicScaled.one(ctx) if i == j else PadicScaled.zero(ctx) for j in range(n)]
             for i in range(n)]
    for k in range(n):
        piv = a[k][k]
        if piv.is_exact_zero:
            raise NotInBigCell(f"pivot {k} vanishes")
        inv = piv.inverse()  # PrecisionLoss if zero at precision
        for i in range(k + 1, n):
            if a[i][k].is_exact_zero:
                continue
            f = a[i][k] * inv
            lower[i][k] = f
            for j in range(k, n):
                a[i][j] = a[i][j] - f * a[k][j]
            a[i][k] = PadicScaled.zero(ctx)
    return PMatrix(lower, ctx), PMatrix(a, ctx)


def _flip(g: PMatrix) -> PMatrix:
    n = g.n
    return PMatrix([[g[n - 1 - i, n - 1 - j] for j in range(n)] for i in range(n)], g.ctx)


def ul_decompose(g: PMatrix) -> tuple[UpperUnipotent, PMatrix]:
    """g = U * L with U upper unipotent and L lower triangular."""
    # flipping rows and columns turns UL into LU
    lo, up = _lu_unit_lower(_flip(g))
    return UpperUnipotent.from_matrix(_flip(lo)), _flip(up)


def bruhat_extract(g: PMatrix, w: WeylPerm, c: TorusDiag) -> tuple[UpperUnipotent, UpperUnipotent]:
    """The unique (u, u') with g = u (w c) u' for the longest w."""
    if w != WeylPerm.longest(g.n):
        raise ValueError("bruhat_extract supports only the longest Weyl element")
    ctx = g.ctx
    wc = w.matrix(ctx) @ c.matrix(ctx)
    wc_inv = wc.inverse()
    lo, up = _lu_unit_lower(wc_inv @ g)
    # the upper factor must be unipotent, otherwise g is not in this double coset
    for i in range(g.n):
        if not up[i, i] == 1:
            raise NotInBigCell("torus part does not match c")
    u = wc @ lo @ wc_inv
    return UpperUnipotent.from_matrix(u), UpperUnipotent.from_matrix(up)


def involution_iota(g: PMatrix) -> PMatrix:
    """g -> w (g^t)^{-1} w with w the longest Weyl element."""
    n = g.n
    inv_t = g.inverse().transpose()
    return PMatrix([[inv_t[n - 1 - i, n - 1 - j] for j in range(n)] for i in range(n)], g.ctx)

