"""Pruned depth-first enumeration of u' residues for the big cell.

Entries of u' are x_ij = r_ij / p**ell with r_ij in [0, p**(ell+m)).  For
g = w c u' the bottom k x k minors are

    (-1)**(k(k-1)/2) * v_1...v_k * p**(A_k - k*ell) * M_J

where A_k = e_1 + ... + e_k and M_J is the integer minor on columns J of the
first k rows of U = p**ell * u' (diagonal p**ell).  Each membership condition
is therefore an integer congruence on M_J, tested as soon as row k-1 of U is
filled in on every column of J.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .errors import Infeasible

DEFAULT_BUDGET = 10**8


def _idet(rows):
    n = len(rows)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    total = 0
    for j in range(n):
        a = rows[0][j]
        if a:
            sub = [r[:j] + r[j + 1:] for r in rows[1:]]
            total += -a * _idet(sub) if j % 2 else a * _idet(sub)
    return total


def _vp_int(x: int, p: int) -> int:
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def positions(n: int) -> list[tuple[int, int]]:
    """Fill order: row 0 of u' first, columns right to left within a row."""
    return [(i, j) for i in range(n - 1) for j in range(n - 1, i, -1)]


def enumerate_residues(p: int, exponents, units, ell: int, m: int,
                       budget: int = DEFAULT_BUDGET, shard: tuple[int, int] | None = None):
    """Yield dicts {(i, j): r} with w c u' in N(Q_p) K_m (m >= 1) or N(Q_p) GL_n(Z_p) (m = 0).

    ``exponents`` and ``units`` describe c = diag(p**e_i v_i).  ``shard=(s, k)``
    keeps only candidates whose first coordinate index is s mod k.
    """
    n = len(exponents)
    if n == 1:
        # no unipotent coordinates: c itself must lie in K_m (or GL_1(Z_p))
        e, v = exponents[0], units[0]
        if e == 0 and (m == 0 or (v - 1) % p**m == 0):
            if shard is None or shard[0] == 0:
                yield {}
        return
    A = list(itertools.accumulate(exponents))
    if ell < max(0, max(A[:-1])):
        raise ValueError("ell must dominate the partial sums of the exponents")
    V = list(itertools.accumulate(units, lambda a, b: a * b))
    pe = p**ell
    R = p ** (ell + m)
    # minor condition data per level k = 1..n
    ek = [None] + [k * ell - A[k - 1] for k in range(1, n + 1)]
    sign = [None] + [(-1) ** (k * (k - 1) // 2) * V[k - 1] for k in range(1, n + 1)]

    if A[-1] != 0:
        return
    if m >= 1 and (sign[n] - 1) % p**m:
        return

    U = [[pe if i == j else 0 for j in range(n)] for i in range(n)]
    pos = positions(n)

    # minors that become fully determined right after filling pos[t]
    checks = []
    for t, (i, c) in enumerate(pos):
        k = i + 1
        js = []
        for J in itertools.combinations(range(n), k):
            if c in J and all(j >= c or j <= i for j in J):
                js.append(J)
        checks.append(js)
    row_end = {t for t, (i, c) in enumerate(pos) if c == i + 1}
    tails = {k: tuple(range(n - k, n)) for k in range(1, n + 1)}

    def ok_minor(k, J, M):
        e = ek[k]
        if m == 0:
            return M % p**e == 0
        mod = p ** (m + e)
        if J == tails[k]:
            return (sign[k] * M - p**e) % mod == 0
        return M % mod == 0

    def const_level_ok(k):
        # the minor on columns 0..k-1 involves no free coordinate
        J = tuple(range(k))
        return ok_minor(k, J, pe**k)

    def level_has_unit(k):
        e = ek[k]
        rows = U[:k]
        for J in itertools.combinations(range(n), k):
            M = _idet([[r[j] for j in J] for r in rows])
            if M and _vp_int(abs(M), p) == e:
                return True
        return False

    for k in range(1, n + 1):
        if not const_level_ok(k):
            return

    count = 0
    last = len(pos) - 1
    stack_vals = [0] * len(pos)

    def dfs(t):
        nonlocal count
        i, c = pos[t]
        k = i + 1
        rng = range(R)
        if t == 0 and shard is not None:
            rng = range(shard[0], R, shard[1])
        for r in rng:
            count += 1
            if count > budget:
                raise Infeasible(f"candidate budget {budget} exceeded")
            U[i][c] = r
            good = True
            for J in checks[t]:
                M = _idet([[U[row][j] for j in J] for row in range(k)])
                if not ok_minor(k, J, M):
                    good = False
                    break
            if good and m == 0 and t in row_end and not level_has_unit(k):
                good = False
            if not good:
                continue
            stack_vals[t] = r
            if t == last:
                if m == 0 and not level_has_unit(n):
                    continue
                yield {pos[s]: stack_vals[s] for s in range(len(pos))}
            else:
                yield from dfs(t + 1)
        U[i][c] = 0

    yield from dfs(0)


def residues_to_fractions(res: dict, p: int, ell: int) -> dict:
    return {ij: Fraction(r, p**ell) for ij, r in res.items()}


def reduce_to_grid(x: Fraction, p: int, ell: int, m: int) -> int:
    """The residue r in [0, p**(ell+m)) with x = r / p**ell mod p**m Z_p."""
    y = x * p**ell
    if y.denominator % p == 0:
        raise ValueError(f"{x} has denominator beyond p^{ell}")
    mod = p ** (ell + m)
    return y.numerator * pow(y.denominator, -1, mod) % mod


def normalize_uprime(entries: dict, n: int, p: int, ell: int, m: int) -> dict:
    """Grid residues of the coset u' N(p^m Z_p), entries given as rationals.

    Column by column, bottom to top: right multiplication by 1 + d E_ij with
    d in p^m Z_p moves x_ij onto the grid and shifts x_kj (k < i) by x_ki * d.
    """
    x = {(i, j): Fraction(entries.get((i, j), 0)) for i in range(n) for j in range(i + 1, n)}
    out = {}
    for j in range(1, n):
        for i in range(j - 1, -1, -1):
            r = reduce_to_grid(x[(i, j)], p, ell, m)
            d = Fraction(r, p**ell) - x[(i, j)]
            for k in range(i):
                x[(k, j)] += x[(k, i)] * d
            x[(i, j)] = Fraction(r, p**ell)
            out[(i, j)] = r
    return out
