"""Kloosterman sets X(w c) at level m, exact Kloosterman sums, and the orbit identity.

The longest Weyl element w and the torus

    c = diag(p^{a_1} v_1, p^{a_2-a_1} v_2, ..., p^{-a_{n-1}} v_n)

determine the cell.  A point of X(w c) is a double coset
N(p^m) x N(p^m) with x = u w c u' in K_m; it is stored through the grid residues
of u' (see ``_cellenum``) together with u recovered from a UL factorisation.
"""

from __future__ import annotations

import itertools
import math
import warnings
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from . import _cellenum
from .errors import ConfigError, FactorizationMismatch, KloostermanError
from .group_geometry import (
    PMatrix,
    TorusDiag,
    UpperUnipotent,
    WeylPerm,
    in_Km,
    ul_decompose,
)
from .padic_core import (
    CycloAccumulator,
    CycloSum,
    PadicScaled,
    PrimeContext,
    padic,
    rational_vp,
    xi_of,
)

__all__ = [
    "CellSpec",
    "CellElement",
    "OrbitDecomposition",
    "enumerate_cell",
    "kloosterman_sum",
    "cell_size",
    "kloosterman_sum_and_size",
    "s2_restricted",
    "s2_twisted_decomposition",
    "orbit_decompose",
    "v_w_count",
    "s_w_theta",
    "stevens_identity_check",
    "unit_group_generators",
]


def _as_fraction_tuple(xs, k):
    if xs is None:
        return tuple(Fraction(1) for _ in range(k))
    xs = tuple(Fraction(x) for x in xs)
    if len(xs) != k:
        raise ConfigError(f"expected {k} character parameters, got {len(xs)}")
    return xs


@dataclass(frozen=True)
class CellSpec:
    """Parameters of one Kloosterman sum Kl_p(psi; c, w) for GL(n) at level m."""

    p: int
    n: int
    m: int
    a: tuple
    units: tuple
    nu: tuple = None
    nu_prime: tuple = None
    ell: int = None
    ctx: PrimeContext = field(default=None, compare=False)

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        set_("a", tuple(int(x) for x in self.a))
        set_("units", tuple(int(v) for v in self.units))
        if self.n < 1:
            raise ConfigError("n must be >= 1")
        if self.m < 1:
            raise ConfigError("level m must be >= 1")
        if len(self.a) != self.n - 1 or len(self.units) != self.n:
            raise ConfigError(f"need {self.n - 1} exponents and {self.n} units")
        if any(x < 0 for x in self.a):
            raise ConfigError("exponents must be nonnegative")
        if any(v % self.p == 0 for v in self.units):
            raise ConfigError("torus units must be prime to p")
        set_("nu", _as_fraction_tuple(self.nu, self.n - 1))
        set_("nu_prime", _as_fraction_tuple(self.nu_prime, self.n - 1))
        for x in self.nu + self.nu_prime:
            if x == 0 or abs(rational_vp(x, self.p)) > self.m:
                raise ConfigError(f"character parameter {x} outside p^-m <= |nu| <= p^m")
        lmax = max(self.a, default=0)
        if self.ell is None:
            set_("ell", lmax)
        elif self.ell < lmax:
            raise ConfigError(f"ell={self.ell} below max exponent {lmax}")
        if self.ctx is None:
            set_("ctx", PrimeContext.for_cell(self.p, self.n, self.ell, self.m))

    @property
    def torus(self) -> TorusDiag:
        return TorusDiag.from_ladder(self.p, self.a, self.units)

    @property
    def feasible(self) -> bool:
        """det(w c) = 1 mod p^m; otherwise X(w c) is empty."""
        sign = (-1) ** (self.n * (self.n - 1) // 2)
        return (sign * math.prod(self.units) - 1) % self.p**self.m == 0

    @property
    def root_order(self) -> int:
        return self.ctx.root_order

    def replace(self, **kw) -> CellSpec:
        d = dict(p=self.p, n=self.n, m=self.m, a=self.a, units=self.units, nu=self.nu,
                 nu_prime=self.nu_prime, ell=self.ell)
        d.update(kw)
        if "ell" not in kw and "a" in kw:
            d["ell"] = None
        return CellSpec(**d)

    def wc_matrix(self) -> PMatrix:
        ctx = self.ctx
        return WeylPerm.longest(self.n).matrix(ctx) @ self.torus.matrix(ctx)

    def as_dict(self) -> dict:
        return {
            "p": self.p, "m": self.m, "n": self.n, "a": list(self.a), "units": list(self.units),
            "nu": [str(x) for x in self.nu], "nu_prime": [str(x) for x in self.nu_prime],
        }


@dataclass
class CellElement:
    """x = u w c u' in K_m, with u' on the residue grid."""

    u: UpperUnipotent
    uprime: UpperUnipotent
    x: PMatrix
    key: tuple

    def char_exponent(self, spec: CellSpec) -> int:
        """k with psi(u) psi(u') = exp(2 pi i k / p^L)."""
        ctx = spec.ctx
        arg = PadicScaled.zero(ctx)
        for nu, ui in zip(spec.nu, self.u.superdiagonal()):
            arg = arg + ui * nu
        for nu, ui in zip(spec.nu_prime, self.uprime.superdiagonal()):
            arg = arg + ui * nu
        return xi_of(arg, ctx)


@dataclass
class OrbitDecomposition:
    representatives: list
    orbit_sizes: list

    @property
    def total(self) -> int:
        return sum(self.orbit_sizes)


def _key(res: dict, n: int) -> tuple:
    return tuple(res[ij] for ij in _cellenum.positions(n))


def _element_from_residues(spec: CellSpec, res: dict) -> CellElement:
    ctx = spec.ctx
    uprime = UpperUnipotent(spec.n, _cellenum.residues_to_fractions(res, spec.p, spec.ell), ctx)
    g0 = spec.wc_matrix() @ uprime.matrix()
    big_u, lower = ul_decompose(g0)
    if not in_Km(lower, spec.m):
        raise KloostermanError(f"minor filter accepted {res} but the lower factor is not in K_m")
    u = UpperUnipotent.from_matrix(big_u.matrix().inverse())
    return CellElement(u, uprime, lower, _key(res, spec.n))


def enumerate_cell(spec: CellSpec, budget: int = _cellenum.DEFAULT_BUDGET,
                   shard: tuple[int, int] | None = None):
    """Yield one CellElement per point of X(w c), in lexicographic u' order."""
    if not spec.feasible:
        return
    if spec.n == 1:
        if (spec.units[0] - 1) % spec.p**spec.m == 0 and (shard is None or shard[0] == 0):
            one = UpperUnipotent.identity(1, spec.ctx)
            yield CellElement(one, one, spec.torus.matrix(spec.ctx), ())
        return
    c = spec.torus
    for res in _cellenum.enumerate_residues(spec.p, c.exponents, c.units, spec.ell, spec.m,
                                            budget=budget, shard=shard):
        yield _element_from_residues(spec, res)


def _sum_shard(args):
    spec, budget, shard = args
    acc = CycloAccumulator(spec.root_order)
    count = 0
    for x in enumerate_cell(spec, budget=budget, shard=shard):
        acc.add(x.char_exponent(spec))
        count += 1
    return acc.result(), count


def kloosterman_sum_and_size(spec: CellSpec, budget: int = _cellenum.DEFAULT_BUDGET,
                             workers: int = 1) -> tuple[CycloSum, int]:
    if workers <= 1:
        return _sum_shard((spec, budget, None))
    jobs = [(spec, budget, (s, workers)) for s in range(workers)]
    with ProcessPoolExecutor(workers) as ex:
        parts = list(ex.map(_sum_shard, jobs))
    total = CycloSum.zero(spec.root_order)
    for s, _ in parts:
        total = total + s
    return total, sum(c for _, c in parts)


def kloosterman_sum(spec: CellSpec, budget: int = _cellenum.DEFAULT_BUDGET,
                    workers: int = 1) -> CycloSum:
    """Exact Kl_p(psi; c, w) = sum over X(w c) of psi(u(x)) psi(u'(x))."""
    return kloosterman_sum_and_size(spec, budget, workers)[0]


def cell_size(spec: CellSpec, budget: int = _cellenum.DEFAULT_BUDGET) -> int:
    if not spec.feasible:
        return 0
    c = spec.torus
    return sum(1 for _ in _cellenum.enumerate_residues(spec.p, c.exponents, c.units, spec.ell,
                                                       spec.m, budget=budget))


# -- restricted GL(2) sums ------------------------------------------------


def _lambdas(p: int, ell: int, m: int):
    mod = p ** (ell + m)
    return range(1, mod, p**m), mod


def s2_restricted(nu, nu_prime, ell: int, m: int, ctx: PrimeContext) -> CycloSum:
    """S_2(nu, nu'; p^ell) = sum over lambda = 1 mod p^m of xi((nu lambda + nu' / lambda) / p^ell)."""
    p = ctx.p
    lams, mod = _lambdas(p, ell, m)
    nu, nu_prime = padic(nu, ctx), padic(nu_prime, ctx)
    scale = padic(Fraction(1, p**ell), ctx)
    acc = CycloAccumulator(ctx.root_order)
    for lam in lams:
        lam_inv = pow(lam, -1, mod * p**m)
        arg = (nu * lam + nu_prime * lam_inv) * scale
        acc.add(xi_of(arg, ctx))
    return acc.result()


def unit_group_generators(p: int, m: int) -> list[tuple[int, int]]:
    """Generators of (Z/p^m)^x as (generator, order) pairs of a cyclic decomposition."""
    if m == 0 or p**m == 2:
        return []
    if p == 2:
        if m == 2:
            return [(3, 2)]
        return [(p**m - 1, 2), (5, 2 ** (m - 2))]
    mod = p**m
    phi = (p - 1) * p ** (m - 1)
    primes = [q for q in range(2, p) if (p - 1) % q == 0 and all(q % r for r in range(2, q))]
    for g in range(2, mod):
        if g % p == 0:
            continue
        if all(pow(g, (p - 1) // q, p) != 1 for q in primes):
            # a primitive root mod p lifts mod p^2 unless g^(p-1) = 1 mod p^2
            if m == 1 or pow(g, p - 1, p * p) != 1:
                return [(g, phi)]
    raise AssertionError("no primitive root found")


def _dlog_table(p: int, m: int):
    """Map residue mod p^m -> tuple of exponents along unit_group_generators."""
    gens = unit_group_generators(p, m)
    mod = p**m
    table = {1 % mod: tuple(0 for _ in gens)}
    for exps in itertools.product(*(range(o) for _, o in gens)):
        val = 1
        for (g, _), e in zip(gens, exps):
            val = val * pow(g, e, mod) % mod
        table[val] = exps
    return gens, table


def s2_twisted_decomposition(nu, nu_prime, ell: int, m: int, ctx: PrimeContext) -> CycloSum:
    """S_2 recovered as phi(p^m)^-1 * sum over chi mod p^m of the twisted unrestricted sums.

    The result lives at root order lcm(p^L, phi(p^m)).
    """
    p = ctx.p
    phi = (p - 1) * p ** (m - 1)
    order = math.lcm(ctx.root_order, phi)
    step_xi = order // ctx.root_order
    step_chi = order // phi
    gens, table = _dlog_table(p, m)
    mod = p ** (ell + m)
    nu, nu_prime = padic(nu, ctx), padic(nu_prime, ctx)
    scale = padic(Fraction(1, p**ell), ctx)
    acc = CycloAccumulator(order)
    chars = list(itertools.product(*(range(o) for _, o in gens)))
    for lam in range(1, mod):
        if lam % p == 0:
            continue
        lam_inv = pow(lam, -1, mod * p**m)
        k = xi_of((nu * lam + nu_prime * lam_inv) * scale, ctx)
        exps = table[lam % p**m]
        for ch in chars:
            # chi(lam) = exp(2 pi i * sum ch_i e_i / ord_i)
            t = sum(c * e * (phi // o) for c, e, (_, o) in zip(ch, exps, gens)) % phi
            acc.add(k * step_xi + t * step_chi)
    return acc.result().exact_div(phi)


# -- torus orbits and the orbit identity ----------------------------------


def v_w_count(ell: int, m: int, n: int, p: int) -> tuple[int, "itertools.product"]:
    """|V_w(ell)| = p^{(n-1) ell} and a lazy iterator over its points (lambda_1..lambda_{n-1})."""
    lams, _ = _lambdas(p, ell, m)
    return p ** ((n - 1) * ell), itertools.product(lams, repeat=n - 1)


def _torus_generators(p: int, m: int, ell: int) -> list[int]:
    mod = p ** (ell + m)
    if p == 2 and m == 1:
        gens = [mod - 1, 5 % mod]
    else:
        gens = [(1 + p**m) % mod]
    return [g for g in gens if g != 1 % mod]


def _act(res: dict, spec: CellSpec, slot: int, t: int) -> dict:
    # t in T(1+p^m) at slot `slot`; s = diag(t_n, ..., t_1) scales x_ij by s_i / s_j
    n, p, ell, m = spec.n, spec.p, spec.ell, spec.m
    s_slot = n - 1 - slot
    x = _cellenum.residues_to_fractions(res, p, ell)
    for (i, j) in list(x):
        if i == s_slot:
            x[(i, j)] *= t
        elif j == s_slot:
            x[(i, j)] /= t
    return _cellenum.normalize_uprime(x, n, p, ell, m)


def orbit_decompose(spec: CellSpec, budget: int = _cellenum.DEFAULT_BUDGET) -> OrbitDecomposition:
    """Orbits of T(1 + p^m Z_p) on X(w c); representatives are the least u' residue vectors."""
    if not spec.feasible:
        return OrbitDecomposition([], [])
    c = spec.torus
    residues = list(_cellenum.enumerate_residues(spec.p, c.exponents, c.units, spec.ell, spec.m,
                                                 budget=budget))
    n = spec.n
    by_key = {_key(r, n): r for r in residues}
    gens = _torus_generators(spec.p, spec.m, spec.ell)
    seen = set()
    reps, sizes = [], []
    for key in sorted(by_key):
        if key in seen:
            continue
        orbit = {key}
        queue = deque([by_key[key]])
        while queue:
            r = queue.popleft()
            for slot in range(n):
                for t in gens:
                    img = _act(r, spec, slot, t)
                    k2 = _key(img, n)
                    if k2 not in orbit:
                        if k2 not in by_key:
                            raise KloostermanError(f"torus action left the cell at {img}")
                        orbit.add(k2)
                        queue.append(img)
        seen |= orbit
        reps.append(_element_from_residues(spec, by_key[min(orbit)]))
        sizes.append(len(orbit))
    return OrbitDecomposition(reps, sizes)


def _kappas(x: CellElement, spec: CellSpec):
    kap = [ui * nu for nu, ui in zip(spec.nu, x.u.superdiagonal())]
    kap_p = [ui * nu for nu, ui in zip(spec.nu_prime, x.uprime.superdiagonal())]
    return kap, kap_p


def s_w_theta(x: CellElement, spec: CellSpec, ell: int | None = None) -> CycloSum:
    """S_w(theta_x; ell), evaluated directly and checked against the S_2 product."""
    ell = spec.ell if ell is None else ell
    if ell < max(spec.a, default=0):
        raise ConfigError("ell must be >= max a_i")
    ctx = spec.ctx
    if ell != spec.ell:
        ctx = PrimeContext.for_cell(spec.p, spec.n, ell, spec.m)
    p, m, n = spec.p, spec.m, spec.n
    kap, kap_p = _kappas(x, spec)
    kap = [padic(k.to_fraction(), ctx) if ctx is not spec.ctx else k for k in kap]
    kap_p = [padic(k.to_fraction(), ctx) if ctx is not spec.ctx else k for k in kap_p]
    _, lam_iter = v_w_count(ell, m, n, p)
    mod = p ** (ell + m)
    inv_mod = mod * p**m
    acc = CycloAccumulator(ctx.root_order)
    for lams in lam_iter:
        arg = PadicScaled.zero(ctx)
        for i in range(n - 1):
            # lambda'_i = lambda_{n-i}^{-1}
            arg = arg + kap[i] * lams[i] + kap_p[i] * pow(lams[n - 2 - i], -1, inv_mod)
        acc.add(xi_of(arg, ctx))
    direct = acc.result()

    prod = CycloSum.root(ctx.root_order, 0)
    pl = p**ell
    for i in range(n - 1):
        prod = prod * s2_restricted(kap[i] * pl, kap_p[n - 2 - i] * pl, ell, m, ctx)
    if direct != prod:
        raise FactorizationMismatch(f"direct {direct} != product {prod}")
    return direct


def stevens_identity_check(spec: CellSpec, budget: int = _cellenum.DEFAULT_BUDGET) -> bool:
    """|V_w(ell)| * Kl == sum over orbits of N(x) S_w(theta_x; ell), exactly."""
    kl = kloosterman_sum(spec, budget)
    dec = orbit_decompose(spec, budget)
    total = CycloSum.zero(spec.root_order)
    for x, size in zip(dec.representatives, dec.orbit_sizes):
        total = total + s_w_theta(x, spec) * size
    vcount, _ = v_w_count(spec.ell, spec.m, spec.n, spec.p)
    return total == kl * vcount


def warn_if_not_germ_normalized(spec: CellSpec) -> None:
    target = (-1) ** ((spec.n + 1) * (spec.n + 2) // 2 + 1)
    if (math.prod(spec.units) - target) % spec.p**spec.m:
        warnings.warn(f"units {spec.units} do not have product {target}; the germ reading "
                      "of this sum does not apply", stacklevel=3)
