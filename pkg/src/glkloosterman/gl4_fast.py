"""Closed-form parametrisation of the GL(4) big cell.

Write the cell torus as

    c~ = diag(p^s v4, p^{r-s} v3, p^{t-r} v2, p^{-t} v1)

so that a CellSpec with ladder (a_1, a_2, a_3) and units (U_1, .., U_4) has
(s, r, t) = (a_1, a_2, a_3) and (v4, v3, v2, v1) = (U_1, .., U_4).  The right
unipotent factor is

    [[1, x, u, w], [0, 1, y, v], [0, 0, 1, z], [0, 0, 0, 1]]

with x = p^-a x', y = p^-b y', z = p^-c z', u = p^-d u', v = p^-f v', w = p^-e w'.
A valuation of -m encodes the zero class (the entry lies in p^m Z_p).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from . import _cellenum
from .errors import ConfigError, DegenerateDenominator, Infeasible, PrecisionLoss
from .group_geometry import PMatrix, UpperUnipotent
from .kloosterman import CellSpec
from .padic_core import CycloAccumulator, CycloSum, PadicScaled, padic, xi_of

__all__ = [
    "GL4Param",
    "properties_filter",
    "left_unipotent_closed_form",
    "verify_identity_gl4",
    "kloosterman_gl4_fast",
    "accepted_params",
    "param_from_uprime",
]

NAMES = ("x", "y", "z", "u", "v", "w")
VAL_NAMES = {"x": "a", "y": "b", "z": "c", "u": "d", "v": "f", "w": "e"}
# position of each entry in the 4 x 4 right unipotent factor
SLOTS = {"x": (0, 1), "u": (0, 2), "w": (0, 3), "y": (1, 2), "v": (1, 3), "z": (2, 3)}


@dataclass(frozen=True)
class GL4Param:
    """Valuation codes and unit parts of the six entries of u'.

    ``vals[k]`` is the negated valuation of entry k (so entry = p^-val * unit) and
    ``units[k]`` its unit part; val == -m means the entry is zero.
    """

    vals: tuple
    units: tuple
    m: int

    def __getattr__(self, name):
        # a, b, c, d, f, e and x_, y_, ... (the unit parts x', y', ...)
        if name.startswith("__") or name in ("vals", "units", "m"):
            raise AttributeError(name)
        for k, key in enumerate(NAMES):
            if name == VAL_NAMES[key]:
                return self.vals[k]
            if name == key + "_":
                return self.units[k]
        raise AttributeError(name)

    def entry(self, key: str, p: int) -> Fraction:
        k = NAMES.index(key)
        if self.vals[k] <= -self.m:
            return Fraction(0)
        return Fraction(self.units[k]) / Fraction(p) ** self.vals[k]

    def uprime(self, spec: CellSpec) -> UpperUnipotent:
        return UpperUnipotent(4, {SLOTS[k]: self.entry(k, spec.p) for k in NAMES}, spec.ctx)


def _letters(spec: CellSpec):
    if spec.n != 4:
        raise ConfigError("the closed forms are specific to GL(4)")
    s, r, t = spec.a
    v4, v3, v2, v1 = spec.units
    return s, r, t, v1, v2, v3, v4


def _derived(param: GL4Param, spec: CellSpec) -> dict:
    p, ctx = spec.p, spec.ctx
    s, r, t, v1, v2, v3, v4 = _letters(spec)
    x, y, z, u, v, w = (padic(param.entry(k, p), ctx) for k in NAMES)
    P = lambda e: padic(Fraction(p) ** e, ctx)  # noqa: E731
    inv = lambda a: padic(Fraction(1, a), ctx)  # noqa: E731
    return {
        "x": x, "y": y, "z": z, "u": u, "v": v, "w": w,
        "mu": P(t) * inv(v1) * (x * v + u * z - x * y * z - w),
        "lam": P(r) * inv(v1 * v2) * (w * y - u * v),
        "m_tilde": P(r) * (x * v - w),
        "n_tilde": P(t) * (y * z - v),
        "t_tilde": P(r) * (x * y - u),
        "k": P(r) * v3 * v4 * y,
        "z_cond": P(t) * v2 * v3 * v4 * z,
    }


def properties_filter(param: GL4Param, spec: CellSpec) -> bool:
    """All ten congruence properties of the parameter set."""
    s, r, t, v1, v2, v3, v4 = _letters(spec)
    m, p = spec.m, spec.p
    # (3): the corner entry has valuation exactly -s and v4 w' = 1 mod p^m
    if param.e != s or (v4 * param.w_ - 1) % p**m:
        return False
    # (4), (5), (8), (10): bounds on the free valuations
    if param.a + m > s or param.d + m > s or param.f + m > r:
        return False
    if param.b + m > r or param.c + m > t:
        return False
    d = _derived(param, spec)
    return (d["mu"].congruent_one(m) and d["lam"].congruent_one(m)  # (1), (2)
            and d["m_tilde"].in_pm(m) and d["n_tilde"].in_pm(m)  # (6), (7)
            and d["k"].in_pm(m) and d["t_tilde"].in_pm(m)  # (8), (9)
            and d["z_cond"].in_pm(m))  # (10)


def _safe_inverse(x: PadicScaled, what: str) -> PadicScaled:
    try:
        return x.inverse()
    except (ZeroDivisionError, PrecisionLoss) as exc:
        raise DegenerateDenominator(f"{what} vanishes") from exc


def left_unipotent_closed_form(param: GL4Param, spec: CellSpec) -> tuple:
    """(u_1, ..., u_6) of the left unipotent factor, from the rewritten closed forms."""
    p, ctx = spec.p, spec.ctx
    s, r, t, v1, v2, v3, v4 = _letters(spec)
    d = _derived(param, spec)
    x, y, z, u, v, w = (d[k] for k in NAMES)
    _safe_inverse(w, "w")
    _safe_inverse(u * v - w * y, "uv - wy")
    _safe_inverse(x * y * z - x * v - u * z + w, "xyz - xv - uz + w")
    mu_inv = _safe_inverse(d["mu"], "mu")
    lam_inv = _safe_inverse(d["lam"], "lambda")
    P = lambda e: padic(Fraction(p) ** e, ctx)  # noqa: E731
    inv = lambda a: padic(Fraction(1, a), ctx)  # noqa: E731
    u1 = mu_inv * P(r - t) * inv(v2) * (x * y - u)
    u2 = lam_inv * P(t - r) * inv(v1 * v3) * P(s) * (u * z - w)
    # p^s w = w' and v = p^-f v'
    u3 = -(padic(v3, ctx) * P(r - s) * v * (P(s) * w * v4).inverse())
    u4 = -(mu_inv * inv(v3) * P(s - r) * x)
    u5 = lam_inv * inv(v1 * v4) * P(t - s) * (v - y * z)
    u6 = mu_inv * inv(v4) * P(-s)
    return u1, u2, u3, u4, u5, u6


def left_unipotent_original(param: GL4Param, spec: CellSpec) -> tuple:
    """The same six entries from the original quotient forms (used as a cross-check)."""
    p, ctx = spec.p, spec.ctx
    s, r, t, v1, v2, v3, v4 = _letters(spec)
    d = _derived(param, spec)
    x, y, z, u, v, w = (d[k] for k in NAMES)
    a1, a2, a3, a4 = (padic(Fraction(p) ** e * vv, ctx)
                      for e, vv in ((-t, v1), (t - r, v2), (r - s, v3), (s, v4)))
    D = _safe_inverse(x * y * z - x * v - u * z + w, "xyz - xv - uz + w")
    E = _safe_inverse(u * v - w * y, "uv - wy")
    W = _safe_inverse(w, "w")
    return (a1 * (u - x * y) * a2.inverse() * D,
            a2 * (w - u * z) * a3.inverse() * E,
            -(a3 * v * a4.inverse() * W),
            a1 * x * a3.inverse() * D,
            a2 * (y * z - v) * a4.inverse() * E,
            -(a1 * a4.inverse() * D))


def _left_matrix(us, spec: CellSpec) -> UpperUnipotent:
    u1, u2, u3, u4, u5, u6 = us
    return UpperUnipotent(4, {(0, 1): u1, (1, 2): u2, (2, 3): u3, (0, 2): u4, (1, 3): u5,
                              (0, 3): u6}, spec.ctx)


def verify_identity_gl4(param: GL4Param, spec: CellSpec) -> bool:
    """u w c~ u' equals the explicit lower triangular g_0, entry by entry."""
    ctx = spec.ctx
    s, r, t, v1, v2, v3, v4 = _letters(spec)
    d = _derived(param, spec)
    x, y, z, u, v, w = (d[k] for k in NAMES)
    left = _left_matrix(left_unipotent_original(param, spec), spec)
    rhs = left.matrix() @ spec.wc_matrix() @ param.uprime(spec).matrix()
    a1, a2, a3, a4 = (padic(Fraction(spec.p) ** e * vv, ctx)
                      for e, vv in ((-t, v1), (t - r, v2), (r - s, v3), (s, v4)))
    D = x * y * z - x * v - u * z + w
    E = u * v - w * y
    zero = PadicScaled.zero(ctx)
    g0 = [
        [-(a1 * D.inverse()), zero, zero, zero],
        [a2 * (y * z - v) * E.inverse(), a2 * D * E.inverse(), zero, zero],
        [-(a3 * v * w.inverse()), a3 * (w - x * v) * w.inverse(), a3 * (w * y - u * v) * w.inverse(),
         zero],
        [a4, a4 * x, a4 * u, a4 * w],
    ]
    return rhs == PMatrix(g0, ctx)


def _options(spec: CellSpec, key: str):
    """(val, unit) pairs for one entry on the residue grid, after the single-entry bounds."""
    p, m, ell = spec.p, spec.m, spec.ell
    s, r, t, v1, v2, v3, v4 = _letters(spec)
    cap = {"x": s - m, "u": s - m, "v": r - m, "y": r - m, "z": t - m, "w": s}[key]
    out = []
    if key != "w":
        out.append((-m, 1))
    lo = s if key == "w" else -m + 1
    for val in range(lo, min(cap, ell) + 1):
        mod = p ** (m + val)
        for unit in range(1, mod):
            if unit % p == 0:
                continue
            if key == "w" and (v4 * unit - 1) % p**m:
                continue
            out.append((val, unit))
    return out


def accepted_params(spec: CellSpec, budget: int = _cellenum.DEFAULT_BUDGET):
    """Yield every GL4Param passing the ten properties, in a fixed order."""
    if spec.n != 4:
        raise ConfigError("GL(4) only")
    if not spec.feasible:
        return
    p, m, ctx = spec.p, spec.m, spec.ctx
    s, r, t, v1, v2, v3, v4 = _letters(spec)
    opts = {k: [(val, unit, padic(Fraction(unit) / Fraction(p) ** val if val > -m else 0, ctx))
                for val, unit in _options(spec, k)] for k in NAMES}
    P = lambda e: padic(Fraction(p) ** e, ctx)  # noqa: E731
    pr, pt = P(r), P(t)
    c_mu = pt * padic(Fraction(1, v1), ctx)
    c_lam = pr * padic(Fraction(1, v1 * v2), ctx)
    count = 0
    for (xa, xu, x), (ya, yu, y), (ua, uu, u) in itertools.product(opts["x"], opts["y"], opts["u"]):
        count += 1
        if count > budget:
            raise Infeasible("candidate budget exceeded")
        xy = x * y
        if not (pr * (xy - u)).in_pm(m):  # (9)
            continue
        for za, zu, z in opts["z"]:
            yz = y * z
            for fa, fu, v in opts["v"]:
                count += 1
                if not (pt * (yz - v)).in_pm(m):  # (7)
                    continue
                xv = x * v
                for ea, eu, w in opts["w"]:
                    count += 1
                    if count > budget:
                        raise Infeasible("candidate budget exceeded")
                    if not (pr * (xv - w)).in_pm(m):  # (6)
                        continue
                    if not (c_lam * (w * y - u * v)).congruent_one(m):  # (2)
                        continue
                    if not (c_mu * (xv + u * z - xy * z - w)).congruent_one(m):  # (1)
                        continue
                    param = GL4Param((xa, ya, za, ua, fa, ea), (xu, yu, zu, uu, fu, eu), m)
                    if properties_filter(param, spec):
                        yield param


def param_from_uprime(uprime: UpperUnipotent, spec: CellSpec) -> GL4Param:
    """Valuation/unit parameters of a grid u' (as produced by the generic enumeration)."""
    p, m = spec.p, spec.m
    vals, units = [], []
    for k in NAMES:
        xk = uprime[SLOTS[k]].to_fraction()
        if xk == 0:
            vals.append(-m)
            units.append(1)
            continue
        num, den = xk.numerator, xk.denominator
        v = 0
        while num % p == 0:
            num //= p
            v += 1
        while den % p == 0:
            den //= p
            v -= 1
        mod = p ** (m - v)
        vals.append(-v)
        units.append(num * pow(den, -1, mod) % mod)
    return GL4Param(tuple(vals), tuple(units), m)


def kloosterman_gl4_fast(spec: CellSpec, budget: int = _cellenum.DEFAULT_BUDGET) -> CycloSum:
    """Kl_p(psi; c~, w) summed over accepted parameters with closed-form u_1, u_2, u_3."""
    ctx = spec.ctx
    acc = CycloAccumulator(ctx.root_order)
    for param in accepted_params(spec, budget):
        u1, u2, u3, *_ = left_unipotent_closed_form(param, spec)
        nu, nup = spec.nu, spec.nu_prime
        arg = (u1 * nu[0] + u2 * nu[1] + u3 * nu[2]
               + padic(param.entry("x", spec.p) * nup[0] + param.entry("y", spec.p) * nup[1]
                       + param.entry("z", spec.p) * nup[2], ctx))
        acc.add(xi_of(arg, ctx))
    return acc.result()
