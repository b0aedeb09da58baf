"""Truncated p-adic numbers, the additive character xi, and exact cyclotomic sums.

``PadicScaled`` stores an element of Q_p as ``num * p**(-scale)`` known modulo
``p**prec`` (absolute precision).  At most ``ctx.W`` digits are ever kept, so the
working precision of a :class:`PrimeContext` caps every computation.  Tests
that cannot be decided at the available precision raise :class:`PrecisionLoss`
instead of guessing.

``CycloSum`` is an exact element of Z[zeta_N] kept in the power basis obtained by
reducing modulo the N-th cyclotomic polynomial.  For N = p**L this is the
familiar rule "eliminate the exponents a + (p-1)p**(L-1) using the vanishing sum
of p-th roots of unity".
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

import numpy as np

from .errors import PrecisionLoss, ScaleOverflow

__all__ = [
    "PrimeContext",
    "PadicScaled",
    "CycloSum",
    "CycloAccumulator",
    "padic",
    "vp",
    "is_prime",
    "xi_of",
    "cyclo_accumulate",
    "cyclo_magnitude",
]

CANONICALIZE_EVERY = 1 << 16


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def vp(x: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if x == 0:
        raise ValueError("valuation of 0")
    x = abs(x)
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def rational_vp(x: Rational, p: int) -> float:
    x = Fraction(x)
    if x == 0:
        return math.inf
    return vp(x.numerator, p) - vp(x.denominator, p)


@dataclass(frozen=True)
class PrimeContext:
    """Prime ``p``, working precision ``W`` (digits) and cyclotomic exponent ``L``."""

    p: int
    W: int
    L: int

    def __post_init__(self) -> None:
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if self.W < 1 or self.L < 1:
            raise ValueError("W and L must be >= 1")

    @classmethod
    def for_cell(cls, p: int, n: int, ell: int, m: int) -> PrimeContext:
        """Precision sized for an n x n cell with denominators <= p**ell at level m."""
        return cls(p, n * (ell + m) + m + 2, max(1, ell + 2 * m))

    @property
    def root_order(self) -> int:
        return self.p**self.L


class PadicScaled:
    """Element of Q_p known modulo p**prec, stored as num * p**(-scale)."""

    __slots__ = ("ctx", "num", "scale", "prec", "is_exact_zero")

    def __init__(self, ctx: PrimeContext, num: int, scale: int, prec: float,
                 is_exact_zero: bool = False):
        # raw constructor; use padic() or the arithmetic operators instead
        self.ctx = ctx
        self.num = num
        self.scale = scale
        self.prec = prec
        self.is_exact_zero = is_exact_zero

    # -- construction -----------------------------------------------------

    @classmethod
    def zero(cls, ctx: PrimeContext) -> PadicScaled:
        return cls(ctx, 0, 0, math.inf, True)

    @classmethod
    def one(cls, ctx: PrimeContext) -> PadicScaled:
        return cls.from_rational(1, ctx)

    @classmethod
    def from_rational(cls, x, ctx: PrimeContext) -> PadicScaled:
        if isinstance(x, PadicScaled):
            return x
        x = Fraction(x)
        if x == 0:
            return cls.zero(ctx)
        p, W = ctx.p, ctx.W
        den = x.denominator
        scale = vp(den, p)
        unit_den = den // p**scale
        mod = p**W
        num = x.numerator * pow(unit_den, -1, mod)
        return _make(ctx, num, scale, W - scale)

    @classmethod
    def from_parts(cls, ctx: PrimeContext, num: int, scale: int) -> PadicScaled:
        """The value num / p**scale at full working precision."""
        return cls.from_rational(Fraction(num, ctx.p**scale), ctx)

    # -- inspection -------------------------------------------------------

    @property
    def p(self) -> int:
        return self.ctx.p

    def is_zero_at_precision(self) -> bool:
        return self.is_exact_zero or self.num == 0

    def valuation(self) -> float:
        if self.is_exact_zero:
            return math.inf
        if self.num == 0:
            raise PrecisionLoss(f"valuation undetermined: zero modulo p^{self.prec}")
        return vp(self.num, self.ctx.p) - self.scale

    def _vlow(self) -> float:
        # valuation, or its lower bound prec when the value is 0 at precision
        if self.is_exact_zero:
            return math.inf
        if self.num == 0:
            return self.prec
        return vp(self.num, self.ctx.p) - self.scale

    def to_fraction(self) -> Fraction:
        """A rational representative (the stored digits, not the exact value)."""
        return Fraction(self.num, self.ctx.p**self.scale)

    def in_pm(self, m: int) -> bool:
        """Is the value in p**m Z_p?"""
        if self.is_exact_zero:
            return True
        if self.num != 0:
            return self.valuation() >= m
        if self.prec >= m:
            return True
        raise PrecisionLoss(f"cannot decide membership in p^{m}Z_p at precision {self.prec}")

    def is_integral(self) -> bool:
        return self.in_pm(0)

    def is_unit(self) -> bool:
        if self.is_exact_zero:
            return False
        if self.num != 0:
            return self.valuation() == 0
        if self.prec >= 1:
            return False
        raise PrecisionLoss("cannot decide unit-ness")

    def congruent_one(self, m: int) -> bool:
        """Is the value in 1 + p**m Z_p?"""
        return (self - 1).in_pm(m)

    def mod_key(self, m: int) -> tuple[int, int]:
        """Hashable class of the value in Q_p / p**m Z_p."""
        if self.in_pm(m):
            return (0, 0)
        if self.prec < m:
            raise PrecisionLoss(f"class mod p^{m} undetermined")
        return (self.num % self.ctx.p ** (m + self.scale), self.scale)

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other) -> PadicScaled:
        if isinstance(other, PadicScaled):
            return other
        if isinstance(other, (int, Fraction)):
            return PadicScaled.from_rational(other, self.ctx)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.is_exact_zero:
            return other
        if other.is_exact_zero:
            return self
        p = self.ctx.p
        s = max(self.scale, other.scale)
        n = self.num * p ** (s - self.scale) + other.num * p ** (s - other.scale)
        return _make(self.ctx, n, s, min(self.prec, other.prec))

    __radd__ = __add__

    def __neg__(self) -> PadicScaled:
        if self.is_exact_zero:
            return self
        return _make(self.ctx, -self.num, self.scale, self.prec)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.is_exact_zero or other.is_exact_zero:
            return PadicScaled.zero(self.ctx)
        prec = min(self._vlow() + other.prec, other._vlow() + self.prec)
        return _make(self.ctx, self.num * other.num, self.scale + other.scale, prec)

    __rmul__ = __mul__

    def inverse(self) -> PadicScaled:
        if self.is_exact_zero:
            raise ZeroDivisionError("inverse of exact zero")
        if self.num == 0:
            raise PrecisionLoss("inverse of a value that is zero at precision")
        p = self.ctx.p
        k = vp(self.num, p)
        v = k - self.scale
        r = min(self.prec - v, self.ctx.W)  # relative precision
        unit_inv = pow(self.num // p**k, -1, p**r)
        if v <= 0:
            return _make(self.ctx, unit_inv * p ** (-v), 0, r - v)
        return _make(self.ctx, unit_inv, v, r - v)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.is_exact_zero:
            if other.is_exact_zero:
                raise ZeroDivisionError
            return self
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    def __pow__(self, k: int) -> PadicScaled:
        if k < 0:
            return self.inverse() ** (-k)
        out = PadicScaled.one(self.ctx)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        d = self - other
        return d.is_exact_zero or d.num == 0

    __hash__ = None  # equality is precision-dependent

    def __repr__(self) -> str:
        if self.is_exact_zero:
            return "PadicScaled(0)"
        return (f"PadicScaled({self.num}/{self.ctx.p}^{self.scale} "
                f"+ O({self.ctx.p}^{self.prec}))")


def _make(ctx: PrimeContext, num: int, scale: int, prec) -> PadicScaled:
    p = ctx.p
    prec = min(prec, ctx.W - scale)
    digits = prec + scale
    if digits <= 0:
        return PadicScaled(ctx, 0, max(0, -prec), prec)
    num %= p**digits
    if num == 0:
        return PadicScaled(ctx, 0, max(0, -prec), prec)
    while scale > 0 and num % p == 0:
        num //= p
        scale -= 1
    return PadicScaled(ctx, num, scale, prec)


def padic(x, ctx: PrimeContext) -> PadicScaled:
    """Shorthand for :meth:`PadicScaled.from_rational`."""
    return PadicScaled.from_rational(x, ctx)


def xi_of(x: PadicScaled, ctx: PrimeContext | None = None) -> int:
    """Exponent k with xi(x) = exp(2 pi i k / p**L), where frac_p(x) = k / p**L."""
    ctx = ctx or x.ctx
    if x.is_exact_zero:
        return 0
    if x.scale > ctx.L:
        raise ScaleOverflow(f"scale {x.scale} exceeds cyclotomic exponent L={ctx.L}")
    if x.prec < 0:
        raise PrecisionLoss("value not known modulo Z_p")
    p = ctx.p
    frac = x.num % p**x.scale
    return (frac * p ** (ctx.L - x.scale)) % p**ctx.L


# ---------------------------------------------------------------------------
# cyclotomic sums


def _prime_factors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _poly_mul(a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _poly_div_exact(a: list[int], b: list[int]) -> list[int]:
    # b monic
    a = list(a)
    q = [0] * (len(a) - len(b) + 1)
    for k in range(len(q) - 1, -1, -1):
        c = a[k + len(b) - 1]
        q[k] = c
        for j, y in enumerate(b):
            a[k + j] -= c * y
    assert not any(a), "inexact polynomial division"
    return q


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    """Coefficients of the n-th cyclotomic polynomial, constant term first."""
    poly = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            poly = _poly_div_exact(poly, list(cyclotomic_poly(d)))
    return tuple(poly)


@lru_cache(maxsize=None)
def _reduction_data(order: int):
    r = math.prod(_prime_factors(order)) if order > 1 else 1
    phi_poly = cyclotomic_poly(r)
    return r, order // r, len(phi_poly) - 1, np.array(phi_poly[:-1], dtype=np.int64)


def _canonicalize(order: int, coeffs: np.ndarray) -> np.ndarray:
    # Phi_N(x) = Phi_r(x**M) with r = rad(N), M = N/r: reduce rows of x**(jM + s) in y = x**M
    r, M, deg, low = _reduction_data(order)
    rows = coeffs.reshape(r, M).copy()
    for j in range(r - 1, deg - 1, -1):
        top = rows[j]
        if top.any():
            rows[j - deg:j] -= np.outer(low, top).astype(rows.dtype)
            rows[j] = 0
    return rows.reshape(order)


_INT64_SAFE = 1 << 61


def _safe_dtype(*arrays: np.ndarray) -> type:
    total = 1
    for a in arrays:
        total *= int(np.abs(a).sum()) + 1
    return np.int64 if total < _INT64_SAFE else object


class CycloSum:
    """Exact sum of N-th roots of unity, sum_k coeffs[k] * exp(2 pi i k / N)."""

    __slots__ = ("order", "coeffs")

    def __init__(self, order: int, coeffs=None, *, canonical: bool = False):
        self.order = int(order)
        if coeffs is None:
            arr = np.zeros(self.order, dtype=np.int64)
        else:
            arr = np.asarray(coeffs)
            if arr.dtype != object:
                arr = arr.astype(np.int64)
            if arr.shape != (self.order,):
                raise ValueError(f"expected {self.order} coefficients, got {arr.shape}")
        self.coeffs = arr if canonical else _canonicalize(self.order, arr)
        self.coeffs.flags.writeable = False

    @classmethod
    def zero(cls, order: int) -> CycloSum:
        return cls(order, canonical=True)

    @classmethod
    def root(cls, order: int, k: int, weight: int = 1) -> CycloSum:
        arr = np.zeros(order, dtype=np.int64)
        arr[k % order] = weight
        return cls(order, arr)

    @classmethod
    def from_terms(cls, order: int, terms) -> CycloSum:
        arr = np.zeros(order, dtype=np.int64)
        for k, c in terms:
            arr[k % order] += c
        return cls(order, arr)

    @property
    def order_exp(self) -> int | None:
        """L when the order is a prime power p**L, otherwise None."""
        primes = _prime_factors(self.order)
        if len(primes) != 1:
            return None
        return vp(self.order, primes[0])

    def terms(self) -> list[tuple[int, int]]:
        return [(int(k), int(self.coeffs[k])) for k in np.flatnonzero(self.coeffs)]

    def is_zero(self) -> bool:
        return not self.coeffs.any()

    def embed(self, order: int) -> CycloSum:
        if order == self.order:
            return self
        if order % self.order:
            raise ValueError(f"cannot embed order {self.order} into {order}")
        arr = np.zeros(order, dtype=self.coeffs.dtype)
        arr[:: order // self.order] = self.coeffs
        return CycloSum(order, arr)

    def _common(self, other: CycloSum) -> tuple[CycloSum, CycloSum]:
        if self.order == other.order:
            return self, other
        n = math.lcm(self.order, other.order)
        return self.embed(n), other.embed(n)

    def __add__(self, other):
        if isinstance(other, int):
            other = CycloSum.root(self.order, 0, other)
        if not isinstance(other, CycloSum):
            return NotImplemented
        a, b = self._common(other)
        dt = _safe_dtype(a.coeffs, b.coeffs)
        return CycloSum(a.order, a.coeffs.astype(dt) + b.coeffs.astype(dt))

    __radd__ = __add__

    def __neg__(self) -> CycloSum:
        return CycloSum(self.order, -self.coeffs, canonical=True)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, np.integer)):
            dt = np.int64 if abs(int(other)) * (int(np.abs(self.coeffs).sum()) + 1) < _INT64_SAFE else object
            return CycloSum(self.order, self.coeffs.astype(dt) * int(other), canonical=True)
        if not isinstance(other, CycloSum):
            return NotImplemented
        a, b = self._common(other)
        n = a.order
        dt = _safe_dtype(a.coeffs, b.coeffs)
        out = np.zeros(n, dtype=dt)
        bc = b.coeffs.astype(dt)
        for k in np.flatnonzero(a.coeffs):
            out += int(a.coeffs[k]) * np.roll(bc, int(k))
        return CycloSum(n, out)

    __rmul__ = __mul__

    def conjugate(self) -> CycloSum:
        """Complex conjugate: exponent k -> -k."""
        arr = np.roll(self.coeffs[::-1], 1)
        return CycloSum(self.order, arr)

    def exact_div(self, d: int) -> CycloSum:
        if np.any(self.coeffs % d):
            raise ValueError(f"coefficients not divisible by {d}")
        return CycloSum(self.order, self.coeffs // d, canonical=True)

    def value(self) -> complex:
        k = np.arange(self.order)
        z = np.exp(2j * np.pi * k / self.order)
        return complex(np.dot(self.coeffs.astype(np.float64), z))

    def magnitude(self) -> float:
        return cyclo_magnitude(self)

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = CycloSum.root(self.order, 0, other)
        if not isinstance(other, CycloSum):
            return NotImplemented
        a, b = self._common(other)
        return bool(np.array_equal(a.coeffs, b.coeffs))

    __hash__ = None

    def __repr__(self) -> str:
        body = " + ".join(f"{c}*z^{k}" for k, c in self.terms()) or "0"
        return f"CycloSum[N={self.order}]({body})"


class CycloAccumulator:
    """Mutable buffer for summing many roots of unity of one order."""

    def __init__(self, order: int):
        self.order = order
        self._buf = np.zeros(order, dtype=np.int64)
        self._pending = 0

    def add(self, exponent: int, weight: int = 1) -> None:
        self._buf[exponent % self.order] += weight
        self._pending += 1
        if self._pending >= CANONICALIZE_EVERY:
            self._buf = _canonicalize(self.order, self._buf)
            self._pending = 0

    def merge(self, other: CycloAccumulator | CycloSum) -> None:
        coeffs = other._buf if isinstance(other, CycloAccumulator) else other.coeffs
        self._buf = _canonicalize(self.order, self._buf + coeffs)
        self._pending = 0

    def result(self) -> CycloSum:
        return CycloSum(self.order, self._buf.copy())


def cyclo_accumulate(acc: CycloSum, exponent: int, weight: int = 1) -> CycloSum:
    """acc + weight * zeta**exponent."""
    return acc + CycloSum.root(acc.order, exponent, weight)


def cyclo_magnitude(s: CycloSum) -> float:
    """|s| in double precision; absolute error below sum(|coeffs|) * 1e-12."""
    return abs(s.value())
