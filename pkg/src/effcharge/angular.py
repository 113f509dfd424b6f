"""Exact angular-momentum algebra.

Wigner 3j symbols are evaluated with the Racah sum in rational arithmetic and
returned as :class:`SignedSqrt` values (``sign * sqrt(square)``), so products of
an even number of them stay exact.  Arguments may be integers, half-integers
given as :class:`fractions.Fraction`, or floats that are exact multiples of 1/2.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial, isqrt

__all__ = [
    "SignedSqrt",
    "three_j",
    "coulomb_angular_M",
    "exchange_angular_D",
    "allowed_exchange_orders",
    "allowed_direct_orders",
    "gaunt_exact",
    "gaunt",
]


@dataclass(frozen=True)
class SignedSqrt:
    """A real number stored as ``sign * sqrt(square)`` with rational ``square``."""

    sign: int
    square: Fraction

    def __float__(self) -> float:
        return self.sign * float(self.square) ** 0.5

    def __mul__(self, other: "SignedSqrt") -> "SignedSqrt":
        return SignedSqrt(self.sign * other.sign, self.square * other.square)

    def __neg__(self) -> "SignedSqrt":
        return SignedSqrt(-self.sign, self.square)

    def is_zero(self) -> bool:
        return self.sign == 0

    def to_fraction(self) -> Fraction:
        """Exact rational value; raises if the square is not a perfect square."""
        if self.sign == 0:
            return Fraction(0)
        num, den = self.square.numerator, self.square.denominator
        rn, rd = isqrt(num), isqrt(den)
        if rn * rn != num or rd * rd != den:
            raise ValueError(f"sqrt({self.square}) is irrational")
        return self.sign * Fraction(rn, rd)


ZERO = SignedSqrt(0, Fraction(0))


def _twice(x) -> int:
    """Return 2*x as an int, insisting x is a multiple of 1/2."""
    t = Fraction(x) * 2
    if t.denominator != 1:
        raise ValueError(f"{x!r} is not an integer or half-integer")
    return int(t)


def three_j(j1, j2, j3, m1, m2, m3) -> SignedSqrt:
    """Wigner 3j symbol ``(j1 j2 j3; m1 m2 m3)``, exact.

    Selection-rule violations give zero rather than raising.

    >>> float(three_j(1, 1, 0, 0, 0, 0))  # doctest: +ELLIPSIS
    -0.577350...
    """
    return _three_j2(*(_twice(x) for x in (j1, j2, j3, m1, m2, m3)))


@lru_cache(maxsize=None)
def _three_j2(tj1: int, tj2: int, tj3: int, tm1: int, tm2: int, tm3: int) -> SignedSqrt:
    # all arguments doubled
    if min(tj1, tj2, tj3) < 0:
        return ZERO
    if tm1 + tm2 + tm3 != 0:
        return ZERO
    if abs(tm1) > tj1 or abs(tm2) > tj2 or abs(tm3) > tj3:
        return ZERO
    if (tj1 + tm1) % 2 or (tj2 + tm2) % 2 or (tj3 + tm3) % 2:
        return ZERO
    if tj3 < abs(tj1 - tj2) or tj3 > tj1 + tj2 or (tj1 + tj2 + tj3) % 2:
        return ZERO

    a = (tj1 + tj2 - tj3) // 2
    b = (tj1 - tj2 + tj3) // 2
    c = (-tj1 + tj2 + tj3) // 2
    total = (tj1 + tj2 + tj3) // 2
    jp1, jm1 = (tj1 + tm1) // 2, (tj1 - tm1) // 2
    jp2, jm2 = (tj2 + tm2) // 2, (tj2 - tm2) // 2
    jp3, jm3 = (tj3 + tm3) // 2, (tj3 - tm3) // 2

    prefactor = Fraction(
        factorial(a) * factorial(b) * factorial(c)
        * factorial(jp1) * factorial(jm1)
        * factorial(jp2) * factorial(jm2)
        * factorial(jp3) * factorial(jm3),
        factorial(total + 1),
    )

    # Racah sum; t runs over all values keeping every factorial argument >= 0
    x1 = (tj3 - tj2 + tm1) // 2
    x2 = (tj3 - tj1 - tm2) // 2
    t_min = max(0, -x1, -x2)
    t_max = min(a, jm1, jp2)
    s = 0
    for t in range(t_min, t_max + 1):
        term = Fraction(
            1,
            factorial(t) * factorial(x1 + t) * factorial(x2 + t)
            * factorial(a - t) * factorial(jm1 - t) * factorial(jp2 - t),
        )
        s += -term if t % 2 else term
    if s == 0:
        return ZERO
    phase = -1 if ((tj1 - tj2 - tm3) // 2) % 2 else 1
    sign = phase * (1 if s > 0 else -1)
    return SignedSqrt(sign, prefactor * Fraction(s) ** 2)


def allowed_direct_orders(l: int, l1: int) -> range:
    """Multipole orders summed in the direct (Coulomb) term."""
    return range(0, min(2 * l, 2 * l1) + 1)


def allowed_exchange_orders(l: int, l1: int) -> range:
    """Multipole orders summed in the exchange term."""
    return range(abs(l - l1), l + l1 + 1)


@lru_cache(maxsize=None)
def coulomb_angular_M(l: int, m: int, l1: int, m1: int, j: int) -> Fraction:
    """Angular factor multiplying the direct radial integral of order ``j``.

    Product of the two diagonal Gaunt-type coefficients of the orbitals
    ``(l, m)`` and ``(l1, m1)``; always rational.
    """
    if j < 0:
        return Fraction(0)
    first = three_j(l, l, j, 0, 0, 0) * three_j(l, l, j, m, -m, 0)
    second = three_j(l1, l1, j, 0, 0, 0) * three_j(l1, l1, j, m1, -m1, 0)
    if first.is_zero() or second.is_zero():
        return Fraction(0)
    value = (2 * l + 1) * (2 * l1 + 1) * first.to_fraction() * second.to_fraction()
    return -value if (m + m1) % 2 else value


@lru_cache(maxsize=None)
def exchange_angular_D(l: int, m: int, l1: int, m1: int, j: int) -> Fraction:
    """Angular factor multiplying the exchange radial integral of order ``j``.

    Zero outside the triangle ``|l - l1| <= j <= l + l1``.
    """
    if j < abs(l - l1) or j > l + l1:
        return Fraction(0)
    a = three_j(l1, l, j, 0, 0, 0)
    b = three_j(l1, l, j, -m1, m, m1 - m)
    if a.is_zero() or b.is_zero():
        return Fraction(0)
    value = (2 * l + 1) * (2 * l1 + 1) * a.square * b.square
    return -value if (l + l1 + j) % 2 else value


@lru_cache(maxsize=None)
def gaunt_exact(l: int, m: int, l1: int, m1: int, k: int) -> SignedSqrt:
    """Angular coefficient ``c^k(lm, l1m1) = <lm| C^k_{m-m1} |l1m1>``.

    ``C^k`` is the renormalised spherical harmonic ``sqrt(4 pi/(2k+1)) Y_k``;
    the two-electron integral is
    ``<ab|1/r12|cd> = delta(m_a+m_b, m_c+m_d) sum_k c^k(a,c) c^k(d,b) R^k``.
    """
    a = three_j(l, k, l1, 0, 0, 0)
    b = three_j(l, k, l1, -m, m - m1, m1)
    if a.is_zero() or b.is_zero():
        return ZERO
    value = SignedSqrt(1, Fraction((2 * l + 1) * (2 * l1 + 1))) * a * b
    return -value if m % 2 else value


@lru_cache(maxsize=None)
def gaunt(l: int, m: int, l1: int, m1: int, k: int) -> float:
    """Floating-point value of :func:`gaunt_exact`."""
    return float(gaunt_exact(l, m, l1, m1, k))
