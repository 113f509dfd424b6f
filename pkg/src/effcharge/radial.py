"""Unit-charge hydrogenic radial functions and their two-electron integrals.

Every radial function is ``sqrt(norm_sq) * P(r) * exp(-r/n)`` with a rational
``norm_sq`` and a polynomial ``P`` with rational coefficients.  Products that
enter the direct and exchange integrals contain the normalisation squared, so
the double integrals are exact rationals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from gmpy2 import mpq
from math import comb, factorial

import numpy as np

__all__ = [
    "RadialOrbital",
    "radial_wavefunction",
    "direct_integral_I",
    "exchange_integral_L",
    "slater_kernel_integral",
]


@dataclass(frozen=True)
class RadialOrbital:
    """Hydrogenic ``R_nl`` at unit nuclear charge.

    ``coeffs[k]`` multiplies ``r**k``; the exponential factor is ``exp(-r/n)``.
    """

    n: int
    l: int
    norm_sq: Fraction
    coeffs: tuple[Fraction, ...]

    @property
    def exponent(self) -> Fraction:
        return Fraction(1, self.n)

    @property
    def norm(self) -> float:
        return float(self.norm_sq) ** 0.5

    def polynomial(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for c in reversed(self.coeffs):
            out = out * r + float(c)
        return out

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return self.norm * self.polynomial(r) * np.exp(-r / self.n)

    def nodes(self) -> np.ndarray:
        """Positive radial nodes (roots of the Laguerre factor)."""
        poly = np.polynomial.Polynomial([float(c) for c in self.coeffs])
        roots = poly.roots()
        real = roots[np.abs(roots.imag) < 1e-9].real
        return np.sort(real[real > 1e-12])


def _check_nl(n: int, l: int) -> None:
    if n < 1 or l < 0 or l >= n:
        raise ValueError(f"invalid hydrogenic orbital (n={n}, l={l})")


@lru_cache(maxsize=None)
def radial_wavefunction(n: int, l: int) -> RadialOrbital:
    """Exact representation of the unit-charge hydrogen ``R_nl``.

    >>> radial_wavefunction(1, 0).norm_sq, radial_wavefunction(1, 0).coeffs
    (Fraction(4, 1), (Fraction(1, 1),))
    """
    _check_nl(n, l)
    k = n - l - 1
    alpha = 2 * l + 1
    norm_sq = Fraction(2, n) ** 3 * Fraction(factorial(k), 2 * n * factorial(n + l))
    # rho^l L_k^alpha(rho) with rho = 2r/n, expanded in powers of r
    coeffs = [Fraction(0)] * (l + k + 1)
    for i in range(k + 1):
        c = Fraction((-1) ** i * comb(k + alpha, k - i), factorial(i))
        coeffs[l + i] = c * Fraction(2, n) ** (l + i)
    return RadialOrbital(n, l, norm_sq, tuple(coeffs))


def _poly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _pair_density(a: RadialOrbital, b: RadialOrbital):
    """Polynomial of ``r**2 * P_a * P_b`` and its decay rate (norms excluded)."""
    poly = [Fraction(0), Fraction(0)] + _poly_mul(a.coeffs, b.coeffs)
    return poly, a.exponent + b.exponent


def _half_kernel(f, alpha, g, beta, j):
    """``int_0^inf dr f(r) r^(-j-1) int_0^r t^j g(t) dt`` for exp-polynomials.

    Exact (Fraction) whenever every outer power stays non-negative; otherwise
    the finite sum carries logarithms and a convergent float series is used.
    """
    a, b = mpq(alpha), mpq(beta)
    ab = a + b
    fq = [mpq(x) for x in f]
    gq_ = [mpq(x) for x in g]
    kmax = len(g) + j + len(f)
    fact = [1]
    for k in range(1, 2 * kmax + 2):
        fact.append(fact[-1] * k)
    bpow = [mpq(1)]
    abpow = [mpq(1)]
    for _ in range(2 * kmax + 2):
        bpow.append(bpow[-1] * b)
        abpow.append(abpow[-1] * ab)
    total = mpq(0)
    approx = 0.0
    for p, fp in enumerate(fq):
        if not fp:
            continue
        s = p - j - 1
        if s < 0:
            for q, gq in enumerate(gq_):
                if gq:
                    approx += float(fp * gq) * _tail_series(float(alpha), float(beta), s, q + j)
            continue
        # inner(m) = s!/alpha^(s+1) - sum_{k<=m} beta^k (s+k)! / (k! (alpha+beta)^(s+k+1))
        inner = fact[s] / a ** (s + 1)
        k = 0
        for q, gq in enumerate(gq_):
            m = q + j
            while k <= m:
                inner -= bpow[k] * fact[s + k] / (fact[k] * abpow[s + k + 1])
                k += 1
            if gq:
                total += fp * gq * fact[m] / bpow[m + 1] * inner
    exact = Fraction(int(total.numerator), int(total.denominator))
    if approx:
        return float(exact) + approx
    return exact


def _tail_series(alpha: float, beta: float, s: int, m: int) -> float:
    # m!/beta^(m+1) * sum_{k>m} beta^k/k! * (s+k)!/(alpha+beta)^(s+k+1)
    ab = alpha + beta
    k = m + 1
    term = factorial(m) / beta ** (m + 1) * beta ** k / factorial(k) * factorial(s + k) / ab ** (s + k + 1)
    out = 0.0
    while True:
        out += term
        k += 1
        term *= beta * (s + k) / (k * ab)
        if abs(term) < 1e-18 * abs(out):
            return out


def slater_kernel_integral(f, alpha, g, beta, j):
    """Double integral of ``f(r) g(r') r_<^j / r_>^(j+1)`` for exp-polynomials.

    ``f`` and ``g`` are coefficient lists in powers of r; ``alpha`` and ``beta``
    their decay rates.
    """
    return _half_kernel(f, alpha, g, beta, j) + _half_kernel(g, beta, f, alpha, j)


@lru_cache(maxsize=None)
def _direct(n: int, l: int, n1: int, l1: int, j: int):
    a = radial_wavefunction(n, l)
    b = radial_wavefunction(n1, l1)
    f, alpha = _pair_density(a, a)
    g, beta = _pair_density(b, b)
    return a.norm_sq * b.norm_sq * slater_kernel_integral(f, alpha, g, beta, j)


@lru_cache(maxsize=None)
def _exchange(n: int, l: int, n1: int, l1: int, j: int):
    a = radial_wavefunction(n, l)
    b = radial_wavefunction(n1, l1)
    f, alpha = _pair_density(a, b)
    return a.norm_sq * b.norm_sq * slater_kernel_integral(f, alpha, f, alpha, j)


def direct_integral_I(n: int, l: int, n1: int, l1: int, j: int):
    """Direct radial integral ``I^j`` between shells ``nl`` and ``n1 l1``.

    Exact :class:`~fractions.Fraction` for ``j <= min(2l, 2l1)``; beyond that
    window the value is still computed but may be a float.
    """
    _check_nl(n, l)
    _check_nl(n1, l1)
    if j < 0:
        raise ValueError("multipole order must be non-negative")
    key = min((n, l, n1, l1), (n1, l1, n, l))
    return _direct(*key, j)


def exchange_integral_L(n: int, l: int, n1: int, l1: int, j: int):
    """Exchange radial integral ``L^j`` between shells ``nl`` and ``n1 l1``."""
    _check_nl(n, l)
    _check_nl(n1, l1)
    if j < 0:
        raise ValueError("multipole order must be non-negative")
    key = min((n, l, n1, l1), (n1, l1, n, l))
    return _exchange(*key, j)
