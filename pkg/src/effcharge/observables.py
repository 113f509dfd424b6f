"""Electron densities and X-ray form factors in the effective-charge basis.

The zeroth-order density is a finite sum of exponential-polynomial terms

    rho(r) = (Zs^3 / pi) * sum_t c_t u^k_t exp(-alpha_t u) P_{L_t}(cos theta),

with ``u = Zs r`` and exact rational ``c_t`` and ``alpha_t``.  Every term has a
closed-form Fourier transform, which is what the numeric form factor uses.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
import sympy as sp
from scipy.interpolate import CubicSpline

from .config import Configuration
from .pt2 import ClosedFormResolvent, PerturbationPotentials, level, perturbation_grid
from .radial import radial_wavefunction
from .scf0 import ZerothOrderSolution, solve_zeroth_order

__all__ = [
    "BOHR_ANGSTROM",
    "DensityTerm",
    "DensityExpansion",
    "FirstOrderDensity",
    "NonSphericalError",
    "density_zeroth",
    "density_first_order",
    "form_factor_spherical",
    "form_factor_numeric",
    "s_to_q",
    "q_to_s",
    "curve_csv",
]

BOHR_ANGSTROM = 0.529177
_S_TO_Q = 4.0 * math.pi * BOHR_ANGSTROM


class NonSphericalError(ValueError):
    """Raised when a spherical-only formula is asked for an anisotropic density."""


# --------------------------------------------------------------------------
# Density expansion
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DensityTerm:
    """``coefficient * u**power * exp(-alpha u) * P_L(cos theta)`` in units of ``Zs^3/pi``."""

    coefficient: Fraction
    alpha: Fraction
    power: int
    L: int = 0


@lru_cache(maxsize=None)
def _angular_legendre(l: int, m: int) -> dict[int, Fraction]:
    """Legendre components of ``pi |Y_lm|^2``."""
    x = sp.Symbol("x")
    m = abs(m)
    plm = sp.expand(sp.assoc_legendre(l, m, x) ** 2)
    pref = sp.Rational(2 * l + 1, 4) * sp.factorial(l - m) / sp.factorial(l + m)
    out = {}
    for L in range(0, 2 * l + 1, 2):
        proj = sp.integrate(plm * sp.legendre(L, x), (x, -1, 1)) * sp.Rational(2 * L + 1, 2)
        val = sp.nsimplify(pref * proj)
        if val != 0:
            out[L] = Fraction(int(val.p), int(val.q))
    return out


@lru_cache(maxsize=None)
def _radial_square(n: int, l: int) -> tuple[Fraction, ...]:
    """Coefficients of ``R_nl(u)^2 exp(2u/n)`` in powers of ``u`` (unit charge)."""
    R = radial_wavefunction(n, l)
    out = [Fraction(0)] * (2 * len(R.coeffs) - 1)
    for i, a in enumerate(R.coeffs):
        for j, b in enumerate(R.coeffs):
            out[i + j] += a * b
    return tuple(R.norm_sq * c for c in out)


def _legendre_cosines(L: int) -> dict[int, Fraction]:
    # P_L(cos t) = sum_k a_k a_{L-k} cos((L-2k) t), a_k = binom(2k, k) / 4^k
    a = [Fraction(math.comb(2 * k, k), 4**k) for k in range(L + 1)]
    out: dict[int, Fraction] = {}
    for k in range(L + 1):
        j = abs(L - 2 * k)
        out[j] = out.get(j, Fraction(0)) + a[k] * a[L - k]
    return out


@dataclass(frozen=True)
class DensityExpansion:
    """Exponential-polynomial electron density.

    Attributes
    ----------
    terms : tuple of DensityTerm
        Like terms are merged; zero coefficients are dropped.
    Zstar : float
    label : str
    """

    terms: tuple[DensityTerm, ...]
    Zstar: float
    label: str = ""

    @property
    def N(self) -> Fraction:
        """Electron count from the exact radial moments."""
        return 4 * sum(
            (t.coefficient * math.factorial(t.power + 2) / t.alpha ** (t.power + 3)
             for t in self.terms if t.L == 0),
            Fraction(0),
        )

    def is_spherical(self) -> bool:
        return all(t.L == 0 for t in self.terms)

    def spherical_part(self) -> "DensityExpansion":
        return DensityExpansion(tuple(t for t in self.terms if t.L == 0), self.Zstar, self.label)

    def __call__(self, r, theta=None) -> np.ndarray:
        """Density at radius ``r`` and polar angle ``theta`` (spherical average if omitted)."""
        u = self.Zstar * np.asarray(r, dtype=float)
        out = np.zeros(np.broadcast(u, 0.0 if theta is None else theta).shape)
        ct = None if theta is None else np.cos(theta)
        for t in self.terms:
            if t.L and ct is None:
                continue
            val = float(t.coefficient) * u**t.power * np.exp(-float(t.alpha) * u)
            if t.L:
                val = val * np.polynomial.legendre.legval(ct, [0] * t.L + [1])
            out = out + val
        return self.Zstar**3 / math.pi * out

    def radial_density(self, r) -> np.ndarray:
        """``4 pi r^2 rho(r)`` averaged over angles."""
        r = np.asarray(r, dtype=float)
        return 4 * math.pi * r**2 * self(r)

    def cosine_terms(self) -> list[tuple[Fraction, Fraction, int, int]]:
        """Terms rewritten as ``(c, alpha, power, j)`` with angular factor ``cos(j theta)``."""
        acc: dict[tuple[Fraction, int, int], Fraction] = {}
        for t in self.terms:
            for j, w in _legendre_cosines(t.L).items():
                key = (t.alpha, t.power, j)
                acc[key] = acc.get(key, Fraction(0)) + t.coefficient * w
        return [(c, a, p, j) for (a, p, j), c in sorted(acc.items()) if c]

    def to_sympy(self, u=None, theta=None, zstar=None):
        """Symbolic density with ``u = Zs r``; returns the expression."""
        u = sp.Symbol("u", positive=True) if u is None else u
        theta = sp.Symbol("theta", real=True) if theta is None else theta
        zs = sp.Symbol("Zs", positive=True) if zstar is None else zstar
        expr = 0
        for t in self.terms:
            ang = sp.legendre(t.L, sp.cos(theta)) if t.L else 1
            expr += sp.Rational(t.coefficient.numerator, t.coefficient.denominator) * u**t.power \
                * sp.exp(-sp.Rational(t.alpha.numerator, t.alpha.denominator) * u) * ang
        return zs**3 / sp.pi * expr


def _merge(raw: dict[tuple[Fraction, int, int], Fraction]) -> tuple[DensityTerm, ...]:
    return tuple(
        DensityTerm(c, a, p, L)
        for (L, a, p), c in sorted(raw.items(), key=lambda kv: (kv[0][0], -kv[0][1], kv[0][2]))
        if c
    )


def density_zeroth(config: Configuration, solution: ZerothOrderSolution | None = None) -> DensityExpansion:
    """Closed-form zeroth-order density of ``config``.

    Examples
    --------
    >>> from effcharge.config import select_ground_configuration
    >>> cfg, sol = select_ground_configuration(2)
    >>> density_zeroth(cfg, sol).terms
    (DensityTerm(coefficient=Fraction(2, 1), alpha=Fraction(2, 1), power=0, L=0),)
    """
    solution = solve_zeroth_order(config) if solution is None else solution
    raw: dict[tuple[int, Fraction, int], Fraction] = {}
    for o in config.orbitals:
        rad = _radial_square(o.n, o.l)
        alpha = Fraction(2, o.n)
        for L, w in _angular_legendre(o.l, o.m).items():
            for p, c in enumerate(rad):
                if c:
                    key = (L, alpha, p)
                    raw[key] = raw.get(key, Fraction(0)) + w * c
    return DensityExpansion(_merge(raw), solution.Zstar, config.to_string())


# --------------------------------------------------------------------------
# First-order density
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FirstOrderDensity:
    """Spherically averaged ``4 pi r^2 rho`` on the perturbation grid.

    ``r`` is in bohr; ``correction`` is the single-excitation first-order term.
    """

    r: np.ndarray
    weights: np.ndarray
    zeroth: np.ndarray
    correction: np.ndarray
    Zstar: float
    label: str = ""

    @property
    def total(self) -> np.ndarray:
        return self.zeroth + self.correction

    def at(self, r) -> dict[str, np.ndarray]:
        """Interpolate the three curves to arbitrary radii."""
        r = np.asarray(r, dtype=float)
        out = {}
        for name in ("zeroth", "correction", "total"):
            spline = CubicSpline(np.concatenate(([0.0], self.r)), np.concatenate(([0.0], getattr(self, name))))
            out[name] = np.where(r <= self.r[-1], spline(np.minimum(r, self.r[-1])), 0.0)
        return out

    def integral(self, which: str = "total") -> float:
        return float(np.dot(self.weights, getattr(self, which)))


def density_first_order(config: Configuration, solution: ZerothOrderSolution | None = None,
                        *, grid=None, resolvent=None) -> FirstOrderDensity:
    """Radial density including the first-order single-excitation correction.

    Each orbital is corrected by ``-G(eps_k) chi_k`` with the reduced resolvent,
    where occupied same-spin states are removed.  Only the ``L = l_k`` wave
    survives the angular average.  In unit-charge coordinates the correction is
    ``2 u_k du_k`` and carries no ``Zs`` factor in physical units.
    """
    solution = solve_zeroth_order(config) if solution is None else solution
    grid = perturbation_grid(max(o.n for o in config.orbitals)) if grid is None else grid
    resolvent = ClosedFormResolvent(grid) if resolvent is None else resolvent
    pots = PerturbationPotentials(config, solution, grid)
    zs = solution.Zstar
    corr = np.zeros_like(grid.r)
    zeroth = np.zeros_like(grid.r)
    for k in config.orbitals:
        uk = pots.u(k.n, k.l)
        zeroth += uk * uk
        chi = pots.channels(k).get(k.l)
        if chi is None:
            continue
        sub = pots.occupied_n(k.l, k.m, k.ms)
        du = -resolvent.apply(k.l, level(k.n), sub, chi)
        corr += 2.0 * uk * du
    return FirstOrderDensity(grid.r / zs, grid.w / zs, zs * zeroth, corr, zs, config.to_string())


# --------------------------------------------------------------------------
# Form factors
# --------------------------------------------------------------------------

_XI, _Q = sp.symbols("xi q", positive=True)


@lru_cache(maxsize=None)
def _shell_form_factor(n: int, l: int):
    """Per-electron form factor of shell ``nl`` as a rational function of ``(xi, q)``.

    Squaring the Laguerre series of ``R_nl`` and using
    ``int r^p e^(-xi r) sin(qr) dr = (-d/dxi)^p q/(xi^2+q^2)`` gives a double sum
    whose terms carry ``1/((n-l-1-k)! (n-l-1-m)!)``.  Those factors equal one
    for ``n - l <= 2`` and matter only for deeper radial excitations.
    """
    base = 1 / (_XI**2 + _Q**2)
    derivs = [base]
    top = 2 * l + 1 + 2 * (n - l - 1)
    for _ in range(top):
        derivs.append(sp.diff(derivs[-1], _XI))
    acc = 0
    for k in range(n - l):
        for m in range(n - l):
            p = 2 * l + 1 + k + m
            den = (math.factorial(2 * l + k + 1) * math.factorial(2 * l + m + 1) * math.factorial(k)
                   * math.factorial(m) * math.factorial(n - l - 1 - k) * math.factorial(n - l - 1 - m))
            acc += _XI ** (k + m) * sp.Rational(1, den) * derivs[p]
    pref = -sp.Rational(math.factorial(n - l - 1) * math.factorial(n + l), 2 * n)
    expr = sp.cancel(sp.together(pref * _XI ** (2 * l + 3) * acc))
    return expr, sp.lambdify((_XI, _Q), expr, "math")


def form_factor_spherical(config: Configuration, solution: ZerothOrderSolution | None, q, *,
                          symbolic: bool = False):
    """Zeroth-order form factor from the shell-wise rational formula.

    Parameters
    ----------
    config : Configuration
        Must have a spherically symmetric density.
    solution : ZerothOrderSolution or None
    q : float or array_like
        Momentum transfer in inverse bohr.
    symbolic : bool, default False
        Return a sympy expression in ``q`` (with ``Zs`` exact) instead.

    Raises
    ------
    NonSphericalError
        For open-shell configurations with an anisotropic density.
    """
    if not config.is_spherical():
        raise NonSphericalError(
            f"{config.to_string()} has an anisotropic density; use form_factor_numeric"
        )
    solution = solve_zeroth_order(config) if solution is None else solution
    counts = config.shell_counts()
    if symbolic:
        zs = sp.Rational(solution.Zstar_exact.numerator, solution.Zstar_exact.denominator)
        return sp.Add(*[g * _shell_form_factor(n, l)[0].subs(_XI, 2 * zs / n) for (n, l), g in counts.items()])
    zs = solution.Zstar
    qs = np.atleast_1d(np.asarray(q, dtype=float))
    out = np.zeros_like(qs)
    for (n, l), g in counts.items():
        f = _shell_form_factor(n, l)[1]
        xi = 2.0 * zs / n
        out += g * np.array([f(xi, x) for x in qs])
    return out if np.ndim(q) else float(out[0])


def _radial_bessel_moment(power: int, alpha: float, kappa: float, L: int) -> float:
    """``int_0^inf u^power exp(-alpha u) j_L(kappa u) du`` in closed form."""
    if kappa == 0.0:
        return math.factorial(power) / alpha ** (power + 1) if L == 0 else 0.0
    if kappa < 0.5 * alpha and L > 0:
        # power series of j_L; alternating but geometric in (kappa/alpha)^2
        out, s = 0.0, 0
        while True:
            term = ((-1) ** s * kappa ** (L + 2 * s) / (2**s * math.factorial(s) * _double_factorial(2 * L + 2 * s + 1))
                    * math.factorial(power + L + 2 * s) / alpha ** (power + L + 2 * s + 1))
            out += term
            if abs(term) < 1e-17 * abs(out):
                return out
            s += 1
    # j_L = Re h_L with h_L = (-i)^(L+1) e^{ix}/x sum_k i^k (L+k)! / (k! (L-k)! (2x)^k)
    z = complex(alpha, -kappa)
    acc = 0j
    for k in range(L + 1):
        c = (-1j) ** (L + 1) * 1j**k * math.factorial(L + k) / (math.factorial(k) * math.factorial(L - k) * 2**k)
        acc += c / kappa ** (k + 1) * math.factorial(power - k - 1) / z ** (power - k)
    return acc.real


def _double_factorial(n: int) -> int:
    return math.prod(range(n, 0, -2)) if n > 0 else 1


def form_factor_numeric(density: DensityExpansion, q, direction: float | None = None):
    """Fourier transform of an exponential-polynomial density.

    Parameters
    ----------
    density : DensityExpansion
    q : float or array_like
        Momentum transfer in inverse bohr.
    direction : float, optional
        Polar angle of ``q`` relative to the quantisation axis.  When omitted
        the orientation average is returned, which keeps only ``L = 0`` terms.
    """
    zs = density.Zstar
    qs = np.atleast_1d(np.asarray(q, dtype=float))
    out = np.zeros_like(qs)
    for idx, qv in enumerate(qs):
        kappa = qv / zs
        val = 0.0
        for t in density.terms:
            if t.L and direction is None:
                continue
            ang = 1.0 if not t.L else (-1) ** (t.L // 2) * float(
                np.polynomial.legendre.legval(math.cos(direction), [0] * t.L + [1]))
            val += float(t.coefficient) * ang * _radial_bessel_moment(t.power + 2, float(t.alpha), kappa, t.L)
        out[idx] = 4.0 * val
    return out if np.ndim(q) else float(out[0])


def s_to_q(s):
    """Convert ``s = sin(theta)/lambda`` in inverse angstrom to ``q`` in inverse bohr."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("s must be non-negative")
    out = _S_TO_Q * s
    return float(out) if out.ndim == 0 else out


def q_to_s(q):
    """Inverse of :func:`s_to_q`."""
    q = np.asarray(q, dtype=float)
    out = q / _S_TO_Q
    return float(out) if out.ndim == 0 else out


def curve_csv(columns: dict[str, np.ndarray], header: dict[str, str], digits: int = 10) -> str:
    """Render named columns as CSV preceded by ``# key: value`` header lines."""
    buf = io.StringIO()
    for k, v in header.items():
        buf.write(f"# {k}: {v}\n")
    w = csv.writer(buf, lineterminator="\n")
    names = list(columns)
    w.writerow(names)
    for row in zip(*(np.asarray(columns[c], dtype=float) for c in names)):
        w.writerow([f"{x:.{digits}g}" for x in row])
    return buf.getvalue()
