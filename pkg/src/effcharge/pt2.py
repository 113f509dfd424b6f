"""Second-order energy corrections in the effective-charge basis.

All radial work happens in unit-charge coordinates ``rho = Zs r``.  There the
zeroth-order Hamiltonian is hydrogenic with orbital energies ``-1/(2 n^2)``
and the perturbation is ``w = -c1/rho + 1/rho_12`` with ``c1 = Z - Zs``.
Second-order shifts are independent of ``Zs`` in these units, so every value
below is already in Hartree.

The single-excitation term uses the reduced Green function at the orbital
energy.  The pair term sums one electron over a discrete virtual space and
applies the closed-form reduced Green function for the partner electron at
the complementary energy, which includes the partner's continuum exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, zeta

from .angular import gaunt
from .config import Configuration, Orbital
from .greens import GreenEnergy, GridGreen, PoleError, RadialGreenKernel
from .quadrature import RadialGrid
from .radial import radial_wavefunction
from .scf0 import ZerothOrderSolution, solve_zeroth_order

__all__ = [
    "DegenerateChannelError",
    "ConvergenceError",
    "PerturbationPotentials",
    "ClosedFormResolvent",
    "SpectralResolvent",
    "PseudostateSpace",
    "HydrogenicSpace",
    "SecondOrderBreakdown",
    "perturbation_grid",
    "single_excitation_matrix_element",
    "delta_E2_single",
    "delta_E2_multi",
    "second_order",
    "degenerate_he_excited",
]

HALF = Fraction(1, 2)
#: Couplings below this (unit-charge Hartree) count as exact angular zeros.
COUPLING_TOLERANCE = 1e-10


class DegenerateChannelError(ArithmeticError):
    """A degenerate unoccupied state couples to an occupied orbital."""


class ConvergenceError(RuntimeError):
    """Basis or multipole extrapolation failed; ``partial`` holds the sums so far."""

    def __init__(self, message: str, partial: dict):
        super().__init__(message)
        self.partial = partial


def level(n: int) -> float:
    return -0.5 / (n * n)


def perturbation_grid(n_outer: int, nu_min: float | None = None, order: int = 20) -> RadialGrid:
    """Radial grid reaching ``40 n_outer^2`` and resolving kernels down to ``nu_min``.

    Green kernels at energy ``-1/(2 nu^2)`` vary on the scale ``nu``; panels are
    kept narrower than ``5 nu_min`` wherever occupied orbitals are non-negligible.
    """
    r_max = 40.0 * n_outer**2
    grid = RadialGrid.for_extent(r_max, order)
    if nu_min is None:
        return grid
    width = 5.0 * nu_min
    r_src = min(r_max, 20.0 * n_outer * n_outer + 20.0)
    edges = [0.0]
    for a, b in zip(grid.edges[:-1], grid.edges[1:]):
        if a < r_src and b - a > width:
            k = int(math.ceil((b - a) / width))
            edges.extend(np.linspace(a, b, k + 1)[1:])
        else:
            edges.append(b)
    return RadialGrid(np.array(edges), order)


# --------------------------------------------------------------------------
# Potentials
# --------------------------------------------------------------------------

class PerturbationPotentials:
    """Orbitals, multipole potentials and single-particle sources on a grid.

    Parameters
    ----------
    config : Configuration
    solution : ZerothOrderSolution
        Supplies ``c1 = Z - Zs = B / (2A)``.
    grid : RadialGrid
    c1 : float, optional
        Override for the one-body coefficient (degenerate states use their own).
    """

    def __init__(self, config: Configuration, solution: ZerothOrderSolution, grid: RadialGrid,
                 c1: float | None = None):
        self.config = config
        self.solution = solution
        self.grid = grid
        self.c1 = float(solution.Z - solution.Zstar_exact) if c1 is None else float(c1)
        self.r = grid.r
        self._u: dict = {}
        self._y: dict = {}

    @property
    def V1(self) -> np.ndarray:
        """One-body perturbation ``-c1 / rho`` on the grid."""
        return -self.c1 / self.r

    def u(self, n: int, l: int) -> np.ndarray:
        key = (n, l)
        if key not in self._u:
            self._u[key] = self.r * radial_wavefunction(n, l)(self.r)
        return self._u[key]

    def multipole(self, j: int, density: np.ndarray) -> np.ndarray:
        """``int rho(t) r_<^j / r_>^(j+1) dt`` at every grid node."""
        r = self.r
        inner = self.grid.cumulative(r**j * density) / r ** (j + 1)
        outer = self.grid.tail(density / r ** (j + 1)) * r**j
        return inner + outer

    def y(self, j: int, a: tuple[int, int], b: tuple[int, int]) -> np.ndarray:
        key = (j,) + tuple(sorted((a, b)))
        if key not in self._y:
            self._y[key] = self.multipole(j, self.u(*a) * self.u(*b))
        return self._y[key]

    def channels(self, k: Orbital) -> dict[int, np.ndarray]:
        """Partial waves ``L`` of ``chi_k = F phi_k`` with ``M = m_k``.

        ``F`` is ``-c1/rho`` plus the direct field of every other electron minus
        the exchange with every other same-spin electron.
        """
        out: dict[int, np.ndarray] = {}

        def add(L, arr):
            if L in out:
                out[L] = out[L] + arr
            else:
                out[L] = arr

        uk = self.u(k.n, k.l)
        add(k.l, self.V1 * uk)
        for o in self.config.orbitals:
            if o == k:
                continue
            for j in range(0, 2 * o.l + 1, 2):
                co = gaunt(o.l, o.m, o.l, o.m, j)
                if co == 0.0:
                    continue
                yj = None
                for L in range(abs(k.l - j), k.l + j + 1, 2):
                    if abs(k.m) > L:
                        continue
                    ck = gaunt(L, k.m, k.l, k.m, j)
                    if ck == 0.0:
                        continue
                    if yj is None:
                        yj = self.y(j, (o.n, o.l), (o.n, o.l)) * uk
                    add(L, ck * co * yj)
            if o.ms != k.ms:
                continue
            uo = self.u(o.n, o.l)
            for j in range(abs(o.l - k.l), o.l + k.l + 1):
                ce = gaunt(k.l, k.m, o.l, o.m, j)
                if ce == 0.0:
                    continue
                yj = None
                for L in range(abs(o.l - j), o.l + j + 1):
                    if abs(k.m) > L:
                        continue
                    cl = gaunt(L, k.m, o.l, o.m, j)
                    if cl == 0.0:
                        continue
                    if yj is None:
                        yj = self.y(j, (o.n, o.l), (k.n, k.l)) * uo
                    add(L, -cl * ce * yj)
        # closed subshells cancel non-spherical multipoles only up to rounding
        w = self.grid.w
        big = max(float(np.dot(w, a * a)) for a in out.values())
        return {L: a for L, a in out.items() if float(np.dot(w, a * a)) > 1e-24 * big}

    def occupied_n(self, L: int, M: int, ms) -> tuple[int, ...]:
        """Principal numbers of occupied ``(n, L, M, ms)`` spin-orbitals."""
        return tuple(sorted(o.n for o in self.config.orbitals if o.l == L and o.m == M and o.ms == ms))


def single_excitation_matrix_element(
    config: Configuration, k: Orbital, sigma: Orbital, solution: ZerothOrderSolution | None = None,
    grid: RadialGrid | None = None,
) -> float:
    """``<sigma| F |lambda_k>`` for a bound hydrogenic ``sigma`` in unit-charge units.

    The physical matrix element is ``Zs`` times this value.
    """
    if sigma.ms != k.ms or sigma.m != k.m:
        return 0.0
    if sigma in config.orbitals:
        raise ValueError("sigma must be unoccupied")
    solution = solve_zeroth_order(config) if solution is None else solution
    grid = perturbation_grid(max(o.n for o in config.orbitals + (sigma,))) if grid is None else grid
    pots = PerturbationPotentials(config, solution, grid)
    chi = pots.channels(k).get(sigma.l)
    if chi is None:
        return 0.0
    return grid.integrate(pots.u(sigma.n, sigma.l) * chi)


# --------------------------------------------------------------------------
# Resolvents
# --------------------------------------------------------------------------

class ClosedFormResolvent:
    """Reduced Green operator from the closed-form Whittaker kernel."""

    def __init__(self, grid: RadialGrid):
        self.grid = grid
        self.green = GridGreen(grid)

    def apply(self, L: int, E: float, subtract: tuple[int, ...], h: np.ndarray) -> np.ndarray:
        kernel = RadialGreenKernel(L, GreenEnergy(E), subtract)
        return self.green.apply(kernel, h)


class SpectralResolvent:
    """Reduced Green operator truncated to bound states ``n <= nmax``."""

    def __init__(self, grid: RadialGrid, nmax: int):
        self.grid = grid
        self.nmax = nmax

    def apply(self, L: int, E: float, subtract: tuple[int, ...], h: np.ndarray) -> np.ndarray:
        r = self.grid.r
        out = np.zeros_like(r)
        for n in range(L + 1, self.nmax + 1):
            if n in subtract:
                continue
            u = r * radial_wavefunction(n, L)(r)
            ov = self.grid.integrate(u * h)
            den = level(n) - E
            if abs(den) < 1e-12:
                if abs(ov) > 1e-12:
                    raise PoleError(f"unsubtracted degenerate state n={n}, l={L}")
                continue
            out += u * ov / den
        return out


# --------------------------------------------------------------------------
# Virtual spaces for the summed electron
# --------------------------------------------------------------------------

class HydrogenicSpace:
    """Exact bound states ``n <= nmax`` of every partial wave."""

    def __init__(self, grid: RadialGrid, nmax: int):
        self.grid = grid
        self.nmax = nmax
        self.l_max = nmax - 1

    def states(self, L: int, exclude: tuple[int, ...]):
        r = self.grid.r
        out = []
        for n in range(L + 1, self.nmax + 1):
            if n not in exclude:
                out.append((level(n), r * radial_wavefunction(n, L)(r)))
        return out


class PseudostateSpace:
    """Laguerre pseudostates diagonalising the hydrogen Hamiltonian.

    Basis functions ``(2 lam r)^(L+1) exp(-lam r) L_i^(2L+2)(2 lam r)``,
    ``i < size``, are orthonormal after scaling; the occupied states listed in
    ``exclude`` are projected out before diagonalising, so every pseudostate
    is an admissible virtual orbital.

    Parameters
    ----------
    grid : RadialGrid
    size : int
        Basis functions per partial wave.
    lam : float
        Laguerre scale of the s wave.
    l_max : int
        Highest partial wave offered.
    growth : float
        The scale of partial wave ``L`` is ``lam (1 + growth (L - 2))`` for
        ``L > 2``.  Compact high-``L`` functions sit where pair correlation
        lives; low waves keep the diffuse scale that near-degenerate bound
        intermediates (2s, 2p) need.
    """

    def __init__(self, grid: RadialGrid, size: int = 24, lam: float = 1.0, l_max: int = 5,
                 growth: float = 0.0):
        self.grid = grid
        self.size = size
        self.lam = lam
        self.l_max = l_max
        self.growth = growth
        self._cache: dict = {}

    def scale(self, L: int) -> float:
        return self.lam * (1.0 + self.growth * max(L - 2, 0))

    def _basis(self, L: int, x: np.ndarray) -> np.ndarray:
        """Normalised basis functions without the ``exp(-x/2)`` factor, shape (size, len(x))."""
        alpha = 2 * L + 2
        lag = np.empty((self.size, len(x)))
        lag[0] = 1.0
        if self.size > 1:
            lag[1] = 1.0 + alpha - x
        for i in range(1, self.size - 1):
            lag[i + 1] = ((2 * i + 1 + alpha - x) * lag[i] - (i + alpha) * lag[i - 1]) / (i + 1)
        i = np.arange(self.size)
        lognorm = 0.5 * (math.log(2 * self.scale(L)) + gammaln(i + 1) - gammaln(i + alpha + 1))
        return np.exp(lognorm)[:, None] * lag

    def _matrices(self, L: int):
        key = ("h", L)
        if key not in self._cache:
            lam = self.scale(L)
            x, w = np.polynomial.laguerre.laggauss(self.size + L + 6)
            B = self._basis(L, x)
            # derivative of P_i(x) = x^(L+1) Lag_i(x) e^{-x/2} w.r.t. x, with e^{-x/2} stripped
            alpha = 2 * L + 2
            dlag = np.zeros_like(B)
            i = np.arange(self.size)
            lognorm = 0.5 * (math.log(2 * lam) + gammaln(i + 1) - gammaln(i + alpha + 1))
            raw = B / np.exp(lognorm)[:, None]
            # d/dx Lag_i^(a) = -Lag_{i-1}^(a+1); build via identity x Lag_i' = i Lag_i - (i+a) Lag_{i-1}
            for k in range(1, self.size):
                dlag[k] = (k * raw[k] - (k + alpha) * raw[k - 1]) / x
            dlag *= np.exp(lognorm)[:, None]
            f = x ** (L + 1) * B
            df = ((L + 1) * x**L - 0.5 * x ** (L + 1)) * B + x ** (L + 1) * dlag
            # dr = dx / (2 lam); d/dr = 2 lam d/dx
            S = (f * w) @ f.T / (2 * lam)
            T = 0.5 * (2 * lam) ** 2 * (df * w) @ df.T / (2 * lam)
            cent = 0.5 * L * (L + 1) * (2 * lam) ** 2 * (f * w / x**2) @ f.T / (2 * lam)
            pot = -(2 * lam) * (f * w / x) @ f.T / (2 * lam)
            self._cache[key] = (S, T + cent + pot)
        return self._cache[key]

    def _on_grid(self, L: int) -> np.ndarray:
        key = ("g", L)
        if key not in self._cache:
            x = 2 * self.scale(L) * self.grid.r
            B = self._basis(L, x)
            with np.errstate(under="ignore"):
                self._cache[key] = B * (x ** (L + 1) * np.exp(-0.5 * x))[None, :]
        return self._cache[key]

    def states(self, L: int, exclude: tuple[int, ...]):
        key = ("s", L, exclude)
        if key in self._cache:
            return self._cache[key]
        S, H = self._matrices(L)
        G = self._on_grid(L)
        r = self.grid.r
        occ = [(n, r * radial_wavefunction(n, L)(r)) for n in exclude]
        S2, H2 = S.copy(), H.copy()
        proj = []
        for n, u in occ:
            s = G @ (self.grid.w * u)
            proj.append((s, u))
            S2 -= np.outer(s, s)
            H2 -= level(n) * np.outer(s, s)
        sv, U = np.linalg.eigh(S2)
        keep = sv > 1e-10 * sv.max()
        X = U[:, keep] / np.sqrt(sv[keep])
        e, V = np.linalg.eigh(X.T @ H2 @ X)
        C = X @ V
        funcs = C.T @ G
        for s, u in proj:
            funcs -= np.outer(C.T @ s, u)
        out = list(zip(e.tolist(), funcs))
        self._cache[key] = out
        return out


# --------------------------------------------------------------------------
# Single excitations
# --------------------------------------------------------------------------

@dataclass
class SingleExcitationResult:
    per_orbital: dict
    projected: list = field(default_factory=list)

    @property
    def total(self) -> float:
        return float(sum(self.per_orbital.values()))


def _channel_subtractions(pots, k, L, chi, degenerate, projected):
    sub = set(pots.occupied_n(L, k.m, k.ms))
    n = k.n
    if n >= L + 1 and n not in sub:
        ov = pots.grid.integrate(pots.u(n, L) * chi)
        if abs(ov) > COUPLING_TOLERANCE:
            if degenerate == "raise":
                raise DegenerateChannelError(
                    f"orbital {k} couples to the unoccupied degenerate state n={n}, l={L} "
                    f"(overlap {ov:.3e}); degenerate perturbation theory is required"
                )
            projected.append((k, n, L, ov))
        sub.add(n)
    return tuple(sorted(sub))


def delta_E2_single(
    config: Configuration,
    solution: ZerothOrderSolution | None = None,
    *,
    grid: RadialGrid | None = None,
    resolvent=None,
    degenerate: str = "raise",
    spherical: bool = False,
) -> SingleExcitationResult:
    """Second-order single-excitation shift per occupied spin-orbital.

    Parameters
    ----------
    config : Configuration
    solution : ZerothOrderSolution, optional
    grid : RadialGrid, optional
    resolvent : object, optional
        Anything with ``apply(L, E, subtract, h)``; the closed-form kernel by default.
    degenerate : {"raise", "project"}
        What to do when an unoccupied state degenerate with ``lambda_k`` couples
        to it: raise :class:`DegenerateChannelError` or drop the state from the
        intermediate sum and record it in ``projected``.
    spherical : bool, default False
        Keep only the ``L = l_k`` channel, i.e. the spherical part of the mean field.

    Returns
    -------
    SingleExcitationResult
    """
    solution = solve_zeroth_order(config) if solution is None else solution
    grid = perturbation_grid(max(o.n for o in config.orbitals)) if grid is None else grid
    resolvent = ClosedFormResolvent(grid) if resolvent is None else resolvent
    pots = PerturbationPotentials(config, solution, grid)
    per: dict = {}
    projected: list = []
    for k in config.orbitals:
        total = 0.0
        for L, chi in sorted(pots.channels(k).items()):
            if spherical and L != k.l:
                continue
            sub = _channel_subtractions(pots, k, L, chi, degenerate, projected)
            g = resolvent.apply(L, level(k.n), sub, chi)
            total -= grid.integrate(chi * g)
        per[k] = total
    return SingleExcitationResult(per, projected)


# --------------------------------------------------------------------------
# Pair correlation
# --------------------------------------------------------------------------

def _pair_sources(pots, a_func, L1, M1, i, j, L2, M2):
    """Partial wave ``L2`` of ``<a|1/r12|i> u_j`` (electron 2 variable)."""
    acc = None
    for q in range(abs(L1 - i.l), L1 + i.l + 1):
        c1 = gaunt(L1, M1, i.l, i.m, q)
        if c1 == 0.0:
            continue
        c2 = gaunt(j.l, j.m, L2, M2, q)
        if c2 == 0.0:
            continue
        term = (c1 * c2) * pots.multipole(q, a_func * pots.u(i.n, i.l)) * pots.u(j.n, j.l)
        acc = term if acc is None else acc + term
    return acc


def _pair_energy(pots, resolvent, space, i: Orbital, j: Orbital, l_max: int, stats: dict):
    """Partial-wave increments of one pair's correlation energy, indexed by ``L1``."""
    same = i.ms == j.ms
    E_ij = level(i.n) + level(j.n)
    incr = np.zeros(l_max + 1)
    for L1 in range(l_max + 1):
        for M1 in range(-L1, L1 + 1):
            M2 = i.m + j.m - M1
            excl = pots.occupied_n(L1, M1, i.ms)
            L2s = [L2 for L2 in range(abs(M2), L1 + i.l + j.l + 1) if (L1 + i.l + j.l + L2) % 2 == 0]
            if not L2s:
                continue
            states = space.states(L1, excl)
            for eps_a, ua in states:
                Ep = E_ij - eps_a
                for L2 in L2s:
                    phi = _pair_sources(pots, ua, L1, M1, i, j, L2, M2)
                    if phi is None:
                        continue
                    sub = pots.occupied_n(L2, M2, j.ms)
                    try:
                        g = resolvent.apply(L2, Ep, sub, phi)
                    except PoleError:
                        # degenerate intermediate pair: only admissible if uncoupled
                        n = round(1.0 / math.sqrt(-2.0 * Ep))
                        ov = pots.grid.integrate(pots.u(n, L2) * phi)
                        if abs(ov) > 1e-10:
                            raise
                        g = resolvent.apply(L2, Ep, tuple(sorted(set(sub) | {n})), phi)
                    val = pots.grid.integrate(phi * g)
                    if same:
                        psi = _pair_sources(pots, ua, L1, M1, j, i, L2, M2)
                        if psi is not None:
                            val -= pots.grid.integrate(psi * g)
                    incr[L1] -= val
                    stats["applies"] = stats.get("applies", 0) + 1
    return incr


def _tail_estimate(incr: np.ndarray, power: float) -> float:
    """Sum of ``c (L + 1/2)^-power`` beyond the last computed partial wave."""
    L = len(incr) - 1
    if L < 2 or incr[-1] == 0.0:
        return 0.0
    c = incr[-1] * (L + 0.5) ** power
    return float(c * zeta(power, L + 1.5))


@dataclass
class PairResult:
    increments: np.ndarray
    tail: float

    @property
    def total(self) -> float:
        return float(self.increments.sum() + self.tail)


@dataclass
class MultiResult:
    pairs: dict
    l_max: int
    basis_size: int

    @property
    def total(self) -> float:
        return float(sum(p.total for p in self.pairs.values()))


def _default_nu_min(space, l_max, E_ij):
    if not isinstance(space, PseudostateSpace):
        return None
    top = max(space.states(L, ())[-1][0] for L in range(l_max + 1))
    return 1.0 / math.sqrt(2.0 * (top - E_ij))


def delta_E2_multi(
    config: Configuration,
    solution: ZerothOrderSolution | None = None,
    *,
    l_max: int = 5,
    basis_size: int = 24,
    lam: float = 1.0,
    growth: float = 0.5,
    extrapolate: bool = True,
    grid: RadialGrid | None = None,
    resolvent=None,
    space=None,
    check_basis: int | None = None,
    rtol: float = 5e-3,
) -> MultiResult:
    """Second-order pair (correlation) shift summed over electron pairs.

    Parameters
    ----------
    config : Configuration
    solution : ZerothOrderSolution, optional
    l_max : int, default 5
        Highest partial wave of the summed electron.
    basis_size, lam, growth : int, float, float
        Laguerre pseudostate space used for the summed electron
        (see :class:`PseudostateSpace`).
    extrapolate : bool, default True
        Add the ``(L + 1/2)^-4`` (opposite spins) or ``(L + 1/2)^-6`` (equal
        spins) partial-wave tail.
    grid, resolvent, space : optional
        Override the radial grid, the partner-electron resolvent or the
        virtual space (the truncated spectral pair is used in oracle tests).
    check_basis : int, optional
        Recompute with this many extra basis functions and raise
        :class:`ConvergenceError` when the pair sum moves by more than ``rtol``.

    Returns
    -------
    MultiResult
    """
    solution = solve_zeroth_order(config) if solution is None else solution
    n_out = max(o.n for o in config.orbitals)
    orbs = list(config.orbitals)
    E_min = min(level(a.n) + level(b.n) for a in orbs for b in orbs)
    if grid is None:
        probe = PerturbationPotentials(config, solution, perturbation_grid(n_out))
        space0 = space or PseudostateSpace(probe.grid, basis_size + (check_basis or 0), lam, l_max, growth)
        nu_min = _default_nu_min(space0, l_max, E_min)
        grid = perturbation_grid(n_out, nu_min)
    if space is None:
        space = PseudostateSpace(grid, basis_size, lam, l_max, growth)
    resolvent = ClosedFormResolvent(grid) if resolvent is None else resolvent
    pots = PerturbationPotentials(config, solution, grid)
    stats: dict = {}
    pairs = {}
    for a_idx in range(len(orbs)):
        for b_idx in range(a_idx + 1, len(orbs)):
            i, j = orbs[a_idx], orbs[b_idx]
            incr = _pair_energy(pots, resolvent, space, i, j, l_max, stats)
            tail = _tail_estimate(incr, 6.0 if i.ms == j.ms else 4.0) if extrapolate else 0.0
            pairs[(i, j)] = PairResult(incr, tail)
    result = MultiResult(pairs, l_max, getattr(space, "size", 0))
    if check_basis:
        bigger = PseudostateSpace(grid, basis_size + check_basis, lam, l_max, growth)
        alt = delta_E2_multi(config, solution, l_max=l_max, extrapolate=extrapolate, grid=grid,
                             resolvent=resolvent, space=bigger)
        if abs(alt.total - result.total) > rtol * abs(alt.total):
            raise ConvergenceError(
                f"pair energy changed from {result.total:.6g} to {alt.total:.6g} "
                f"when the basis grew by {check_basis}",
                {"basis": result.total, "enlarged": alt.total},
            )
        result = alt
    return result


# --------------------------------------------------------------------------
# Totals
# --------------------------------------------------------------------------

@dataclass
class SecondOrderBreakdown:
    """Energies through second order (Hartree).

    Attributes
    ----------
    E0 : float
        Zeroth-order variational energy.
    dE_single, dE_multi : float
        Single-excitation and pair contributions.
    per_orbital, per_pair : dict
        Individual contributions.
    """

    E0: float
    dE_single: float
    dE_multi: float
    per_orbital: dict = field(default_factory=dict)
    per_pair: dict = field(default_factory=dict)
    label: str = ""

    @property
    def E2_single(self) -> float:
        return self.E0 + self.dE_single

    @property
    def E2_total(self) -> float:
        return self.E0 + self.dE_single + self.dE_multi


def second_order(config: Configuration, solution: ZerothOrderSolution | None = None, *,
                 multi: bool = True, degenerate: str = "raise", **multi_kw) -> SecondOrderBreakdown:
    """Zeroth-order energy plus both second-order shifts."""
    solution = solve_zeroth_order(config) if solution is None else solution
    single = delta_E2_single(config, solution, degenerate=degenerate)
    dm, pairs = 0.0, {}
    if multi and config.N > 1:
        res = delta_E2_multi(config, solution, **multi_kw)
        dm, pairs = res.total, {k: v.total for k, v in res.pairs.items()}
    return SecondOrderBreakdown(solution.E0, single.total, dm, single.per_orbital, pairs,
                                config.to_string())


# --------------------------------------------------------------------------
# He 1s2s singlet and triplet
# --------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _he_excited_zeroth(state: str):
    from .radial import direct_integral_I, exchange_integral_L

    J = direct_integral_I(1, 0, 2, 0, 0)
    G = exchange_integral_L(1, 0, 2, 0, 0)
    A = Fraction(1, 2) + Fraction(1, 8)
    B = J - G if state == "triplet" else J + G
    Zs = 2 - B / (2 * A)
    return A, B, Zs, -A * Zs * Zs


def degenerate_he_excited(
    state: str, *, l_max: int = 5, basis_size: int = 24, lam: float = 1.0, growth: float = 0.5,
    extrapolate: bool = True, grid: RadialGrid | None = None, resolvent=None, space=None,
) -> SecondOrderBreakdown:
    """He 1s2s ``2 3S`` (``"triplet"``) or ``2 1S`` (``"singlet"``) through second order.

    The zeroth-order state is ``(|1s 2s> -+ |2s 1s>)/sqrt(2)`` in space with the
    matching spin function.  Its second-order shift is::

        -sum' [ |<st|w|ab>|^2 +- <ab|w|st><st|w|ba> ] / (e_s + e_t - e_a - e_b)

    over spatial pairs ``(s, t)`` other than ``(a, b)`` and ``(b, a)``, with
    ``s`` running over the virtual space (1s and 2s included) and ``t`` handled
    by the closed-form Green function.
    """
    if state in ("3S", "2 3S", "triplet"):
        state, sign = "triplet", -1.0
    elif state in ("1S", "2 1S", "singlet"):
        state, sign = "singlet", 1.0
    else:
        raise ValueError("state must be 'triplet' or 'singlet'")
    A, B, Zs, E0 = _he_excited_zeroth(state)
    c1 = float(B / (2 * A))
    a = Orbital(1, 0, 0, HALF)
    b = Orbital(2, 0, 0, HALF)
    cfg = Configuration(2, (a, b), f"He 1s2s {state}")
    sol = solve_zeroth_order(cfg)
    if grid is None:
        probe = perturbation_grid(2)
        sp0 = space or PseudostateSpace(probe, basis_size, lam, l_max, growth)
        grid = perturbation_grid(2, _default_nu_min(sp0, l_max, level(1) + level(2)))
    if space is None:
        space = PseudostateSpace(grid, basis_size, lam, l_max, growth)
    resolvent = ClosedFormResolvent(grid) if resolvent is None else resolvent
    pots = PerturbationPotentials(cfg, sol, grid, c1=c1)
    E_ab = level(1) + level(2)
    r = grid.r
    u = {1: pots.u(1, 0), 2: pots.u(2, 0)}
    incr = np.zeros(l_max + 1)
    for L1 in range(l_max + 1):
        if L1 == 0:
            # the pseudostates exclude 1s and 2s; add them back exactly
            states = [(level(1), u[1]), (level(2), u[2])] + list(space.states(0, (1, 2)))
        else:
            states = space.states(L1, ())
        for idx, (eps_s, us) in enumerate(states):
            Ep = E_ab - eps_s
            is_a = L1 == 0 and idx == 0
            is_b = L1 == 0 and idx == 1
            # partner channel L2 = L1 (both reference orbitals are s states)
            L2 = L1
            for M1 in range(-L1, L1 + 1):
                M2 = -M1
                c_dir = gaunt(L1, M1, 0, 0, L1) * gaunt(0, 0, L2, M2, L1)
                if c_dir == 0.0:
                    continue
                # <st|w|ab> as a function of t: electron 1 s<-a, electron 2 t<-b
                src_ab = c_dir * pots.multipole(L1, us * u[1]) * u[2]
                src_ba = c_dir * pots.multipole(L1, us * u[2]) * u[1]
                if L1 == 0:
                    ov_a = grid.integrate(us * u[1])
                    ov_b = grid.integrate(us * u[2])
                    src_ab = src_ab + ov_a * (-c1 / r) * u[2]
                    src_ba = src_ba + ov_b * (-c1 / r) * u[1]
                    src_ab = src_ab + (-c1) * grid.integrate(us * u[1] / r) * u[2]
                    src_ba = src_ba + (-c1) * grid.integrate(us * u[2] / r) * u[1]
                sub: tuple = ()
                if is_a:
                    sub = (2,)
                elif is_b:
                    sub = (1,)
                try:
                    g = resolvent.apply(L2, Ep, sub, src_ab)
                except PoleError:
                    n = round(1.0 / math.sqrt(-2.0 * Ep))
                    ov = grid.integrate(pots.u(n, L2) * src_ab)
                    if abs(ov) > 1e-10:
                        raise
                    g = resolvent.apply(L2, Ep, tuple(sorted(set(sub) | {n})), src_ab)
                val = grid.integrate(src_ab * g) + sign * grid.integrate(src_ba * g)
                incr[L1] -= val
    tail = _tail_estimate(incr, 4.0 if state == "singlet" else 6.0) if extrapolate else 0.0
    d2 = float(incr.sum() + tail)
    return SecondOrderBreakdown(float(E0), 0.0, d2, {}, {"increments": incr, "tail": tail},
                                f"He 1s2s {state}")
