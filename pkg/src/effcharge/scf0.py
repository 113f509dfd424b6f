"""Zeroth-order variational solution with a single effective charge.

For a determinant of unit-charge hydrogen orbitals the energy at effective
charge ``Zs`` is ``E(Zs) = -Zs (2Z - Zs) A + Zs B`` with ``A = sum 1/(2 n^2)``
and ``B = J + K``.  Minimising gives ``Zs = Z - B / (2A)`` and ``E0 = -A Zs^2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .angular import (
    allowed_direct_orders,
    allowed_exchange_orders,
    coulomb_angular_M,
    exchange_angular_D,
)
from .config import Configuration, Orbital
from .radial import direct_integral_I, exchange_integral_L

__all__ = [
    "ZerothOrderSolution",
    "coulomb_pair",
    "exchange_pair",
    "coulomb_sum_J",
    "exchange_sum_K",
    "structure_constant_A",
    "solve_zeroth_order",
    "variational_energy",
    "first_order_correction",
]


@dataclass(frozen=True)
class ZerothOrderSolution:
    Z: int
    N: int
    A: Fraction
    J: Fraction
    K: Fraction

    @property
    def B(self) -> Fraction:
        return self.J + self.K

    @property
    def Zstar_exact(self) -> Fraction:
        return self.Z - self.B / (2 * self.A)

    @property
    def Zstar(self) -> float:
        return float(self.Zstar_exact)

    @property
    def E0_exact(self) -> Fraction:
        return -self.A * self.Zstar_exact ** 2

    @property
    def E0(self) -> float:
        return float(self.E0_exact)

    def orbital_energy(self, n: int) -> float:
        """Zeroth-order single-particle energy ``-Zs^2 / (2 n^2)``."""
        return -self.Zstar ** 2 / (2 * n * n)


@lru_cache(maxsize=None)
def _coulomb_shell_m(n, l, m, n1, l1, m1) -> Fraction:
    total = Fraction(0)
    for j in allowed_direct_orders(l, l1):
        ang = coulomb_angular_M(l, m, l1, m1, j)
        if ang:
            total += direct_integral_I(n, l, n1, l1, j) * ang
    return total / 2


@lru_cache(maxsize=None)
def _exchange_shell_m(n, l, m, n1, l1, m1) -> Fraction:
    total = Fraction(0)
    for j in allowed_exchange_orders(l, l1):
        ang = exchange_angular_D(l, m, l1, m1, j)
        if ang:
            total += exchange_integral_L(n, l, n1, l1, j) * ang
    return total / 2


def coulomb_pair(a: Orbital, b: Orbital) -> Fraction:
    """Direct term ``J_ab`` of one ordered pair of spin-orbitals (unit charge)."""
    return _coulomb_shell_m(a.n, a.l, a.m, b.n, b.l, b.m)


def exchange_pair(a: Orbital, b: Orbital) -> Fraction:
    """Exchange term of one ordered pair; negative for equal spins, else 0."""
    if a.ms != b.ms:
        return Fraction(0)
    return -_exchange_shell_m(a.n, a.l, a.m, b.n, b.l, b.m)


def pair_interaction(a: Orbital, b: Orbital) -> Fraction:
    return coulomb_pair(a, b) + exchange_pair(a, b)


@lru_cache(maxsize=None)
def shell_interaction(a: Orbital, shell: tuple[int, int]) -> tuple[Fraction, Fraction]:
    """Direct and exchange sums of ``a`` against every orbital of a closed subshell."""
    from .config import _shell_orbitals

    J = Fraction(0)
    K = Fraction(0)
    for b in _shell_orbitals(*shell):
        J += coulomb_pair(a, b)
        K += exchange_pair(a, b)
    return J, K


def coulomb_sum_J(config: Configuration) -> Fraction:
    """Full double sum over ordered pairs, diagonal included."""
    return _double_sum(config, coulomb_pair)


def exchange_sum_K(config: Configuration) -> Fraction:
    """Full exchange double sum over equal-spin ordered pairs, diagonal included."""
    return _double_sum(config, exchange_pair)


def _double_sum(config, term) -> Fraction:
    # group identical (n, l, m, spin-class) blocks is unnecessary: pair values are cached
    orbs = config.orbitals
    total = Fraction(0)
    for a in orbs:
        for b in orbs:
            total += term(a, b)
    return total


def structure_constant_A(config: Configuration) -> Fraction:
    return sum((Fraction(1, 2 * o.n * o.n) for o in config.orbitals), Fraction(0))


def solve_zeroth_order(config: Configuration) -> ZerothOrderSolution:
    """Variational effective charge and energy of a determinant."""
    if config.N == 0:
        raise ValueError("empty configuration")
    A = structure_constant_A(config)
    J, K = _fast_sums(config)
    return ZerothOrderSolution(config.Z, config.N, A, J, K)


def _fast_sums(config: Configuration) -> tuple[Fraction, Fraction]:
    """J and K using closed-subshell blocks; identical result to the plain double sums."""
    blocks: dict[tuple[int, int], list[Orbital]] = {}
    for o in config.orbitals:
        blocks.setdefault(o.shell, []).append(o)
    J = Fraction(0)
    K = Fraction(0)
    keys = sorted(blocks)
    full = {s: len(v) == 2 * (2 * s[1] + 1) for s, v in blocks.items()}
    for s in keys:
        for t in keys:
            if full[s] and full[t]:
                j, k = _closed_block(s, t)
            elif full[t]:
                j, k = _open_closed(tuple(blocks[s]), t)
            elif full[s]:
                j, k = _open_closed(tuple(blocks[t]), s)
            else:
                j = Fraction(0)
                k = Fraction(0)
                for a in blocks[s]:
                    for b in blocks[t]:
                        j += coulomb_pair(a, b)
                        k += exchange_pair(a, b)
            J += j
            K += k
    return J, K


@lru_cache(maxsize=None)
def _closed_block(s, t) -> tuple[Fraction, Fraction]:
    from .config import _shell_orbitals

    J = Fraction(0)
    K = Fraction(0)
    for a in _shell_orbitals(*s):
        for b in _shell_orbitals(*t):
            J += coulomb_pair(a, b)
            K += exchange_pair(a, b)
    return J, K


def _open_closed(orbs, t) -> tuple[Fraction, Fraction]:
    J = Fraction(0)
    K = Fraction(0)
    for a in orbs:
        j, k = shell_interaction(a, t)
        J += j
        K += k
    return J, K


def variational_energy(solution: ZerothOrderSolution, zstar):
    """Energy expectation value at an arbitrary effective charge."""
    return -zstar * (2 * solution.Z - zstar) * solution.A + zstar * solution.B


def first_order_correction(solution: ZerothOrderSolution, zstar=None):
    """First-order energy shift; vanishes identically at the variational charge."""
    if zstar is None:
        zstar = solution.Zstar_exact
    return -zstar * (solution.Z - zstar) * 2 * solution.A + zstar * solution.B
