from fractions import Fraction
from math import sqrt

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from effcharge.quadrature import RadialGrid
from effcharge.radial import (
    direct_integral_I,
    exchange_integral_L,
    radial_wavefunction,
)
from oracles import hydrogen_u, slater_R_quad

shells = st.integers(1, 5).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n - 1)))


def test_two_s_closed_form():
    R = radial_wavefunction(2, 0)
    r = np.linspace(0, 10, 11)
    assert np.allclose(R(r), (1 / sqrt(2)) * (1 - r / 2) * np.exp(-r / 2), atol=1e-15)


@given(shells)
def test_normalisation(nl):
    n, l = nl
    R = radial_wavefunction(n, l)
    val, _ = integrate.quad(lambda r: (r * R(r)) ** 2, 0, np.inf, epsabs=1e-13)
    assert val == pytest.approx(1.0, abs=1e-10)
    assert len(R.nodes()) == n - l - 1


@given(shells)
def test_matches_independent_laguerre_evaluation(nl):
    n, l = nl
    r = np.linspace(0.01, 30, 50)
    assert np.allclose(r * radial_wavefunction(n, l)(r), hydrogen_u(n, l, r), atol=1e-12)


def test_invalid_quantum_numbers():
    with pytest.raises(ValueError):
        radial_wavefunction(1, 1)
    with pytest.raises(ValueError):
        direct_integral_I(1, 0, 1, 0, -1)


def test_slater_integral_known_values():
    assert direct_integral_I(1, 0, 1, 0, 0) == Fraction(5, 8)
    assert direct_integral_I(1, 0, 2, 0, 0) == Fraction(17, 81)
    assert exchange_integral_L(1, 0, 2, 0, 0) == Fraction(16, 729)


@pytest.mark.parametrize(
    "a, b, j",
    [((1, 0), (2, 1), 1), ((2, 1), (2, 1), 2), ((2, 0), (3, 2), 2), ((3, 1), (3, 2), 3)],
)
def test_integrals_match_double_quadrature(a, b, j):
    """Closed-form integrals agree with two-dimensional quadrature to 1e-10."""
    if j <= min(2 * a[1], 2 * b[1]) or a == b:
        assert float(direct_integral_I(*a, *b, j)) == pytest.approx(slater_R_quad(a, a, b, b, j), abs=1e-10)
    assert float(exchange_integral_L(*a, *b, j)) == pytest.approx(slater_R_quad(a, b, a, b, j), abs=1e-10)


@given(shells, shells, st.integers(0, 4))
def test_integral_symmetry(a, b, j):
    assert direct_integral_I(*a, *b, j) == direct_integral_I(*b, *a, j)
    assert exchange_integral_L(*a, *b, j) == exchange_integral_L(*b, *a, j)


@given(shells, shells, st.data())
def test_grid_quadrature_equivalence(a, b, data):
    """Multipole integrals on the panel grid reproduce the exact ones to 1e-10."""
    j = data.draw(st.integers(0, min(2 * a[1], 2 * b[1])))
    grid = RadialGrid.for_extent(40.0 * 25)
    r = grid.r
    ua, ub = hydrogen_u(*a, r), hydrogen_u(*b, r)
    f, g = ua * ua, ub * ub
    pot = grid.cumulative(r**j * g) / r ** (j + 1) + grid.tail(g / r ** (j + 1)) * r**j
    assert grid.integrate(f * pot) == pytest.approx(float(direct_integral_I(*a, *b, j)), abs=1e-10)


def test_exact_arithmetic_for_allowed_orders():
    for a, b in [((2, 1), (3, 1)), ((3, 2), (4, 2))]:
        for j in range(0, 2 * min(a[1], b[1]) + 1):
            assert isinstance(direct_integral_I(*a, *b, j), Fraction)
