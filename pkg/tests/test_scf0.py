from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from effcharge.config import configuration_from_string, select_ground_configuration
from effcharge.refdata import load_reference
from effcharge.scf0 import (
    coulomb_sum_J,
    exchange_sum_K,
    first_order_correction,
    solve_zeroth_order,
    structure_constant_A,
    variational_energy,
)


def test_helium_closed_form():
    cfg, sol = select_ground_configuration(2)
    assert sol.A == 1 and sol.B == Fraction(5, 8)
    assert sol.Zstar_exact == Fraction(27, 16)
    assert sol.E0_exact == -Fraction(27, 16) ** 2


def test_hydrogenic_ion_is_exact():
    _, sol = select_ground_configuration(3, 1)
    assert sol.E0_exact == Fraction(-9, 2)


def test_exchange_lowers_triplet_pairs():
    cfg, _ = select_ground_configuration(7)
    assert exchange_sum_K(cfg) < 0 < coulomb_sum_J(cfg)


@given(st.integers(1, 100))
def test_first_order_vanishes_exactly(Z):
    """The first-order shift is an exact rational zero at the variational charge."""
    _, sol = select_ground_configuration(Z)
    assert first_order_correction(sol) == 0
    # and is not identically zero elsewhere
    assert first_order_correction(sol, sol.Zstar_exact + Fraction(1, 7)) != 0


@given(st.integers(2, 60), st.fractions(min_value=Fraction(-1, 2), max_value=Fraction(1, 2)))
def test_variational_minimum(Z, shift):
    _, sol = select_ground_configuration(Z)
    assert variational_energy(sol, sol.Zstar_exact + shift) >= sol.E0_exact


def test_solution_consistency():
    cfg, _ = configuration_from_string(11, "[Ne] 3s1")
    sol = solve_zeroth_order(cfg)
    assert sol.A == structure_constant_A(cfg)
    assert sol.E0 == pytest.approx(-float(sol.A) * sol.Zstar**2)


def test_table2_internal_consistency():
    """E0 = -A Z*^2 with A from our configuration reproduces every printed row to 1e-3."""
    for rec in load_reference("table2"):
        Z = rec.key[0]
        _, sol = select_ground_configuration(Z)
        q = rec.quantities
        assert -float(sol.A) * q["Zstar"] ** 2 == pytest.approx(q["E0"], rel=1e-3)
