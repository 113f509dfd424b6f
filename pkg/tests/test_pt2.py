import pytest

from effcharge.config import Orbital, configuration_from_string, select_ground_configuration
from effcharge.pt2 import (
    DegenerateChannelError,
    HydrogenicSpace,
    SpectralResolvent,
    delta_E2_multi,
    delta_E2_single,
    perturbation_grid,
    second_order,
    single_excitation_matrix_element,
)
from effcharge.refdata import load_reference
from oracles import explicit_second_order, one_body_inverse_r, two_electron

UP, DOWN = Orbital(1, 0, 0).ms, -Orbital(1, 0, 0).ms


def _truncated_pipeline(Z, nmax=4):
    cfg, sol = select_ground_configuration(Z)
    grid = perturbation_grid(max(o.n for o in cfg.orbitals))
    res = SpectralResolvent(grid, nmax)
    single = delta_E2_single(cfg, sol, grid=grid, resolvent=res, degenerate="project").total
    multi = delta_E2_multi(cfg, sol, grid=grid, resolvent=res, space=HydrogenicSpace(grid, nmax),
                           l_max=nmax - 1, extrapolate=False).total
    oracle = explicit_second_order(cfg, float(sol.B / (2 * sol.A)), nmax)
    return (single, multi), oracle


@pytest.mark.parametrize("Z", [2, 3, 7])
def test_truncated_space_matches_explicit_state_sum(Z):
    """Green-function pipeline with a truncated spectral kernel equals the explicit sum to 1e-10."""
    (single, multi), (s_ref, d_ref) = _truncated_pipeline(Z)
    assert single == pytest.approx(s_ref, abs=1e-10)
    assert multi == pytest.approx(d_ref, abs=1e-10)


def test_matrix_element_selection_rules():
    he, sol = select_ground_configuration(2)
    k = he.orbitals[1]
    assert single_excitation_matrix_element(he, k, Orbital(2, 1, 0, k.ms), sol) == 0.0
    assert single_excitation_matrix_element(he, k, Orbital(2, 0, 0, -k.ms), sol) == 0.0
    li, sol_li = select_ground_configuration(3)
    two_s = next(o for o in li.orbitals if o.n == 2)
    assert single_excitation_matrix_element(li, two_s, Orbital(2, 1, 0, two_s.ms), sol_li) == 0.0
    with pytest.raises(ValueError):
        single_excitation_matrix_element(he, k, k, sol)


def test_matrix_element_matches_closed_form_integrals():
    he, sol = select_ground_configuration(2)
    k = he.orbitals[1]
    other = he.orbitals[0]
    sigma = Orbital(2, 0, 0, k.ms)
    c1 = float(sol.B / (2 * sol.A))
    expected = -c1 * one_body_inverse_r(sigma, k) + two_electron(sigma, other, k, other)
    assert single_excitation_matrix_element(he, k, sigma, sol) == pytest.approx(expected, abs=1e-12)


def test_opposite_spin_exchange_amplitude_is_exactly_zero():
    a, b = Orbital(2, 0, 0, UP), Orbital(3, 0, 0, DOWN)
    i, j = Orbital(1, 0, 0, UP), Orbital(1, 0, 0, DOWN)
    assert two_electron(a, b, j, i) == 0.0
    assert two_electron(a, b, i, j) != 0.0


def test_degenerate_channel_handling():
    cfg, sol = select_ground_configuration(13)
    with pytest.raises(DegenerateChannelError):
        delta_E2_single(cfg, sol, degenerate="raise")
    res = delta_E2_single(cfg, sol, degenerate="project")
    assert res.projected


@pytest.mark.parametrize("Z", [2, 4, 10, 12, 18])
def test_single_shift_negative_for_closed_shells(Z):
    cfg, sol = select_ground_configuration(Z)
    res = delta_E2_single(cfg, sol)
    assert all(v <= 0.0 for v in res.per_orbital.values())


def test_closed_shell_mean_field_is_spherical():
    cfg, sol = select_ground_configuration(10)
    full = delta_E2_single(cfg, sol).total
    sph = delta_E2_single(cfg, sol, spherical=True).total
    assert full == pytest.approx(sph, abs=1e-12)


def test_single_excitation_below_hartree_fock():
    refs = {rec.key[0]: rec.quantities["E_HF"] for rec in load_reference("table2")}
    # hydrogen is exact at zeroth order
    _, h = select_ground_configuration(1)
    assert h.E0 == refs[1]
    for Z in range(2, 21):
        cfg, sol = select_ground_configuration(Z)
        e2 = sol.E0 + delta_E2_single(cfg, sol, degenerate="project").total
        assert abs(e2) < abs(refs[Z]), Z


def test_breakdown_sums():
    cfg, sol = configuration_from_string(2, "1s2")
    b = second_order(cfg, sol, l_max=2)
    assert b.E2_total == pytest.approx(b.E0 + b.dE_single + b.dE_multi, abs=0)
    assert b.E2_single == b.E0 + b.dE_single


@pytest.mark.slow
@pytest.mark.parametrize("Z", [2, 3])
def test_partial_wave_cutoff_convergence(Z):
    """Raising the partial-wave cutoff from 5 to 7 moves the pair energy by < 1e-5."""
    cfg, sol = select_ground_configuration(Z)
    e5 = delta_E2_multi(cfg, sol, l_max=5).total
    e7 = delta_E2_multi(cfg, sol, l_max=7).total
    assert abs(e7 - e5) < 1e-5
