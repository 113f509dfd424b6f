"""Acceptance criteria, one test each.

Every test prints a single ``CRITERION n: PASS|FAIL`` line (visible even under
output capture) and then asserts the same condition at full tolerance.
"""

import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from scipy import integrate

from effcharge.angular import three_j
from effcharge.config import configuration_from_string, select_ground_configuration
from effcharge.greens import GreenEnergy, GridGreen, RadialGreenKernel, green_radial
from effcharge.observables import density_zeroth, form_factor_numeric, form_factor_spherical
from effcharge.pt2 import (
    HydrogenicSpace,
    SpectralResolvent,
    degenerate_he_excited,
    delta_E2_multi,
    delta_E2_single,
    perturbation_grid,
    second_order,
)
from effcharge.quadrature import RadialGrid
from effcharge.radial import direct_integral_I, exchange_integral_L, radial_wavefunction
from effcharge.refdata import load_reference
from effcharge.scf0 import first_order_correction
from oracles import coulomb_green_oracle, explicit_second_order, hydrogen_u
from printed_forms import PRINTED_DENSITY, PRINTED_FORM_FACTOR, q, theta, u, zs

pytestmark = pytest.mark.acceptance


@pytest.fixture
def verdict(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {n}: {'PASS' if ok else 'FAIL'} - {detail}")
        assert ok, detail

    return emit


def _table2():
    return {rec.key[0]: rec.quantities for rec in load_reference("table2")}


def test_criterion_1_zeroth_order_table(verdict):
    ref = _table2()
    t0 = time.perf_counter()
    worst_z = worst_e = 0.0
    for Z in range(1, 101):
        _, sol = select_ground_configuration(Z)
        worst_z = max(worst_z, abs(sol.Zstar - ref[Z]["Zstar"]))
        worst_e = max(worst_e, abs(sol.E0 / ref[Z]["E0"] - 1))
    elapsed = time.perf_counter() - t0
    ok = worst_z <= 5e-4 and worst_e <= 2e-4 and elapsed <= 10.0
    verdict(1, ok, f"max |dZ*| = {worst_z:.2e}, max rel dE0 = {worst_e:.2e}, {elapsed:.2f} s")


def test_criterion_2_potassium(verdict):
    cfg, sol = select_ground_configuration(19)
    _, d1 = configuration_from_string(19, "[Ar] 3d1")
    ok = (cfg.to_string().endswith("4s1") and abs(sol.E0 + 571.305) <= 1e-3 and abs(d1.E0 + 568.473) <= 1e-3)
    verdict(2, ok, f"selected {cfg.to_string().split()[-1]}, 4s1 {sol.E0:.6f}, 3d1 {d1.E0:.6f}")


def test_criterion_3_single_excitation(verdict):
    printed = {2: -2.8610, 3: -7.4114, 4: -14.5212, 10: -127.769}
    t0 = time.perf_counter()
    errs = {}
    for Z, ref in printed.items():
        cfg, sol = select_ground_configuration(Z)
        e2 = sol.E0 + delta_E2_single(cfg, sol, degenerate="project").total
        errs[Z] = (e2, abs(e2 / ref - 1))
    elapsed = time.perf_counter() - t0
    ok = all(err <= 5e-3 for _, err in errs.values()) and elapsed <= 300
    detail = ", ".join(f"Z={Z} {e:.5f} ({err:.1e})" for Z, (e, err) in errs.items())
    verdict(3, ok, f"{detail}; {elapsed:.1f} s")


def test_criterion_4_correlated_ground_states(verdict):
    printed = {(1, 2): -0.532, (2, 2): -2.907, (3, 3): -7.467}
    out = []
    ok = True
    for (Z, N), ref in printed.items():
        cfg, sol = select_ground_configuration(Z, N)
        e2 = second_order(cfg, sol, multi=True).E2_total
        err = abs(e2 / ref - 1)
        ok &= err <= 1.5e-2
        out.append(f"Z={Z} N={N} {e2:.5f} ({err:.1e})")
    verdict(4, ok, ", ".join(out))


def test_criterion_5_helium_excited_states(verdict):
    trip = degenerate_he_excited("triplet").E2_total
    sing = degenerate_he_excited("singlet").E2_total
    et, es = abs(trip / -2.172 - 1), abs(sing / -2.154 - 1)
    ok = et <= 1e-2 and es <= 1e-2 and trip < sing
    verdict(5, ok, f"2 3S {trip:.5f} ({et:.1e}), 2 1S {sing:.5f} ({es:.1e})")


def test_criterion_6_accuracy_against_hartree_fock(verdict):
    ref = _table2()
    zeroth = {}
    for Z in range(1, 101):
        _, sol = select_ground_configuration(Z)
        zeroth[Z] = abs(sol.E0 / ref[Z]["E_HF"] - 1)
    single = {}
    for Z in range(1, 21):
        cfg, sol = select_ground_configuration(Z)
        e2 = sol.E0 + delta_E2_single(cfg, sol, degenerate="project").total
        single[Z] = abs(e2 / ref[Z]["E_HF"] - 1)
    z0, z2 = max(zeroth, key=zeroth.get), max(single, key=single.get)
    over = sorted(Z for Z, e in zeroth.items() if e > 0.06)
    ok = zeroth[z0] <= 0.06 and single[z2] <= 1e-2
    verdict(6, ok, f"zeroth order max {zeroth[z0]:.4f} at Z={z0} (above 6% for Z in {over}); "
                   f"with singles max {single[z2]:.4f} at Z={z2}")


def test_criterion_7_green_function(verdict):
    radii = [0.5, 1.0, 2.0, 3.5, 5.0]
    worst = 0.0
    for l, E in itertools.product((0, 1, 2), (-2.0, -0.3, -0.08)):
        for r, rp in itertools.product(radii, radii):
            diff = abs(green_radial(l, GreenEnergy(E), r, rp) - coulomb_green_oracle(l, E, r, rp))
            worst = max(worst, diff)
    grid = perturbation_grid(3)
    gg = GridGreen(grid)
    resid = 0.0
    for l, E, sub in [(0, -0.5, (1,)), (0, -0.125, (1, 2)), (1, -0.125, (2,)), (0, -0.3, (1, 2))]:
        kern = RadialGreenKernel(l, GreenEnergy(E), sub)
        for n in sub:
            un = grid.r * radial_wavefunction(n, l)(grid.r)
            resid = max(resid, float(np.max(np.abs(gg.apply(kern, un)))))
    ok = worst <= 1e-5 and resid <= 1e-6
    verdict(7, ok, f"kernel vs spectral sum max {worst:.1e}, orthogonality residual max {resid:.1e}")


def test_criterion_8_observables(verdict):
    norm = 0.0
    for Z in range(1, 55):
        cfg, sol = select_ground_configuration(Z)
        d = density_zeroth(cfg, sol)
        norm = max(norm, abs(form_factor_numeric(d, 0.0) - Z))
        if cfg.is_spherical():
            norm = max(norm, abs(form_factor_spherical(cfg, sol, 0.0) - Z))
        integral = integrate.quad(lambda x: 4 * math.pi * x * x * float(d(x)), 0, 40 / sol.Zstar + 60,
                                  limit=500, epsabs=1e-12, epsrel=1e-13,
                                  points=[1 / sol.Zstar, 5 / sol.Zstar, 20 / sol.Zstar])[0]
        norm = max(norm, abs(integral - Z))
    symbolic = []
    for Z, printed in PRINTED_DENSITY.items():
        cfg, sol = select_ground_configuration(Z)
        ours = density_zeroth(cfg, sol).to_sympy(u, theta, zs)
        symbolic.append(sp.simplify(sp.expand(sp.expand_trig(ours - printed))) == 0)
    for Z, printed in PRINTED_FORM_FACTOR.items():
        cfg, sol = select_ground_configuration(Z)
        f = sp.lambdify(q, printed.subs(zs, sol.Zstar))
        d = density_zeroth(cfg, sol)
        if cfg.is_spherical():
            ours = form_factor_spherical(cfg, sol, None, symbolic=True)
            z_exact = sp.Rational(sol.Zstar_exact.numerator, sol.Zstar_exact.denominator)
            symbolic.append(sp.simplify(ours.subs(ours.free_symbols.pop(), q) - printed.subs(zs, z_exact)) == 0)
        symbolic.append(all(abs(form_factor_numeric(d, x, direction=0.0) - f(x)) <= 1e-12
                            for x in (0.5, 1.0, 2.0, 5.0)))
    hankel = 0.0
    for Z in (2, 10, 18, 20, 29):
        cfg, sol = select_ground_configuration(Z)
        d = density_zeroth(cfg, sol)
        for x in np.linspace(0.25, 12.0, 10):
            ref = integrate.quad(lambda r: 4 * math.pi * r * float(d(r)) * math.sin(x * r) / x, 0, 60,
                                 epsabs=1e-12, epsrel=1e-12, limit=400,
                                 points=[0.5 / sol.Zstar, 2 / sol.Zstar, 8 / sol.Zstar])[0]
            hankel = max(hankel, abs(form_factor_spherical(cfg, sol, x) - ref))
    ok = norm <= 1e-9 and all(symbolic) and hankel <= 1e-8
    verdict(8, ok, f"normalisation max {norm:.1e}, closed forms {sum(symbolic)}/{len(symbolic)}, "
                   f"Hankel max {hankel:.1e}")


def _three_j_orthogonality_defect(jmax=3):
    worst = 0.0
    for j1, j2 in itertools.product(range(jmax + 1), repeat=2):
        js = range(abs(j1 - j2), j1 + j2 + 1)
        for j3, j3p in itertools.product(js, js):
            for m3 in range(-min(j3, j3p), min(j3, j3p) + 1):
                exact = Fraction(0)
                approx = 0.0
                for m1 in range(-j1, j1 + 1):
                    m2 = -m1 - m3
                    if abs(m2) > j2:
                        continue
                    a, b = three_j(j1, j2, j3, m1, m2, m3), three_j(j1, j2, j3p, m1, m2, m3)
                    if j3 == j3p:
                        exact += (a * b).to_fraction()
                    else:
                        approx += float(a) * float(b)
                if j3 == j3p:
                    if exact != Fraction(1, 2 * j3 + 1):
                        return math.inf
                else:
                    worst = max(worst, abs(approx))
    return worst


def test_criterion_9_property_suite(verdict):
    first_order = all(first_order_correction(select_ground_configuration(Z)[1]) == 0 for Z in range(1, 101))
    ortho = _three_j_orthogonality_defect()
    shells = [(n, l) for n in range(1, 6) for l in range(n)]
    symmetric = all(
        direct_integral_I(*a, *b, j) == direct_integral_I(*b, *a, j)
        and exchange_integral_L(*a, *b, j) == exchange_integral_L(*b, *a, j)
        for a, b in itertools.combinations(shells, 2) for j in range(5)
    )
    grid = RadialGrid.for_extent(1000.0)
    r = grid.r
    quad = 0.0
    for a, b in itertools.combinations_with_replacement([s for s in shells if s[0] <= 4], 2):
        f, g = hydrogen_u(*a, r) ** 2, hydrogen_u(*b, r) ** 2
        for j in range(0, min(2 * a[1], 2 * b[1]) + 1):
            pot = grid.cumulative(r**j * g) / r ** (j + 1) + grid.tail(g / r ** (j + 1)) * r**j
            quad = max(quad, abs(grid.integrate(f * pot) - float(direct_integral_I(*a, *b, j))))
    algebra = 0.0
    for Z in (2, 3, 7):
        cfg, sol = select_ground_configuration(Z)
        pgrid = perturbation_grid(max(o.n for o in cfg.orbitals))
        res = SpectralResolvent(pgrid, 4)
        single = delta_E2_single(cfg, sol, grid=pgrid, resolvent=res, degenerate="project").total
        multi = delta_E2_multi(cfg, sol, grid=pgrid, resolvent=res, space=HydrogenicSpace(pgrid, 4),
                               l_max=3, extrapolate=False).total
        s_ref, d_ref = explicit_second_order(cfg, float(sol.B / (2 * sol.A)), 4)
        algebra = max(algebra, abs(single - s_ref), abs(multi - d_ref))
    ok = first_order and ortho <= 1e-12 and symmetric and quad <= 1e-10 and algebra <= 1e-10
    verdict(9, ok, f"first order exact {first_order}, 3j orthogonality defect {ortho:.1e}, "
                   f"radial symmetry {symmetric}, quadrature max {quad:.1e}, truncated-space max {algebra:.1e}")
