"""Generate the closed-shell Hartree-Fock radial densities shipped as reference data.

Restricted Roothaan-Hartree-Fock in an even-tempered Slater basis
``r^(l+1) exp(-zeta r)``, with all integrals done by Gauss-Legendre panels.
Run from the repository root::

    python3 tools/hf_reference.py src/effcharge/data
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import eigh

from effcharge.angular import gaunt
from effcharge.quadrature import RadialGrid

SHELLS = {
    "Ne": (10, {0: 2, 1: 1}),
    "Ar": (18, {0: 3, 1: 2}),
}


def _grid() -> RadialGrid:
    edges = np.unique(np.concatenate([[0.0], np.geomspace(1e-4, 1.0, 25), np.linspace(1.0, 12.0, 23),
                                      np.linspace(12.0, 40.0, 8)]))
    return RadialGrid(edges, order=24)


def _multipole(grid, j, f):
    r = grid.r
    return grid.cumulative(r**j * f) / r ** (j + 1) + grid.tail(f / r ** (j + 1)) * r**j


def _exchange_coefficient(l, lp, k):
    return sum(gaunt(l, 0, lp, mp, k) ** 2 for mp in range(-lp, lp + 1))


def solve(Z: int, nocc: dict[int, int], size: int = 22, tol: float = 1e-10):
    grid = _grid()
    r, w = grid.r, grid.w
    zetas = {l: np.geomspace(0.25, 6.0 * Z, size) for l in nocc}
    basis, dbasis, X, h = {}, {}, {}, {}
    for l, zl in zetas.items():
        chi = r[None, :] ** (l + 1) * np.exp(-zl[:, None] * r[None, :])
        chi /= np.sqrt(chi**2 @ w)[:, None]
        dchi = ((l + 1) / r[None, :] - zl[:, None]) * chi
        S = (chi * w) @ chi.T
        s, U = eigh(S)
        keep = s > 1e-11 * s.max()
        X[l] = U[:, keep] / np.sqrt(s[keep])
        basis[l], dbasis[l] = chi, dchi
        T = 0.5 * (dbasis[l] * w) @ dchi.T + 0.5 * l * (l + 1) * (chi * w / r**2) @ chi.T
        h[l] = T - Z * (chi * w / r) @ chi.T
    orbs = {}
    for l in nocc:
        e, C = eigh(X[l].T @ h[l] @ X[l])
        orbs[l] = (e[: nocc[l]], (X[l] @ C[:, : nocc[l]]).T @ basis[l])
    energy_old, F_old = 0.0, {}
    for it in range(400):
        rho = sum(2 * (2 * l + 1) * (u**2).sum(axis=0) for l, (_, u) in orbs.items())
        vh = _multipole(grid, 0, rho)
        F = {}
        for l, chi in basis.items():
            Fl = h[l] + (chi * w * vh) @ chi.T
            for lp, (_, up) in orbs.items():
                for k in range(abs(l - lp), l + lp + 1, 2):
                    ek = _exchange_coefficient(l, lp, k)
                    if ek == 0.0:
                        continue
                    for uj in up:
                        Y = np.array([_multipole(grid, k, uj * c) for c in chi])
                        Fl -= ek * ((chi * uj * w) @ Y.T)
            F[l] = 0.5 * (Fl + Fl.T)
            if F_old:
                F[l] = 0.6 * F[l] + 0.4 * F_old[l]
        F_old = F
        energy = 0.0
        new = {}
        for l in basis:
            e, C = eigh(X[l].T @ F[l] @ X[l])
            coef = X[l] @ C[:, : nocc[l]]
            new[l] = (e[: nocc[l]], coef.T @ basis[l])
            hl = np.einsum("mi,mn,ni->i", coef, h[l], coef)
            energy += 2 * (2 * l + 1) * 0.5 * float(np.sum(hl + e[: nocc[l]]))
        orbs = new
        if abs(energy - energy_old) < tol:
            break
        energy_old = energy
    rho = sum(2 * (2 * l + 1) * (u**2).sum(axis=0) for l, (_, u) in orbs.items())
    return grid, energy, rho, orbs


def main(out_dir: str) -> None:
    out = Path(out_dir)
    for sym, (Z, nocc) in SHELLS.items():
        grid, energy, rho, orbs = solve(Z, nocc)
        r_out = np.unique(np.concatenate([np.geomspace(1e-4, 1.0, 400), np.linspace(1.0, 12.0, 1101)]))
        spline = CubicSpline(np.concatenate(([0.0], grid.r)), np.concatenate(([0.0], rho)))
        eps = ";".join(f"{l}:{','.join(f'{x:.8f}' for x in e)}" for l, (e, _) in orbs.items())
        lines = [
            f"# dataset: hf_density_{sym}",
            f"# source: restricted Roothaan-Hartree-Fock, even-tempered Slater basis, tools/hf_reference.py",
            f"# provenance: external-HF",
            f"# Z: {Z}",
            f"# E_HF: {energy:.8f}",
            f"# orbital_energies: {eps}",
            f"# norm: {float(grid.integrate(rho)):.12f}",
            "r,radial_density",
        ]
        lines += [f"{x:.10g},{y:.10g}" for x, y in zip(r_out, spline(r_out))]
        (out / f"hf_density_{sym}.csv").write_text("\n".join(lines) + "\n")
        print(sym, energy, grid.integrate(rho))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/effcharge/data")
