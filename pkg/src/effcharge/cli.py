"""Command-line front end.

Subcommands: solve, table2, table1, density, formfactor, compare.  Floats are
printed with 10 significant digits; comparisons always use full precision.
Errors are reported as a JSON object on stderr with a nonzero exit status.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .config import (
    STRATEGIES,
    configuration_from_string,
    select_ground_configuration,
)
from .observables import (
    curve_csv,
    density_first_order,
    density_zeroth,
    form_factor_numeric,
    form_factor_spherical,
    s_to_q,
)
from .refdata import Tolerance, compare, gaussian_form_factor, load_density_curve, load_reference

__all__ = ["RunSpec", "main", "run", "build_parser"]

DIGITS = 10
EXIT_OK, EXIT_COMPARE_FAILED, EXIT_ERROR = 0, 1, 2

SYMBOLS = (
    "H He Li Be B C N O F Ne Na Mg Al Si P S Cl Ar K Ca Sc Ti V Cr Mn Fe Co Ni Cu Zn Ga Ge As Se Br Kr "
    "Rb Sr Y Zr Nb Mo Tc Ru Rh Pd Ag Cd In Sn Sb Te I Xe Cs Ba La Ce Pr Nd Pm Sm Eu Gd Tb Dy Ho Er Tm Yb "
    "Lu Hf Ta W Re Os Ir Pt Au Hg Tl Pb Bi Po At Rn Fr Ra Ac Th Pa U Np Pu Am Cm Bk Cf Es Fm"
).split()

TABLE1_SPECIES = ("H-", "He", "Li", "He 2 3S", "He 2 1S")


@dataclass
class RunSpec:
    """Parsed command line; ``N`` defaults to ``Z``."""

    command: str
    Z: int | None = None
    N: int | None = None
    config: str | None = None
    order: int = 0
    output: str | None = None
    fmt: str = "csv"
    jobs: int = 1
    compare: bool = False
    tolerances: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)


def fmt_float(x: float) -> str:
    return f"{float(x):.{DIGITS}g}"


def _round(obj):
    """Fix floats to 10 significant digits for JSON output."""
    if isinstance(obj, float):
        return float(fmt_float(obj))
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def _parse_range(text: str) -> list[int]:
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            a, b = part.split("..")
            out.extend(range(int(a), int(b) + 1))
        elif "-" in part[1:]:
            a, b = part.split("-", 1)
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    if not out or min(out) < 1:
        raise ValueError(f"bad Z range {text!r}")
    return out


def _fan_out(func, items, jobs):
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(func, items))


# --------------------------------------------------------------------------
# Workers (module level so they pickle)
# --------------------------------------------------------------------------

def _solve_one(args) -> dict:
    Z, N, config_text, order, strategy, degenerate, correlation = args
    N = Z if N is None else N
    if config_text:
        cfg, sol = configuration_from_string(Z, config_text)
    else:
        cfg, sol = select_ground_configuration(Z, N, strategy=strategy)
    row = {
        "Z": Z,
        "N": cfg.N,
        "configuration": cfg.to_string(),
        "Zstar": sol.Zstar,
        "E0": sol.E0,
    }
    if order >= 2:
        from .pt2 import delta_E2_multi, delta_E2_single

        single = delta_E2_single(cfg, sol, degenerate=degenerate)
        row["dE2_single"] = single.total
        row["E2_single"] = sol.E0 + single.total
        row["projected"] = [f"{k} -> n={n} l={L}" for k, n, L, _ in single.projected]
        if correlation:
            multi = delta_E2_multi(cfg, sol)
            row["dE2_multi"] = multi.total
            row["E2"] = row["E2_single"] + multi.total
    return row


def _table1_one(species: str) -> dict:
    from .pt2 import degenerate_he_excited, second_order

    if species.startswith("He 2"):
        res = degenerate_he_excited("triplet" if "3S" in species else "singlet")
        return {"species": species, "E2": res.E2_total}
    Z, N = {"H-": (1, 2), "He": (2, 2), "Li": (3, 3)}[species]
    cfg, sol = select_ground_configuration(Z, N)
    res = second_order(cfg, sol, multi=True)
    return {"species": species, "E2": res.E2_total}


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------

def _emit(spec: RunSpec, text: str) -> None:
    if spec.output:
        with open(spec.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _table_csv(columns: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow(["" if row.get(c) is None else fmt_float(row[c]) if isinstance(row[c], float) else row[c]
                    for c in columns])
    return buf.getvalue()


def _report_json(report) -> dict:
    d = report.to_dict()
    d["uncovered"] = [list(k) for k in report.uncovered]
    return d


def cmd_solve(spec: RunSpec) -> int:
    if spec.Z is None:
        raise ValueError("solve requires --Z")
    row = _solve_one((spec.Z, spec.N, spec.config, spec.order, spec.options.get("strategy", "reference"),
                      spec.options.get("degenerate", "project"), spec.options.get("correlation", False)))
    if spec.fmt == "json":
        _emit(spec, json.dumps(_round(row), indent=2) + "\n")
    else:
        cols = [c for c in row if c != "projected"]
        _emit(spec, _table_csv(cols, [row]))
    return EXIT_OK


def cmd_table2(spec: RunSpec) -> int:
    zs = _parse_range(spec.options.get("range") or "1..100")
    jobs_args = [(Z, None, None, spec.order, spec.options.get("strategy", "reference"),
                  spec.options.get("degenerate", "project"), False) for Z in zs]
    rows = _fan_out(_solve_one, jobs_args, spec.jobs)
    ref = {r.key[0]: r.quantities for r in load_reference("table2")}
    for row in rows:
        row["E_HF"] = ref.get(row["Z"], {}).get("E_HF")
    columns = ["Z", "Zstar", "E0", "E2_single", "E_HF"]
    status = EXIT_OK
    report = None
    if spec.compare:
        tol = {"Zstar": Tolerance(abs=spec.tolerances.get("zstar", 5e-4)),
               "E0": Tolerance(rel=spec.tolerances.get("e0", 2e-4))}
        if spec.order >= 2:
            tol["E2_single"] = Tolerance(rel=spec.tolerances.get("e2", 5e-3))
        computed = {(r["Z"], r["Z"], "ground"): {k: r[k] for k in ("Zstar", "E0", "E2_single") if k in r}
                    for r in rows}
        wanted = [rec for rec in load_reference("table2") if rec.key[0] in set(zs)]
        report = compare(computed, wanted, tol)
        status = EXIT_OK if report.passed else EXIT_COMPARE_FAILED
    if spec.fmt == "json":
        payload = {"rows": rows}
        if report is not None:
            payload["comparison"] = _report_json(report)
        _emit(spec, json.dumps(_round(payload), indent=2) + "\n")
    else:
        _emit(spec, _table_csv(columns, rows))
        if report is not None:
            sys.stderr.write(json.dumps(_round(_report_summary(report))) + "\n")
    return status


def _report_summary(report) -> dict:
    return {
        "passed": report.passed,
        "n_compared": len(report.entries),
        "failures": [
            {"key": list(e.key), "quantity": e.quantity, "computed": e.computed, "reference": e.reference}
            for e in report.failures
        ],
    }


def cmd_table1(spec: RunSpec) -> int:
    species = spec.options.get("species") or list(TABLE1_SPECIES)
    rows = _fan_out(_table1_one, species, spec.jobs)
    ref = {r.quantities["species"]: r for r in load_reference("table1")}
    for row in rows:
        for c in ("E_var", "E_MCHF", "E_HF"):
            row[c] = ref[row["species"]].quantities[c]
    status = EXIT_OK
    report = None
    if spec.compare:
        computed = {ref[r["species"]].key: {"E2": r["E2"]} for r in rows}
        excited = [s for s in species if s.startswith("He 2")]
        ground = [s for s in species if s not in excited]
        report = compare({ref[s].key: computed[ref[s].key] for s in ground}, [ref[s] for s in ground],
                         {"E2": Tolerance(rel=spec.tolerances.get("e2", 1.5e-2))})
        rep2 = compare({ref[s].key: computed[ref[s].key] for s in excited}, [ref[s] for s in excited],
                       {"E2": Tolerance(rel=spec.tolerances.get("excited", 1e-2))})
        report.entries.extend(rep2.entries)
        by = {r["species"]: r["E2"] for r in rows}
        order_ok = not ("He 2 3S" in by and "He 2 1S" in by) or by["He 2 3S"] < by["He 2 1S"]
        status = EXIT_OK if report.passed and order_ok else EXIT_COMPARE_FAILED
    if spec.fmt == "json":
        payload = {"rows": rows}
        if report is not None:
            payload["comparison"] = _report_json(report)
        _emit(spec, json.dumps(_round(payload), indent=2) + "\n")
    else:
        _emit(spec, _table_csv(["species", "E2", "E_var", "E_MCHF", "E_HF"], rows))
        if report is not None:
            sys.stderr.write(json.dumps(_round(_report_summary(report))) + "\n")
    return status


def _atom(spec: RunSpec):
    if spec.Z is None:
        raise ValueError("--Z is required")
    if spec.config:
        return configuration_from_string(spec.Z, spec.config)
    return select_ground_configuration(spec.Z, spec.N, strategy=spec.options.get("strategy", "reference"))


def _symbol(Z: int) -> str:
    return SYMBOLS[Z - 1] if Z <= len(SYMBOLS) else f"Z{Z}"


def cmd_density(spec: RunSpec) -> int:
    cfg, sol = _atom(spec)
    rmax = spec.options.get("rmax", 5.0)
    npts = spec.options.get("points", 501)
    r = np.linspace(0.0, rmax, npts)
    cols = {"r": r, "zeroth": density_zeroth(cfg, sol).radial_density(r)}
    if spec.order >= 1:
        first = density_first_order(cfg, sol).at(r)
        cols["first_order"] = first["total"]
    sym = _symbol(spec.Z)
    if cfg.N == spec.Z:
        try:
            rr, dd, _ = load_density_curve(sym)
            cols["hf"] = np.interp(r, rr, dd, left=0.0, right=0.0)
        except (KeyError, FileNotFoundError):
            pass
    header = {"atom": sym, "Z": str(spec.Z), "N": str(cfg.N), "Zstar": fmt_float(sol.Zstar),
              "configuration": cfg.to_string(), "quantity": "4 pi r^2 rho(r), r in bohr"}
    _emit(spec, curve_csv(cols, header, DIGITS))
    return EXIT_OK


def cmd_formfactor(spec: RunSpec) -> int:
    cfg, sol = _atom(spec)
    smax = spec.options.get("smax", 2.0)
    npts = spec.options.get("points", 201)
    s = np.linspace(0.0, smax, npts)
    q = s_to_q(s)
    if cfg.is_spherical():
        f0 = form_factor_spherical(cfg, sol, q)
    else:
        f0 = form_factor_numeric(density_zeroth(cfg, sol), q)
    cols = {"s": s, "q": q, "f0": f0}
    sym = _symbol(spec.Z)
    if cfg.N == spec.Z:
        try:
            cols["gaussian_fit"] = gaussian_form_factor(sym, s)
        except KeyError:
            pass
    header = {"atom": sym, "Z": str(spec.Z), "N": str(cfg.N), "Zstar": fmt_float(sol.Zstar),
              "configuration": cfg.to_string(),
              "quantity": "orientation-averaged f(q); s in 1/angstrom, q in 1/bohr"}
    _emit(spec, curve_csv(cols, header, DIGITS))
    return EXIT_OK


def cmd_compare(spec: RunSpec) -> int:
    dataset = spec.options.get("dataset", "table2")
    path = spec.options.get("input")
    if not path:
        raise ValueError("compare requires --input")
    with open(path, encoding="utf-8") as fh:
        rows = [r for r in csv.DictReader(line for line in fh if not line.startswith("#"))]
    if dataset == "table2":
        computed = {(int(r["Z"]), int(r["Z"]), "ground"): {k: float(v) for k, v in r.items() if k != "Z" and v}
                    for r in rows}
        tol = {"Zstar": Tolerance(abs=spec.tolerances.get("zstar", 5e-4)),
               "E0": Tolerance(rel=spec.tolerances.get("e0", 2e-4)),
               "E2_single": Tolerance(rel=spec.tolerances.get("e2", 5e-3))}
    elif dataset == "table1":
        keys = {r.quantities["species"]: r.key for r in load_reference("table1")}
        computed = {keys[r["species"]]: {"E2": float(r["E2"])} for r in rows}
        tol = {"E2": Tolerance(rel=spec.tolerances.get("e2", 1.5e-2))}
    else:
        raise ValueError(f"cannot compare against dataset {dataset!r}")
    report = compare(computed, load_reference(dataset), tol)
    _emit(spec, json.dumps(_round(_report_json(report)), indent=2) + "\n")
    return EXIT_OK if report.passed else EXIT_COMPARE_FAILED


COMMANDS = {
    "solve": cmd_solve,
    "table2": cmd_table2,
    "table1": cmd_table1,
    "density": cmd_density,
    "formfactor": cmd_formfactor,
    "compare": cmd_compare,
}


def run(spec: RunSpec) -> int:
    """Execute a parsed spec and return the exit status."""
    return COMMANDS[spec.command](spec)


# --------------------------------------------------------------------------
# Argument parsing
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="effcharge", description="Effective-charge hydrogenic atom calculations.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="write to this file instead of stdout")
    common.add_argument("--format", dest="fmt", choices=("csv", "json"), default=None)
    common.add_argument("--jobs", "-j", type=int, default=os.cpu_count() or 1,
                        help="parallel workers for per-element work (default: all cores)")
    atom = argparse.ArgumentParser(add_help=False)
    atom.add_argument("--Z", type=int, required=True)
    atom.add_argument("--N", type=int, default=None, help="electron count (default Z)")
    atom.add_argument("--config", default=None, help='occupation override, e.g. "[Ar] 3d1"')
    atom.add_argument("--strategy", choices=STRATEGIES, default="reference")
    tol = argparse.ArgumentParser(add_help=False)
    tol.add_argument("--compare", action="store_true", help="compare with the embedded reference table")
    tol.add_argument("--tol-zstar", type=float, default=5e-4)
    tol.add_argument("--tol-e0", type=float, default=2e-4)
    tol.add_argument("--tol-e2", type=float, default=None)

    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", parents=[common, atom], help="one atom or ion")
    s.add_argument("--order", type=int, choices=(0, 2), default=0)
    s.add_argument("--degenerate", choices=("raise", "project"), default="project")
    s.add_argument("--correlation", action="store_true", help="add the pair correlation term (order 2)")

    t2 = sub.add_parser("table2", parents=[common, tol], help="effective charges and energies for a Z range")
    t2.add_argument("--range", default="1..100", help="e.g. 1..20 or 1,2,10")
    t2.add_argument("--order", type=int, choices=(0, 2), default=0)
    t2.add_argument("--strategy", choices=STRATEGIES, default="reference")
    t2.add_argument("--degenerate", choices=("raise", "project"), default="project")

    t1 = sub.add_parser("table1", parents=[common, tol], help="second-order energies of small systems")
    t1.add_argument("--species", nargs="*", choices=TABLE1_SPECIES, default=None)
    t1.add_argument("--tol-excited", type=float, default=1e-2)

    d = sub.add_parser("density", parents=[common, atom], help="radial density curves")
    d.add_argument("--order", type=int, choices=(0, 1), default=1)
    d.add_argument("--rmax", type=float, default=5.0)
    d.add_argument("--points", type=int, default=501)

    f = sub.add_parser("formfactor", parents=[common, atom], help="form factor against s")
    f.add_argument("--smax", type=float, default=2.0)
    f.add_argument("--points", type=int, default=201)

    c = sub.add_parser("compare", parents=[common, tol], help="compare a computed CSV with a reference table")
    c.add_argument("--dataset", choices=("table2", "table1"), default="table2")
    c.add_argument("--input", required=True)
    return p


def _spec_from_args(ns: argparse.Namespace) -> RunSpec:
    default_fmt = "json" if ns.command in ("solve", "compare") else "csv"
    tolerances = {}
    for name in ("zstar", "e0", "e2", "excited"):
        v = getattr(ns, f"tol_{name}", None)
        if v is not None:
            tolerances[name] = v
    options = {k: getattr(ns, k) for k in ("strategy", "degenerate", "correlation", "range", "species",
                                           "rmax", "points", "smax", "dataset", "input") if hasattr(ns, k)}
    if getattr(ns, "N", None) is not None and ns.N < 1:
        raise ValueError("--N must be positive")
    return RunSpec(
        command=ns.command,
        Z=getattr(ns, "Z", None),
        N=getattr(ns, "N", None),
        config=getattr(ns, "config", None),
        order=getattr(ns, "order", 0),
        output=ns.output,
        fmt=ns.fmt or default_fmt,
        jobs=max(1, ns.jobs),
        compare=getattr(ns, "compare", False),
        tolerances=tolerances,
        options=options,
    )


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        return run(_spec_from_args(ns))
    except Exception as exc:  # every failure becomes a JSON error record
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc),
                                     "command": ns.command}) + "\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
