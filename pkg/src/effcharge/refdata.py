"""Embedded reference datasets and comparisons against them.

Every dataset is a plain CSV file with a ``# key: value`` header block.  The
directory can be overridden with the ``EFFCHARGE_DATA_DIR`` environment
variable; files shipped with the package are checksummed.
"""

from __future__ import annotations

import csv
import hashlib
import math
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "DATA_ENV",
    "DATASETS",
    "CHECKSUMS",
    "ReferenceParseError",
    "ReferenceRecord",
    "Tolerance",
    "ComparisonEntry",
    "ComparisonReport",
    "data_dir",
    "file_checksum",
    "load_reference",
    "load_density_curve",
    "gaussian_form_factor",
    "compare",
]

DATA_ENV = "EFFCHARGE_DATA_DIR"

DATASETS = {
    "table2": "table2.csv",
    "table1": "table1.csv",
    "gaussian_fit": "gaussian_fit.csv",
    "hf_density_Ne": "hf_density_Ne.csv",
    "hf_density_Ar": "hf_density_Ar.csv",
}

CHECKSUMS = {
    "table2.csv": "63030da7683f10c669e03d2309d9686f8708374c2683f4bd71c63ea5abc5bd03",
    "table1.csv": "837c57184d047ea286997b869507f7e02a59c270a91a0cf2f2353f3580754737",
    "gaussian_fit.csv": "d5be151d4e7855cb55c7493ec4dbf9612b1dbc7eb3b978df097b4385e5bc5514",
    "hf_density_Ne.csv": "17308747e4388f7fc9aa5e6a77d788aa2a717c41d5de41c7afb2437b30a0cdf4",
    "hf_density_Ar.csv": "a4727bfe225750a179f6ad7c859bba76a4a26eb3fcdb58bde805f45f2d473860",
}

_COLUMNS = {
    "table2": ["Z", "Zstar", "E0", "E2_single", "E_HF"],
    "table1": ["species", "E2", "E_var", "E_MCHF", "E_HF"],
    "gaussian_fit": ["symbol", "Z", "a1", "b1", "a2", "b2", "a3", "b3", "a4", "b4", "c"],
}

# (Z, N, state) for the species labels of the small-system table
_TABLE1_KEYS = {
    "H-": (1, 2, "ground"),
    "He": (2, 2, "ground"),
    "Li": (3, 3, "ground"),
    "He 2 3S": (2, 2, "2 3S"),
    "He 2 1S": (2, 2, "2 1S"),
}


class ReferenceParseError(ValueError):
    """Malformed reference file; ``line`` is 1-based (0 when not line-specific)."""

    def __init__(self, path, line: int, message: str):
        self.path = str(path)
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


@dataclass(frozen=True)
class ReferenceRecord:
    """One keyed row of reference numbers.

    Attributes
    ----------
    key : tuple
        ``(Z, N, state)``; fit rows use ``(Z, Z, symbol)``.
    quantities : dict
        Column name to float.
    provenance : str
        One of ``published-table``, ``external-HF``, ``external-fit``.
    source : str
    """

    key: tuple
    quantities: dict
    provenance: str
    source: str


def data_dir() -> Path:
    """Reference-data directory, honouring ``EFFCHARGE_DATA_DIR``."""
    override = os.environ.get(DATA_ENV)
    if override:
        return Path(override)
    return Path(str(resources.files("effcharge") / "data"))


def file_checksum(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _read(dataset: str, verify: bool | None):
    if dataset not in DATASETS:
        raise KeyError(f"unknown dataset {dataset!r}; known: {sorted(DATASETS)}")
    name = DATASETS[dataset]
    path = data_dir() / name
    if not path.is_file():
        raise FileNotFoundError(f"reference file missing: {path}")
    if verify is None:
        verify = DATA_ENV not in os.environ
    if verify and CHECKSUMS.get(name):
        digest = file_checksum(path)
        if digest != CHECKSUMS[name]:
            raise ReferenceParseError(path, 0, f"checksum mismatch ({digest[:12]}...)")
    header: dict[str, str] = {}
    body: list[tuple[int, str]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            if text.startswith("#"):
                key, _, value = text[1:].partition(":")
                header[key.strip()] = value.strip()
            else:
                body.append((lineno, text))
    if not body:
        raise ReferenceParseError(path, 0, "file has no data rows")
    return path, header, body


def _rows(path, body, columns):
    head_line, head = body[0]
    names = next(csv.reader([head]))
    if names != columns:
        raise ReferenceParseError(path, head_line, f"expected columns {columns}, found {names}")
    if len(body) == 1:
        raise ReferenceParseError(path, head_line, "header without data rows")
    for lineno, text in body[1:]:
        cells = next(csv.reader([text]))
        if len(cells) != len(columns):
            raise ReferenceParseError(path, lineno, f"expected {len(columns)} fields, found {len(cells)}")
        yield lineno, cells


def _float(path, lineno, text):
    try:
        value = float(text)
    except ValueError:
        raise ReferenceParseError(path, lineno, f"not a number: {text!r}") from None
    if not math.isfinite(value):
        raise ReferenceParseError(path, lineno, f"non-finite value: {text!r}")
    return value


def load_reference(dataset: str, *, verify: bool | None = None) -> list[ReferenceRecord]:
    """Parse and validate a tabular reference dataset.

    Parameters
    ----------
    dataset : {"table2", "table1", "gaussian_fit"}
    verify : bool, optional
        Check the file checksum.  Defaults to True for the shipped directory
        and False when ``EFFCHARGE_DATA_DIR`` points elsewhere.

    Raises
    ------
    ReferenceParseError
        On malformed rows, duplicate keys or failed table-level validation.

    Examples
    --------
    >>> rec = {r.key[0]: r for r in load_reference("table2")}[26]
    >>> rec.quantities["Zstar"], rec.quantities["E_HF"]
    (20.4882, -1262.44)
    """
    if dataset not in _COLUMNS:
        raise KeyError(f"{dataset!r} is not a tabular dataset; use load_density_curve")
    path, header, body = _read(dataset, verify)
    columns = _COLUMNS[dataset]
    provenance = header.get("provenance", "")
    source = header.get("source", "")
    if not source:
        raise ReferenceParseError(path, 0, "missing source line in header")
    records: list[ReferenceRecord] = []
    seen: dict[tuple, int] = {}
    for lineno, cells in _rows(path, body, columns):
        if dataset == "table1":
            label = cells[0].strip()
            if label not in _TABLE1_KEYS:
                raise ReferenceParseError(path, lineno, f"unknown species {label!r}")
            key = _TABLE1_KEYS[label]
            q = {c: _float(path, lineno, v) for c, v in zip(columns[1:], cells[1:])}
            q["species"] = label
        elif dataset == "gaussian_fit":
            Z = int(_float(path, lineno, cells[1]))
            key = (Z, Z, cells[0].strip())
            q = {c: _float(path, lineno, v) for c, v in zip(columns[2:], cells[2:])}
        else:
            Z = _float(path, lineno, cells[0])
            if Z != int(Z):
                raise ReferenceParseError(path, lineno, f"Z must be an integer, got {cells[0]!r}")
            key = (int(Z), int(Z), "ground")
            q = {c: _float(path, lineno, v) for c, v in zip(columns[1:], cells[1:])}
        if key in seen:
            raise ReferenceParseError(path, lineno, f"duplicate key {key} (first on line {seen[key]})")
        seen[key] = lineno
        records.append(ReferenceRecord(key, q, provenance, source))
    if dataset == "table2":
        _validate_table2(path, records, seen)
    return records


def _validate_table2(path, records, lines):
    zs = [r.key[0] for r in records]
    if zs != list(range(1, 101)):
        raise ReferenceParseError(path, 0, f"expected rows Z = 1..100, found {len(zs)} rows")
    for prev, cur in zip(records, records[1:]):
        if not cur.quantities["E_HF"] < prev.quantities["E_HF"]:
            raise ReferenceParseError(path, lines[cur.key], "E_HF must decrease with Z")


def load_density_curve(symbol: str, *, verify: bool | None = None):
    """Reference radial density ``4 pi r^2 rho(r)``.

    Returns
    -------
    r, density : ndarray
    meta : dict
        Header fields, including the total energy of the reference calculation.
    """
    dataset = f"hf_density_{symbol}"
    path, header, body = _read(dataset, verify)
    r, d = [], []
    for lineno, cells in _rows(path, body, ["r", "radial_density"]):
        r.append(_float(path, lineno, cells[0]))
        d.append(_float(path, lineno, cells[1]))
    return np.asarray(r), np.asarray(d), header


def gaussian_form_factor(symbol: str, s) -> np.ndarray | float:
    """Evaluate the reference Gaussian fit at ``s = sin(theta)/lambda`` (1/angstrom)."""
    rows = {r.key[2]: r.quantities for r in load_reference("gaussian_fit")}
    if symbol not in rows:
        raise KeyError(f"no Gaussian fit for {symbol!r}")
    p = rows[symbol]
    s2 = np.asarray(s, dtype=float) ** 2
    out = p["c"] + sum(p[f"a{i}"] * np.exp(-p[f"b{i}"] * s2) for i in range(1, 5))
    return float(out) if np.ndim(out) == 0 else out


# --------------------------------------------------------------------------
# Comparison
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Tolerance:
    """Pass when either bound holds; a bound left as None is not used."""

    abs: float | None = None
    rel: float | None = None

    def accepts(self, computed: float, reference: float) -> bool:
        d = abs(computed - reference)
        ok_abs = self.abs is not None and d <= self.abs
        ok_rel = self.rel is not None and reference != 0 and d <= self.rel * abs(reference)
        if self.abs is None and self.rel is None:
            return d == 0
        return ok_abs or ok_rel


@dataclass(frozen=True)
class ComparisonEntry:
    key: tuple
    quantity: str
    computed: float
    reference: float
    passed: bool

    @property
    def abs_delta(self) -> float:
        return self.computed - self.reference

    @property
    def rel_delta(self) -> float:
        return self.computed / self.reference - 1.0 if self.reference else math.inf


@dataclass
class ComparisonReport:
    entries: list[ComparisonEntry] = field(default_factory=list)
    uncovered: list[tuple] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def failures(self) -> list[ComparisonEntry]:
        return [e for e in self.entries if not e.passed]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "n_compared": len(self.entries),
            "n_failed": len(self.failures),
            "uncovered": [list(k) for k in self.uncovered],
            "entries": [
                {
                    "key": list(e.key),
                    "quantity": e.quantity,
                    "computed": e.computed,
                    "reference": e.reference,
                    "abs_delta": e.abs_delta,
                    "rel_delta": e.rel_delta if math.isfinite(e.rel_delta) else None,
                    "passed": e.passed,
                }
                for e in self.entries
            ],
        }


def _key_order(key: tuple) -> tuple:
    # numbers sort numerically, labels by text
    return tuple((1, x) if isinstance(x, str) else (0, x) for x in key)


def compare(
    computed: Mapping[tuple, Mapping[str, float]],
    reference: Iterable[ReferenceRecord],
    tolerances: Mapping[str, Tolerance],
) -> ComparisonReport:
    """Compare computed quantities against reference records.

    Only quantities named in ``tolerances`` are compared.  Computed keys with
    no reference row, and reference rows never computed, are listed as
    uncovered rather than failed.

    Examples
    --------
    >>> recs = load_reference("table2")[:1]
    >>> compare({(1, 1, "ground"): {"E0": -0.5}}, recs, {"E0": Tolerance(rel=1e-4)}).passed
    True
    """
    ref = {r.key: r for r in reference}
    report = ComparisonReport()
    for key in sorted(set(computed) | set(ref), key=_key_order):
        if key not in computed or key not in ref:
            report.uncovered.append(key)
            continue
        for qty, tol in tolerances.items():
            if qty not in computed[key] or qty not in ref[key].quantities:
                continue
            c = float(computed[key][qty])
            r = float(ref[key].quantities[qty])
            report.entries.append(ComparisonEntry(key, qty, c, r, tol.accepts(c, r)))
    return report
