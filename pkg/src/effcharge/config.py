"""Electron configurations: Aufbau order, candidate occupations, text format."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

__all__ = [
    "Orbital",
    "Configuration",
    "aufbau_shell_order",
    "subshell_label",
    "parse_occupation",
    "reference_occupation",
    "frontier_shells",
    "select_ground_configuration",
    "lowest_assignment",
    "configuration_from_string",
    "madelung_occupation",
    "candidate_occupations",
    "candidate_configurations",
]

L_LETTERS = "spdfghik"
HALF = Fraction(1, 2)


@dataclass(frozen=True, order=True)
class Orbital:
    """Hydrogen-like spin-orbital ``(n, l, m, m_s)``; ``ms`` is +-1/2."""

    n: int
    l: int
    m: int
    ms: Fraction = HALF

    def __post_init__(self):
        if not (0 <= self.l < self.n) or abs(self.m) > self.l:
            raise ValueError(f"invalid orbital quantum numbers {self}")
        if self.ms not in (HALF, -HALF):
            object.__setattr__(self, "ms", Fraction(self.ms))
            if self.ms not in (HALF, -HALF):
                raise ValueError("ms must be +1/2 or -1/2")

    @property
    def shell(self) -> tuple[int, int]:
        return (self.n, self.l)

    @property
    def spin_up(self) -> bool:
        return self.ms > 0

    def __str__(self) -> str:
        arrow = "+" if self.ms > 0 else "-"
        return f"{subshell_label(self.n, self.l)}[{self.m:+d}]{arrow}"


def subshell_label(n: int, l: int) -> str:
    return f"{n}{L_LETTERS[l]}"


def aufbau_shell_order(max_n: int = 8) -> list[tuple[int, int]]:
    """Subshells ``(n, l)`` sorted by ``n + l`` and then ``n`` (Madelung rule)."""
    shells = [(n, l) for n in range(1, max_n + 1) for l in range(n)]
    return sorted(shells, key=lambda s: (s[0] + s[1], s[0]))


def _shell_orbitals(n: int, l: int) -> list[Orbital]:
    """Spin-orbitals of a subshell in canonical order (spin up first, m descending)."""
    return [Orbital(n, l, m, s) for s in (HALF, -HALF) for m in range(l, -l - 1, -1)]


@dataclass(frozen=True)
class Configuration:
    """A Slater determinant of hydrogen-like spin-orbitals for nuclear charge ``Z``."""

    Z: int
    orbitals: tuple[Orbital, ...]
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.Z < 1:
            raise ValueError("nuclear charge must be a positive integer")
        if len(set(self.orbitals)) != len(self.orbitals):
            raise ValueError("duplicate spin-orbital violates the Pauli principle")
        object.__setattr__(self, "orbitals", tuple(sorted(self.orbitals)))

    @property
    def N(self) -> int:
        return len(self.orbitals)

    def shell_counts(self) -> dict[tuple[int, int], int]:
        counts: dict[tuple[int, int], int] = {}
        for o in self.orbitals:
            counts[o.shell] = counts.get(o.shell, 0) + 1
        return counts

    def open_shells(self) -> list[tuple[int, int]]:
        return [s for s, c in self.shell_counts().items() if c < 2 * (2 * s[1] + 1)]

    @property
    def total_ms(self) -> Fraction:
        return sum((o.ms for o in self.orbitals), Fraction(0))

    def is_spherical(self) -> bool:
        """True when every open subshell has a spherically symmetric density."""
        by_shell: dict[tuple[int, int], list[Orbital]] = {}
        for o in self.orbitals:
            by_shell.setdefault(o.shell, []).append(o)
        for (n, l), orbs in by_shell.items():
            per_m = {m: 0 for m in range(-l, l + 1)}
            for o in orbs:
                per_m[o.m] += 1
            if len(set(per_m.values())) > 1:
                return False
        return True

    def to_string(self) -> str:
        """Spectroscopic occupation string, e.g. ``"1s2 2s2 2p6 3s1"``."""
        counts = self.shell_counts()
        order = sorted(counts, key=lambda s: (s[0], s[1]))
        return " ".join(f"{subshell_label(*s)}{counts[s]}" for s in order)

    def __str__(self) -> str:
        return self.to_string()


_TOKEN = re.compile(r"^(\d+)([spdfghik])(\d+)$")
_NOBLE = {"He": 2, "Ne": 10, "Ar": 18, "Kr": 36, "Xe": 54, "Rn": 86}


def parse_occupation(text: str) -> dict[tuple[int, int], int]:
    """Parse ``"[Ar] 4s1"`` or ``"1s2 2s2 2p6"`` into subshell counts."""
    counts: dict[tuple[int, int], int] = {}
    text = text.strip()
    m = re.match(r"^\[(\w+)\]\s*", text)
    if m:
        core = _NOBLE.get(m.group(1))
        if core is None:
            raise ValueError(f"unknown core symbol [{m.group(1)}]")
        counts.update(madelung_occupation(core))
        text = text[m.end():]
    for tok in text.replace(",", " ").split():
        t = _TOKEN.match(tok)
        if not t:
            raise ValueError(f"cannot parse configuration token {tok!r}")
        n, l, k = int(t.group(1)), L_LETTERS.index(t.group(2)), int(t.group(3))
        if l >= n or k > 2 * (2 * l + 1) or k < 0:
            raise ValueError(f"invalid subshell occupation {tok!r}")
        counts[(n, l)] = counts.get((n, l), 0) + k
        if counts[(n, l)] > 2 * (2 * l + 1):
            raise ValueError(f"subshell {tok!r} over-filled")
    return {s: c for s, c in counts.items() if c}


def madelung_occupation(N: int) -> dict[tuple[int, int], int]:
    """Subshell counts obtained by filling ``N`` electrons in Aufbau order."""
    if N < 1:
        raise ValueError("electron count must be positive")
    counts: dict[tuple[int, int], int] = {}
    left = N
    for n, l in aufbau_shell_order():
        if left == 0:
            break
        k = min(left, 2 * (2 * l + 1))
        counts[(n, l)] = k
        left -= k
    if left:
        raise ValueError(f"N={N} exceeds the capacity of enumerated shells")
    return counts


def frontier_shells(counts: dict[tuple[int, int], int]) -> list[tuple[int, int]]:
    """Subshells near the Fermi level between which electrons may move.

    With ``n`` the outermost occupied s shell these are ``ns``, ``np``,
    ``(n-1)d`` and ``(n-2)f`` (when they exist).
    """
    ns = max(n for (n, l), c in counts.items() if l == 0 and c)
    shells = [(ns, 0), (ns, 1), (ns - 1, 2), (ns - 2, 3)]
    return [(n, l) for n, l in shells if 0 <= l < n]


def candidate_occupations(
    N: int, window: int = 1, base: dict[tuple[int, int], int] | None = None
) -> list[dict[tuple[int, int], int]]:
    """Base filling plus fillings with up to ``window`` electrons moved.

    Parameters
    ----------
    N : int
        Electron count.
    window : int, default 1
        Maximum number of single-electron moves between frontier subshells.
    base : dict, optional
        Starting subshell counts; the reference ground occupation of the
        isoelectronic neutral atom by default.

    Returns
    -------
    list of dict
        Distinct occupations, the base first.
    """
    if window < 0:
        raise ValueError("window must be non-negative")
    if base is None:
        base = reference_occupation(N)
    if sum(base.values()) != N:
        raise ValueError("base occupation does not hold N electrons")
    shells = frontier_shells(base)
    seen = {tuple(sorted(base.items()))}
    result = [dict(base)]
    layer = [dict(base)]
    for _ in range(window):
        nxt = []
        for occ in layer:
            for src, dst in itertools.permutations(shells, 2):
                if occ.get(src, 0) == 0 or occ.get(dst, 0) >= 2 * (2 * dst[1] + 1):
                    continue
                new = dict(occ)
                new[src] -= 1
                new[dst] = new.get(dst, 0) + 1
                new = {s: c for s, c in new.items() if c}
                key = tuple(sorted(new.items()))
                if key not in seen:
                    seen.add(key)
                    result.append(new)
                    nxt.append(new)
        layer = nxt
    return result


# Neutral-atom ground occupations that differ from the Madelung filling.
_ANOMALOUS = {
    24: "[Ar] 3d5 4s1",
    29: "[Ar] 3d10 4s1",
    41: "[Kr] 4d4 5s1",
    42: "[Kr] 4d5 5s1",
    44: "[Kr] 4d7 5s1",
    45: "[Kr] 4d8 5s1",
    46: "[Kr] 4d10",
    47: "[Kr] 4d10 5s1",
    57: "[Xe] 5d1 6s2",
    58: "[Xe] 4f1 5d1 6s2",
    64: "[Xe] 4f7 5d1 6s2",
    78: "[Xe] 4f14 5d9 6s1",
    79: "[Xe] 4f14 5d10 6s1",
    89: "[Rn] 6d1 7s2",
    90: "[Rn] 6d2 7s2",
    91: "[Rn] 5f2 6d1 7s2",
    92: "[Rn] 5f3 6d1 7s2",
    93: "[Rn] 5f4 6d1 7s2",
    96: "[Rn] 5f7 6d1 7s2",
    97: "[Rn] 5f8 6d1 7s2",
}


def reference_occupation(N: int) -> dict[tuple[int, int], int]:
    """Observed ground occupation of the neutral atom with ``N`` electrons."""
    if N in _ANOMALOUS:
        return parse_occupation(_ANOMALOUS[N])
    return madelung_occupation(N)


def shell_assignments(n: int, l: int, count: int) -> Iterator[tuple[Orbital, ...]]:
    """All distinct ``(m, ms)`` fillings of ``count`` electrons in subshell ``nl``."""
    return itertools.combinations(_shell_orbitals(n, l), count)


def closed_orbitals(counts: dict[tuple[int, int], int]) -> list[Orbital]:
    out = []
    for (n, l), c in counts.items():
        if c == 2 * (2 * l + 1):
            out.extend(_shell_orbitals(n, l))
    return out


def configurations_for(Z: int, counts: dict[tuple[int, int], int]) -> Iterator[Configuration]:
    """Every determinant with the given subshell counts."""
    core = closed_orbitals(counts)
    open_ = [(s, c) for s, c in sorted(counts.items()) if c < 2 * (2 * s[1] + 1)]
    choices = [list(shell_assignments(n, l, c)) for (n, l), c in open_]
    for combo in itertools.product(*choices):
        orbs = list(core)
        for part in combo:
            orbs.extend(part)
        yield Configuration(Z, tuple(orbs))


def candidate_configurations(Z: int, N: int, window: int = 1) -> list[Configuration]:
    """All determinants for every candidate subshell occupation."""
    out: list[Configuration] = []
    for counts in candidate_occupations(N, window):
        out.extend(configurations_for(Z, counts))
    return out




STRATEGIES = ("reference", "minimize", "madelung")


def _assignment_table(counts):
    """Open-shell spin-orbitals and the index sets of every assignment."""
    opens = [(s, c) for s, c in sorted(counts.items()) if c < 2 * (2 * s[1] + 1)]
    orbs: list[Orbital] = []
    blocks = []
    for (n, l), c in opens:
        start = len(orbs)
        orbs.extend(_shell_orbitals(n, l))
        blocks.append(list(itertools.combinations(range(start, len(orbs)), c)))
    rows = [sum(p, ()) for p in itertools.product(*blocks)] if opens else [()]
    return orbs, rows


def lowest_assignment(Z: int, counts: dict[tuple[int, int], int]):
    """Minimal-energy ``(m, ms)`` assignment for fixed subshell counts.

    Every assignment of the open subshells is screened in floating point with
    ``B = B_core + X v + diag(X W X^T)``, where ``X`` is the 0/1 occupation
    matrix; the near-minimal ones are then re-evaluated exactly.

    Returns
    -------
    (Configuration, ZerothOrderSolution)
    """
    import numpy as np

    from .scf0 import pair_interaction, shell_interaction, solve_zeroth_order

    core = closed_orbitals(counts)
    orbs, rows = _assignment_table(counts)
    if not orbs:
        cfg = Configuration(Z, tuple(core))
        return cfg, solve_zeroth_order(cfg)

    A = float(sum(Fraction(c, 2 * n * n) for (n, _), c in counts.items()))
    closed = [s for s, c in counts.items() if c == 2 * (2 * s[1] + 1)]
    v_exact = [2 * sum((sum(shell_interaction(a, s)) for s in closed), Fraction(0)) for a in orbs]
    W_exact = [[pair_interaction(a, b) for b in orbs] for a in orbs]
    v = np.array([float(x) for x in v_exact])
    W = np.array([[float(x) for x in row] for row in W_exact])
    idx = np.array(rows, dtype=np.intp)
    X = np.zeros((len(rows), len(orbs)))
    np.put_along_axis(X, idx, 1.0, axis=1)
    B = X @ v + np.einsum("ij,jk,ik->i", X, W, X)
    zs = Z - B / (2.0 * A)
    E = -A * zs * zs
    near = np.flatnonzero(E <= E.min() + 1e-9 * max(1.0, abs(E.min())))

    def exact_open_B(row):
        b = sum((v_exact[i] for i in row), Fraction(0))
        return b + sum((W_exact[i][k] for i in row for k in row), Fraction(0))

    def tie_key(row):
        cfg_orbs = tuple(sorted(core + [orbs[i] for i in row]))
        ms = sum((o.ms for o in cfg_orbs), Fraction(0))
        return (-abs(ms), cfg_orbs)

    # equal A and Z: minimal E0 is minimal B whenever Zs > 0
    sign = 1 if zs[near].min() > 0 else -1
    ranked = sorted((rows[k] for k in near), key=tie_key)[:512]
    row = min(ranked, key=lambda r: sign * exact_open_B(r))
    cfg = Configuration(Z, tuple(core) + tuple(orbs[i] for i in row))
    return cfg, solve_zeroth_order(cfg)


def select_ground_configuration(
    Z: int, N: int | None = None, window: int = 1, strategy: str = "reference"
):
    """Ground-state determinant and its zeroth-order solution.

    Parameters
    ----------
    Z : int
        Nuclear charge.
    N : int, optional
        Electron count, ``Z`` by default.
    window : int, default 1
        Number of frontier moves explored by the ``"minimize"`` strategy.
    strategy : {"reference", "minimize", "madelung"}
        ``"reference"`` uses the observed ground occupation of the
        isoelectronic neutral atom, ``"madelung"`` the Aufbau filling, and
        ``"minimize"`` the lowest ``E0`` among :func:`candidate_occupations`.
        The open-shell ``(m, ms)`` assignment always minimises ``E0``.

    Returns
    -------
    (Configuration, ZerothOrderSolution)

    Notes
    -----
    Ties in ``E0`` are broken by the largest ``|sum ms|`` and then by the
    lexicographically smallest sorted orbital tuple.
    """
    N = Z if N is None else N
    if N < 1:
        raise ValueError("electron count must be positive")
    if strategy == "reference":
        return lowest_assignment(Z, reference_occupation(N))
    if strategy == "madelung":
        return lowest_assignment(Z, madelung_occupation(N))
    if strategy != "minimize":
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    best = None
    for counts in candidate_occupations(N, window):
        cfg, sol = lowest_assignment(Z, counts)
        key = (sol.E0_exact, -abs(cfg.total_ms), cfg.orbitals)
        if best is None or key < best[0]:
            best = (key, cfg, sol)
    return best[1], best[2]


def configuration_from_string(Z: int, text: str):
    """Lowest-energy determinant for a spectroscopic occupation string."""
    return lowest_assignment(Z, parse_occupation(text))
