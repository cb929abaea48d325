"""Case analysis for three-interval restricted exponential systems.

Take intervals I_1, I_2, I_3 partitioning [0, 1), frequency sets Lambda_k
with ``E(I_k, Lambda_k)`` a Riesz basis of ``L^2(I_k)``, and supports
``S_k = union_{l in L_k} I_l`` with ``k in L_k``. The union of
``E(S_k, Lambda_k)`` is then a Riesz basis of ``L^2[0, 1)``. The argument
sorts the 64 admissible memberships into three situations:

* (i)   some ``L_k = {k}``;
* (ii)  some index k appears in no other ``L_l``;
* (*)   the complements of the ``L_k`` are pairwise disjoint, handled by
        a Paley-Wiener perturbation with constant ``sqrt(1 - min alpha_k)``.

This module tags memberships, builds the full case table and checks grid
instances numerically through the masked-matrix classification.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidBound, InvalidConfiguration
from .grid import CosetSystem, GridSupport
from .masked import Classification, build_masked_matrix, classify_system

INDICES = (1, 2, 3)
CASE_I, CASE_II, CASE_STAR = "case_i", "case_ii", "case_star"

# per-index option lists in table order; group g of the table fixes L_3
_L1_OPTIONS = ({1}, {1, 2}, {1, 3}, {1, 2, 3})
_L2_OPTIONS = ({2}, {1, 2}, {2, 3}, {1, 2, 3})
_L3_OPTIONS = ({3}, {1, 3}, {2, 3}, {1, 2, 3})


def _as_membership(membership) -> tuple:
    return tuple(frozenset(int(v) for v in lk) for lk in membership)


@dataclass(frozen=True)
class TripleConfig:
    """Memberships ``L_1, L_2, L_3`` (1-based), optional lower bounds and empty intervals.

    Indices listed in ``empty`` refer to intervals of length zero. They are
    removed from every membership before the case analysis.
    """

    membership: tuple
    alphas: Optional[tuple] = None
    empty: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        mem = _as_membership(self.membership)
        if len(mem) != 3:
            raise InvalidConfiguration(f"need exactly three memberships, got {len(mem)}")
        empty = frozenset(int(e) for e in self.empty)
        if not empty <= set(INDICES) or len(empty) == 3:
            raise InvalidConfiguration(f"empty intervals {sorted(empty)} invalid; at least one interval must remain")
        for k, lk in zip(INDICES, mem):
            if not lk <= set(INDICES):
                raise InvalidConfiguration(f"L_{k} = {sorted(lk)} is not a subset of {{1,2,3}}")
            if k not in empty and k not in lk:
                raise InvalidConfiguration(f"L_{k} = {sorted(lk)} must contain {k}")
        object.__setattr__(self, "membership", mem)
        object.__setattr__(self, "empty", empty)
        if self.alphas is not None:
            object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
            if len(self.alphas) != 3:
                raise InvalidBound("need three lower bounds")
            _check_alphas(self.alphas)

    @property
    def active(self) -> tuple:
        return tuple(k for k in INDICES if k not in self.empty)

    def reduced(self) -> dict:
        """Memberships restricted to the nonempty intervals, keyed by index."""
        act = set(self.active)
        return {k: self.membership[k - 1] & act for k in self.active}


@dataclass(frozen=True)
class CaseTag:
    tag: str
    k: Optional[int]
    proof_branch: str

    def label(self) -> str:
        return f"{self.tag}({self.k})" if self.k is not None else self.tag


def _cond_i(mem: dict, k: int) -> bool:
    return mem[k] == {k}


def _cond_ii(mem: dict, k: int) -> bool:
    return all(k not in lk for l, lk in mem.items() if l != k)


def _cond_star(mem: dict) -> bool:
    universe = set(mem)
    comps = [universe - lk for lk in mem.values()]
    return all(not (a & b) for a, b in itertools.combinations(comps, 2))


def tag_holds(tag: CaseTag, mem: dict) -> bool:
    """Check a tag's defining condition literally against a membership dict."""
    if tag.tag == CASE_I:
        return _cond_i(mem, tag.k)
    if tag.tag == CASE_II:
        return _cond_ii(mem, tag.k)
    return _cond_star(mem)


def branch_id(membership) -> str:
    """Position of a full (no empty interval) membership in the 64-entry table.

    Groups 1-4 fix ``L_3`` as {3}, {1,3}, {2,3}, {1,2,3}; within a group the
    ``L_1`` option is the outer loop and the ``L_2`` option the inner one.
    """
    mem = _as_membership(membership)
    g = _L3_OPTIONS.index(set(mem[2])) + 1
    i1 = _L1_OPTIONS.index(set(mem[0]))
    i2 = _L2_OPTIONS.index(set(mem[1]))
    return f"{g}-{4 * i1 + i2 + 1}"


def _reduced_branch(active: tuple, mem: dict) -> str:
    if len(active) == 1:
        return "one"
    a, b = active
    full = {a, b}
    return f"two-{1 + int(mem[b] == full) + 2 * int(mem[a] == full)}"


def classify_triple(cfg: TripleConfig) -> CaseTag:
    """Tag a membership with the first matching case, in the order (i), (ii), (*).

    Within a case the smallest index k is reported.
    """
    mem = cfg.reduced()
    active = cfg.active
    branch = branch_id(cfg.membership) if len(active) == 3 else _reduced_branch(active, mem)
    for k in active:
        if _cond_i(mem, k):
            return CaseTag(CASE_I, k, branch)
    for k in active:
        if _cond_ii(mem, k):
            return CaseTag(CASE_II, k, branch)
    if _cond_star(mem):
        return CaseTag(CASE_STAR, None, branch)
    raise InvalidConfiguration(f"membership {[sorted(m) for m in cfg.membership]} matches no case")


def admissible_memberships() -> list[tuple]:
    """All 64 memberships in table order (group, then L_1, then L_2)."""
    out = []
    for l3 in _L3_OPTIONS:
        for l1 in _L1_OPTIONS:
            for l2 in _L2_OPTIONS:
                out.append((frozenset(l1), frozenset(l2), frozenset(l3)))
    return out


@dataclass(frozen=True)
class CaseRow:
    branch: str
    membership: tuple
    tag: CaseTag


def case_table() -> list[CaseRow]:
    rows = []
    for mem in admissible_memberships():
        tag = classify_triple(TripleConfig(mem))
        rows.append(CaseRow(tag.proof_branch, mem, tag))
    return rows


def _fmt_set(s) -> str:
    return "{" + ",".join(str(v) for v in sorted(s)) + "}"


def case_table_csv(rows: Optional[Sequence[CaseRow]] = None) -> str:
    rows = case_table() if rows is None else rows
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["branch", "L1", "L2", "L3", "case"])
    for r in rows:
        w.writerow([r.branch, *(_fmt_set(m) for m in r.membership), r.tag.label()])
    return buf.getvalue()


def case_table_text(rows: Optional[Sequence[CaseRow]] = None) -> str:
    rows = case_table() if rows is None else rows
    lines = [f"{'branch':<7} {'L1':<8} {'L2':<8} {'L3':<8} case"]
    for r in rows:
        l1, l2, l3 = (_fmt_set(m) for m in r.membership)
        lines.append(f"{r.branch:<7} {l1:<8} {l2:<8} {l3:<8} {r.tag.label()}")
    return "\n".join(lines) + "\n"


def _check_alphas(alphas) -> None:
    for a in alphas:
        if not (isinstance(a, (int, float)) and math.isfinite(a) and 0 < a <= 1):
            raise InvalidBound(f"lower Riesz bounds must lie in (0, 1], got {a!r}")


def paley_wiener_lambda(alphas: Sequence[float]) -> float:
    alphas = tuple(float(a) for a in alphas)
    if len(alphas) != 3:
        raise InvalidBound(f"need three lower bounds, got {len(alphas)}")
    _check_alphas(alphas)
    return math.sqrt(1.0 - min(alphas))


# ---------------------------------------------------------------------------
# periodic grid instances


def _check_partition(n: int, intervals, freqs, membership):
    if not isinstance(n, int) or n < 1:
        raise InvalidConfiguration("N must be a positive integer")
    if not (len(intervals) == len(freqs) == len(membership)) or not intervals:
        raise InvalidConfiguration("intervals, frequency sets and memberships must have equal nonzero length")
    cells = []
    for iv in intervals:
        s = iv if isinstance(iv, GridSupport) else GridSupport(n, frozenset(iv))
        if s.modulus != n:
            raise InvalidConfiguration(f"interval lives on Z_{s.modulus}, expected Z_{n}")
        cells.append(s.cells)
    flat = [c for s in cells for c in s]
    if sorted(flat) != list(range(n)):
        raise InvalidConfiguration("intervals must partition Z_N")
    offs = []
    for f in freqs:
        cs = f if isinstance(f, CosetSystem) else CosetSystem(n, tuple(f))
        if cs.modulus != n:
            raise InvalidConfiguration(f"frequency set lives on Z_{cs.modulus}, expected Z_{n}")
        offs.append(cs.offsets)
    if sorted(c for o in offs for c in o) != list(range(n)):
        raise InvalidConfiguration("frequency offsets must partition the residues 0..N-1")
    for k, (s, o) in enumerate(zip(cells, offs), start=1):
        if len(s) != len(o):
            raise InvalidConfiguration(f"interval {k} has {len(s)} cells but {len(o)} cosets")
    mem = _as_membership(membership)
    m = len(intervals)
    for k, lk in enumerate(mem, start=1):
        if not lk <= set(range(1, m + 1)):
            raise InvalidConfiguration(f"L_{k} = {sorted(lk)} refers to unknown intervals")
        if cells[k - 1] and k not in lk:
            raise InvalidConfiguration(f"L_{k} = {sorted(lk)} must contain {k}")
    return cells, offs, mem


def induced_system(n: int, intervals, freqs, membership):
    """Masked matrix with one row per coset offset and mask = cells of ``S_k``."""
    cells, offs, mem = _check_partition(n, intervals, freqs, membership)
    row_offsets, row_masks = [], []
    for k, o in enumerate(offs):
        if not cells[k]:
            continue  # empty interval, empty frequency set
        support = frozenset().union(*(cells[l - 1] for l in mem[k]))
        for c in o:
            row_offsets.append(c)
            row_masks.append(support)
    return build_masked_matrix(n, row_offsets, row_masks)


def cross_check_periodic(n: int, intervals, freqs, membership) -> Classification:
    return classify_system(induced_system(n, intervals, freqs, membership))


def periodic_alphas(n: int, intervals, freqs) -> tuple:
    """Lower Riesz bound of each ``E(I_k, Lambda_k)`` in ``L^2(I_k)``: ``sigma_min**2 / N``."""
    trivial = [frozenset({k}) for k in range(1, len(intervals) + 1)]
    cells, offs, _ = _check_partition(n, intervals, freqs, trivial)
    out = []
    for s, o in zip(cells, offs):
        if not s:
            out.append(None)
            continue
        m = build_masked_matrix(n, o, [s] * len(o))
        out.append(classify_system(m).lower_bound or 0.0)
    return tuple(out)


def canonical_instance(n: int = 3) -> tuple:
    """``I_k`` = cell k-1 and ``Lambda_k = N Z + (k-1)`` for k = 1..N."""
    intervals = [GridSupport(n, frozenset({k})) for k in range(n)]
    freqs = [CosetSystem(n, (k,)) for k in range(n)]
    return intervals, freqs


def sweep_canonical(n: int = 3) -> list[tuple]:
    """Classify the canonical instance for every admissible membership."""
    if n != 3:
        raise InvalidConfiguration("the admissible-membership sweep is defined for three intervals")
    intervals, freqs = canonical_instance(n)
    return [(mem, cross_check_periodic(n, intervals, freqs, mem)) for mem in admissible_memberships()]


def relabel(membership, sigma: dict) -> tuple:
    """Apply a relabeling ``sigma`` of {1,2,3} to indices and memberships."""
    mem = _as_membership(membership)
    out = [None] * 3
    for k, lk in zip(INDICES, mem):
        out[sigma[k] - 1] = frozenset(sigma[v] for v in lk)
    return tuple(out)


def alpha_grid(step: float = 0.01) -> np.ndarray:
    return np.round(np.arange(step, 1 + step / 2, step), 12)
