"""Permutation search for nonvanishing masked determinants and the basis constructions built on it.

For a square A and a 0/1 mask M with R all-ones generalized diagonals,
summing ``sgn(rho) det((P_rho A) ⊙ M)`` over all row permutations gives
``R det(A)``. Hence some rho reaches ``|det((P_rho A) ⊙ M)| >= R |det A| / K!``.
That rho is what makes the grid constructions work: rows of a Fourier
submatrix are matched to supports so that the masked matrix stays invertible.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import linalg
from .errors import InternalError, InvalidConfiguration, InvalidInput, ShapeError, SizeLimit
from .grid import CosetSystem, GridSupport, normalize_supports
from .masked import build_masked_matrix, classify_system

EXHAUSTIVE_MAX_K = 10
FIRST_FEASIBLE_MAX_K = 12
_CHUNK = 4096


def permutation_sign(perm: Sequence[int]) -> int:
    perm = list(perm)
    seen = [False] * len(perm)
    sign = 1
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


@dataclass(frozen=True)
class PermutationAssignment:
    """Bijection ``k -> map[k]`` on {0, ..., K-1}."""

    map: tuple

    def __post_init__(self):
        m = tuple(int(v) for v in self.map)
        if sorted(m) != list(range(len(m))):
            raise InvalidInput(f"not a permutation of 0..{len(m) - 1}: {m}")
        object.__setattr__(self, "map", m)

    @classmethod
    def from_one_based(cls, values: Sequence[int]) -> "PermutationAssignment":
        return cls(tuple(v - 1 for v in values))

    @classmethod
    def identity(cls, k: int) -> "PermutationAssignment":
        return cls(tuple(range(k)))

    @property
    def size(self) -> int:
        return len(self.map)

    @property
    def sign(self) -> int:
        return permutation_sign(self.map)

    def one_based(self) -> tuple:
        return tuple(v + 1 for v in self.map)

    def rank(self) -> int:
        return permutation_rank(self.map)

    def matrix(self) -> np.ndarray:
        p = np.zeros((self.size, self.size), dtype=int)
        p[np.arange(self.size), self.map] = 1
        return p


def permutation_rank(perm: Sequence[int]) -> int:
    """Lexicographic rank among all permutations of the same size."""
    perm = list(perm)
    rank = 0
    remaining = sorted(perm)
    for i, v in enumerate(perm):
        pos = remaining.index(v)
        rank += pos * math.factorial(len(perm) - 1 - i)
        remaining.pop(pos)
    return rank


def permutation_unrank(k: int, rank: int) -> tuple:
    items = list(range(k))
    out = []
    for i in range(k, 0, -1):
        f = math.factorial(i - 1)
        pos, rank = divmod(rank, f)
        out.append(items.pop(pos))
    return tuple(out)


def iter_permutation_chunks(k: int, start: int = 0, stop: Optional[int] = None, chunk: int = _CHUNK):
    """Yield ``(first_rank, perms)`` blocks in lexicographic order."""
    stop = math.factorial(k) if stop is None else stop
    it = itertools.islice(itertools.permutations(range(k)), start, stop)
    rank = start
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            return
        yield rank, np.array(block, dtype=np.int64)
        rank += len(block)


def masked_dets(a: np.ndarray, mask: np.ndarray, perms: np.ndarray) -> np.ndarray:
    """``det((P_rho A) ⊙ M)`` for each row of ``perms``."""
    return np.linalg.det(a[perms] * mask)


@dataclass(frozen=True)
class LemmaResult:
    rho: PermutationAssignment
    det_modulus: float
    guarantee: float
    R: int


def _check_pair(a, m):
    a = linalg.as_complex_matrix(a)
    mask = m.bits if isinstance(m, linalg.BinaryMask) else np.asarray(m)
    if a.shape[0] != a.shape[1] or mask.shape != a.shape:
        raise ShapeError(f"A {a.shape} and M {mask.shape} must be square and of equal size")
    return a, linalg.BinaryMask(mask)


def _best_in_range(a, mask_f, start, stop):
    best_rank, best_val = -1, -1.0
    for rank0, perms in iter_permutation_chunks(a.shape[0], start, stop):
        vals = np.abs(masked_dets(a, mask_f, perms))
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_rank, best_val = rank0 + i, float(vals[i])
    return best_rank, best_val


def _best_in_range_task(args):
    return _best_in_range(*args)


def lemma_search(a, m, mode: str = "exhaustive", workers: int = 1) -> LemmaResult:
    """Find a row permutation with a large masked determinant.

    ``exhaustive`` returns a maximiser of ``|det((P_rho A) ⊙ M)|`` (ties go to
    the lexicographically smallest rho); ``first_feasible`` returns the first
    rho in lexicographic order that meets ``R |det A| / K!``.
    """
    a, bm = _check_pair(a, m)
    k = a.shape[0]
    r = bm.R()
    guarantee = r * abs(linalg.det(a)) / math.factorial(k)
    mask_f = bm.bits.astype(float)

    if mode == "exhaustive":
        if k > EXHAUSTIVE_MAX_K:
            raise SizeLimit(f"exhaustive search limited to K <= {EXHAUSTIVE_MAX_K}")
        total = math.factorial(k)
        if workers > 1 and total > _CHUNK:
            from .parallel import run_tasks

            step = -(-total // workers)
            bounds = [(s, min(s + step, total)) for s in range(0, total, step)]
            parts = run_tasks(_best_in_range_task, [(a, mask_f, s, e) for s, e in bounds], workers)
        else:
            parts = [_best_in_range(a, mask_f, 0, total)]
        best_rank, best_val = -1, -1.0
        for rank, val in parts:  # parts are in rank order; strict > keeps the smallest rank
            if val > best_val:
                best_rank, best_val = rank, val
        return LemmaResult(PermutationAssignment(permutation_unrank(k, best_rank)), best_val, guarantee, r)

    if mode == "first_feasible":
        if k > FIRST_FEASIBLE_MAX_K:
            raise SizeLimit(f"first_feasible search limited to K <= {FIRST_FEASIBLE_MAX_K}")
        threshold = guarantee * (1 - 1e-9)
        for rank0, perms in iter_permutation_chunks(k):
            vals = np.abs(masked_dets(a, mask_f, perms))
            hits = np.flatnonzero(vals >= threshold)
            if hits.size:
                i = int(hits[0])
                return LemmaResult(PermutationAssignment(tuple(perms[i])), float(vals[i]), guarantee, r)
        raise InternalError("no permutation met the averaging guarantee")

    raise InvalidInput(f"unknown search mode {mode!r}")


def averaging_sum(a, m) -> complex:
    """``sum_rho sgn(rho) det((P_rho A) ⊙ M)`` over all of S_K."""
    a, bm = _check_pair(a, m)
    k = a.shape[0]
    mask_f = bm.bits.astype(float)
    total = 0j
    for _, perms in iter_permutation_chunks(k):
        signs = np.array([permutation_sign(p) for p in perms])
        total += complex(np.sum(signs * masked_dets(a, mask_f, perms)))
    return total


# ---------------------------------------------------------------------------
# grid constructions


@dataclass(frozen=True, eq=False)
class Construction:
    """Outcome of a basis construction, plus the data needed to re-check it."""

    modulus: int
    rho: PermutationAssignment
    offsets: tuple
    masks: tuple
    frequencies: tuple
    classification: object
    lemma: LemmaResult
    det_modulus: float


def _validate_theorem1(n, cell_of_k, masks):
    k = len(cell_of_k)
    if not isinstance(n, int) or n < 1:
        raise InvalidConfiguration("N must be a positive integer")
    if k == 0 or k > n or len(masks) != k:
        raise InvalidConfiguration(f"need 1 <= K <= N with one mask per cell (K={k}, N={n})")
    cells = [int(c) for c in cell_of_k]
    if len(set(cells)) != k or any(not 0 <= c < n for c in cells):
        raise InvalidConfiguration(f"cells must be distinct elements of Z_{n}: {cells}")
    sets = []
    for i, mk in enumerate(masks):
        s = frozenset(mk.cells) if isinstance(mk, GridSupport) else frozenset(int(c) for c in mk)
        if cells[i] not in s:
            raise InvalidConfiguration(f"mask {i} must contain its own cell {cells[i]}")
        if not s <= set(cells):
            raise InvalidConfiguration(f"mask {i} uses cells outside the chosen ones")
        sets.append(s)
    return cells, sets


def default_mode(k: int) -> str:
    return "exhaustive" if k <= 8 else "first_feasible"


def theorem1_construct(n: int, cell_of_k, masks, mode: Optional[str] = None, workers: int = 1) -> Construction:
    """Assign frequencies ``N Z + rho(k)`` (rho over 1..K) so the system is a Riesz basis.

    Rows of ``A = [exp(-2 pi i r l / N)]`` are labelled r = 1..K, columns by
    the chosen cells in ascending order. Row k of the masked matrix uses
    offset ``rho(k) mod N``.
    """
    cells, sets = _validate_theorem1(n, cell_of_k, masks)
    k = len(cells)
    labels = sorted(cells)
    a = linalg.fourier_matrix(n, rows=np.arange(1, k + 1))[:, labels]
    mask = np.array([[int(l in s) for l in labels] for s in sets])
    res = lemma_search(a, mask, mode or default_mode(k), workers=workers)
    offsets = tuple((v + 1) % n for v in res.rho.map)
    mm = build_masked_matrix(n, offsets, sets)
    cls = classify_system(mm)
    if cls.verdict != "riesz_basis":
        raise InternalError(
            f"permutation {res.rho.one_based()} did not give a Riesz basis "
            f"(sigma_min={cls.sigma_min:.3e}, R={res.R}, guarantee={res.guarantee:.3e})"
        )
    freqs = tuple(CosetSystem(n, (c,)) for c in offsets)
    return Construction(n, res.rho, offsets, tuple(sets), freqs, cls, res, res.det_modulus)


def feasible_permutations(n: int, cell_of_k, masks) -> list[PermutationAssignment]:
    """Every rho (over 1..K) for which the disjoint-cell system is a Riesz basis."""
    cells, sets = _validate_theorem1(n, cell_of_k, masks)
    k = len(cells)
    out = []
    for perm in itertools.permutations(range(k)):
        offsets = [(v + 1) % n for v in perm]
        if classify_system(build_masked_matrix(n, offsets, sets)).verdict == "riesz_basis":
            out.append(PermutationAssignment(perm))
    return out


@dataclass(frozen=True, eq=False)
class CorollaryResult:
    modulus: int
    supports: tuple
    assignment: tuple  # assignment[k'] = index of the set covering the k'-th cell
    construction: Construction
    frequencies: tuple  # one CosetSystem per input set, possibly empty


def corollary_construct(sets, mode: Optional[str] = None, workers: int = 1) -> CorollaryResult:
    """Disjoint coset frequency sets for finite unions of rational intervals.

    The sets are put on a common N-grid; each occupied cell is given to the
    first set (smallest index) containing it, and the disjoint-cell construction
    runs on the occupied cells. Set k receives the cosets of all cells
    assigned to it, so sets that win no cell get an empty frequency set.
    """
    n, supports = normalize_supports(sets)
    occupied = sorted(set().union(*(s.cells for s in supports)))
    owner = [next(i for i, s in enumerate(supports) if c in s.cells) for c in occupied]
    masks = [supports[o].cells for o in owner]
    con = theorem1_construct(n, occupied, masks, mode=mode, workers=workers)
    freqs = []
    for i in range(len(supports)):
        offs = tuple(con.offsets[j] for j, o in enumerate(owner) if o == i)
        freqs.append(CosetSystem(n, offs))
    return CorollaryResult(n, tuple(supports), tuple(owner), con, tuple(freqs))
