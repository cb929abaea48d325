"""Scans over masks, permutations and principal subsets of the Fourier matrix.

Conjecture one asks for a row permutation rho of W_N such that every
``(P_rho W_N) ⊙ M`` with an all-ones diagonal in M is invertible. Conjecture
two asks for a rho such that every principal submatrix of ``P_rho W_N`` is
invertible.

Masks are numbered by a counter: the diagonal is always one and bit b of the
counter is the b-th off-diagonal position in row-major order. Every scan
screens numerically first (cheap batched determinants, then sigma_min for the
survivors) and confirms candidates exactly in the cyclotomic field, so every
reported counterexample is exactly singular.
"""

from __future__ import annotations

import itertools
import json
import math
import os
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import linalg
from .errors import InvalidInput, SizeLimit
from .permsearch import PermutationAssignment, permutation_rank, permutation_unrank

SIGMA_FILTER = 1e-6
CHUNK = 1 << 14
RANDOM_BATCH = 4096
CONJ1_EXHAUSTIVE_MAX_N = 6
CONJ1_RANDOM_MAX_N = 8
CONJ2_MAX_N = 12
HIERARCHY_MAX_N = 10
CHECKPOINT_HEADER = "# maskriesz checkpoint v1"


@dataclass(frozen=True)
class Refutation:
    """One exactly singular instance: a mask (conjecture one) or a subset (two)."""

    rho: tuple
    counterexample: tuple
    sigma_min: float
    exact_singular: Optional[bool]
    counter: Optional[int] = None

    def to_json(self) -> dict:
        return {
            "rho": list(self.rho),
            "counterexample": [list(r) if isinstance(r, tuple) else r for r in self.counterexample],
            "counter": self.counter,
            "sigma_min": self.sigma_min,
            "exact_singular": self.exact_singular,
        }

    @classmethod
    def from_json(cls, d: dict) -> "Refutation":
        ce = d["counterexample"]
        ce = tuple(tuple(r) if isinstance(r, list) else r for r in ce)
        return cls(tuple(d["rho"]), ce, d["sigma_min"], d["exact_singular"], d.get("counter"))


@dataclass
class ScanVerdict:
    N: int
    conjecture: str
    status: str  # pass | refuted | inconclusive
    witness_rho: Optional[tuple] = None
    refutation: tuple = ()
    rejected: tuple = ()
    unrefuted: tuple = ()
    stats: dict = field(default_factory=dict)
    checks: tuple = ()  # per-instance verdicts, filled by fixed-rho principal-minor scans
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def results_json(self) -> dict:
        """Everything except timing, in a canonical order."""
        return {
            "N": self.N,
            "conjecture": self.conjecture,
            "status": self.status,
            "witness_rho": None if self.witness_rho is None else list(self.witness_rho),
            "refutation": [r.to_json() for r in self.refutation],
            "rejected": [r.to_json() for r in self.rejected],
            "unrefuted": [list(r) for r in self.unrefuted],
            "stats": dict(self.stats),
            "checks": [dict(c) for c in self.checks],
        }


# ---------------------------------------------------------------------------
# mask numbering


def offdiagonal_positions(n: int) -> list[tuple[int, int]]:
    return [(r, c) for r in range(n) for c in range(n) if r != c]


def masks_from_counters(n: int, counters: np.ndarray) -> np.ndarray:
    counters = np.asarray(counters, dtype=np.int64)
    out = np.ones((counters.size, n, n), dtype=bool)
    for b, (r, c) in enumerate(offdiagonal_positions(n)):
        out[:, r, c] = (counters >> b) & 1
    return out


def counter_from_mask(mask) -> int:
    m = np.asarray(mask)
    n = m.shape[0]
    if not all(m[i, i] for i in range(n)):
        raise InvalidInput("conjecture-one masks need an all-ones diagonal")
    return sum(int(m[r, c]) << b for b, (r, c) in enumerate(offdiagonal_positions(n)))


def mask_rows(mask) -> tuple:
    return tuple(tuple(int(v) for v in row) for row in np.asarray(mask))


def permuted_exponents(n: int, rho: Sequence[int]) -> np.ndarray:
    """``e[k, l] = rho(k) * l mod n``, the exponents of ``P_rho W_N``."""
    return (np.asarray(rho, dtype=np.int64)[:, None] * np.arange(n)[None, :]) % n


def _phases(n: int, e: np.ndarray) -> np.ndarray:
    return np.exp(-2j * np.pi * e / n)


def _screen(n: int, mats: np.ndarray, exps: np.ndarray, size: int):
    """Indices of exactly singular matrices in a batch, with their sigma_min.

    ``mats`` (B, s, s) complex with unit-modulus or zero entries, so
    sigma_max <= s and sigma_min >= |det| / s**(s-1).
    """
    if mats.shape[0] == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    d = np.abs(np.linalg.det(mats))
    cand = np.flatnonzero(d <= SIGMA_FILTER * float(size) ** (size - 1))
    if cand.size == 0:
        return cand, np.zeros(0)
    smin = np.linalg.svd(mats[cand], compute_uv=False)[:, -1]
    keep = smin <= SIGMA_FILTER
    cand, smin = cand[keep], smin[keep]
    if cand.size == 0:
        return cand, smin
    exact = linalg.exact_zero_det_batch(n, exps[cand])
    return cand[exact], smin[exact]


# ---------------------------------------------------------------------------
# conjecture one


def _conj1_chunk(args):
    """Failures among counters [start, stop) for one rho: list of (counter, sigma_min)."""
    n, rho, start, stop = args
    base = permuted_exponents(n, rho)
    phases = _phases(n, base)
    counters = np.arange(start, stop, dtype=np.int64)
    masks = masks_from_counters(n, counters)
    mats = phases[None] * masks
    exps = np.where(masks, base[None], -1)
    idx, smin = _screen(n, mats, exps, n)
    return [(int(counters[i]), float(s)) for i, s in zip(idx, smin)], int(counters.size)


def _conj1_random(args):
    """Seeded random masks for one rho until an exactly singular one appears."""
    n, rho, seed, rank, max_batches = args
    rng = np.random.default_rng([seed, rank])
    nbits = n * n - n
    base = permuted_exponents(n, rho)
    phases = _phases(n, base)
    tested = 0
    for _ in range(max_batches):
        counters = rng.integers(0, 1 << nbits, size=RANDOM_BATCH, dtype=np.int64)
        masks = masks_from_counters(n, counters)
        idx, smin = _screen(n, phases[None] * masks, np.where(masks, base[None], -1), n)
        if idx.size:
            i = int(idx[0])
            tested += i + 1
            return (int(counters[i]), float(smin[0])), tested
        tested += RANDOM_BATCH
    return None, tested


def _refutation_from_counter(n, rho, counter, smin) -> Refutation:
    mask = masks_from_counters(n, np.array([counter]))[0]
    return Refutation(tuple(rho), mask_rows(mask), smin, True, counter)


class Checkpoint:
    """Plain-text progress record: ``key=value`` lines after a version header."""

    def __init__(self, path):
        self.path = os.fspath(path)

    def save(self, state: dict):
        lines = [CHECKPOINT_HEADER] + [f"{k}={json.dumps(state[k], sort_keys=True)}" for k in sorted(state)]
        tmp = self.path + ".tmp"
        with open(tmp, "w", encoding="ascii") as fh:
            fh.write("\n".join(lines) + "\n")
        os.replace(tmp, self.path)

    def load(self) -> Optional[dict]:
        if not os.path.exists(self.path):
            return None
        with open(self.path, encoding="ascii") as fh:
            lines = fh.read().splitlines()
        if not lines or lines[0] != CHECKPOINT_HEADER:
            raise InvalidInput(f"{self.path} is not a maskriesz checkpoint")
        state = {}
        for ln in lines[1:]:
            if ln.strip():
                k, v = ln.split("=", 1)
                state[k] = json.loads(v)
        return state


def _check_resume(state, expected: dict):
    for k, v in expected.items():
        if state.get(k) != v:
            raise InvalidInput(f"checkpoint was written for {k}={state.get(k)!r}, not {v!r}")


class _Budget:
    """Optional cap on chunk waves shared by one scan (None = unlimited)."""

    def __init__(self, waves: Optional[int]):
        self.waves = waves

    def spend(self) -> bool:
        """Record one wave; False once the cap is exhausted."""
        if self.waves is None:
            return True
        self.waves -= 1
        return self.waves > 0


def _scan_rho_exhaustive(n, rho, start, total, workers, early_exit, failures, budget, on_wave=None):
    """Enumerate masks for one rho from ``start``.

    Returns ``(next_counter, masks_tested, finished)``; ``finished`` is False
    only when the wave budget ran out first.
    """
    from .parallel import run_tasks

    tested = 0
    pos = start
    while pos < total:
        bounds = []
        for _ in range(max(1, workers)):
            if pos >= total:
                break
            bounds.append((pos, min(pos + CHUNK, total)))
            pos = bounds[-1][1]
        for found, cnt in run_tasks(_conj1_chunk, [(n, tuple(rho), s, e) for s, e in bounds], workers):
            failures.extend(found)
            tested += cnt
        if on_wave is not None:
            on_wave(pos, tested)
        exhausted = not budget.spend()
        if early_exit and failures:
            return pos, tested, True
        if exhausted and pos < total:
            return pos, tested, False
    return pos, tested, True


def conjecture1_scan(n: int, rho: Optional[Sequence[int]] = None, strategy: str = "exhaustive",
                     seed: int = 0, workers: int = 1, max_batches: int = 256,
                     checkpoint=None, resume: bool = False, stop_after: Optional[int] = None) -> ScanVerdict:
    """Invertibility of ``(P_rho W_N) ⊙ M`` over all masks with all-ones diagonal.

    With a fixed ``rho`` every failing mask is reported. Without one, rhos are
    tried in lexicographic order, each abandoned at its first counterexample
    (smallest counter), and the first survivor is the witness. The
    ``randomized_refute`` strategy samples masks with a per-rho seed and can
    only refute; a rho it cannot refute makes the verdict inconclusive.

    ``stop_after`` caps the number of chunk waves (for interruption tests);
    the verdict is then ``inconclusive`` and the checkpoint allows resuming.
    """
    t0 = time.perf_counter()
    if strategy not in ("exhaustive", "randomized_refute"):
        raise InvalidInput(f"unknown strategy {strategy!r}")
    limit = CONJ1_EXHAUSTIVE_MAX_N if strategy == "exhaustive" else CONJ1_RANDOM_MAX_N
    if not isinstance(n, int) or not 1 <= n <= limit:
        raise SizeLimit(f"conjecture-one {strategy} scans need 1 <= N <= {limit}")
    if rho is not None:
        rho = PermutationAssignment(tuple(rho)).map
        if len(rho) != n:
            raise InvalidInput(f"rho has size {len(rho)}, expected {n}")

    if strategy == "randomized_refute":
        verdict = _conj1_randomized(n, rho, seed, workers, max_batches)
    elif rho is not None:
        verdict = _conj1_fixed(n, rho, workers, checkpoint, resume, stop_after)
    else:
        verdict = _conj1_search(n, workers, checkpoint, resume, stop_after)
    verdict.wall_time = time.perf_counter() - t0
    return verdict


def _conj1_fixed(n, rho, workers, checkpoint, resume, stop_after):
    total = 1 << (n * n - n)
    ck = Checkpoint(checkpoint) if checkpoint else None
    ident = {"kind": "conjecture1-fixed", "N": n, "rho_rank": permutation_rank(rho)}
    failures: list = []
    start, tested0 = 0, 0
    if ck and resume:
        state = ck.load()
        if state is not None:
            _check_resume(state, ident)
            start, tested0 = state["mask_counter"], state["masks_tested"]
            failures = [tuple(f) for f in state["failures"]]

    def on_wave(pos, tested):
        if ck:
            ck.save({**ident, "mask_counter": pos, "masks_tested": tested0 + tested, "failures": sorted(failures)})

    _, tested, finished = _scan_rho_exhaustive(n, rho, start, total, workers, False, failures,
                                               _Budget(stop_after), on_wave)
    failures.sort()
    refs = tuple(_refutation_from_counter(n, rho, c, s) for c, s in failures)
    stats = {"masks_tested": tested0 + tested, "permutations_tested": 1}
    if not finished:
        return ScanVerdict(n, "one", "inconclusive", None, refs, stats=stats)
    if refs:
        return ScanVerdict(n, "one", "refuted", None, refs, stats=stats)
    return ScanVerdict(n, "one", "pass", tuple(rho), stats=stats)


def _conj1_search(n, workers, checkpoint, resume, stop_after):
    total = 1 << (n * n - n)
    nperm = math.factorial(n)
    ck = Checkpoint(checkpoint) if checkpoint else None
    ident = {"kind": "conjecture1-search", "N": n}
    rank, mask_pos, tested, perms_done = 0, 0, 0, 0
    rejected: list = []
    failures: list = []
    if ck and resume:
        state = ck.load()
        if state is not None:
            _check_resume(state, ident)
            rank, mask_pos = state["rho_rank"], state["mask_counter"]
            tested, perms_done = state["masks_tested"], state["permutations_tested"]
            rejected = [Refutation.from_json(r) for r in state["rejected"]]
            failures = [tuple(f) for f in state["failures"]]

    def save(rho_rank, pos, tested_now):
        if ck:
            ck.save({**ident, "rho_rank": rho_rank, "mask_counter": pos, "masks_tested": tested_now,
                     "permutations_tested": perms_done, "rejected": [r.to_json() for r in rejected],
                     "failures": sorted(failures)})

    budget = _Budget(stop_after)
    while rank < nperm:
        rho = permutation_unrank(n, rank)
        base = tested
        pos, t, finished = _scan_rho_exhaustive(
            n, rho, mask_pos, total, workers, True, failures, budget,
            lambda p, tt, r=rank: save(r, p, base + tt))
        tested += t
        if not finished:
            stats = {"masks_tested": tested, "permutations_tested": perms_done}
            return ScanVerdict(n, "one", "inconclusive", None, rejected=tuple(rejected), stats=stats)
        perms_done += 1
        if not failures:
            stats = {"masks_tested": tested, "permutations_tested": perms_done}
            return ScanVerdict(n, "one", "pass", tuple(rho), rejected=tuple(rejected), stats=stats)
        c, s = min(failures)
        rejected.append(_refutation_from_counter(n, rho, c, s))
        failures = []
        rank, mask_pos = rank + 1, 0
        save(rank, 0, tested)
        if budget.waves is not None and budget.waves <= 0:
            stats = {"masks_tested": tested, "permutations_tested": perms_done}
            return ScanVerdict(n, "one", "inconclusive", None, rejected=tuple(rejected), stats=stats)
    stats = {"masks_tested": tested, "permutations_tested": perms_done}
    return ScanVerdict(n, "one", "refuted", None, tuple(rejected), stats=stats)


def _conj1_randomized(n, rho, seed, workers, max_batches):
    from .parallel import run_tasks

    if rho is not None:
        rhos = [tuple(rho)]
    else:
        rhos = list(itertools.permutations(range(n)))
    tasks = [(n, r, seed, permutation_rank(r), max_batches) for r in rhos]
    parts = run_tasks(_conj1_random, tasks, workers)
    refs, unrefuted, tested = [], [], 0
    for r, (hit, cnt) in zip(rhos, parts):
        tested += cnt
        if hit is None:
            unrefuted.append(r)
        else:
            refs.append(_refutation_from_counter(n, r, hit[0], hit[1]))
    stats = {"masks_tested": tested, "permutations_tested": len(rhos)}
    status = "inconclusive" if unrefuted else "refuted"
    return ScanVerdict(n, "one", status, None, tuple(refs), unrefuted=tuple(unrefuted), stats=stats)


# ---------------------------------------------------------------------------
# conjecture two


def subsets_by_size(n: int) -> dict[int, np.ndarray]:
    """Nonempty subsets of Z_n grouped by size, each in lexicographic order."""
    return {s: np.array(list(itertools.combinations(range(n), s)), dtype=np.int64) for s in range(1, n + 1)}


def _principal_failures(n: int, rhos: np.ndarray, subsets: np.ndarray):
    """Exactly singular principal minors for a batch of rhos and same-size subsets.

    Returns (rho_index, subset_index, sigma_min) triples.
    """
    p, b, s = rhos.shape[0], subsets.shape[0], subsets.shape[1]
    rows = rhos[:, subsets]  # (P, B, s) values rho(k) for k in the subset
    e = (rows[:, :, :, None] * subsets[None, :, None, :]) % n
    e = e.reshape(p * b, s, s)
    idx, smin = _screen(n, _phases(n, e), e, s)
    return [(int(i // b), int(i % b), float(v)) for i, v in zip(idx, smin)]


def _conj2_block(args):
    """Survivors of a block of rhos (by rank), and the first failure of each casualty."""
    n, start, stop = args
    perms = np.array(list(itertools.islice(itertools.permutations(range(n)), start, stop)), dtype=np.int64)
    alive = np.arange(perms.shape[0])
    first_fail = {}
    for s, subs in subsets_by_size(n).items():
        if alive.size == 0:
            break
        fails = _principal_failures(n, perms[alive], subs)
        hit = {}
        for pi, si, v in fails:
            hit.setdefault(pi, (si, v))  # subsets are in lexicographic order, keep the first
        for pi, (si, v) in hit.items():
            first_fail[int(alive[pi])] = (tuple(int(x) for x in subs[si]), v)
        alive = np.array([a for j, a in enumerate(alive) if j not in hit], dtype=np.int64)
    return [start + int(a) for a in alive], {start + k: v for k, v in first_fail.items()}


def conjecture2_scan(n: int, rho: Optional[Sequence[int]] = None, workers: int = 1,
                     checkpoint=None, resume: bool = False, block: int = 720) -> ScanVerdict:
    """Invertibility of all principal submatrices of ``P_rho W_N``.

    With a fixed rho every singular subset is listed. Without one the first
    rho in lexicographic order whose principal minors all survive is the
    witness; rhos are screened in blocks, smallest subsets first.
    """
    from .parallel import run_tasks

    t0 = time.perf_counter()
    if not isinstance(n, int) or not 1 <= n <= CONJ2_MAX_N:
        raise SizeLimit(f"conjecture-two scans need 1 <= N <= {CONJ2_MAX_N}")
    if rho is not None:
        rho = PermutationAssignment(tuple(rho)).map
        if len(rho) != n:
            raise InvalidInput(f"rho has size {len(rho)}, expected {n}")
        refs, checks = [], []
        tested = 0
        r = np.array(rho)
        for s, subs in subsets_by_size(n).items():
            tested += len(subs)
            failed = {si for _, si, _ in _principal_failures(n, r[None], subs)}
            e = (r[subs][:, :, None] * subs[:, None, :]) % n
            smins = np.linalg.svd(_phases(n, e), compute_uv=False)[:, -1]
            for si, sub in enumerate(subs):
                subset = tuple(int(x) for x in sub)
                checks.append({"subset": list(subset), "sigma_min": float(smins[si]), "singular": si in failed})
                if si in failed:
                    refs.append(Refutation(tuple(rho), subset, float(smins[si]), True))
        refs.sort(key=lambda r: (len(r.counterexample), r.counterexample))
        stats = {"subsets_tested": tested, "permutations_tested": 1}
        status = "refuted" if refs else "pass"
        v = ScanVerdict(n, "two", status, None if refs else tuple(rho), tuple(refs), stats=stats, checks=tuple(checks))
        v.wall_time = time.perf_counter() - t0
        return v

    nperm = math.factorial(n)
    ck = Checkpoint(checkpoint) if checkpoint else None
    ident = {"kind": "conjecture2-search", "N": n}
    pos = 0
    rejected: dict = {}
    if ck and resume:
        state = ck.load()
        if state is not None:
            _check_resume(state, ident)
            pos = state["rho_rank"]
            rejected = {int(k): (tuple(v[0]), v[1]) for k, v in state["rejected"].items()}
    witness = None
    while pos < nperm and witness is None:
        bounds = []
        for _ in range(max(1, workers)):
            if pos >= nperm:
                break
            bounds.append((pos, min(pos + block, nperm)))
            pos = bounds[-1][1]
        for alive, fails in run_tasks(_conj2_block, [(n, s, e) for s, e in bounds], workers):
            if witness is None and alive:
                witness = min(alive)
            rejected.update(fails)
        if ck:
            ck.save({**ident, "rho_rank": pos,
                     "rejected": {str(k): [list(v[0]), v[1]] for k, v in sorted(rejected.items())}})
    tried = sorted(k for k in rejected if witness is None or k < witness)
    rej = tuple(Refutation(permutation_unrank(n, k), rejected[k][0], rejected[k][1], True) for k in tried)
    stats = {"permutations_tested": len(tried) + (witness is not None)}
    if witness is not None:
        v = ScanVerdict(n, "two", "pass", permutation_unrank(n, witness), rejected=rej, stats=stats)
    else:
        v = ScanVerdict(n, "two", "refuted", None, rej, stats=stats)
    v.wall_time = time.perf_counter() - t0
    return v


# ---------------------------------------------------------------------------
# non-integer hierarchical frequencies


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % d for d in range(2, math.isqrt(p) + 1))


def hierarchical_noninteger_check(n: int, p: int) -> ScanVerdict:
    """Frequencies ``N Z + k N / P``: every ``[exp(-2 pi i k l / P)]_{k, l in K}`` must be invertible."""
    t0 = time.perf_counter()
    if not isinstance(p, int) or not is_prime(p) or p <= n:
        raise InvalidInput(f"P must be a prime larger than N (N={n}, P={p})")
    if not isinstance(n, int) or not 1 <= n <= HIERARCHY_MAX_N:
        raise SizeLimit(f"hierarchy check needs 1 <= N <= {HIERARCHY_MAX_N}")
    refs = []
    tested = 0
    for s, subs in subsets_by_size(n).items():
        e = (subs[:, :, None] * subs[:, None, :]) % p
        mats = _phases(p, e)
        sv = np.linalg.svd(mats, compute_uv=False)
        bad = np.flatnonzero(sv[:, -1] <= linalg.SINGULAR_RTOL * s * sv[:, 0])
        tested += len(subs)
        for i in bad:
            refs.append(Refutation(tuple(range(n)), tuple(int(x) for x in subs[i]), float(sv[i, -1]), None))
    stats = {"subsets_tested": tested, "permutations_tested": 1, "P": p}
    status = "refuted" if refs else "pass"
    v = ScanVerdict(n, "hierarchy", status, None if refs else tuple(range(n)), tuple(refs), stats=stats)
    v.wall_time = time.perf_counter() - t0
    return v
