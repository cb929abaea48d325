import itertools

import numpy as np
import pytest

from maskriesz import linalg
from maskriesz.conjectures import (
    Checkpoint,
    conjecture1_scan,
    conjecture2_scan,
    counter_from_mask,
    hierarchical_noninteger_check,
    masks_from_counters,
    permuted_exponents,
)
from maskriesz.errors import InvalidInput, SizeLimit
from maskriesz.fixtures import N5_PRINTED


def exact_singular(n, rho, mask):
    e = permuted_exponents(n, rho)
    rows = tuple(tuple(int(e[r, c]) if mask[r][c] else None for c in range(n)) for r in range(n))
    return linalg.exact_zero_det(linalg.RootOfUnitySpec(n, rows))


def brute_conj1(n, rho):
    bad = []
    for counter in range(1 << (n * n - n)):
        m = masks_from_counters(n, [counter])[0]
        if exact_singular(n, rho, m):
            bad.append(counter)
    return bad


class TestConjectureOne:
    def test_counter_roundtrip(self, rng):
        for _ in range(50):
            c = int(rng.integers(0, 1 << 20))
            assert counter_from_mask(masks_from_counters(5, [c])[0]) == c
        with pytest.raises(InvalidInput):
            counter_from_mask(np.zeros((2, 2)))

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_matches_bruteforce_small(self, n):
        for rho in itertools.permutations(range(n)):
            v = conjecture1_scan(n, rho)
            assert sorted(r.counter for r in v.refutation) == brute_conj1(n, rho)
            assert v.status == ("refuted" if v.refutation else "pass")

    def test_n4_witness(self):
        v = conjecture1_scan(4, (0, 2, 1, 3))
        assert v.status == "pass" and v.stats["masks_tested"] == 4096

    def test_n4_identity_refuted(self):
        v = conjecture1_scan(4, (0, 1, 2, 3))
        assert v.status == "refuted"
        assert all(r.exact_singular for r in v.refutation)

    def test_search_finds_witness(self):
        v = conjecture1_scan(4)
        assert v.status == "pass" and v.witness_rho is not None
        assert conjecture1_scan(4, v.witness_rho).status == "pass"

    def test_n5(self):
        good = conjecture1_scan(5, (0, 1, 2, 4, 3))
        assert good.status == "pass" and good.stats["masks_tested"] == 1 << 20
        bad = conjecture1_scan(5, (0, 1, 2, 3, 4))
        assert bad.status == "refuted"
        found = {r.counterexample for r in bad.refutation}
        for printed in N5_PRINTED.values():
            assert printed in found
        assert all(r.exact_singular for r in bad.refutation)

    @pytest.mark.slow
    def test_n6_no_permutation_survives(self):
        v = conjecture1_scan(6, strategy="randomized_refute", seed=0)
        assert v.status == "refuted" and v.witness_rho is None
        assert len(v.refutation) == 720 and not v.unrefuted
        for r in v.refutation[:40]:
            assert exact_singular(6, r.rho, r.counterexample)

    def test_randomized_needs_exact_singular(self):
        v = conjecture1_scan(4, (0, 1, 2, 3), strategy="randomized_refute", seed=3)
        for r in v.refutation:
            assert r.exact_singular is True
        # a passing rho cannot be refuted, so the verdict stays inconclusive
        assert conjecture1_scan(4, (0, 2, 1, 3), strategy="randomized_refute", max_batches=2).status == "inconclusive"

    def test_limits(self):
        with pytest.raises(SizeLimit):
            conjecture1_scan(7)
        with pytest.raises(SizeLimit):
            conjecture1_scan(9, strategy="randomized_refute")
        with pytest.raises(InvalidInput):
            conjecture1_scan(3, (0, 1))
        with pytest.raises(InvalidInput):
            conjecture1_scan(3, strategy="bogus")

    @pytest.mark.parametrize("workers", [4, 8])
    def test_worker_independence(self, workers):
        base = conjecture1_scan(4, (0, 1, 2, 3), workers=1).results_json()
        assert conjecture1_scan(4, (0, 1, 2, 3), workers=workers).results_json() == base
        r1 = conjecture1_scan(5, strategy="randomized_refute", seed=7, max_batches=4, workers=1).results_json()
        assert conjecture1_scan(5, strategy="randomized_refute", seed=7, max_batches=4, workers=workers).results_json() == r1


class TestCheckpoint:
    def test_resume_fixed(self, tmp_path):
        ck = tmp_path / "scan.ckpt"
        full = conjecture1_scan(5, (0, 1, 2, 3, 4)).results_json()
        part = conjecture1_scan(5, (0, 1, 2, 3, 4), checkpoint=ck, stop_after=1)
        assert part.status == "inconclusive"
        state = Checkpoint(ck).load()
        assert state and 0 < state["mask_counter"] < 1 << 20
        resumed = conjecture1_scan(5, (0, 1, 2, 3, 4), checkpoint=ck, resume=True)
        assert resumed.results_json() == full

    def test_resume_search(self, tmp_path):
        ck = tmp_path / "search.ckpt"
        full = conjecture1_scan(4).results_json()
        assert conjecture1_scan(4, checkpoint=ck, stop_after=1).status == "inconclusive"
        assert conjecture1_scan(4, checkpoint=ck, resume=True).results_json() == full

    def test_resume_rejects_other_params(self, tmp_path):
        ck = tmp_path / "x.ckpt"
        conjecture1_scan(5, (0, 1, 2, 3, 4), checkpoint=ck, stop_after=1)
        with pytest.raises(InvalidInput):
            conjecture1_scan(5, (0, 1, 2, 4, 3), checkpoint=ck, resume=True)

    def test_bad_header(self, tmp_path):
        p = tmp_path / "bad"
        p.write_text("hello\n")
        with pytest.raises(InvalidInput):
            Checkpoint(p).load()


def brute_minors(n, rho):
    out = []
    for s in range(1, n + 1):
        for sub in itertools.combinations(range(n), s):
            e = permuted_exponents(n, rho)
            rows = tuple(tuple(int(e[r, c]) for c in sub) for r in sub)
            if linalg.exact_zero_det(linalg.RootOfUnitySpec(n, rows)):
                out.append(list(sub))
    return sorted(out, key=lambda x: (len(x), x))


class TestConjectureTwo:
    @pytest.mark.parametrize("n", [2, 3, 5, 7])
    def test_prime_identity_passes(self, n):
        v = conjecture2_scan(n, tuple(range(n)))
        assert v.status == "pass" and v.stats["subsets_tested"] == 2**n - 1

    def test_n4_identity(self):
        v = conjecture2_scan(4, (0, 1, 2, 3))
        assert [list(r.counterexample) for r in v.refutation] == [[0, 2], [1, 3]]
        assert len(v.checks) == 15
        assert sum(c["singular"] for c in v.checks) == 2

    def test_n4_witness(self):
        assert conjecture2_scan(4, (0, 2, 1, 3)).status == "pass"

    @pytest.mark.parametrize("n", [4, 6])
    def test_fixed_matches_exact_oracle(self, n):
        for rho in [tuple(range(n)), tuple(reversed(range(n)))]:
            v = conjecture2_scan(n, rho)
            got = sorted((list(r.counterexample) for r in v.refutation), key=lambda x: (len(x), x))
            assert got == brute_minors(n, rho)

    @pytest.mark.parametrize("n", range(1, 9))
    def test_witness_search(self, n):
        v = conjecture2_scan(n)
        assert v.status == "pass"
        assert brute_minors(n, v.witness_rho) == [] if n <= 6 else conjecture2_scan(n, v.witness_rho).passed

    def test_workers(self):
        assert conjecture2_scan(6, workers=4).results_json() == conjecture2_scan(6, workers=1).results_json()


class TestHierarchy:
    @pytest.mark.parametrize("n,p", [(4, 5), (3, 7), (6, 7), (5, 11)])
    def test_prime_passes(self, n, p):
        v = hierarchical_noninteger_check(n, p)
        assert v.status == "pass" and v.stats["subsets_tested"] == 2**n - 1

    @pytest.mark.parametrize("p", [4, 3, 1, 9])
    def test_rejects(self, p):
        with pytest.raises(InvalidInput):
            hierarchical_noninteger_check(4, p)
