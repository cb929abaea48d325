import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from maskriesz.errors import InvalidBound, InvalidConfiguration
from maskriesz.tri_interval import (
    CaseTag,
    TripleConfig,
    admissible_memberships,
    alpha_grid,
    branch_id,
    canonical_instance,
    case_table,
    case_table_csv,
    case_table_text,
    classify_triple,
    cross_check_periodic,
    paley_wiener_lambda,
    periodic_alphas,
    relabel,
    sweep_canonical,
    tag_holds,
)

# reference for the L_3 = {1,3} block, written out by hand from the three conditions
CASE2_EXPECTED = {
    "2-1": "case_i(1)", "2-2": "case_i(1)", "2-3": "case_i(1)", "2-4": "case_i(1)",
    "2-5": "case_i(2)", "2-9": "case_i(2)", "2-13": "case_i(2)",
    "2-6": "case_ii(3)", "2-10": "case_ii(2)", "2-11": "case_ii(2)", "2-12": "case_ii(2)",
    "2-7": "case_star", "2-8": "case_star", "2-14": "case_star", "2-15": "case_star", "2-16": "case_star",
}

SIGMAS = [dict(zip((1, 2, 3), p)) for p in itertools.permutations((1, 2, 3))]


def conditions(mem):
    """All (tag, k) pairs whose condition holds, computed independently of the classifier."""
    out = set()
    for k in mem:
        if mem[k] == {k}:
            out.add(("case_i", k))
        if not any(k in lk for l, lk in mem.items() if l != k):
            out.add(("case_ii", k))
    comps = [set(mem) - lk for lk in mem.values()]
    if all(not (a & b) for a, b in itertools.combinations(comps, 2)):
        out.add(("case_star", None))
    return out


class TestTable:
    def test_64_distinct_memberships(self):
        mems = admissible_memberships()
        assert len(mems) == 64 and len(set(mems)) == 64
        assert all(k in lk for m in mems for k, lk in zip((1, 2, 3), m))

    def test_branch_ids_unique(self):
        rows = case_table()
        assert [r.branch for r in rows] == [f"{g}-{i}" for g in range(1, 5) for i in range(1, 17)]
        assert all(branch_id(r.membership) == r.branch for r in rows)

    def test_case2_block(self):
        got = {r.branch: r.tag.label() for r in case_table() if r.branch.startswith("2-")}
        assert got == CASE2_EXPECTED

    def test_every_row_covered_with_preference(self):
        counts = {"case_i": 0, "case_ii": 0, "case_star": 0}
        for r in case_table():
            mem = dict(zip((1, 2, 3), (set(m) for m in r.membership)))
            holds = conditions(mem)
            assert holds, r
            assert tag_holds(r.tag, mem)
            best = min(holds, key=lambda t: (["case_i", "case_ii", "case_star"].index(t[0]), t[1] or 0))
            assert (r.tag.tag, r.tag.k) == best
            counts[r.tag.tag] += 1
        assert counts == {"case_i": 37, "case_ii": 9, "case_star": 18}

    def test_relabel_invariance(self):
        for mem in admissible_memberships():
            base = dict(zip((1, 2, 3), (set(m) for m in mem)))
            kinds = {t for t, _ in conditions(base)}
            for sigma in SIGMAS:
                new = relabel(mem, sigma)
                tag = classify_triple(TripleConfig(new))
                newmem = dict(zip((1, 2, 3), (set(m) for m in new)))
                assert {t for t, _ in conditions(newmem)} == kinds
                assert tag.tag == classify_triple(TripleConfig(mem)).tag

    def test_renderings(self):
        csv_text = case_table_csv()
        lines = csv_text.strip().split("\n")
        assert lines[0] == "branch,L1,L2,L3,case" and len(lines) == 65
        assert lines[1] == "1-1,{1},{2},{3},case_i(1)"
        assert len(case_table_text().strip().split("\n")) == 65


class TestConfig:
    def test_validation(self):
        with pytest.raises(InvalidConfiguration):
            TripleConfig(({2}, {2}, {3}))
        with pytest.raises(InvalidConfiguration):
            TripleConfig(({1}, {2}))
        with pytest.raises(InvalidConfiguration):
            TripleConfig(({1, 4}, {2}, {3}))
        with pytest.raises(InvalidConfiguration):
            TripleConfig(({1}, {2}, {3}), empty={1, 2, 3})

    def test_empty_interval_reduction(self):
        tag = classify_triple(TripleConfig(({1, 2}, {1, 2, 3}, set()), empty={3}))
        assert tag.proof_branch == "two-4" and tag.tag == "case_star"
        tag = classify_triple(TripleConfig(({1}, {2}, {3}), empty={1, 3}))
        assert tag == CaseTag("case_i", 2, "one")

    def test_reduced_two_interval_all_branches(self):
        seen = set()
        for l1, l2 in itertools.product(({1}, {1, 2}), ({2}, {1, 2})):
            tag = classify_triple(TripleConfig((l1, l2, {1, 2, 3}), empty={3}))
            seen.add(tag.proof_branch)
            # two intervals: either one support is trivial, or both are full (complements empty)
            assert tag.tag in ("case_i", "case_star")
        assert seen == {"two-1", "two-2", "two-3", "two-4"}


class TestLambda:
    def test_values(self):
        assert paley_wiener_lambda((1, 1, 1)) == 0
        assert paley_wiener_lambda((0.5, 0.9, 1.0)) == pytest.approx(math.sqrt(0.5))

    def test_grid(self):
        g = alpha_grid(0.01)
        assert len(g) == 100 and g[0] == 0.01 and g[-1] == 1.0
        for a in g[::7]:
            for b in g[::11]:
                lam = paley_wiener_lambda((a, b, 1.0))
                assert 0 <= lam < 1
                assert lam == pytest.approx(math.sqrt(1 - min(a, b)))

    @pytest.mark.parametrize("bad", [(0, 1, 1), (1.2, 1, 1), (float("nan"), 1, 1), (1, 1)])
    def test_invalid(self, bad):
        with pytest.raises(InvalidBound):
            paley_wiener_lambda(bad)


class TestPeriodic:
    def test_canonical_all_riesz(self):
        res = sweep_canonical(3)
        assert len(res) == 64 and all(c.verdict == "riesz_basis" for _, c in res)

    def test_canonical_alphas_are_one_third(self):
        iv, fr = canonical_instance(3)
        assert periodic_alphas(3, iv, fr) == pytest.approx((1 / 3,) * 3)

    def test_four_interval_counterexample(self):
        iv, fr = canonical_instance(4)
        c = cross_check_periodic(4, iv, fr, [{1, 3}, {2, 4}, {1, 3}, {2, 4}])
        assert c.verdict == "neither" and c.exact_singular

    def test_partition_checks(self):
        iv, fr = canonical_instance(3)
        with pytest.raises(InvalidConfiguration):
            cross_check_periodic(3, [{0}, {0}, {2}], fr, [{1}, {2}, {3}])
        with pytest.raises(InvalidConfiguration):
            cross_check_periodic(3, iv, [(0,), (0,), (2,)], [{1}, {2}, {3}])
        with pytest.raises(InvalidConfiguration):
            cross_check_periodic(3, iv, fr, [{2}, {2}, {3}])

    @given(st.integers(3, 7), st.data())
    def test_random_grid_instances(self, n, data):
        # three consecutive runs of cells, coset offsets split with matching sizes
        cuts = sorted(data.draw(st.lists(st.integers(1, n - 1), min_size=2, max_size=2, unique=True)))
        bounds = [0, *cuts, n]
        intervals = [set(range(bounds[i], bounds[i + 1])) for i in range(3)]
        offs = data.draw(st.permutations(range(n)))
        freqs = [tuple(offs[bounds[i]:bounds[i + 1]]) for i in range(3)]
        alphas = periodic_alphas(n, intervals, freqs)
        if min(alphas) <= 1e-9:
            return  # some piece is not a Riesz basis of its interval; nothing is claimed
        mem = data.draw(st.sampled_from(admissible_memberships()))
        assert cross_check_periodic(n, intervals, freqs, mem).verdict == "riesz_basis"
