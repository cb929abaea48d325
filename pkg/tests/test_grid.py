import itertools
import math
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from maskriesz.errors import IncompatibleGrids, InvalidConfiguration, InvalidInput, InvalidInterval
from maskriesz.grid import (
    CosetSystem,
    GridSupport,
    RationalInterval,
    beurling_density,
    check_necessary_conditions,
    counting_density,
    normalize_supports,
    parse_support_line,
    parse_supports,
)


def iv(a, b):
    return RationalInterval(F(a), F(b))


class TestNormalize:
    def test_quarter_cells(self):
        n, sup = normalize_supports([[iv(0, "1/4"), iv("2/4", "3/4")]])
        assert n == 4 and sup[0].cells == {0, 2}

    def test_whole_interval(self):
        n, sup = normalize_supports([[iv(0, 1)]])
        assert n == 1 and sup[0].cells == {0}

    def test_lcm_of_denominators(self):
        n, sup = normalize_supports([[iv(0, "1/2"), iv("2/3", 1)]])
        assert n == 6 and sup[0].cells == {0, 1, 2, 4, 5}

    def test_shared_grid_across_sets(self):
        n, sup = normalize_supports([[iv(0, "1/2")], [iv("1/3", 1)]])
        assert n == 6
        assert sup[0].cells == {0, 1, 2} and sup[1].cells == {2, 3, 4, 5}

    def test_overlapping_intervals_merge(self):
        n, sup = normalize_supports([[iv(0, "1/2"), iv("1/4", "3/4")]])
        assert sup[0].measure == F(3, 4)

    def test_idempotent(self):
        n, sup = normalize_supports([[iv(0, "1/2"), iv("2/3", 1)], [iv("1/6", "1/3")]])
        n2, sup2 = normalize_supports([s.intervals() for s in sup])
        assert n2 == n and [s.cells for s in sup2] == [s.cells for s in sup]

    def test_errors(self):
        with pytest.raises(InvalidInterval):
            iv("1/2", "1/2")
        with pytest.raises(InvalidInput):
            normalize_supports([])


@st.composite
def rational_sets(draw):
    out = []
    for _ in range(draw(st.integers(1, 3))):
        ivs = []
        for _ in range(draw(st.integers(1, 3))):
            q = draw(st.integers(1, 12))
            a = draw(st.integers(0, q - 1))
            b = draw(st.integers(a + 1, q))
            ivs.append(RationalInterval(F(a, q), F(b, q)))
        out.append(ivs)
    return out


def _merged(ivs):
    out = []
    for r in sorted(ivs, key=lambda r: r.lo):
        if out and r.lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], r.hi)
        else:
            out.append([r.lo, r.hi])
    return out


@given(rational_sets())
def test_normalization_preserves_measure(sets):
    n, sup = normalize_supports(sets)
    for ivs, s in zip(sets, sup):
        assert s.measure == sum(hi - lo for lo, hi in _merged(ivs))
    # grid = lcm of the endpoints that survive merging within each set
    denoms = [x.denominator for ivs in sets for seg in _merged(ivs) for x in seg]
    assert n == math.lcm(*denoms)


class TestDensity:
    def test_examples(self):
        assert beurling_density(CosetSystem(5, (3,))) == F(1, 5)
        assert beurling_density(CosetSystem(1, (0,))) == 1
        assert beurling_density(CosetSystem(5, (0, 1, 2))) == F(3, 5)

    @pytest.mark.parametrize("n", [1, 2, 3, 7, 16, 32])
    def test_r_over_n(self, n):
        for r in range(1, n + 1):
            assert beurling_density(CosetSystem(n, tuple(range(0, r)))) == F(r, n)

    @given(st.integers(1, 12), st.data())
    def test_counting_definition_agrees(self, n, data):
        offs = data.draw(st.sets(st.integers(0, n - 1), min_size=1))
        sysm = CosetSystem(n, tuple(sorted(offs)))
        x = F(data.draw(st.integers(-50, 50)), data.draw(st.integers(1, 7)))
        # over whole periods the count is exact
        assert counting_density(sysm, x, 60 * n) == beurling_density(sysm)

    def test_duplicate_offsets_rejected(self):
        with pytest.raises(InvalidInput):
            CosetSystem(4, (1, 1))


def g(n, cells):
    return GridSupport(n, frozenset(cells))


class TestNC:
    def test_example2(self):
        rep = check_necessary_conditions(
            [g(5, {0, 1, 2}), g(5, {3}), g(5, {4})],
            [g(5, {3, 4}), g(5, {0, 1, 2, 4}), g(5, {0, 1, 2, 3})],
            [CosetSystem(5, (0, 1, 2)), CosetSystem(5, (3,)), CosetSystem(5, (4,))],
        )
        assert not rep.nc1
        assert rep.nc1_per_k[0] == (F(2, 5), F(3, 5), False)
        assert not rep.passed

    def test_example3(self):
        rep = check_necessary_conditions(
            [g(4, {k}) for k in range(4)],
            [g(4, {0, 2}), g(4, {1, 3}), g(4, {0, 2}), g(4, {1, 3})],
            [CosetSystem(4, (k,)) for k in range(4)],
        )
        assert rep.nc1 and rep.nc2

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_containing_supports_always_pass(self, n):
        base = [g(n, {k}) for k in range(n)]
        freqs = [CosetSystem(n, (k,)) for k in range(n)]
        subsets = [s for r in range(1, n + 1) for s in itertools.combinations(range(n), r)]
        for choice in itertools.product(subsets, repeat=n):
            if all(k in s for k, s in enumerate(choice)):
                rep = check_necessary_conditions(base, [g(n, s) for s in choice], freqs)
                assert rep.passed

    def test_errors(self):
        with pytest.raises(IncompatibleGrids):
            check_necessary_conditions([g(4, {0})], [g(5, {0})], [CosetSystem(4, (0,))])
        with pytest.raises(InvalidConfiguration):
            check_necessary_conditions([g(4, {0, 1}), g(4, {2, 3})], [g(4, {0}), g(4, {2, 3})],
                                       [CosetSystem(4, (0, 1)), CosetSystem(4, (2, 3))])


def test_parse_supports():
    text = "# comment\n0/1..1/4, 1/2..3/4\n0..1\n"
    sets = parse_supports(text)
    assert len(sets) == 2 and sets[0][1] == iv("1/2", "3/4")
    with pytest.raises(InvalidInput):
        parse_support_line("1/2-3/4")


def test_grid_support_bits_roundtrip():
    s = GridSupport.from_int(4, 0b0101)
    assert s.cells == {0, 2} and s.as_int() == 5 and GridSupport.from_bits(s.bits()) == s
    assert [str(r) for r in g(6, {0, 1, 2, 4, 5}).intervals()] == [str(iv(0, "1/2")), str(iv("2/3", 1))]
