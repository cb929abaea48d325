"""Supports on the N-grid, coset frequency sets, and the density conditions.

Everything in this module is exact: endpoints and densities are
``fractions.Fraction`` values and no floating point is involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import IncompatibleGrids, InvalidConfiguration, InvalidInput, InvalidInterval


def as_fraction(value) -> Fraction:
    """Parse ints, Fractions and ``"p/q"`` strings into a reduced Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InvalidInput(f"not a rational number: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidInput(f"not a rational number: {value!r}") from exc
    raise InvalidInput(f"not a rational number: {value!r}")


def format_fraction(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True, order=True)
class RationalInterval:
    """Half-open interval ``[lo, hi)`` inside ``[0, 1]``."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = as_fraction(self.lo), as_fraction(self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if not lo < hi:
            raise InvalidInterval(f"empty or reversed interval [{lo}, {hi})")
        if lo < 0 or hi > 1:
            raise InvalidInterval(f"interval [{lo}, {hi}) not inside [0, 1]")

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    def __str__(self):
        return f"{format_fraction(self.lo)}..{format_fraction(self.hi)}"


@dataclass(frozen=True)
class GridSupport:
    """A union of grid cells ``[l/N, (l+1)/N)`` stored as a set of cell indices."""

    modulus: int
    cells: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if not isinstance(self.modulus, int) or self.modulus < 1:
            raise InvalidInput(f"modulus must be a positive integer, got {self.modulus!r}")
        cells = frozenset(int(c) for c in self.cells)
        bad = [c for c in cells if not 0 <= c < self.modulus]
        if bad:
            raise InvalidInput(f"cells {sorted(bad)} outside Z_{self.modulus}")
        object.__setattr__(self, "cells", cells)

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "GridSupport":
        return cls(len(bits), frozenset(i for i, b in enumerate(bits) if b))

    @classmethod
    def from_int(cls, modulus: int, value: int) -> "GridSupport":
        if value < 0 or value >> modulus:
            raise InvalidInput(f"mask {value:#b} does not fit in {modulus} cells")
        return cls(modulus, frozenset(i for i in range(modulus) if value >> i & 1))

    @property
    def measure(self) -> Fraction:
        return Fraction(len(self.cells), self.modulus)

    def bits(self) -> list[int]:
        return [int(i in self.cells) for i in range(self.modulus)]

    def as_int(self) -> int:
        return sum(1 << c for c in self.cells)

    def intervals(self) -> list[RationalInterval]:
        """Maximal runs of consecutive cells, as rational intervals."""
        out = []
        run_start = None
        for c in range(self.modulus + 1):
            inside = c in self.cells
            if inside and run_start is None:
                run_start = c
            elif not inside and run_start is not None:
                out.append(RationalInterval(Fraction(run_start, self.modulus), Fraction(c, self.modulus)))
                run_start = None
        return out

    def issubset(self, other: "GridSupport") -> bool:
        return self.cells <= other.cells


@dataclass(frozen=True)
class CosetSystem:
    """The frequency set ``union_k (N Z + c_k)`` for distinct offsets in ``[0, N)``."""

    modulus: int
    offsets: tuple = ()

    def __post_init__(self):
        if not isinstance(self.modulus, int) or self.modulus < 1:
            raise InvalidInput(f"modulus must be a positive integer, got {self.modulus!r}")
        offsets = tuple(as_fraction(c) for c in self.offsets)
        if len(set(offsets)) != len(offsets):
            raise InvalidInput(f"offsets must be pairwise distinct: {offsets}")
        for c in offsets:
            if not 0 <= c < self.modulus:
                raise InvalidInput(f"offset {c} outside [0, {self.modulus})")
        object.__setattr__(self, "offsets", offsets)

    def contains(self, value) -> bool:
        value = as_fraction(value)
        return any((value - c) % self.modulus == 0 for c in self.offsets)

    def union(self, other: "CosetSystem") -> "CosetSystem":
        if other.modulus != self.modulus:
            raise IncompatibleGrids(f"moduli differ: {self.modulus} vs {other.modulus}")
        merged = list(self.offsets) + [c for c in other.offsets if c not in self.offsets]
        return CosetSystem(self.modulus, tuple(merged))

    def offset_strings(self) -> list[str]:
        return [format_fraction(c) for c in self.offsets]


def _merge(intervals: Iterable[RationalInterval]) -> list[RationalInterval]:
    merged: list[list[Fraction]] = []
    for iv in sorted(intervals):
        if merged and iv.lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], iv.hi)
        else:
            merged.append([iv.lo, iv.hi])
    return [RationalInterval(lo, hi) for lo, hi in merged]


def _coerce_interval(iv) -> RationalInterval:
    if isinstance(iv, RationalInterval):
        return iv
    lo, hi = iv
    return RationalInterval(as_fraction(lo), as_fraction(hi))


def normalize_supports(sets) -> tuple[int, list[GridSupport]]:
    """Put finite unions of rational intervals on one common grid.

    Intervals within a set are merged first; the grid size is the least
    common multiple of all (reduced) endpoint denominators of the merged
    sets. Returns ``(N, supports)``.
    """
    sets = list(sets)
    if not sets:
        raise InvalidInput("at least one support set is required")
    merged_sets = []
    for s in sets:
        ivs = [_coerce_interval(iv) for iv in s]
        if not ivs:
            raise InvalidInput("every support set needs at least one interval")
        merged_sets.append(_merge(ivs))

    n = 1
    for ivs in merged_sets:
        for iv in ivs:
            n = math.lcm(n, iv.lo.denominator, iv.hi.denominator)

    supports = []
    for ivs in merged_sets:
        cells = set()
        for iv in ivs:
            cells.update(range(int(iv.lo * n), int(iv.hi * n)))
        supports.append(GridSupport(n, frozenset(cells)))
    return n, supports


def beurling_density(system: CosetSystem) -> Fraction:
    return Fraction(len(system.offsets), system.modulus)


def counting_density(system: CosetSystem, x, r: int) -> Fraction:
    """``|Lambda ∩ [x, x + r)| / r`` counted directly; used as an oracle."""
    x = as_fraction(x)
    n = system.modulus
    # c + N j lies in [x, x + r)  <=>  j in [(x - c)/N, (x + r - c)/N)
    count = sum(math.ceil((x + r - c) / n) - math.ceil((x - c) / n) for c in system.offsets)
    return Fraction(count, r)


@dataclass(frozen=True)
class NCReport:
    """Per-index verdicts for the two necessary conditions.

    ``nc1_per_k[k] = (|S_k|, D(Lambda_k), passed)`` and
    ``nc2_per_k[k] = (D(covering frequencies), |I_k|, passed)``.
    """

    nc1_per_k: tuple
    nc2_per_k: tuple

    @property
    def nc1(self) -> bool:
        return all(p for _, _, p in self.nc1_per_k)

    @property
    def nc2(self) -> bool:
        return all(p for _, _, p in self.nc2_per_k)

    @property
    def passed(self) -> bool:
        return self.nc1 and self.nc2


def check_necessary_conditions(base_cells, supports, freqs) -> NCReport:
    base_cells, supports, freqs = list(base_cells), list(supports), list(freqs)
    if not (len(base_cells) == len(supports) == len(freqs)) or not base_cells:
        raise InvalidConfiguration("base cells, supports and frequency sets must have equal nonzero length")
    moduli = {g.modulus for g in base_cells + supports} | {f.modulus for f in freqs}
    if len(moduli) != 1:
        raise IncompatibleGrids(f"arguments live on different grids: {sorted(moduli)}")
    seen: set[int] = set()
    for b in base_cells:
        if seen & b.cells:
            raise InvalidConfiguration("base intervals must be pairwise disjoint")
        seen |= b.cells
    for k, s in enumerate(supports):
        rebuilt = set()
        for b in base_cells:
            if b.cells <= s.cells:
                rebuilt |= b.cells
        if rebuilt != set(s.cells):
            raise InvalidConfiguration(f"support {k} is not a union of base intervals")

    nc1 = []
    for s, lam in zip(supports, freqs):
        d = beurling_density(lam)
        nc1.append((s.measure, d, s.measure >= d))

    nc2 = []
    n = next(iter(moduli))
    for base in base_cells:
        covering = CosetSystem(n, ())
        for s, lam in zip(supports, freqs):
            if base.cells <= s.cells:
                covering = covering.union(lam)
        d = beurling_density(covering)
        nc2.append((d, base.measure, d >= base.measure))
    return NCReport(tuple(nc1), tuple(nc2))


def parse_support_line(line: str) -> list[RationalInterval]:
    """``"0/1..1/4, 1/2..3/4"`` -> two intervals."""
    out = []
    for chunk in line.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if ".." not in chunk:
            raise InvalidInput(f"interval {chunk!r} is not of the form p/q..r/s")
        lo, hi = chunk.split("..", 1)
        out.append(RationalInterval(as_fraction(lo), as_fraction(hi)))
    if not out:
        raise InvalidInput(f"no intervals in line {line!r}")
    return out


def parse_supports(text: str) -> list[list[RationalInterval]]:
    return [parse_support_line(ln) for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
