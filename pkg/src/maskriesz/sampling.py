"""Multi-channel bandpass sampling for signals with spectrum in [-1/2, 1/2).

Channel k low-passes the signal to ``S_k`` (a union of the N cells
``-1/2 + [j/N, (j+1)/N)``) and samples at ``N m - rho(k)``. When the masked
matrix for offsets ``rho(k)`` and masks ``S_k`` is invertible with inverse
``z``, the signal is recovered from

    f_hat(w) = sum_k sum_m s(k, m) N exp(2 pi i (-N m + rho(k)) w) G_k(w),
    G_k = sum_j exp(-2 pi i rho(k) j / N) z[j, k] on cell j.

Everything here is done in the frequency domain. Spectra are piecewise
constant on a refinement of the N-grid, optionally plus a trigonometric
polynomial, and every integral is evaluated in closed form.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import linalg
from .errors import Incompatible, InvalidConfiguration, InvalidInput, SingularMatrix, UnsupportedConfiguration
from .grid import GridSupport
from .masked import build_masked_matrix
from .permsearch import PermutationAssignment, theorem1_construct

DEFAULT_MTRUNC = 2048


def _phase(freq: np.ndarray, num: np.ndarray, den: int) -> np.ndarray:
    """``exp(2 pi i freq * num / den)`` with the exponent reduced in integers."""
    r = (np.asarray(freq, dtype=np.int64) * np.asarray(num, dtype=np.int64)) % den
    return np.exp(2j * np.pi * r / den)


def _segment_integrals(freq: np.ndarray, lo: np.ndarray, den: int, width: int) -> np.ndarray:
    """Integral of ``exp(2 pi i f w)`` over ``[lo/den, (lo+width)/den)``, broadcast over f and lo."""
    freq = np.asarray(freq, dtype=np.int64)
    lo = np.asarray(lo, dtype=np.int64)
    f, a = np.broadcast_arrays(freq, lo)
    out = np.empty(f.shape, dtype=complex)
    zero = f == 0
    out[zero] = width / den
    fz, az = f[~zero], a[~zero]
    out[~zero] = (_phase(fz, az + width, den) - _phase(fz, az, den)) / (2j * np.pi * fz)
    return out


@dataclass(frozen=True, eq=False)
class SpectrumFunction:
    """Spectrum on [-1/2, 1/2): piecewise constant on ``grid * N`` subcells plus a trig part.

    ``trig`` maps an integer frequency ``lam`` to the coefficient of
    ``exp(2 pi i lam w)``. Most callers leave it empty.
    """

    modulus: int
    grid: int
    values: np.ndarray
    trig: dict = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.modulus, int) or self.modulus < 1 or not isinstance(self.grid, int) or self.grid < 1:
            raise InvalidInput("modulus and grid refinement must be positive integers")
        v = np.asarray(self.values, dtype=complex).reshape(-1)
        if v.size != self.modulus * self.grid:
            raise InvalidInput(f"expected {self.modulus * self.grid} subcell values, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise InvalidInput("spectrum values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        trig = {}
        for lam, c in self.trig.items():
            if int(lam) != lam:
                raise InvalidInput(f"trigonometric frequencies must be integers, got {lam!r}")
            trig[int(lam)] = complex(c)
        object.__setattr__(self, "trig", dict(sorted(trig.items())))

    @property
    def subcells(self) -> int:
        return self.modulus * self.grid

    @property
    def den(self) -> int:
        # subcell i is [(2i - M)/(2M), (2i + 2 - M)/(2M)) with M = subcells
        return 2 * self.subcells

    def subcell_lo(self) -> np.ndarray:
        return 2 * np.arange(self.subcells) - self.subcells

    @classmethod
    def zeros(cls, modulus: int, grid: int = 1) -> "SpectrumFunction":
        return cls(modulus, grid, np.zeros(modulus * grid, dtype=complex))

    @classmethod
    def indicator(cls, modulus: int, cells, grid: int = 1) -> "SpectrumFunction":
        v = np.zeros(modulus * grid, dtype=complex)
        for j in cells:
            v[j * grid : (j + 1) * grid] = 1
        return cls(modulus, grid, v)

    @classmethod
    def random(cls, modulus: int, grid: int, seed: int) -> "SpectrumFunction":
        rng = np.random.default_rng(seed)
        n = modulus * grid
        return cls(modulus, grid, rng.standard_normal(n) + 1j * rng.standard_normal(n))

    @classmethod
    def trigonometric(cls, modulus: int, coeffs: dict, grid: int = 1) -> "SpectrumFunction":
        return cls(modulus, grid, np.zeros(modulus * grid, dtype=complex), dict(coeffs))

    def refine(self, factor: int) -> "SpectrumFunction":
        """Same function on a grid ``factor`` times finer."""
        return SpectrumFunction(self.modulus, self.grid * factor, np.repeat(self.values, factor), self.trig)

    def norm(self) -> float:
        return float(np.sqrt(_l2_squared(self, None)))

    def evaluate(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        idx = np.clip(np.floor((w + 0.5) * self.subcells).astype(int), 0, self.subcells - 1)
        out = self.values[idx].astype(complex)
        for lam, c in self.trig.items():
            out = out + c * np.exp(2j * np.pi * lam * w)
        return out

    def to_csv(self) -> str:
        if self.trig:
            raise UnsupportedConfiguration("CSV export covers piecewise-constant spectra only")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["subcell", "real", "imag"])
        for i, v in enumerate(self.values):
            w.writerow([i, repr(float(v.real)), repr(float(v.imag))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, modulus: int) -> "SpectrumFunction":
        rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
        if rows and rows[0][0].strip() == "subcell":
            rows = rows[1:]
        try:
            entries = sorted((int(r[0]), complex(float(r[1]), float(r[2]))) for r in rows)
        except (ValueError, IndexError) as exc:
            raise InvalidInput(f"malformed spectrum CSV: {exc}") from None
        if [i for i, _ in entries] != list(range(len(entries))):
            raise InvalidInput("spectrum CSV must list subcells 0..M-1 exactly once")
        if not entries or len(entries) % modulus:
            raise InvalidInput(f"{len(entries)} subcells is not a positive multiple of N={modulus}")
        return cls(modulus, len(entries) // modulus, np.array([v for _, v in entries]))


@dataclass(frozen=True, eq=False)
class FilterBank:
    """Reconstruction filters for channel supports ``masks`` and offsets ``rho``.

    ``G[k, j]`` is the value of ``G_k`` on cell ``-1/2 + [j/N, (j+1)/N)``.
    """

    modulus: int
    rho: PermutationAssignment
    G: np.ndarray
    masks: tuple
    z: np.ndarray

    @property
    def channels(self) -> int:
        return len(self.masks)


def _coerce_masks(n: int, masks) -> tuple:
    out = []
    for m in masks:
        if isinstance(m, GridSupport):
            if m.modulus != n:
                raise InvalidConfiguration(f"mask lives on Z_{m.modulus}, expected Z_{n}")
            out.append(m.cells)
        else:
            out.append(GridSupport(n, frozenset(int(c) for c in m)).cells)
    return tuple(out)


def build_filters(n: int, masks: Sequence, rho: Optional[PermutationAssignment] = None, workers: int = 1) -> FilterBank:
    """Filters for N channels where channel k's support contains cell k.

    ``rho`` gives the sampling offsets (0-based values). Without it, the
    permutation search picks offsets that make the masked matrix invertible.
    """
    if not isinstance(n, int) or n < 1:
        raise InvalidConfiguration("N must be a positive integer")
    cells = _coerce_masks(n, masks)
    if len(cells) != n:
        raise InvalidConfiguration(f"need one mask per cell: {len(cells)} masks for N={n}")
    for k, s in enumerate(cells):
        if k not in s:
            raise InvalidConfiguration(f"mask {k} must contain cell {k}")
    if rho is None:
        con = theorem1_construct(n, list(range(n)), [set(s) for s in cells], workers=workers)
        rho = PermutationAssignment(tuple(int(c) for c in con.offsets))
    elif not isinstance(rho, PermutationAssignment):
        rho = PermutationAssignment(tuple(rho))
    if rho.size != n:
        raise InvalidConfiguration(f"rho has size {rho.size}, expected {n}")
    mm = build_masked_matrix(n, rho.map, cells)
    try:
        z = linalg.invert(mm.matrix)
    except SingularMatrix:
        raise InvalidConfiguration(f"masked matrix is singular for rho={rho.map}") from None
    j = np.arange(n)
    c = np.array(rho.map)
    g = np.exp(-2j * np.pi * ((c[:, None] * j[None, :]) % n) / n) * z.T
    g.setflags(write=False)
    return FilterBank(n, rho, g, cells, z)


def orthonormal_bank(n: int) -> FilterBank:
    return build_filters(n, [range(n)] * n, PermutationAssignment.identity(n))


@dataclass(frozen=True, eq=False)
class Samples:
    """``values[k, m + mtrunc]`` is channel k's sample at ``N m - rho(k)``."""

    modulus: int
    rho: tuple
    mtrunc: int
    values: np.ndarray


def _channel_integrals(fhat: SpectrumFunction, subcells: np.ndarray, freqs: np.ndarray) -> np.ndarray:
    """``int f_hat(w) exp(2 pi i freq w)`` over the listed subcells, for each freq."""
    den = fhat.den
    lo = fhat.subcell_lo()[subcells]
    seg = _segment_integrals(freqs[:, None], lo[None, :], den, 2)
    out = seg @ fhat.values[subcells]
    for lam, c in fhat.trig.items():
        out = out + c * _segment_integrals((freqs + lam)[:, None], lo[None, :], den, 2).sum(axis=1)
    return out


def _check_compat(fhat: SpectrumFunction, bank: FilterBank):
    if fhat.modulus != bank.modulus:
        raise Incompatible(f"spectrum lives on N={fhat.modulus}, bank on N={bank.modulus}")


def generalized_samples(fhat: SpectrumFunction, bank: FilterBank, mtrunc: int = DEFAULT_MTRUNC) -> Samples:
    """``s(k, m) = int f_hat chi_{S_k} exp(2 pi i (N m - rho(k)) w) dw`` for ``|m| <= mtrunc``."""
    _check_compat(fhat, bank)
    if not isinstance(mtrunc, int) or mtrunc < 1:
        raise InvalidInput("mtrunc must be a positive integer")
    n = bank.modulus
    ms = np.arange(-mtrunc, mtrunc + 1, dtype=np.int64)
    out = np.zeros((bank.channels, ms.size), dtype=complex)
    for k, cells in enumerate(bank.masks):
        sub = np.concatenate([np.arange(j * fhat.grid, (j + 1) * fhat.grid) for j in sorted(cells)])
        out[k] = _channel_integrals(fhat, sub, n * ms - bank.rho.map[k])
    out.setflags(write=False)
    return Samples(n, bank.rho.map, mtrunc, out)


def _autocorr_integral(q: np.ndarray, lo: int, den: int, width: int) -> float:
    """``int |sum_d q[d] exp(2 pi i (f0 + d) w)|^2`` over one segment; the base frequency f0 drops out."""
    size = 1 << int(2 * q.size - 1).bit_length()
    spec = np.fft.fft(q, size)
    acorr = np.fft.ifft(spec * np.conj(spec))
    lags = np.arange(-(q.size - 1), q.size)
    vals = np.concatenate([acorr[size - (q.size - 1):], acorr[: q.size]])
    return float(np.real(np.sum(vals * _segment_integrals(lags, np.int64(lo), den, width))))


def _frequency_layout(n: int, mtrunc: int, fhat: Optional[SpectrumFunction]):
    lo, hi = -n * mtrunc, n * mtrunc + n - 1
    if fhat is not None and fhat.trig:
        lo, hi = min(lo, min(fhat.trig)), max(hi, max(fhat.trig))
    return lo, hi


def _l2_squared(fhat: SpectrumFunction, residual_trig) -> float:
    """Squared L2 norm of ``f_hat - residual`` where the residual is a per-cell coefficient table."""
    total = 0.0
    lo_all = fhat.subcell_lo()
    if residual_trig is None:
        f_lo, f_hi = _frequency_layout(fhat.modulus, 0, fhat)
    else:
        f_lo, f_hi, table = residual_trig
    base = np.zeros(f_hi - f_lo + 1, dtype=complex)
    for lam, c in fhat.trig.items():
        base[lam - f_lo] += c
    for i in range(fhat.subcells):
        q = base.copy()
        q[-f_lo] += fhat.values[i]
        if residual_trig is not None:
            q -= table[i // fhat.grid]
        total += _autocorr_integral(q, lo_all[i], fhat.den, 2)
    return max(total, 0.0)


@dataclass(frozen=True, eq=False)
class Reconstruction:
    """Truncated reconstruction of a spectrum together with its exact L2 error.

    The reconstruction is a trigonometric polynomial on each cell;
    ``coefficients[j, f - freq_lo]`` is its coefficient at frequency f on
    cell j.
    """

    bank: FilterBank
    mtrunc: int
    freq_lo: int
    coefficients: np.ndarray
    abs_error: Optional[float] = None
    reference_norm: Optional[float] = None

    @property
    def relative_error(self) -> Optional[float]:
        if self.abs_error is None:
            return None
        if self.reference_norm == 0:
            return 0.0 if self.abs_error == 0 else float("inf")
        return self.abs_error / self.reference_norm

    def evaluate(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        n = self.bank.modulus
        cell = np.clip(np.floor((w + 0.5) * n).astype(int), 0, n - 1)
        freqs = self.freq_lo + np.arange(self.coefficients.shape[1])
        return np.array([self.coefficients[c] @ np.exp(2j * np.pi * freqs * x) for c, x in zip(cell.ravel(), w.ravel())]).reshape(w.shape)

    def cell_averages(self, grid: int = 1) -> SpectrumFunction:
        """Project onto piecewise constants on ``grid * N`` subcells (exact subcell means)."""
        n = self.bank.modulus
        proto = SpectrumFunction.zeros(n, grid)
        freqs = self.freq_lo + np.arange(self.coefficients.shape[1])
        vals = np.empty(proto.subcells, dtype=complex)
        for i, lo in enumerate(proto.subcell_lo()):
            integ = _segment_integrals(freqs, np.int64(lo), proto.den, 2)
            vals[i] = (self.coefficients[i // grid] @ integ) * proto.subcells
        return SpectrumFunction(n, grid, vals)


def reconstruct(samples: Samples, bank: FilterBank, mtrunc: Optional[int] = None,
                reference: Optional[SpectrumFunction] = None) -> Reconstruction:
    """Partial sum of the sampling series over ``|m| <= mtrunc``, with exact L2 error against ``reference``."""
    mtrunc = samples.mtrunc if mtrunc is None else mtrunc
    if samples.modulus != bank.modulus or tuple(samples.rho) != bank.rho.map:
        raise Incompatible("samples were taken with a different filter bank")
    if mtrunc != samples.mtrunc or samples.values.shape != (bank.channels, 2 * mtrunc + 1):
        raise Incompatible(f"samples cover |m| <= {samples.mtrunc}, requested {mtrunc}")
    n = bank.modulus
    if reference is not None:
        _check_compat(reference, bank)
    f_lo, f_hi = _frequency_layout(n, mtrunc, reference)
    ms = np.arange(-mtrunc, mtrunc + 1)
    per_channel = np.zeros((bank.channels, f_hi - f_lo + 1), dtype=complex)
    for k in range(bank.channels):
        per_channel[k, -n * ms + bank.rho.map[k] - f_lo] = n * samples.values[k]
    table = bank.G.T @ per_channel  # row j: coefficients on cell j
    table.setflags(write=False)
    abs_err = ref_norm = None
    if reference is not None:
        abs_err = float(np.sqrt(_l2_squared(reference, (f_lo, f_hi, table))))
        ref_norm = reference.norm()
    return Reconstruction(bank, mtrunc, f_lo, table, abs_err, ref_norm)


def error_report(fhat: SpectrumFunction, bank: FilterBank, mtruncs: Sequence[int]) -> list[tuple[int, float]]:
    out = []
    for m in mtruncs:
        rec = reconstruct(generalized_samples(fhat, bank, m), bank, m, reference=fhat)
        out.append((int(m), rec.relative_error))
    return out


def error_report_csv(rows: Sequence[tuple[int, float]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["mtrunc", "relative_error"])
    for m, e in rows:
        w.writerow([m, repr(float(e))])
    return buf.getvalue()


EXAMPLE1_MASKS = (frozenset({0, 2}), frozenset(range(4)), frozenset({0, 2}), frozenset(range(4)))
