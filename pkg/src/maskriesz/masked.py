"""Masked Fourier-type matrices and the classification of restricted exponential systems.

For offsets ``c_k`` in ``[0, N)`` and masks ``L_k`` (sets of grid cells),
the system ``union_k {exp(2 pi i lam t) chi_{S_k} : lam in N Z + c_k}`` with
``S_k`` the union of the cells in ``L_k`` is a frame, a Riesz sequence or a
Riesz basis of ``L^2(S)`` exactly when the K x L matrix

    w[k, l] = exp(-2 pi i c_k l / N)   if l in L_k, else 0

is injective, surjective or bijective. The optimal lower bound is
``sigma_min(W)**2 / N``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import linalg
from .errors import Incompatible, InvalidMask, InvalidOffsets, UnsupportedConfiguration
from .grid import GridSupport, as_fraction

VERDICTS = ("riesz_basis", "frame_only", "riesz_sequence_only", "neither")


def _unit_phase(fracs: np.ndarray) -> np.ndarray:
    return np.exp(-2j * np.pi * fracs)


@dataclass(frozen=True, eq=False)
class MaskedMatrix:
    modulus: int
    offsets: tuple
    column_labels: tuple
    masks: tuple
    matrix: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @property
    def integer_offsets(self) -> bool:
        return all(c.denominator == 1 for c in self.offsets)

    def root_of_unity_spec(self) -> Optional[linalg.RootOfUnitySpec]:
        """Exact exponent table, available only for integer offsets."""
        if not self.integer_offsets:
            return None
        n = self.modulus
        table = [
            [int(c * l) % n if l in mask else None for l in self.column_labels]
            for c, mask in zip(self.offsets, self.masks)
        ]
        return linalg.RootOfUnitySpec(n, tuple(map(tuple, table)))

    def mask_bits(self) -> list[list[int]]:
        return [[int(i in m) for i in range(self.modulus)] for m in self.masks]


def _coerce_mask(n: int, mask) -> frozenset:
    if isinstance(mask, GridSupport):
        if mask.modulus != n:
            raise InvalidMask(f"mask lives on Z_{mask.modulus}, expected Z_{n}")
        cells = mask.cells
    else:
        cells = frozenset(int(c) for c in mask)
    if not cells:
        raise InvalidMask("masks must be nonempty")
    if any(not 0 <= c < n for c in cells):
        raise InvalidMask(f"mask {sorted(cells)} has cells outside Z_{n}")
    return frozenset(cells)


def build_masked_matrix(n: int, offsets: Sequence, masks: Sequence) -> MaskedMatrix:
    if not isinstance(n, int) or n < 1:
        raise InvalidOffsets(f"modulus must be a positive integer, got {n!r}")
    offs = tuple(as_fraction(c) for c in offsets)
    if len(offs) != len(masks) or not offs:
        raise InvalidOffsets("need one mask per offset and at least one offset")
    if len(set(offs)) != len(offs):
        raise InvalidOffsets(f"duplicate offsets: {[str(c) for c in offs]}")
    if any(not 0 <= c < n for c in offs):
        raise InvalidOffsets(f"offsets must lie in [0, {n})")
    cell_sets = tuple(_coerce_mask(n, m) for m in masks)
    labels = tuple(sorted(set().union(*cell_sets)))

    # phase fraction (c * l / N) mod 1, reduced exactly before going to floats
    fr = np.array([[float((c * l / n) % 1) for l in labels] for c in offs])
    on = np.array([[l in m for l in labels] for m in cell_sets])
    w = np.where(on, _unit_phase(fr), 0)
    w.setflags(write=False)
    return MaskedMatrix(n, offs, labels, cell_sets, w)


@dataclass(frozen=True)
class Classification:
    verdict: str
    lower_bound: Optional[float]
    sigma_min: float
    exact_singular: Optional[bool] = None

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "lower_bound": self.lower_bound,
            "sigma_min": self.sigma_min,
            "exact_singular": self.exact_singular,
        }


def classify_matrix(w, n: int, spec: Optional[linalg.RootOfUnitySpec] = None,
                    rtol: float = linalg.SINGULAR_RTOL) -> Classification:
    """Rank/shape classification of an arbitrary K x L matrix on the N-grid."""
    w = linalg.as_complex_matrix(w)
    k, l = w.shape
    s = linalg.singular_values(w)
    smin = float(s[-1])
    full_rank = s[0] > 0 and smin > rtol * max(k, l) * s[0]
    exact = None
    if spec is not None and k == l:
        exact = linalg.exact_zero_det(spec)
        # the exact verdict is authoritative for square integer-offset systems
        full_rank = not exact
    if not full_rank:
        verdict = "neither"
    elif k == l:
        verdict = "riesz_basis"
    elif k > l:
        verdict = "frame_only"
    else:
        verdict = "riesz_sequence_only"
    bound = None if verdict == "neither" else smin * smin / n
    return Classification(verdict, bound, smin, exact)


def classify_system(m: MaskedMatrix, rtol: float = linalg.SINGULAR_RTOL, exact: bool = True) -> Classification:
    spec = m.root_of_unity_spec() if exact else None
    return classify_matrix(m.matrix, m.modulus, spec, rtol)


@dataclass(frozen=True, eq=False)
class DualData:
    """Inverse ``z`` of the masked matrix and the piecewise-constant factors.

    ``filter_G[k][j] = exp(-2 pi i c_k j / N) * z[j, k]``; the dual element
    paired with frequency ``lam in N Z + c_k`` is
    ``N * G_k(t) * exp(2 pi i lam t)`` where ``G_k`` equals ``filter_G[k][j]``
    on cell j.
    """

    z: np.ndarray
    filter_G: np.ndarray


def dual_basis(m: MaskedMatrix) -> DualData:
    n = m.modulus
    k, l = m.shape
    if not (k == l == n):
        raise UnsupportedConfiguration(f"dual basis needs K = L = N, got K={k}, L={l}, N={n}")
    if not m.integer_offsets:
        raise UnsupportedConfiguration("dual basis is only provided for integer offsets")
    z = linalg.invert(m.matrix)
    j = np.arange(n)
    c = np.array([int(ck) for ck in m.offsets])
    phase = np.exp(-2j * np.pi * ((c[:, None] * j[None, :]) % n) / n)
    g = phase * z.T
    return DualData(z, g)


def _interval_exponential(nu: np.ndarray, a: float, b: float) -> np.ndarray:
    """Exact value of the integral of exp(2 pi i nu t) over [a, b)."""
    nu = np.asarray(nu, dtype=float)
    out = np.empty(nu.shape, dtype=complex)
    zero = nu == 0
    out[zero] = b - a
    v = nu[~zero]
    out[~zero] = (np.exp(2j * np.pi * v * b) - np.exp(2j * np.pi * v * a)) / (2j * np.pi * v)
    return out


def biorthogonality_matrix(m: MaskedMatrix, d: DualData, mtrunc: int = 3) -> np.ndarray:
    """Gram block ``<dual_{k', m'}, primal_{k, m}>`` over |m|, |m'| <= mtrunc.

    Indexing is ``[k', m' + mtrunc, k, m + mtrunc]``. Each inner product is a
    sum over cells of closed-form integrals, so there is no quadrature error.
    """
    n = m.modulus
    if d.z.shape != (n, n):
        raise Incompatible(f"dual data has shape {d.z.shape}, expected {(n, n)}")
    c = np.array([float(ck) for ck in m.offsets])
    ms = np.arange(-mtrunc, mtrunc + 1)
    nm = len(ms)
    out = np.zeros((n, nm, n, nm), dtype=complex)
    for kp in range(n):
        for k in range(n):
            # frequency of dual times conjugate primal
            nu = (n * ms[:, None] + c[kp]) - (n * ms[None, :] + c[k])
            acc = np.zeros((nm, nm), dtype=complex)
            for j in sorted(m.masks[k]):
                acc += d.filter_G[kp, j] * _interval_exponential(nu, j / n, (j + 1) / n)
            out[kp, :, k, :] = n * acc
    return out


def verify_biorthogonality(m: MaskedMatrix, d: DualData, mtrunc: int = 3) -> float:
    """Largest deviation of the dual/primal Gram block from the identity."""
    g = biorthogonality_matrix(m, d, mtrunc)
    n, nm = g.shape[0], g.shape[1]
    eye = np.eye(n * nm).reshape(n, nm, n, nm)
    return float(np.max(np.abs(g - eye)))
