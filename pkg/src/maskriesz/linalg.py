"""Small dense complex linear algebra and exact tests for root-of-unity matrices.

Numeric routines wrap LAPACK through numpy. The exact layer works in the
group ring Z[x]/(x^N - 1): a matrix whose entries are powers of
``omega = exp(-2 pi i / N)`` (or zero) has a determinant that is an integer
combination of the N powers of omega, and that combination vanishes in
Q(omega) exactly when its polynomial is divisible by the N-th cyclotomic
polynomial.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidInput, ShapeError, SingularMatrix, SizeLimit

# sigma_min <= SINGULAR_RTOL * max(K, L) * sigma_max flags a matrix as singular
SINGULAR_RTOL = 1e-9


def as_complex_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ShapeError(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInput("matrix has non-finite entries")
    return a


def _square(m) -> np.ndarray:
    a = as_complex_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {a.shape}")
    return a


def det(m) -> complex:
    """Determinant by LU with partial pivoting."""
    return complex(np.linalg.det(_square(m)))


def singular_values(m) -> np.ndarray:
    return np.linalg.svd(as_complex_matrix(m), compute_uv=False)


def sigma_min(m) -> float:
    """Smallest of the min(K, L) singular values."""
    return float(singular_values(m)[-1])


def is_numerically_singular(m, rtol: float = SINGULAR_RTOL) -> bool:
    a = as_complex_matrix(m)
    s = np.linalg.svd(a, compute_uv=False)
    return bool(s[-1] <= rtol * max(a.shape) * s[0])


def invert(m, rtol: float = SINGULAR_RTOL) -> np.ndarray:
    a = _square(m)
    s = np.linalg.svd(a, compute_uv=False)
    if s[-1] <= rtol * a.shape[0] * s[0]:
        raise SingularMatrix(f"matrix is singular (sigma_min={s[-1]:.3e}, sigma_max={s[0]:.3e})")
    return np.linalg.inv(a)


def fourier_matrix(n: int, rows: Optional[Sequence[int]] = None) -> np.ndarray:
    """``[exp(-2 pi i r l / n)]`` for r in ``rows`` (default 0..n-1) and l in 0..n-1."""
    rows = np.arange(n) if rows is None else np.asarray(rows)
    e = (rows[:, None] * np.arange(n)[None, :]) % n
    return np.exp(-2j * np.pi * e / n)


# ---------------------------------------------------------------------------
# exact layer


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Integer coefficients of Phi_n, lowest degree first."""
    if n < 1:
        raise InvalidInput("cyclotomic order must be positive")
    poly = [-1] + [0] * (n - 1) + [1]  # x^n - 1
    for d in range(1, n):
        if n % d == 0:
            poly = _exact_divide(poly, list(cyclotomic_polynomial(d)))
    return tuple(poly)


def _exact_divide(num: list[int], den: list[int]) -> list[int]:
    num = list(num)
    q = [0] * (len(num) - len(den) + 1)
    for i in range(len(q) - 1, -1, -1):
        coef = num[i + len(den) - 1] // den[-1]
        q[i] = coef
        for j, d in enumerate(den):
            num[i + j] -= coef * d
    assert not any(num), "non-exact cyclotomic division"
    return q


def reduce_mod_cyclotomic(coeffs: np.ndarray, n: int) -> np.ndarray:
    """Remainder of each row of ``coeffs`` (degree < n polynomials) modulo Phi_n."""
    phi = np.array(cyclotomic_polynomial(n), dtype=np.int64)
    deg = len(phi) - 1
    r = np.array(coeffs, dtype=np.int64, copy=True)
    for top in range(r.shape[-1] - 1, deg - 1, -1):
        lead = r[..., top].copy()
        r[..., top - deg : top + 1] -= lead[..., None] * phi
    return r[..., :deg]


@dataclass(frozen=True)
class RootOfUnitySpec:
    """Square or rectangular matrix with entries ``omega**e`` or zero (``None``)."""

    order: int
    exponents: tuple

    def __post_init__(self):
        if not isinstance(self.order, int) or self.order < 1:
            raise InvalidInput("order must be a positive integer")
        rows = tuple(tuple(None if e is None else int(e) % self.order for e in row) for row in self.exponents)
        if not rows or len({len(r) for r in rows}) != 1 or not rows[0]:
            raise ShapeError("exponent table must be a non-empty rectangle")
        object.__setattr__(self, "exponents", rows)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.exponents), len(self.exponents[0])

    def exponent_array(self) -> np.ndarray:
        """Integer array with -1 standing for a zero entry."""
        return np.array([[-1 if e is None else e for e in row] for row in self.exponents], dtype=np.int64)

    def to_matrix(self) -> np.ndarray:
        e = self.exponent_array()
        out = np.exp(-2j * np.pi * np.where(e < 0, 0, e) / self.order)
        out[e < 0] = 0
        return out

    def to_json(self) -> dict:
        return {"order": self.order, "exponents": [list(r) for r in self.exponents]}

    @classmethod
    def from_json(cls, data: dict) -> "RootOfUnitySpec":
        return cls(int(data["order"]), tuple(tuple(r) for r in data["exponents"]))


_EXACT_MAX_K = 16


def _inversions_above(n: int) -> np.ndarray:
    """``above[S, c]`` = number of columns in subset S that are greater than c."""
    states = np.arange(1 << n, dtype=np.int64)
    above = np.zeros((1 << n, n), dtype=np.int64)
    for c in range(n):
        higher = (states >> (c + 1)).astype(np.int64)
        above[:, c] = np.bitwise_count(higher.astype(np.uint64)).astype(np.int64)
    return above


def group_ring_det(order: int, exponents: np.ndarray) -> np.ndarray:
    """Determinants in Z[x]/(x^order - 1) for a batch of exponent tables.

    ``exponents`` has shape (B, K, K) with -1 for zero entries. Returns an
    int64 array of shape (B, order): coefficient j counts signed permutations
    whose exponent sum is j mod order. Laplace expansion row by row over
    subsets of used columns.
    """
    e = np.asarray(exponents, dtype=np.int64)
    if e.ndim == 2:
        e = e[None]
    b, k, k2 = e.shape
    if k != k2:
        raise ShapeError(f"expected square exponent tables, got {k}x{k2}")
    if k > _EXACT_MAX_K:
        raise SizeLimit(f"exact determinant limited to K <= {_EXACT_MAX_K}")
    n = order
    nstates = 1 << k
    popcount = np.bitwise_count(np.arange(nstates, dtype=np.uint64)).astype(np.int64)
    above = _inversions_above(k)
    f = np.zeros((nstates, b, n), dtype=np.int64)
    f[0, :, 0] = 1
    cols = np.arange(n)
    for r in range(k):
        layer = np.flatnonzero(popcount == r)
        for c in range(k):
            src = layer[(layer >> c) & 1 == 0]
            if src.size == 0:
                continue
            live = e[:, r, c] >= 0
            if not live.any():
                continue
            shift = np.where(live, e[:, r, c], 0)
            # multiplying by x^shift rolls coefficient j to j + shift
            idx = (cols[None, :] - shift[:, None]) % n
            rolled = f[src][:, np.arange(b)[:, None], idx]
            rolled[:, ~live, :] = 0
            sign = np.where(above[src, c] % 2 == 0, 1, -1)
            f[src | (1 << c)] += sign[:, None, None] * rolled
    return f[nstates - 1]


def exact_zero_det_batch(order: int, exponents: np.ndarray) -> np.ndarray:
    coeffs = group_ring_det(order, exponents)
    return ~np.any(reduce_mod_cyclotomic(coeffs, order) != 0, axis=-1)


def exact_zero_det(spec: RootOfUnitySpec) -> bool:
    """True iff the determinant of ``spec`` is exactly zero in Q(omega)."""
    k, l = spec.shape
    if k != l:
        raise ShapeError(f"exact determinant needs a square table, got {k}x{l}")
    return bool(exact_zero_det_batch(spec.order, spec.exponent_array()[None])[0])


# ---------------------------------------------------------------------------
# binary masks and generalized diagonals


@dataclass
class BinaryMask:
    bits: np.ndarray
    diag_count_R: Optional[int] = None

    def __post_init__(self):
        a = np.asarray(self.bits)
        if a.ndim != 2:
            raise ShapeError("mask must be two-dimensional")
        if not np.isin(a, (0, 1)).all():
            raise InvalidInput("mask entries must be 0 or 1")
        self.bits = a.astype(np.int8)

    @property
    def shape(self) -> tuple[int, int]:
        return self.bits.shape

    def R(self) -> int:
        if self.diag_count_R is None:
            self.diag_count_R = permanent_binary(self)
        return self.diag_count_R


PERMANENT_MAX_K = 24
# three primes below 2**31; their product exceeds 24!
_PRIMES = (2147483647, 2147483629, 2147483587)


def _permanent_mod(rows: list[int], k: int, p: int) -> int:
    nstates = 1 << k
    popcount = np.bitwise_count(np.arange(nstates, dtype=np.uint64)).astype(np.int64)
    order = np.argsort(popcount, kind="stable")
    bounds = np.searchsorted(popcount[order], np.arange(k + 2))
    f = np.zeros(nstates, dtype=np.int64)
    f[0] = 1
    for r in range(k):
        layer = order[bounds[r] : bounds[r + 1]]
        layer = layer[f[layer] != 0]
        for c in range(k):
            if not rows[r] >> c & 1:
                continue
            src = layer[(layer >> c) & 1 == 0]
            f[src | (1 << c)] += f[src]
        nxt = order[bounds[r + 1] : bounds[r + 2]]
        f[nxt] %= p
    return int(f[nstates - 1])


def permanent_binary(mask) -> int:
    """Number of all-ones generalized diagonals (the permanent of a 0/1 matrix).

    Dynamic program over the set of columns already used by the first r
    rows, run modulo three primes and recombined with the Chinese remainder
    theorem so the count is exact up to K = 24.
    """
    m = mask if isinstance(mask, BinaryMask) else BinaryMask(np.asarray(mask))
    k, l = m.shape
    if k != l:
        raise ShapeError(f"permanent needs a square mask, got {k}x{l}")
    if k > PERMANENT_MAX_K:
        raise SizeLimit(f"permanent limited to K <= {PERMANENT_MAX_K}")
    rows = [int(sum(int(b) << c for c, b in enumerate(row))) for row in m.bits]
    if any(r == 0 for r in rows):
        return 0
    residues = [_permanent_mod(rows, k, p) for p in _PRIMES]
    value, modulus = 0, 1
    for r, p in zip(residues, _PRIMES):
        # lift value to be congruent to r mod p
        t = ((r - value) * pow(modulus, -1, p)) % p
        value += modulus * t
        modulus *= p
    return value
