"""Small dense linear-algebra kernels over exact rationals and floats.

Exact routines operate on numpy object arrays holding ``fractions.Fraction``
values. They are meant for the modest table sizes this package deals with
(tens of rows and columns), not for large problems.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm

import numpy as np


def is_exact(a: np.ndarray) -> bool:
    return a.dtype == object


def to_fraction_array(a) -> np.ndarray:
    """Convert nested sequences of ints/Fractions/decimal strings to Fractions."""
    arr = np.asarray(a, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, val in np.ndenumerate(arr):
        out[idx] = _to_fraction(val)
    return out


def _to_fraction(val) -> Fraction:
    if isinstance(val, Fraction):
        return val
    if isinstance(val, (int, np.integer)):
        return Fraction(int(val))
    if isinstance(val, (float, np.floating)):
        # go through the shortest repr so 0.1 becomes 1/10, not the binary value
        return Fraction(repr(float(val)))
    return Fraction(val)


def fraction_identity(n: int) -> np.ndarray:
    eye = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            eye[i, j] = Fraction(int(i == j))
    return eye


def fraction_zeros(shape) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    out.fill(Fraction(0))
    return out


def _integer_rows(a: np.ndarray) -> list[list[int]]:
    rows = []
    for row in a:
        scale = lcm(*(f.denominator for f in row)) if len(row) else 1
        rows.append([int(f * scale) for f in row])
    return rows


def bareiss_rank(a: np.ndarray) -> int:
    """Exact rank by fraction-free (Bareiss) elimination.

    Each row is scaled by the lcm of its denominators first, which does not
    change the rank, so the elimination runs over plain integers.
    """
    a = to_fraction_array(a)
    if a.size == 0:
        return 0
    m = _integer_rows(a)
    n_rows, n_cols = len(m), len(m[0])
    rank = 0
    prev = 1
    for col in range(n_cols):
        if rank == n_rows:
            break
        pivot = next((r for r in range(rank, n_rows) if m[r][col] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        p = m[rank][col]
        for r in range(rank + 1, n_rows):
            m[r] = [(p * m[r][c] - m[r][col] * m[rank][c]) // prev for c in range(n_cols)]
        prev = p
        rank += 1
    return rank


def bareiss_det(a: np.ndarray) -> Fraction:
    """Exact determinant of a square rational matrix."""
    a = to_fraction_array(a)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("determinant needs a square matrix")
    if n == 0:
        return Fraction(1)
    scale = Fraction(1)
    m = []
    for row in a:
        s = lcm(*(f.denominator for f in row))
        scale *= s
        m.append([int(f * s) for f in row])
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if m[r][k] != 0), None)
            if swap is None:
                return Fraction(0)
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return Fraction(sign * m[n - 1][n - 1]) / scale


def fraction_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``a @ X = b`` exactly; ``a`` must be square and nonsingular.

    Raises ``np.linalg.LinAlgError`` on a singular system.
    """
    a = to_fraction_array(a)
    b = to_fraction_array(b)
    vector_rhs = b.ndim == 1
    if vector_rhs:
        b = b.reshape(-1, 1)
    n = a.shape[0]
    if a.shape != (n, n) or b.shape[0] != n:
        raise ValueError(f"incompatible shapes {a.shape} and {b.shape}")
    aug = np.concatenate([a, b], axis=1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r, col] != 0), None)
        if pivot is None:
            raise np.linalg.LinAlgError("singular matrix")
        if pivot != col:
            aug[[col, pivot]] = aug[[pivot, col]]
        aug[col] = aug[col] / aug[col, col]
        for r in range(n):
            if r != col and aug[r, col] != 0:
                aug[r] = aug[r] - aug[r, col] * aug[col]
    x = aug[:, n:]
    return x[:, 0] if vector_rhs else x


def fraction_inverse(a: np.ndarray) -> np.ndarray:
    return fraction_solve(a, fraction_identity(a.shape[0]))


def float_rank(a: np.ndarray, tol: float | None = None) -> int:
    """Rank from singular values; default cutoff ``max(shape) * s_max * eps``."""
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return 0
    sv = np.linalg.svd(a, compute_uv=False)
    if tol is None:
        tol = max(a.shape) * sv[0] * np.finfo(float).eps
    return int(np.count_nonzero(sv > tol))


def rank(a: np.ndarray, tol: float | None = None) -> int:
    return bareiss_rank(a) if is_exact(a) else float_rank(a, tol)


class IncrementalSpan:
    """Greedy basis builder: ``add`` accepts a vector iff it enlarges the span.

    Exact for Fraction vectors; for floats a vector is rejected when its
    residual after elimination is below ``tol`` in max-norm.
    """

    def __init__(self, exact: bool, tol: float = 0.0):
        self.exact = exact
        self.tol = tol
        self._rows: list[tuple[int, np.ndarray]] = []

    def __len__(self) -> int:
        return len(self._rows)

    def add(self, vec) -> bool:
        v = to_fraction_array(vec) if self.exact else np.asarray(vec, dtype=float).copy()
        for pivot, row in self._rows:
            if v[pivot] != 0:
                v = v - v[pivot] * row
        if self.exact:
            nz = [i for i, x in enumerate(v) if x != 0]
            if not nz:
                return False
            pivot = nz[0]
        else:
            pivot = int(np.argmax(np.abs(v)))
            if abs(v[pivot]) <= self.tol:
                return False
        self._rows.append((pivot, v / v[pivot]))
        return True
