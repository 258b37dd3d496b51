"""Rank factorization of a probability table into result and preparation vectors.

The table is rearranged so that a nonsingular K x K block ``a`` sits in the
top-left corner,

    p = [[a, b],
         [c, d]],

and then factored as ``p = t @ u`` with ``t = [[v], [w]]`` and
``u = [x, y]``. Once the basis matrix ``x`` (the vectors of the first K
preparations) is fixed, everything else follows:

    y = x a^-1 b,    v = a x^-1,    w = c x^-1.

Rows of ``t`` are the result vectors, columns of ``u`` the preparation
vectors, and every table entry is their scalar product.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._linalg import (
    IncrementalSpan,
    bareiss_det,
    bareiss_rank,
    float_rank,
    fraction_identity,
    fraction_inverse,
    to_fraction_array,
)
from .exceptions import DegenerateTable, SingularBasisMatrix
from .table import ProbabilityTable

DEFAULT_TOL_REC = 1e-9

#: Basis matrix used in the worked 6 x 7 example; reproduces its vectors exactly.
EXAMPLE_BASIS = ((1, 1, 1), (1, 0, -1), (0, 1, 0))


@dataclass(frozen=True)
class BlockForm:
    row_perm: tuple[int, ...]
    col_perm: tuple[int, ...]
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    @property
    def K(self) -> int:
        return self.a.shape[0]

    @property
    def exact(self) -> bool:
        return self.a.dtype == object


@dataclass(frozen=True)
class Decomposition:
    """Result of :func:`decompose`.

    ``preparation_vectors[j]`` is s_j and ``result_vectors[i]`` is r_i, both
    in the table's original column/row order.
    """

    table: ProbabilityTable
    K: int
    x: np.ndarray
    preparation_vectors: np.ndarray
    result_vectors: np.ndarray
    block_form: BlockForm
    v: np.ndarray
    w: np.ndarray
    y: np.ndarray

    @property
    def exact(self) -> bool:
        return self.table.exact

    @property
    def mode(self) -> str:
        return self.table.mode

    def prep(self, label: str) -> np.ndarray:
        return self.preparation_vectors[self.table.preparation_index(label)]

    def result(self, k: int, i: int) -> np.ndarray:
        return self.result_vectors[self.table.row_index(k, i)]


def numerical_rank(table: ProbabilityTable, tol: float | None = None) -> int:
    """Rank of the entry matrix.

    Exact tables use fraction-free elimination. Float tables count singular
    values above ``tol`` (default ``max(L, M) * s_max * eps``).
    """
    if table.exact:
        return bareiss_rank(table.entries)
    return float_rank(table.entries, tol)


def _complete_pivots(p: np.ndarray, K: int, tol: float) -> tuple[list[int], list[int]]:
    work = np.array(p, dtype=float)
    rows = list(range(work.shape[0]))
    cols = list(range(work.shape[1]))
    for step in range(K):
        sub = np.abs(work[step:, step:])
        # argmax returns the first maximum in row-major order: lowest row, then column
        r, c = np.unravel_index(int(np.argmax(sub)), sub.shape)
        r += step
        c += step
        if sub[r - step, c - step] <= tol:
            raise DegenerateTable(
                f"pivot {step + 1} of {K} has magnitude {sub[r - step, c - step]:.3g} <= {tol:.3g}"
            )
        work[[step, r]] = work[[r, step]]
        work[:, [step, c]] = work[:, [c, step]]
        rows[step], rows[r] = rows[r], rows[step]
        cols[step], cols[c] = cols[c], cols[step]
        piv = work[step, step]
        work[step + 1 :, step:] -= np.outer(work[step + 1 :, step] / piv, work[step, step:])
    return rows[:K], cols[:K]


def _greedy_pivots(p: np.ndarray, K: int) -> tuple[list[int], list[int]]:
    col_span = IncrementalSpan(exact=True)
    cols = [j for j in range(p.shape[1]) if len(col_span) < K and col_span.add(p[:, j])]
    row_span = IncrementalSpan(exact=True)
    sub = p[:, cols]
    rows = [i for i in range(p.shape[0]) if len(row_span) < K and row_span.add(sub[i])]
    return rows, cols


def _complete_perm(first: list[int], n: int) -> tuple[int, ...]:
    chosen = set(first)
    return tuple(first) + tuple(i for i in range(n) if i not in chosen)


def pivot_block_form(
    table: ProbabilityTable,
    tol_rank: float | None = None,
    tol_pivot: float | None = None,
) -> BlockForm:
    """Permute rows and columns so the leading K x K block is nonsingular.

    Exact tables take the lowest-index independent columns and then the
    lowest-index independent rows, so a table whose leading minor is already
    nonsingular keeps identity permutations. Float tables use complete
    pivoting.
    """
    p = table.entries
    L, M = p.shape
    K = numerical_rank(table, tol_rank)
    if K == 0:
        raise DegenerateTable("table has rank 0")
    if table.exact:
        rows, cols = _greedy_pivots(p, K)
        if len(rows) < K or len(cols) < K:
            raise DegenerateTable(f"no nonsingular {K} x {K} submatrix found")
    else:
        if tol_pivot is None:
            tol_pivot = max(L, M) * float(np.max(np.abs(p))) * np.finfo(float).eps
        rows, cols = _complete_pivots(p, K, tol_pivot)
    row_perm = _complete_perm(rows, L)
    col_perm = _complete_perm(cols, M)
    q = p[np.ix_(row_perm, col_perm)]
    blocks = [np.array(blk) for blk in (q[:K, :K], q[:K, K:], q[K:, :K], q[K:, K:])]
    for blk in blocks:
        blk.setflags(write=False)
    return BlockForm(row_perm, col_perm, *blocks)


def _basis_matrix(basis, K: int, exact: bool) -> np.ndarray:
    if basis is None or (isinstance(basis, str) and basis == "identity"):
        return fraction_identity(K) if exact else np.eye(K)
    if isinstance(basis, str):
        if basis == "paper-example":
            basis = EXAMPLE_BASIS
        else:
            raise ValueError(f"unknown basis preset {basis!r}")
    x = to_fraction_array(basis) if exact else np.array(basis, dtype=float)
    if x.shape != (K, K):
        raise SingularBasisMatrix(f"basis matrix has shape {x.shape}, table rank is {K}")
    if exact:
        singular = bareiss_det(x) == 0
    else:
        singular = float_rank(x) < K
    if singular:
        raise SingularBasisMatrix("basis matrix is singular")
    return x


def _inv(m: np.ndarray) -> np.ndarray:
    return fraction_inverse(m) if m.dtype == object else np.linalg.inv(m)


def _solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.dtype == object:
        return fraction_inverse(a).dot(b)
    return np.linalg.solve(a, b)


def decompose(
    table: ProbabilityTable,
    basis="identity",
    tol_rank: float | None = None,
    tol_pivot: float | None = None,
) -> Decomposition:
    """Factor ``table`` into preparation and result vectors.

    ``basis`` is ``"identity"``, ``"paper-example"`` (the 3 x 3 matrix of the
    worked 6 x 7 example) or an explicit nonsingular K x K matrix; it becomes
    the matrix whose columns are the vectors of the K pivot preparations.
    """
    bf = pivot_block_form(table, tol_rank, tol_pivot)
    K = bf.K
    x = _basis_matrix(basis, K, table.exact)
    x_inv = _inv(x)
    y = x.dot(_solve(bf.a, bf.b))
    v = bf.a.dot(x_inv)
    w = bf.c.dot(x_inv)

    u = np.concatenate([x, y], axis=1)
    t = np.concatenate([v, w], axis=0)
    L, M = table.L, table.M
    preps = np.empty((M, K), dtype=u.dtype)
    results = np.empty((L, K), dtype=t.dtype)
    preps[list(bf.col_perm)] = u.T
    results[list(bf.row_perm)] = t
    for arr in (x, preps, results, v, w, y):
        arr.setflags(write=False)
    return Decomposition(table, K, x, preps, results, bf, v, w, y)


def reconstruct(decomposition: Decomposition) -> ProbabilityTable:
    """Rebuild the table from r_i . s_j."""
    entries = decomposition.result_vectors.dot(decomposition.preparation_vectors.T)
    return decomposition.table.with_entries(entries)


def max_reconstruction_error(decomposition: Decomposition):
    diff = np.abs(reconstruct(decomposition).entries - decomposition.table.entries)
    return diff.max() if diff.size else 0


def verify_redundant_block(block_form: BlockForm, tol: float = DEFAULT_TOL_REC) -> bool:
    """True iff ``d == c a^-1 b`` (exactly, or within ``tol`` for floats)."""
    if block_form.d.size == 0:
        return True
    predicted = block_form.c.dot(_solve(block_form.a, block_form.b))
    if block_form.exact:
        return bool(np.all(predicted == block_form.d))
    return bool(np.max(np.abs(predicted - block_form.d)) <= tol)


def compression_stats(L: int, M: int, K: int) -> dict[str, int]:
    """Number of stored values before and after factorization (x fixed once)."""
    if not 1 <= K <= min(L, M):
        raise ValueError(f"need 1 <= K <= min(L, M), got K={K}, L={L}, M={M}")
    original = L * M
    compressed = K * (L + M) - K * K
    return {"original": original, "compressed": compressed, "saving": original - compressed}
