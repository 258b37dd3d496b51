from fractions import Fraction

import numpy as np
import pytest

from ptables import build_table
from ptables.data import example_table as _example_table

H, Q3, Q1 = Fraction(1, 2), Fraction(3, 4), Fraction(1, 4)

EXAMPLE_ENTRIES = [
    [1, H, 0, H, Q3, H, Q3],
    [0, H, 1, H, Q1, H, Q1],
    [H, 1, H, 0, Q3, H, H],
    [H, 0, H, 1, Q1, H, H],
    [1, 1, 1, 1, 1, 1, 1],
    [0, 0, 0, 0, 0, 0, 0],
]
EXAMPLE_PREPS = [f"S_{j}" for j in range(1, 8)]
EXAMPLE_INTERVENTIONS = [("M_1", ["R_1", "R_2"]), ("M_2", ["R_3", "R_4"]), ("M_3", ["R_5", "R_6"])]

# preparation and result vectors listed for the worked example with its basis matrix
EXAMPLE_S = [(1, 1, 0), (1, 0, 1), (1, -1, 0), (1, 0, -1), (1, H, H), (1, 0, 0), (1, H, 0)]
EXAMPLE_R = [(H, H, 0), (H, -H, 0), (H, 0, H), (H, 0, -H), (1, 0, 0), (0, 0, 0)]


@pytest.fixture
def example():
    return _example_table()


@pytest.fixture
def example_float():
    return _example_table("float")


def _random_distribution(rng, size, exact):
    w = rng.integers(0, 5, size=size)
    if w.sum() == 0:
        w[rng.integers(size)] = 1
    if exact:
        total = int(w.sum())
        return [Fraction(int(x), total) for x in w]
    w = rng.random(size) + 0.05 * w
    return list(w / w.sum())


def random_table(rng, exact=True, max_dim=12, max_rank=6):
    """Valid table of L, M <= max_dim built as mixtures of K random columns.

    Columns are shuffled so the pivot search has work to do. The rank is
    K only generically; callers that need it use an independent oracle.
    """
    while True:
        sizes = []
        budget = int(rng.integers(2, max_dim + 1))
        while sum(sizes) < budget:
            sizes.append(int(rng.integers(1, min(4, budget - sum(sizes)) + 1)))
        L = sum(sizes)
        M = int(rng.integers(1, max_dim + 1))
        cap = min(max_rank, L - len(sizes) + 1, M)
        if cap >= 1:
            break
    K = int(rng.integers(1, cap + 1))
    extremal = []
    for _ in range(K):
        col = []
        for n in sizes:
            col.extend(_random_distribution(rng, n, exact))
        extremal.append(col)
    cols = list(extremal)
    for _ in range(M - K):
        w = _random_distribution(rng, K, exact)
        cols.append([sum(wk * c[i] for wk, c in zip(w, extremal)) for i in range(L)])
    order = rng.permutation(M)
    cols = [cols[o] for o in order]
    entries = [[cols[j][i] for j in range(M)] for i in range(L)]
    interventions = [(f"M_{k}", [f"R_{k}_{i}" for i in range(n)]) for k, n in enumerate(sizes)]
    return build_table([f"S_{j}" for j in range(M)], interventions, entries, "exact" if exact else "float")


def random_basis(rng, K, exact=True):
    while True:
        if exact:
            x = rng.integers(-3, 4, size=(K, K))
            if round(np.linalg.det(x)) != 0:
                return [[Fraction(int(v)) for v in row] for row in x]
        else:
            x = rng.normal(size=(K, K))
            if np.linalg.cond(x) < 1e2:
                return x
