"""Probability calculus on top of a table: disjunctions, Bayesian inference of
an unknown preparation, prediction, and embedding of new preparations."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._linalg import bareiss_rank, float_rank, fraction_solve, to_fraction_array
from .decompose import Decomposition
from .exceptions import (
    InsufficientCoverage,
    RankWouldGrow,
    ResultsNotSameIntervention,
    SameIntervention,
    WeightsNotNormalized,
    ZeroEvidence,
)
from .geometry import intervention_sum_vectors
from .table import ProbabilityTable

RNG_ALGORITHM = "numpy.random.PCG64"


@dataclass(frozen=True)
class ObservationSet:
    """Outcome counts keyed by ``(intervention index, result index within it)``."""

    counts: Mapping[tuple[int, int], int] = field(default_factory=dict)
    seed: int | None = None
    rng: str | None = None
    true_prep: str | None = None

    def __post_init__(self):
        clean = {}
        for (k, i), n in self.counts.items():
            if int(n) != n or n < 0:
                raise ValueError(f"count for ({k}, {i}) must be a nonnegative integer, got {n}")
            clean[(int(k), int(i))] = clean.get((int(k), int(i)), 0) + int(n)
        object.__setattr__(self, "counts", dict(sorted(clean.items())))

    @classmethod
    def from_labels(cls, table: ProbabilityTable, items: Iterable[tuple[str, str, int]], **meta) -> "ObservationSet":
        counts: dict[tuple[int, int], int] = {}
        for intervention, result, n in items:
            k = table.intervention_index(intervention)
            try:
                i = table.interventions[k].results.index(result)
            except ValueError:
                raise KeyError(f"intervention {intervention!r} has no result {result!r}") from None
            counts[(k, i)] = counts.get((k, i), 0) + int(n)
        return cls(counts, **meta)

    def __add__(self, other: "ObservationSet") -> "ObservationSet":
        merged = dict(self.counts)
        for key, n in other.counts.items():
            merged[key] = merged.get(key, 0) + n
        return ObservationSet(merged)

    def total(self, k: int) -> int:
        return sum(n for (kk, _), n in self.counts.items() if kk == k)

    def rows(self, table: ProbabilityTable) -> list[tuple[int, int]]:
        """``(table row, count)`` pairs, checking every key exists in ``table``."""
        out = []
        for (k, i), n in self.counts.items():
            if not 0 <= k < len(table.interventions):
                raise KeyError(f"table has no intervention {k}")
            out.append((table.row_index(k, i), n))
        return out


@dataclass
class PosteriorReport:
    posterior: np.ndarray
    log_evidence: float
    effective_vector: np.ndarray | None = None


# -- disjunctions -----------------------------------------------------------

def _intervention_of_row(table: ProbabilityTable, row: int) -> int:
    for k in range(len(table.interventions)):
        if row in table.intervention_rows(k):
            return k
    raise IndexError(f"table has no row {row}")


def disjunction_within(decomposition: Decomposition, rows: Sequence[int], j: int):
    """Probability that one of several results of a single intervention occurs.

    ``rows`` are table row indices, all belonging to the same intervention.
    Evaluated as ``(sum of their result vectors) . s_j``.
    """
    table = decomposition.table
    rows = list(rows)
    if len(rows) < 2 or len(set(rows)) != len(rows):
        raise ValueError("need at least two distinct results")
    ks = {_intervention_of_row(table, r) for r in rows}
    if len(ks) != 1:
        raise ResultsNotSameIntervention(f"rows {rows} belong to interventions {sorted(ks)}")
    r_sum = sum(decomposition.result_vectors[r] for r in rows[1:]) + decomposition.result_vectors[rows[0]]
    return r_sum.dot(decomposition.preparation_vectors[j])


def disjunction_across(
    decomposition: Decomposition,
    row1: int,
    row2: int,
    weight1,
    weight2,
    j: int,
):
    """Probability of result ``row1`` or ``row2`` when their interventions differ.

    ``weight1`` and ``weight2`` are the probabilities that each intervention
    was the one performed on preparation ``j``; the table itself says nothing
    about them, so the caller supplies them and they must sum to one.
    """
    table = decomposition.table
    if _intervention_of_row(table, row1) == _intervention_of_row(table, row2):
        raise SameIntervention(f"rows {row1} and {row2} belong to the same intervention")
    if weight1 < 0 or weight2 < 0:
        raise WeightsNotNormalized(f"negative intervention weight ({weight1}, {weight2})")
    total = weight1 + weight2
    exact = all(isinstance(w, (int, Fraction)) for w in (weight1, weight2))
    if (total != 1) if exact else abs(total - 1) > table.tol:
        raise WeightsNotNormalized(f"intervention weights sum to {total}, not 1")
    r = decomposition.result_vectors
    mixed = weight1 * r[row1] + weight2 * r[row2]
    return mixed.dot(decomposition.preparation_vectors[j])


# -- Bayesian inference -----------------------------------------------------

def likelihood(table: ProbabilityTable, j: int, observations: ObservationSet):
    """P(D | S_j): product of p_ij ** count over the observed results."""
    value = Fraction(1) if table.exact else 1.0
    for row, n in observations.rows(table):
        value = value * table.entries[row, j] ** n
    return value


def log_likelihood(table: ProbabilityTable, j: int, observations: ObservationSet) -> float:
    total = 0.0
    for row, n in observations.rows(table):
        if n == 0:
            continue  # 0 log 0 = 0
        p = table.entries[row, j]
        if p == 0:
            return -math.inf
        total += n * _log(p)
    return total


def _log(x) -> float:
    if isinstance(x, Fraction):
        # math.log accepts arbitrarily large ints where float(x) would underflow
        return math.log(x.numerator) - math.log(x.denominator)
    return math.log(x)


def uniform_prior(table: ProbabilityTable) -> np.ndarray:
    if table.exact:
        return to_fraction_array([Fraction(1, table.M)] * table.M)
    return np.full(table.M, 1.0 / table.M)


def as_prior(weights, table: ProbabilityTable) -> np.ndarray:
    """Validate prior weights over the table's preparations.

    Weights that are all ints/Fractions stay exact (for an exact table);
    anything else becomes float.
    """
    if weights is None:
        return uniform_prior(table)
    if isinstance(weights, Mapping):
        weights = [weights.get(label, 0) for label in table.preparations]
    w = list(weights)
    if len(w) != table.M:
        raise ValueError(f"prior has {len(w)} weights for {table.M} preparations")
    exact = table.exact and all(isinstance(x, (int, Fraction)) for x in w)
    arr = to_fraction_array(w) if exact else np.asarray(w, dtype=float)
    if np.any(arr < 0):
        raise WeightsNotNormalized("prior has negative weights")
    total = arr.sum()
    if (total != 1) if exact else abs(total - 1) > table.tol:
        raise WeightsNotNormalized(f"prior weights sum to {total}, not 1")
    return arr


def posterior(
    table: ProbabilityTable,
    prior,
    observations: ObservationSet,
    decomposition: Decomposition | None = None,
) -> PosteriorReport:
    """Bayes' rule over the table's preparations.

    Exact tables with exact priors give exact posteriors. Otherwise the
    likelihoods are combined in log space and normalized after a max shift.
    If ``decomposition`` is supplied the report carries the effective vector
    of the unknown preparation.
    """
    prior = as_prior(prior, table)
    if prior.dtype == object:
        joint = to_fraction_array([likelihood(table, j, observations) * prior[j] for j in range(table.M)])
        evidence = joint.sum()
        if evidence == 0:
            raise ZeroEvidence("observed data have zero probability under every preparation with prior weight")
        post = joint / evidence
        log_ev = _log(evidence)
    else:
        logs = np.array(
            [
                log_likelihood(table, j, observations) + (math.log(prior[j]) if prior[j] > 0 else -math.inf)
                for j in range(table.M)
            ]
        )
        top = logs.max()
        if top == -math.inf:
            raise ZeroEvidence("observed data have zero probability under every preparation with prior weight")
        scaled = np.exp(logs - top)
        total = scaled.sum()
        post = scaled / total
        log_ev = float(top + math.log(total))
    s_new = effective_vector(decomposition, post) if decomposition is not None else None
    return PosteriorReport(post, log_ev, s_new)


def predict(source: ProbabilityTable | Decomposition, posterior_weights, k: int) -> np.ndarray:
    """Distribution over intervention ``k``'s results for the unknown preparation.

    With a table this mixes its columns; with a decomposition it evaluates
    ``r_i . s_new``. Both give the same numbers.
    """
    w = np.asarray(getattr(posterior_weights, "posterior", posterior_weights))
    if isinstance(source, Decomposition):
        rows = source.table.intervention_rows(k)
        s_new = effective_vector(source, w)
        return source.result_vectors[rows.start : rows.stop].dot(s_new)
    rows = source.intervention_rows(k)
    return source.entries[rows.start : rows.stop].dot(w)


def effective_vector(decomposition: Decomposition, posterior_weights) -> np.ndarray:
    """Posterior-weighted average of the preparation vectors."""
    w = np.asarray(getattr(posterior_weights, "posterior", posterior_weights))
    return w.dot(decomposition.preparation_vectors)


# -- new preparations -------------------------------------------------------

@dataclass
class Embedding:
    vector: np.ndarray
    rank_preserved: bool
    augmented_rank: int
    residual: float
    frequencies: dict[int, object]


def embed_new_preparation(
    decomposition: Decomposition,
    observations: ObservationSet,
    tol: float | None = None,
) -> Embedding:
    """Vector for a preparation that has no column in the table.

    Relative frequencies are formed per observed intervention; the vector
    ``s`` minimizes ``sum (r_i . s - f_i)^2`` over the observed results,
    subject to ``e . s = 1`` when the table has a normalization vector ``e``.
    Exact tables give an exact solution.

    The rank check appends the frequencies as a new column to the observed
    rows of the table; if that raises the rank above K (rank cutoff ``tol``
    for float tables) a :class:`RankWouldGrow` warning is issued and
    ``rank_preserved`` is False.
    """
    table = decomposition.table
    K = decomposition.K
    exact = table.exact
    freqs: dict[int, object] = {}
    for (k, i), n in observations.counts.items():
        total = observations.total(k)
        freqs[table.row_index(k, i)] = Fraction(n, total) if exact else n / total
    covered = sorted({k for k, _ in observations.counts})
    rows = [r for k in covered for r in table.intervention_rows(k)]
    if not rows:
        raise InsufficientCoverage("no observations")
    f = [freqs.get(r, Fraction(0) if exact else 0.0) for r in rows]
    R = decomposition.result_vectors[rows]
    rank_fn = bareiss_rank if exact else (lambda m: float_rank(m, tol))
    if rank_fn(R) < K:
        raise InsufficientCoverage(
            f"observed interventions span {rank_fn(R)} of {K} dimensions"
        )

    e = intervention_sum_vectors(decomposition).common_sum
    if exact:
        f_arr = to_fraction_array(f)
        gram = R.T.dot(R)
        rhs = R.T.dot(f_arr)
        if e is not None:
            kkt = np.empty((K + 1, K + 1), dtype=object)
            kkt[:K, :K] = gram
            kkt[:K, K] = e
            kkt[K, :K] = e
            kkt[K, K] = Fraction(0)
            sol = fraction_solve(kkt, np.concatenate([rhs, to_fraction_array([1])]))
            s = sol[:K]
        else:
            s = fraction_solve(gram, rhs)
    else:
        f_arr = np.asarray(f, dtype=float)
        R = np.asarray(R, dtype=float)
        if e is not None:
            e = np.asarray(e, dtype=float)
            kkt = np.block([[R.T @ R, e[:, None]], [e[None, :], np.zeros((1, 1))]])
            s = np.linalg.solve(kkt, np.concatenate([R.T @ f_arr, [1.0]]))[:K]
        else:
            s = np.linalg.lstsq(R, f_arr, rcond=None)[0]

    augmented = np.concatenate([table.entries[rows], f_arr.reshape(-1, 1)], axis=1)
    aug_rank = rank_fn(augmented)
    residual = float(np.max(np.abs(np.asarray(R.dot(s) - f_arr, dtype=float))))
    preserved = aug_rank <= K
    if not preserved:
        warnings.warn(
            f"appending the observed frequencies raises the table rank from {K} to {aug_rank}",
            RankWouldGrow,
            stacklevel=2,
        )
    return Embedding(s, preserved, aug_rank, residual, freqs)


# -- simulation -------------------------------------------------------------

def simulate_observations(
    table: ProbabilityTable,
    true_preparation: int | str,
    schedule: Iterable[tuple[int | str, int]],
    seed: int,
) -> ObservationSet:
    """Draw outcome counts for preparation ``true_preparation``.

    ``schedule`` lists ``(intervention, number of trials)`` pairs, with
    interventions given by index or name. Draws come from a fresh
    ``numpy.random.Generator`` (PCG64) seeded with ``seed``, so equal seeds
    give equal counts on every platform numpy supports.
    """
    j = table.preparation_index(true_preparation) if isinstance(true_preparation, str) else int(true_preparation)
    rng = np.random.default_rng(seed)
    counts: dict[tuple[int, int], int] = {}
    for intervention, n in schedule:
        k = table.intervention_index(intervention) if isinstance(intervention, str) else int(intervention)
        rows = table.intervention_rows(k)
        p = np.array([float(table.entries[r, j]) for r in rows])
        p = np.clip(p, 0.0, None)
        draws = rng.multinomial(int(n), p / p.sum())
        for i, c in enumerate(draws):
            counts[(k, i)] = counts.get((k, i), 0) + int(c)
    return ObservationSet(counts, seed=seed, rng=RNG_ALGORITHM, true_prep=table.preparations[j])
