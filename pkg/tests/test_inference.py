import warnings
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from ptables import (
    ObservationSet,
    build_table,
    decompose,
    example_table,
    disjunction_across,
    disjunction_within,
    effective_vector,
    embed_new_preparation,
    likelihood,
    posterior,
    predict,
    simulate_observations,
)
from ptables.exceptions import (
    InsufficientCoverage,
    RankWouldGrow,
    ResultsNotSameIntervention,
    SameIntervention,
    WeightsNotNormalized,
    ZeroEvidence,
)
from ptables.geometry import intervention_sum_vectors
from ptables.inference import log_likelihood

H = Fraction(1, 2)


def obs(**counts):
    """obs(R_1=2) -> counts keyed by (intervention, result) for the 6 x 7 table."""
    index = {f"R_{n}": ((n - 1) // 2, (n - 1) % 2) for n in range(1, 7)}
    return ObservationSet({index[k]: v for k, v in counts.items()})


class TestDisjunctions:
    def test_within_exhaustive_pair(self, example):
        dec = decompose(example, "paper-example")
        assert disjunction_within(dec, [0, 1], 4) == 1
        assert disjunction_within(dec, [2, 3], 0) == 1

    def test_within_all_results_every_prep(self, example):
        for basis in ("identity", "paper-example"):
            dec = decompose(example, basis)
            for k in range(3):
                for j in range(7):
                    assert disjunction_within(dec, list(example.intervention_rows(k)), j) == 1

    def test_within_rejects(self, example):
        dec = decompose(example)
        with pytest.raises(ValueError):
            disjunction_within(dec, [0, 0], 0)
        with pytest.raises(ResultsNotSameIntervention):
            disjunction_within(dec, [0, 2], 0)

    def test_across(self, example):
        dec = decompose(example, "paper-example")
        # direct: 1/2 * p_11 + 1/2 * p_31 = 1/2 + 1/4
        assert disjunction_across(dec, 0, 2, H, H, 0) == Fraction(3, 4)

    def test_across_degenerate_weight(self, example):
        dec = decompose(example)
        for j in range(7):
            assert disjunction_across(dec, 1, 3, 1, 0, j) == example.entries[1, j]

    def test_across_rejects(self, example):
        dec = decompose(example)
        with pytest.raises(WeightsNotNormalized):
            disjunction_across(dec, 0, 2, 0.6, 0.6, 0)
        with pytest.raises(SameIntervention):
            disjunction_across(dec, 0, 1, H, H, 0)


class TestLikelihood:
    def test_values(self, example):
        assert likelihood(example, 0, obs(R_1=1)) == 1
        assert likelihood(example, 2, obs(R_1=1)) == 0
        assert likelihood(example, 4, obs(R_1=2, R_3=1)) == Fraction(27, 64)

    def test_log_form(self, example):
        assert log_likelihood(example, 4, obs(R_1=2, R_3=1)) == pytest.approx(np.log(27 / 64))
        assert log_likelihood(example, 2, obs(R_1=1)) == -np.inf

    def test_zero_count_on_impossible_result(self, example_float):
        # an unobserved impossible result must not rule a preparation out
        data = ObservationSet({(2, 0): 5, (2, 1): 0})
        assert log_likelihood(example_float, 0, data) == 0.0
        assert list(posterior(example_float, None, data).posterior) == pytest.approx([1 / 7] * 7)

    def test_unknown_result(self, example):
        with pytest.raises(IndexError):
            likelihood(example, 0, ObservationSet({(0, 5): 1}))


class TestPosterior:
    def test_uniform_prior_one_observation(self, example):
        rep = posterior(example, None, obs(R_1=1))
        row = [example.entries[0, j] for j in range(7)]
        expected = [v / sum(row) for v in row]
        assert list(rep.posterior) == expected
        assert rep.posterior[2] == 0
        assert rep.log_evidence == pytest.approx(np.log(float(sum(row)) / 7))

    def test_float_matches_exact(self, example, example_float):
        data = obs(R_1=3, R_4=2, R_5=4)
        exact = posterior(example, None, data).posterior
        approx = posterior(example_float, None, data).posterior
        np.testing.assert_allclose(approx, exact.astype(float), rtol=0, atol=1e-14)

    def test_point_mass_fixed_point(self, example):
        prior = [0, 1, 0, 0, 0, 0, 0]
        rep = posterior(example, prior, obs(R_1=3, R_3=2))
        assert list(rep.posterior) == prior

    def test_zero_evidence(self, example):
        with pytest.raises(ZeroEvidence):
            posterior(example, [0, 0, 1, 0, 0, 0, 0], obs(R_1=1))
        with pytest.raises(ZeroEvidence):
            posterior(example, None, obs(R_6=1))
        with pytest.raises(ZeroEvidence):
            posterior(example.as_float(), None, obs(R_6=1))

    def test_no_data_returns_prior(self, example):
        prior = [Fraction(1, 10)] * 5 + [Fraction(1, 4)] * 2
        assert list(posterior(example, prior, ObservationSet({})).posterior) == prior

    def test_unique_support_gives_point_mass(self):
        t = build_table(["a", "b", "c"], [("M", ["x", "y"])], [[1, 0, 0], [0, 1, 1]])
        assert list(posterior(t, None, ObservationSet({(0, 0): 1})).posterior) == [1, 0, 0]

    def test_bad_prior(self, example):
        with pytest.raises(WeightsNotNormalized):
            posterior(example, [Fraction(1, 7)] * 6 + [0], obs(R_1=1))

    @settings(max_examples=40, deadline=None)
    @given(
        st.lists(st.integers(0, 4), min_size=5, max_size=5),
        st.lists(st.integers(0, 4), min_size=5, max_size=5),
    )
    def test_sequential_updating(self, c1, c2):
        example = example_table()
        d1 = obs(**{f"R_{n + 1}": c for n, c in enumerate(c1)})
        d2 = obs(**{f"R_{n + 1}": c for n, c in enumerate(c2)})
        try:
            joint = posterior(example, None, d1 + d2).posterior
        except ZeroEvidence:
            return
        step = posterior(example, posterior(example, None, d1).posterior, d2).posterior
        assert list(step) == list(joint)


class TestPredict:
    def test_point_mass(self, example):
        assert list(predict(example, [0, 0, 0, 0, 1, 0, 0], 0)) == [Fraction(3, 4), Fraction(1, 4)]

    def test_mixture(self, example):
        assert list(predict(example, [H, 0, H, 0, 0, 0, 0], 0)) == [H, H]

    def test_table_and_vector_routes_agree(self, example_float):
        rng = np.random.default_rng(0)
        dec = decompose(example_float, "paper-example")
        for _ in range(100):
            w = rng.dirichlet(np.ones(7))
            for k in range(3):
                p_tab = predict(example_float, w, k)
                np.testing.assert_allclose(predict(dec, w, k), p_tab, atol=1e-10)
                assert p_tab.sum() == pytest.approx(1, abs=1e-12)

    def test_basis_invariance(self, example):
        data = obs(R_1=2, R_4=1)
        d1, d2 = decompose(example), decompose(example, "paper-example")
        r1 = posterior(example, None, data, d1)
        r2 = posterior(example, None, data, d2)
        assert list(r1.posterior) == list(r2.posterior)
        for k in range(3):
            assert list(predict(d1, r1, k)) == list(predict(d2, r2, k))


class TestEffectiveVector:
    def test_point_mass(self, example):
        dec = decompose(example, "paper-example")
        assert list(effective_vector(dec, [0, 0, 0, 0, 0, 1, 0])) == [1, 0, 0]

    def test_average(self, example):
        dec = decompose(example, "paper-example")
        assert list(effective_vector(dec, [H, 0, H, 0, 0, 0, 0])) == [1, 0, 0]

    def test_stays_on_hyperplane(self, example):
        dec = decompose(example)
        e = intervention_sum_vectors(dec).common_sum
        rng = np.random.default_rng(2)
        for _ in range(20):
            w = [Fraction(int(v)) for v in rng.integers(0, 9, size=7)]
            total = sum(w) or 1
            w = [v / total for v in w] if sum(w) else [Fraction(1, 7)] * 7
            assert effective_vector(dec, w).dot(e) == 1

    def test_report_carries_vector(self, example):
        dec = decompose(example, "paper-example")
        rep = posterior(example, [0, 0, 0, 0, 0, 1, 0], obs(R_1=1), dec)
        assert list(rep.effective_vector) == [1, 0, 0]


class TestEmbedding:
    def hidden_s7(self, example):
        return type(example)(example.preparations[:6], example.interventions, example.entries[:, :6], example.mode)

    def test_exact_frequencies(self, example):
        dec = decompose(self.hidden_s7(example), "paper-example")
        # S_7 column (3/4, 1/4), (1/2, 1/2), (1, 0) as counts
        data = ObservationSet({(0, 0): 3, (0, 1): 1, (1, 0): 2, (1, 1): 2, (2, 0): 4, (2, 1): 0})
        emb = embed_new_preparation(dec, data)
        assert list(emb.vector) == [1, H, 0]
        assert emb.rank_preserved and emb.augmented_rank == 3 and emb.residual == 0

    def test_existing_column_recovered(self, example):
        dec = decompose(example)
        data = ObservationSet({(0, 0): 3, (0, 1): 1, (1, 0): 3, (1, 1): 1, (2, 0): 5})
        emb = embed_new_preparation(dec, data)
        assert list(emb.vector) == list(dec.preparation_vectors[4])

    def test_rank_growth(self, example):
        dec = decompose(example, "paper-example")
        data = ObservationSet({(0, 0): 1, (0, 1): 0, (1, 0): 1, (1, 1): 0, (2, 0): 0, (2, 1): 1})
        with pytest.warns(RankWouldGrow):
            emb = embed_new_preparation(dec, data)
        assert not emb.rank_preserved
        column = [1, 0, 1, 0, 0, 1]
        aug = sympy.Matrix([[*row, c] for row, c in zip(example.entries.tolist(), column)])
        assert aug.rank() == 4 == emb.augmented_rank

    def test_insufficient_coverage(self, example):
        dec = decompose(example)
        with pytest.raises(InsufficientCoverage):
            embed_new_preparation(dec, ObservationSet({(0, 0): 3, (0, 1): 1}))

    def test_simulated_recovery(self, example_float):
        table = example_float
        hidden = table.__class__(table.preparations[:6], table.interventions, table.entries[:, :6], "float")
        dec = decompose(hidden, "paper-example")
        data = simulate_observations(table, "S_7", [("M_1", 10_000), ("M_2", 10_000), ("M_3", 10_000)], seed=2024)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RankWouldGrow)
            emb = embed_new_preparation(dec, data)
        # frequency standard errors are <= 0.005; the coordinates depend on the
        # float pivot choice, so compare the predicted column instead
        column = dec.result_vectors.dot(emb.vector)
        np.testing.assert_allclose(column, table.entries[:, 6], atol=0.02)
        assert emb.vector.dot(intervention_sum_vectors(dec).common_sum) == pytest.approx(1)
        assert embed_new_preparation(dec, data, tol=0.05).rank_preserved


class TestSimulation:
    def test_deterministic_column(self, example):
        data = simulate_observations(example, "S_1", [("M_1", 100)], seed=9)
        assert data.counts == {(0, 0): 100, (0, 1): 0}
        assert data.true_prep == "S_1" and data.seed == 9 and data.rng

    def test_frequency_within_three_sigma(self, example):
        n = 100_000
        data = simulate_observations(example, 4, [(0, n)], seed=123)
        sigma = np.sqrt(0.75 * 0.25 / n)
        assert abs(data.counts[(0, 0)] / n - 0.75) <= 3 * sigma

    def test_same_seed_same_data(self, example):
        sched = [("M_1", 50), ("M_2", 50), ("M_3", 50)]
        assert simulate_observations(example, "S_5", sched, 42) == simulate_observations(example, "S_5", sched, 42)
