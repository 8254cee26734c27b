import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opinionchain.errors import EnumerationBudgetError, InvalidInputError
from opinionchain.model import (
    HcrfParameters,
    LabelSet,
    ObservationSequence,
    brute_force_posterior,
    log_partition_per_label,
    log_partitions,
    marginals,
    posterior,
    potential,
    predict,
)


def seq(features, doc_id="t"):
    return ObservationSequence(doc_id=doc_id, features=np.asarray(features, dtype=float))


def random_instance(rng, length=None, num_hidden=None, dim=None, num_labels=2, scale=0.8):
    length = length or int(rng.integers(1, 7))
    num_hidden = num_hidden or int(rng.integers(1, 5))
    dim = dim or int(rng.integers(1, 6))
    x = seq(rng.standard_normal((length, dim)))
    theta = HcrfParameters(
        scale * rng.standard_normal((num_hidden, dim)),
        scale * rng.standard_normal((num_labels, num_hidden)),
        scale * rng.standard_normal((num_labels, num_hidden, num_hidden)),
    )
    return x, theta


# small-strategy instances for hypothesis: everything derived from one seed so
# shrinking stays meaningful
instance_params = st.tuples(
    st.integers(0, 2**32 - 1),
    st.integers(1, 6),  # L
    st.integers(1, 4),  # H
    st.integers(1, 5),  # D
    st.integers(2, 3),  # Y
)


def build(params):
    seed, length, num_hidden, dim, num_labels = params
    rng = np.random.default_rng(seed)
    return random_instance(rng, length, num_hidden, dim, num_labels)


class TestConstruction:
    def test_empty_sequence_rejected(self):
        with pytest.raises(InvalidInputError):
            seq(np.zeros((0, 3)))

    def test_non_finite_features_rejected(self):
        with pytest.raises(InvalidInputError):
            seq([[np.nan, 0.0]])

    def test_wrong_rank_rejected(self):
        with pytest.raises(InvalidInputError):
            seq(np.zeros(4))

    def test_inconsistent_parameter_shapes_rejected(self):
        with pytest.raises(InvalidInputError):
            HcrfParameters(np.zeros((2, 3)), np.zeros((2, 2)), np.zeros((2, 3, 3)))

    def test_non_finite_parameters_rejected(self):
        with pytest.raises(InvalidInputError):
            HcrfParameters(np.full((1, 1), np.inf), np.zeros((2, 1)), np.zeros((2, 1, 1)))

    def test_label_set_needs_unique_names(self):
        with pytest.raises(InvalidInputError):
            LabelSet(("a", "a"))
        assert LabelSet(("negative", "positive")).index("positive") == 1

    def test_vector_round_trip(self):
        rng = np.random.default_rng(3)
        theta = HcrfParameters.random(3, 2, 4, rng)
        back = HcrfParameters.from_vector(theta.as_vector(), 3, 2, 4)
        assert np.array_equal(back.theta_obs, theta.theta_obs)
        assert np.array_equal(back.theta_state, theta.theta_state)
        assert np.array_equal(back.theta_trans, theta.theta_trans)


class TestPotential:
    def test_zero_parameters_score_zero(self):
        theta = HcrfParameters.zeros(3, 2, 4)
        x = seq(np.random.default_rng(0).standard_normal((5, 4)))
        assert potential(1, [0, 2, 1, 1, 0], x, theta) == 0.0

    def test_single_segment_has_no_transition_term(self):
        rng = np.random.default_rng(1)
        theta = HcrfParameters.random(2, 2, 3, rng, scale=1.0)
        x = seq(rng.standard_normal((1, 3)))
        expected = float(x.features[0] @ theta.theta_obs[1] + theta.theta_state[0, 1])
        assert potential(0, [1], x, theta) == pytest.approx(expected, abs=1e-12)

    def test_hand_evaluated_two_segment_score(self):
        """Term-by-term evaluation of a small integer-valued instance."""
        theta = HcrfParameters(
            np.array([[1.0, 2.0], [3.0, -1.0]]),
            np.array([[1.0, -1.0], [2.0, 0.0]]),
            np.array([[[0.0, 1.0], [2.0, 3.0]], [[-1.0, 0.0], [1.0, 2.0]]]),
        )
        x = seq([[1.0, 0.0], [0.0, 2.0]])
        # y=1, h=(0,1): obs 1 + (-2), state 2 + 0, trans 0
        assert potential(1, [0, 1], x, theta) == pytest.approx(1.0, abs=1e-12)
        # y=0, h=(1,1): obs 3 + (-2), state -1 + -1, trans 3
        assert potential(0, [1, 1], x, theta) == pytest.approx(2.0, abs=1e-12)

    def test_bad_hidden_path_rejected(self):
        theta = HcrfParameters.zeros(2, 2, 2)
        x = seq([[0.0, 0.0], [0.0, 0.0]])
        with pytest.raises(InvalidInputError):
            potential(0, [0], x, theta)
        with pytest.raises(InvalidInputError):
            potential(0, [0, 2], x, theta)
        with pytest.raises(InvalidInputError):
            potential(2, [0, 0], x, theta)

    def test_dimension_mismatch_rejected(self):
        theta = HcrfParameters.zeros(2, 2, 3)
        with pytest.raises(InvalidInputError):
            potential(0, [0, 0], seq([[0.0, 0.0], [0.0, 0.0]]), theta)


class TestLogPartition:
    def test_zero_parameters_give_length_log_states(self):
        theta = HcrfParameters.zeros(3, 2, 2)
        x = seq(np.random.default_rng(0).standard_normal((4, 2)))
        for y in range(2):
            assert log_partition_per_label(y, x, theta) == pytest.approx(
                4 * np.log(3), abs=1e-12
            )

    def test_single_hidden_state_is_single_path_score(self):
        rng = np.random.default_rng(2)
        theta = HcrfParameters.random(1, 2, 3, rng, scale=1.0)
        x = seq(rng.standard_normal((5, 3)))
        want = potential(1, [0] * 5, x, theta)
        assert log_partition_per_label(1, x, theta) == pytest.approx(want, abs=1e-12)

    def test_matches_explicit_path_sum(self):
        rng = np.random.default_rng(7)
        for _ in range(30):
            x, theta = random_instance(rng)
            from opinionchain.model import brute_force_log_partitions

            want = brute_force_log_partitions(x, theta)
            got = log_partitions(x, theta)
            np.testing.assert_allclose(got, want, rtol=1e-10, atol=0)


class TestPosterior:
    def test_zero_parameters_uniform(self):
        theta = HcrfParameters.zeros(2, 2, 3)
        x = seq(np.random.default_rng(5).standard_normal((6, 3)))
        np.testing.assert_allclose(posterior(x, theta), [0.5, 0.5], atol=1e-12)

    def test_single_state_label_symmetric_parameters_ignore_observations(self):
        theta = HcrfParameters(
            np.array([[1.5, -2.0]]),
            np.array([[0.7], [0.7]]),
            np.array([[[0.3]], [[0.3]]]),
        )
        rng = np.random.default_rng(6)
        for _ in range(5):
            x = seq(rng.standard_normal((4, 2)))
            np.testing.assert_allclose(posterior(x, theta), [0.5, 0.5], atol=1e-12)

    def test_single_state_posterior_independent_of_observations(self):
        rng = np.random.default_rng(11)
        theta = HcrfParameters.random(1, 2, 3, rng, scale=1.0)
        a = posterior(seq(rng.standard_normal((4, 3))), theta)
        b = posterior(seq(100.0 * rng.standard_normal((4, 3))), theta)
        np.testing.assert_allclose(a, b, atol=1e-12)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(8)
        for _ in range(30):
            x, theta = random_instance(rng)
            np.testing.assert_allclose(
                posterior(x, theta), brute_force_posterior(x, theta), atol=1e-10
            )


class TestPredict:
    def test_clear_argmax(self):
        theta = HcrfParameters(
            np.zeros((1, 1)), np.array([[2.0], [-2.0]]), np.zeros((2, 1, 1))
        )
        assert predict(seq([[0.0], [0.0]]), theta) == 0

    def test_exact_tie_goes_to_lowest_index(self):
        theta = HcrfParameters.zeros(2, 2, 1)
        assert predict(seq([[1.0]]), theta) == 0

    def test_state_bias_shift_preserves_prediction(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            x, theta = random_instance(rng)
            shifted = theta.copy()
            shifted.theta_state = shifted.theta_state + 3.7
            assert predict(x, theta) == predict(x, shifted)


class TestMarginals:
    def test_zero_parameters_uniform(self):
        theta = HcrfParameters.zeros(3, 2, 2)
        x = seq(np.random.default_rng(0).standard_normal((4, 2)))
        m = marginals(0, x, theta)
        np.testing.assert_allclose(m.state_posteriors, 1.0 / 3.0, atol=1e-12)
        np.testing.assert_allclose(m.pair_posteriors, 1.0 / 9.0, atol=1e-12)

    def test_single_state_all_ones(self):
        rng = np.random.default_rng(4)
        theta = HcrfParameters.random(1, 2, 2, rng, scale=1.0)
        m = marginals(1, seq(rng.standard_normal((3, 2))), theta)
        np.testing.assert_allclose(m.state_posteriors, 1.0, atol=1e-12)
        np.testing.assert_allclose(m.pair_posteriors, 1.0, atol=1e-12)

    def test_matches_brute_force_path_sums(self):
        """Normalize explicit path scores and accumulate state/pair counts."""
        rng = np.random.default_rng(10)
        for _ in range(15):
            x, theta = random_instance(rng)
            num_h = theta.num_hidden_states
            y = int(rng.integers(theta.num_labels))
            from itertools import product

            paths = list(product(range(num_h), repeat=x.length))
            scores = np.array([potential(y, p, x, theta) for p in paths])
            weights = np.exp(scores - scores.max())
            weights /= weights.sum()
            state = np.zeros((x.length, num_h))
            pair = np.zeros((x.length - 1, num_h, num_h))
            for w, p in zip(weights, paths):
                for j, h in enumerate(p):
                    state[j, h] += w
                for j in range(x.length - 1):
                    pair[j, p[j], p[j + 1]] += w
            m = marginals(y, x, theta)
            np.testing.assert_allclose(m.state_posteriors, state, atol=1e-10)
            if x.length > 1:
                np.testing.assert_allclose(m.pair_posteriors, pair, atol=1e-10)


class TestBruteForceGuard:
    def test_budget_exceeded_refused(self):
        theta = HcrfParameters.zeros(4, 2, 1)
        x = seq(np.zeros((11, 1)))
        with pytest.raises(EnumerationBudgetError):
            brute_force_posterior(x, theta)

    def test_budget_boundary_allowed(self):
        # 4^10 = 1048576 > 10^6 refused; 2^10 well inside
        theta = HcrfParameters.zeros(2, 2, 1)
        x = seq(np.zeros((10, 1)))
        np.testing.assert_allclose(brute_force_posterior(x, theta), [0.5, 0.5], atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(instance_params)
def test_posterior_normalizes(params):
    x, theta = build(params)
    assert abs(posterior(x, theta).sum() - 1.0) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(instance_params)
def test_posterior_matches_brute_force(params):
    x, theta = build(params)
    np.testing.assert_allclose(posterior(x, theta), brute_force_posterior(x, theta), atol=1e-10)


@settings(max_examples=60, deadline=None)
@given(instance_params)
def test_marginal_consistency(params):
    x, theta = build(params)
    m = marginals(0, x, theta)
    np.testing.assert_allclose(m.state_posteriors.sum(axis=1), 1.0, atol=1e-10)
    for j in range(x.length - 1):
        np.testing.assert_allclose(
            m.pair_posteriors[j].sum(axis=1), m.state_posteriors[j], atol=1e-10
        )
        np.testing.assert_allclose(
            m.pair_posteriors[j].sum(axis=0), m.state_posteriors[j + 1], atol=1e-10
        )


@settings(max_examples=40, deadline=None)
@given(instance_params, st.integers(0, 2**32 - 1))
def test_label_permutation_symmetry(params, perm_seed):
    x, theta = build(params)
    num_labels = theta.num_labels
    perm = np.random.default_rng(perm_seed).permutation(num_labels)
    permuted = HcrfParameters(
        theta.theta_obs, theta.theta_state[perm], theta.theta_trans[perm]
    )
    base = posterior(x, theta)
    np.testing.assert_allclose(posterior(x, permuted), base[perm], atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(instance_params, st.floats(-5.0, 5.0, allow_nan=False))
def test_state_bias_shift_invariance(params, shift):
    x, theta = build(params)
    shifted = theta.copy()
    shifted.theta_state = shifted.theta_state + shift
    np.testing.assert_allclose(posterior(x, shifted), posterior(x, theta), atol=1e-12)
