import csv
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from edgecut.econ import (
    PROB_GRID,
    THEORIES,
    EconConfig,
    GridPosterior,
    Lottery,
    TheoryPoint,
    bayes_update,
    canonical_points,
    choice_prob_matrix,
    enumerate_lotteries,
    enumerate_tests,
    grid_points,
    response_likelihood,
    score_econ_tests,
    select_econ_test,
    select_test_eff,
    theory_indices,
    uniform_over_points,
    uniform_over_theories,
    utility,
    write_test_pool_csv,
)


class TestLotteryPool:
    def test_sixty_six_distributions(self):
        lots = enumerate_lotteries()
        assert len(lots) == 66
        assert len(set(lots)) == 66
        for lot in lots:
            assert abs(sum(lot.probs) - 1.0) < 1e-9
            assert lot.probs[0] in PROB_GRID and lot.probs[1] in PROB_GRID

    def test_extreme_pair_is_usable(self):
        assert Lottery((0.01, 0.99, 0.0)) in enumerate_lotteries()

    def test_off_grid_distribution_absent(self):
        assert Lottery((0.01, 0.09, 0.9)) not in enumerate_lotteries()

    def test_pair_count_and_no_self_pairs(self):
        pairs = enumerate_tests()
        assert len(pairs) == 66 * 65 // 2
        assert all(p.first != p.second for p in pairs)
        assert [p.index for p in pairs] == list(range(len(pairs)))

    def test_validation(self):
        with pytest.raises(ValueError):
            Lottery((0.5, 0.6, -0.1))
        with pytest.raises(ValueError):
            Lottery((0.5, 0.4, 0.2))

    def test_pool_csv(self, tmp_path):
        path = tmp_path / "pool.csv"
        write_test_pool_csv(str(path))
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["pair_index", "p1_1", "p1_2", "p1_3", "p2_1", "p2_2", "p2_3"]
        assert len(rows) == 1 + 2145


class TestUtilities:
    def test_expected_value_symmetry(self):
        assert utility(TheoryPoint("EV"), Lottery((0.5, 0.0, 0.5))) == 0.0

    def test_prospect_theory_canonical_values(self):
        # direct scalar evaluation of the value and weighting functions
        point = TheoryPoint("PT", (0.9, 2.2, 0.9))
        lot = Lottery((0.5, 0.0, 0.5))
        w_half = math.exp(-((math.log(2.0)) ** 0.9))
        expected = (-2.2 * 10**0.9) * w_half + (10**0.9) * w_half
        assert utility(point, lot) == pytest.approx(expected, rel=1e-12)

    def test_prospect_theory_skips_zero_probabilities(self):
        point = TheoryPoint("PT", (0.9, 2.2, 0.9))
        assert utility(point, Lottery((0.0, 1.0, 0.0))) == 0.0

    def test_mean_variance_skewness_degenerate(self):
        point = TheoryPoint("MVS", (0.8, 0.25, 0.25))
        assert utility(point, Lottery((0.0, 1.0, 0.0))) == 0.0

    def test_mean_variance_skewness_moments(self):
        point = TheoryPoint("MVS", (0.8, 0.25, 0.25))
        lot = Lottery((0.2, 0.3, 0.5))
        p = np.array(lot.probs)
        pay = np.array([-10.0, 0.0, 10.0])
        mu = p @ pay
        sigma = math.sqrt(p @ (pay - mu) ** 2)
        nu = (p @ (pay - mu) ** 3) / sigma**3
        assert utility(point, lot) == pytest.approx(0.8 * mu - 0.25 * sigma + 0.25 * nu)

    def test_crra_log_branch(self):
        point = TheoryPoint("CRRA", (1.0,))
        lot = Lottery((0.2, 0.3, 0.5))
        expected = 0.2 * math.log(10) + 0.3 * math.log(20) + 0.5 * math.log(30)
        assert utility(point, lot) == pytest.approx(expected, rel=1e-12)

    def test_crra_power_branch(self):
        point = TheoryPoint("CRRA", (0.9,))
        lot = Lottery((0.5, 0.0, 0.5))
        expected = 0.5 * 10**0.1 / 0.1 + 0.5 * 30**0.1 / 0.1
        assert utility(point, lot) == pytest.approx(expected, rel=1e-12)

    def test_crra_domain_error(self):
        with pytest.raises(ValueError, match="positive shifted wealth"):
            utility(TheoryPoint("CRRA", (1.0,)), Lottery((0.5, 0.0, 0.5)), wealth_shift=10.0)

    def test_theory_point_validation(self):
        with pytest.raises(ValueError):
            TheoryPoint("PT", (0.9,))
        with pytest.raises(ValueError):
            TheoryPoint("XY")


class TestResponseLikelihood:
    def test_indifference(self):
        assert response_likelihood(3.0, 3.0) == 0.5

    def test_two_util_gap(self):
        assert response_likelihood(2.0, 0.0) == pytest.approx(1 / (1 + math.exp(-2)), rel=1e-12)

    @given(st.floats(-30, 30), st.floats(-30, 30))
    def test_complement_identity(self, u1, u2):
        assert response_likelihood(u1, u2) + response_likelihood(u2, u1) == pytest.approx(
            1.0, abs=1e-12
        )

    @given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-50, 50))
    def test_shift_invariance(self, u1, u2, c):
        assert response_likelihood(u1 + c, u2 + c) == pytest.approx(
            response_likelihood(u1, u2), abs=1e-9
        )

    def test_extreme_gaps_stay_strictly_inside_unit_interval(self):
        # the clamp keeps both choices at positive likelihood in float
        assert 0.0 < response_likelihood(-1e6, 1e6) < 1.0
        assert 0.0 < response_likelihood(1e6, -1e6) < 1.0
        assert 1.0 - response_likelihood(1e6, -1e6) > 0.0


class TestParameterGrids:
    def test_canonical_points_load_exactly(self):
        pts = canonical_points()
        assert pts[0] == TheoryPoint("EV")
        assert pts[1] == TheoryPoint("PT", (0.9, 2.2, 0.9))
        assert pts[2] == TheoryPoint("MVS", (0.8, 0.25, 0.25))
        assert pts[3] == TheoryPoint("CRRA", (1.0,))

    def test_grid_size_is_fifty_eight(self):
        pts = grid_points()
        assert len(pts) == 1 + 27 + 27 + 3 == 58
        counts = {t: 0 for t in THEORIES}
        for pt in pts:
            counts[pt.theory] += 1
        assert counts == {"EV": 1, "PT": 27, "MVS": 27, "CRRA": 3}

    def test_grid_values_three_per_parameter(self):
        cfg = EconConfig()
        assert cfg.pt_grid == ((0.85, 0.9, 0.95), (2.1, 2.2, 2.3), (0.9, 0.95, 1.0))
        assert cfg.mvs_grid == ((0.8, 0.9, 1.0), (0.2, 0.25, 0.3), (0.2, 0.25, 0.3))
        assert cfg.crra_grid == (0.9, 0.95, 1.0)

    def test_config_round_trip(self):
        cfg = EconConfig(crra_wealth_shift=25.0)
        assert EconConfig.from_dict(cfg.to_dict()) == cfg

    def test_fresh_marginals(self):
        pts = grid_points()
        np.testing.assert_allclose(
            uniform_over_points(pts).theory_marginals(),
            [1 / 58, 27 / 58, 27 / 58, 3 / 58],
            atol=1e-12,
        )
        np.testing.assert_allclose(
            uniform_over_theories(pts).theory_marginals(), [0.25] * 4, atol=1e-12
        )


class TestBayesUpdate:
    def test_constant_likelihood_leaves_posterior_unchanged(self):
        pts = canonical_points()
        post = uniform_over_points(pts)
        updated = bayes_update(post, enumerate_tests()[0], 1, likelihoods=np.full(4, 0.7))
        np.testing.assert_allclose(updated.weights, post.weights, atol=1e-15)

    def test_two_point_hand_bayes(self):
        pts = (TheoryPoint("EV"), TheoryPoint("CRRA", (1.0,)))
        post = GridPosterior(pts, np.array([0.5, 0.5]))
        updated = bayes_update(post, enumerate_tests()[0], 1, likelihoods=np.array([0.9, 0.5]))
        np.testing.assert_allclose(updated.weights, [9 / 14, 5 / 14], atol=1e-15)

    def test_updates_commute(self):
        pts = canonical_points()
        pairs = enumerate_tests()
        a = bayes_update(bayes_update(uniform_over_points(pts), pairs[3], 1), pairs[900], 2)
        b = bayes_update(bayes_update(uniform_over_points(pts), pairs[900], 2), pairs[3], 1)
        np.testing.assert_allclose(a.weights, b.weights, atol=1e-12)

    def test_invalid_choice_rejected(self):
        post = uniform_over_points(canonical_points())
        with pytest.raises(ValueError):
            bayes_update(post, enumerate_tests()[0], 3)

    @given(st.integers(0, 500))
    def test_posterior_stays_normalized(self, seed):
        rng = np.random.default_rng(seed)
        pts = canonical_points()
        prob1 = choice_prob_matrix(pts, enumerate_tests()[:50])
        post = uniform_over_theories(pts)
        for _ in range(10):
            t = int(rng.integers(50))
            choice = int(rng.integers(1, 3))
            post = bayes_update(
                post, enumerate_tests()[t], choice, likelihoods=prob1[:, t]
            )
            assert abs(post.weights.sum() - 1.0) < 1e-12


class TestSelection:
    def test_uninformative_pool_returns_lowest_index(self):
        prob1 = np.full((2, 4), 0.5)
        weights = np.array([0.5, 0.5])
        tidx = np.array([0, 1])
        t = select_econ_test(weights, tidx, prob1, np.zeros(4, bool), "eff")
        assert t == 0
        assert np.allclose(score_econ_tests(weights, tidx, prob1, "eff"), 0.0)

    def test_discriminating_test_beats_coin_flip(self):
        prob1 = np.array([[0.9, 0.5], [0.1, 0.5]])
        weights = np.array([0.5, 0.5])
        tidx = np.array([0, 1])
        scores = score_econ_tests(weights, tidx, prob1, "eff")
        assert scores[1] == pytest.approx(0.0, abs=1e-12)
        assert select_econ_test(weights, tidx, prob1, np.zeros(2, bool), "eff") == 0

    def test_canonical_selection_matches_exhaustive_argmax(self):
        pts = canonical_points()
        pairs = enumerate_tests()
        prob1 = choice_prob_matrix(pts, pairs)
        post = uniform_over_theories(pts)
        w = post.weights
        # brute force: evaluate the expected Gini-weight drop of every pair
        best_val, best_t = -1.0, None
        for t in range(len(pairs)):
            p1 = float(w @ prob1[:, t])
            now = sum(float(x) ** 2 for x in np.bincount(theory_indices(pts), weights=w, minlength=4))
            after = 0.0
            for choice, p_choice in ((1, p1), (2, 1.0 - p1)):
                lik = prob1[:, t] if choice == 1 else 1.0 - prob1[:, t]
                wp = w * lik
                wp = wp / wp.sum()
                marg = np.bincount(theory_indices(pts), weights=wp, minlength=4)
                after += p_choice * float((marg**2).sum())
            val = after - now
            if val > best_val + 1e-15:
                best_val, best_t = val, t
        assert select_test_eff(post, prob1) == best_t

    def test_random_selection_needs_rng(self):
        with pytest.raises(ValueError):
            select_econ_test(np.array([1.0]), np.array([0]), np.ones((1, 3)) * 0.5,
                             np.zeros(3, bool), "random")

    @given(st.integers(0, 300))
    def test_eff_scores_nonnegative(self, seed):
        rng = np.random.default_rng(seed)
        pts = canonical_points()
        prob1 = choice_prob_matrix(pts, enumerate_tests()[:100])
        w = rng.dirichlet(np.ones(4))
        scores = score_econ_tests(w, theory_indices(pts), prob1, "eff")
        assert (scores >= -1e-12).all()
