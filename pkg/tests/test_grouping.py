import itertools
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from aesreward.errors import BadCriteriaCountError
from aesreward.grouping import (
    GroupRewards,
    PairwiseMatrix,
    clamp_weight,
    group_advantages,
    rwr_weight_from_criteria,
    rwr_weight_from_score,
    win_rates,
)


class TestRwrWeights:
    @pytest.mark.parametrize(
        "s,expected",
        [(0.0, 1.0), (3.0, math.exp(-3)), (-3.0, math.exp(3))],
    )
    def test_score_weight_examples(self, s, expected):
        assert rwr_weight_from_score(s) == pytest.approx(expected, rel=1e-12)

    def test_score_weight_hand_values(self):
        assert rwr_weight_from_score(3.0) == pytest.approx(0.049787068, rel=1e-8)
        assert rwr_weight_from_score(-3.0) == pytest.approx(20.0855369, rel=1e-8)

    def test_criteria_weight_examples(self):
        assert rwr_weight_from_criteria([0] * 15) == 1.0
        scores = [1, 1, 1] + [0] * 12
        assert rwr_weight_from_criteria(scores) == pytest.approx(math.exp(3), rel=1e-12)
        scores = [-1, -1] + [0] * 13
        assert rwr_weight_from_criteria(scores) == pytest.approx(0.13533528, rel=1e-7)

    def test_wrong_length_rejected(self):
        with pytest.raises(BadCriteriaCountError):
            rwr_weight_from_criteria([0] * 14)

    def test_bad_value_rejected(self):
        with pytest.raises(ValueError):
            rwr_weight_from_criteria([2] + [0] * 14)

    @given(st.floats(-10, 10), st.floats(0.01, 5))
    def test_strictly_decreasing(self, s, delta):
        assert rwr_weight_from_score(s + delta) < rwr_weight_from_score(s)

    @given(st.lists(st.sampled_from((-1, 0, 1)), min_size=15, max_size=15))
    def test_negated_criteria_give_reciprocal_weight(self, scores):
        w = rwr_weight_from_criteria(scores)
        w_neg = rwr_weight_from_criteria([-s for s in scores])
        assert w * w_neg == pytest.approx(1.0, rel=1e-9)

    def test_clamp(self):
        assert clamp_weight(math.exp(20)) == math.exp(15)
        assert clamp_weight(2.0) == 2.0


class TestPairwiseMatrix:
    def test_antisymmetry_enforced(self):
        with pytest.raises(ValueError):
            PairwiseMatrix.from_rows([[0, 1], [1, 0]])
        with pytest.raises(ValueError):
            PairwiseMatrix.from_rows([[1, 0], [0, 1]])
        PairwiseMatrix.from_rows([[0, 1], [-1, 0]])

    def test_bad_values_rejected(self):
        with pytest.raises(ValueError):
            PairwiseMatrix.from_rows([[0, 2], [-2, 0]])

    def test_too_small_rejected(self):
        with pytest.raises(ValueError):
            PairwiseMatrix.from_rows([[0]])


class TestWinRates:
    def test_single_comparison(self):
        m = PairwiseMatrix.from_rows([[0, 1], [-1, 0]])
        assert win_rates(m) == [1.0, 0.0]

    def test_all_ties(self):
        m = PairwiseMatrix.from_rows([[0, 0, 0], [0, 0, 0], [0, 0, 0]])
        assert win_rates(m) == [0.5, 0.5, 0.5]

    def test_three_cycle(self):
        # 0 beats 1, 1 beats 2, 2 beats 0
        m = PairwiseMatrix.from_rows([[0, 1, -1], [-1, 0, 1], [1, -1, 0]])
        assert win_rates(m) == [0.5, 0.5, 0.5]

    @given(st.integers(2, 5).flatmap(
        lambda g: st.lists(
            st.sampled_from((-1, 0, 1)),
            min_size=g * (g - 1) // 2,
            max_size=g * (g - 1) // 2,
        ).map(lambda upper: (g, upper))
    ))
    def test_rates_sum_to_half_group(self, args):
        g, upper = args
        rows = [[0] * g for _ in range(g)]
        it = iter(upper)
        for a in range(g):
            for b in range(a + 1, g):
                v = next(it)
                rows[a][b] = v
                rows[b][a] = -v
        rates = win_rates(PairwiseMatrix.from_rows(rows))
        assert sum(rates) == pytest.approx(g / 2, abs=1e-12)
        assert all(0.0 <= r <= 1.0 for r in rates)


class TestGroupAdvantages:
    def test_alternating_rewards(self):
        assert group_advantages([1.0, 0.0, 1.0, 0.0]) == [1.0, -1.0, 1.0, -1.0]

    def test_constant_rewards_yield_zeros(self):
        assert group_advantages([0.7, 0.7, 0.7]) == [0.0, 0.0, 0.0]

    def test_two_rewards(self):
        assert group_advantages([2.0, 0.0]) == [1.0, -1.0]

    def test_sample_std_option(self):
        got = group_advantages([2.0, 0.0], ddof=1)
        assert got == pytest.approx([1 / math.sqrt(2), -1 / math.sqrt(2)], abs=1e-12)

    def test_too_small_rejected(self):
        with pytest.raises(ValueError):
            group_advantages([1.0])

    @given(st.lists(st.floats(-100, 100), min_size=2, max_size=12))
    def test_standardization_invariants(self, rewards):
        adv = group_advantages(rewards)
        mean = sum(adv) / len(adv)
        assert mean == pytest.approx(0.0, abs=1e-9)
        if any(a != 0.0 for a in adv):
            var = sum(a * a for a in adv) / len(adv)
            assert math.sqrt(var) == pytest.approx(1.0, abs=1e-9)

    def test_permutation_equivariance_through_win_rates(self):
        rows = [[0, 1, -1, 0], [-1, 0, 1, 1], [1, -1, 0, -1], [0, -1, 1, 0]]
        m = PairwiseMatrix.from_rows(rows)
        base = group_advantages(win_rates(m))
        for perm in itertools.permutations(range(4)):
            permuted_rows = [[rows[perm[a]][perm[b]] for b in range(4)] for a in range(4)]
            permuted = group_advantages(win_rates(PairwiseMatrix.from_rows(permuted_rows)))
            for a in range(4):
                assert permuted[a] == pytest.approx(base[perm[a]], abs=1e-12)


def test_group_rewards_validation():
    with pytest.raises(ValueError):
        GroupRewards("g", (1.0,))
    with pytest.raises(ValueError):
        GroupRewards("g", (1.0, float("nan")))
    GroupRewards("g", (1.0, 2.0))
