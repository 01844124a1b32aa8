import numpy as np
import pytest
from hypothesis import given, strategies as st

from mol.commands import CommandBounds, ObjectiveSpace, simplex_points
from mol.reward import (
    FeatureSpec,
    RewardConfig,
    RewardConfigError,
    RewardFeature,
    SimulationFault,
    StepOutcome,
    feature_reward,
    mo_fitness,
    negative_reward,
    positive_reward,
    rl_reward,
)

CFG = RewardConfig()


class TestFeatureReward:
    @pytest.mark.parametrize("e", [1, 2, 3.5])
    def test_max_value(self, e):
        assert feature_reward(RewardFeature(5, 0, 5, False, e)) == 1.0
        assert feature_reward(RewardFeature(5, 0, 5, True, e)) == 0.0

    def test_mid_range_squared(self):
        assert feature_reward(RewardFeature(2.5, 0, 5, False, 2)) == pytest.approx(0.25)

    def test_clamps(self):
        assert feature_reward(RewardFeature(99, 0, 5)) == 1.0
        assert feature_reward(RewardFeature(-1, 0, 5)) == 0.0

    def test_bad_bounds(self):
        with pytest.raises(RewardConfigError):
            feature_reward(RewardFeature(1, 2, 2))

    @given(st.floats(-2, 7), st.floats(-2, 7), st.booleans())
    def test_monotone(self, a, b, invert):
        lo, hi = sorted((a, b))
        r_lo = feature_reward(RewardFeature(lo, 0, 5, invert))
        r_hi = feature_reward(RewardFeature(hi, 0, 5, invert))
        assert (r_hi >= r_lo) if not invert else (r_hi <= r_lo)


class TestPositive:
    def test_perfect(self):
        c = np.array([0.3, -0.5, 0.2])
        assert positive_reward(c, c) == pytest.approx(2.0)

    def test_opposite(self):
        c = np.array([0.3, -0.5, 0.2])
        assert positive_reward(c, -c) == pytest.approx(1.0)

    def test_zero_velocity(self):
        # angle term (1 - pi/pi)^2 = 0; magnitude term (1 - 1/2)^2 = 0.25
        cfg = RewardConfig(magnitude=FeatureSpec(max=2.0))
        assert positive_reward([1, 0, 0], [0, 0, 0], cfg) == pytest.approx(0.25)

    def test_non_finite(self):
        with pytest.raises(SimulationFault):
            positive_reward([1, 0, 0], [np.nan, 0, 0])

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(0)
        c = rng.uniform(-1, 1, (20, 3))
        v = rng.uniform(-1, 1, (20, 3))
        batch = positive_reward(c, v)
        single = [positive_reward(c[i], v[i]) for i in range(20)]
        np.testing.assert_allclose(batch, single)
        assert np.all((batch >= 0) & (batch <= 2))


class TestNegative:
    def test_zero(self):
        assert negative_reward(StepOutcome(np.zeros(3), 0.0, 0.0, 0.0)) == 0.0

    def test_max(self):
        s = StepOutcome(np.zeros(3), CFG.posture.max, CFG.height.max, CFG.joint_speed.max)
        assert negative_reward(s) == pytest.approx(-3.0)

    def test_mid_posture(self):
        s = StepOutcome(np.zeros(3), CFG.posture.max / 2, 0.0, 0.0)
        assert negative_reward(s) == pytest.approx(-0.25)


class TestRL:
    def test_perfect(self):
        c = np.array([0.5, 0.1, 0.0])
        assert rl_reward(c, StepOutcome(c, 0.0, 0.0, 0.0)) == pytest.approx(2.0)

    def test_max_penalty(self):
        c = np.array([0.5, 0.1, 0.0])
        s = StepOutcome(c, 5.0, 5.0, 50.0)
        assert rl_reward(c, s) == pytest.approx(-1.0)

    def test_zero_outcome(self):
        cfg = RewardConfig(magnitude=FeatureSpec(max=2.0))
        assert rl_reward([1, 0, 0], StepOutcome(np.zeros(3), 0.0, 0.0, 0.0), cfg) == pytest.approx(0.25)

    def test_bounded(self):
        rng = np.random.default_rng(1)
        c = rng.uniform(-1, 1, (500, 3))
        s = StepOutcome(rng.uniform(-2, 2, (500, 3)), rng.uniform(0, 3, 500),
                        rng.uniform(0, 3, 500), rng.uniform(0, 9, 500))
        r = rl_reward(c, s)
        assert np.all((r >= -3) & (r <= 2))


class TestMOFitness:
    def test_zero_reward(self):
        np.testing.assert_array_equal(mo_fitness([0.2, 0.3, -0.4], 0.0), np.zeros(4))

    def test_one_hot_at_vertices(self):
        for v in simplex_points(3):
            f = mo_fitness(0.8 * v, 1.0)
            expect = (simplex_points(3) @ v > 0.99).astype(float)
            np.testing.assert_allclose(f, expect, atol=1e-9)

    def test_planar_midpoint(self):
        space = ObjectiveSpace(2)
        bounds = CommandBounds((-1, -1), (1, 1))
        o = simplex_points(2)
        mid = (o[0] + o[1]) / np.linalg.norm(o[0] + o[1])
        np.testing.assert_allclose(mo_fitness(0.5 * mid, 1.0, space, bounds), [0.5, 0.5, 0.0], atol=1e-12)

    def test_homogeneous(self):
        rng = np.random.default_rng(7)
        c = rng.uniform(-1, 1, (100, 3))
        r = rng.uniform(0, 2, 100)
        k = 1.7
        np.testing.assert_allclose(mo_fitness(c, k * r), k * mo_fitness(c, r), rtol=1e-12, atol=1e-15)

    def test_components_within_reward(self):
        rng = np.random.default_rng(8)
        c = rng.uniform(-1, 1, (200, 3))
        r = rng.uniform(0, 2, 200)
        f = mo_fitness(c, r)
        assert f.shape == (200, 4)
        assert np.all(f >= 0) and np.all(f <= r[:, None] + 1e-15)

    def test_dominance_follows_reward(self):
        c = np.array([0.3, -0.6, 0.2])
        f_hi, f_lo = mo_fitness(c, 1.5), mo_fitness(c, 1.0)
        assert np.all(f_hi >= f_lo) and np.any(f_hi > f_lo)

    def test_degenerate(self):
        with pytest.raises(ValueError):
            mo_fitness([0.0, 0.0, 0.0], 1.0)

    def test_negative_reward_rejected(self):
        with pytest.raises(ValueError):
            mo_fitness([0.5, 0, 0], -0.1)
