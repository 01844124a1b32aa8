import numpy as np
import pytest

from mol.ppo import (
    Adam,
    Batch,
    CorruptedModelError,
    MLP,
    PolicyNetwork,
    PPOLearner,
    TrainerConfig,
    TrainingFault,
    ValueNetwork,
    gradient_check,
    nstep_returns,
    ppo_gradient_check,
    ppo_loss,
)
from mol.ppo.gradcheck import mse_check, random_ppo_instance
from mol.surrogate import N_ACTUATORS, OBS_DIM, simulate


def oracle_returns(r, v, n, gamma):
    T = len(r)
    out = []
    for t in range(T):
        g = 0.0
        for i in range(n):
            if t + i < T:
                g += gamma**i * r[t + i]
        if t + n < T:
            g += gamma**n * v[t + n]
        out.append(g)
    return np.array(out)


class TestReturns:
    def test_zero(self):
        np.testing.assert_array_equal(nstep_returns(np.zeros(10), np.zeros(10)), np.zeros(10))

    def test_constant_reward(self):
        g = nstep_returns(np.ones(12), np.zeros(12), n=4, gamma=1.0)
        assert g[5] == 4.0
        assert g[-1] == 1.0

    def test_matches_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            T = int(rng.integers(1, 15))
            n = int(rng.integers(1, 6))
            r, v = rng.normal(size=T), rng.normal(size=T)
            np.testing.assert_allclose(nstep_returns(r, v, n, 0.99), oracle_returns(r, v, n, 0.99), atol=1e-12)

    def test_batched(self):
        rng = np.random.default_rng(1)
        r, v = rng.normal(size=(3, 12)), rng.normal(size=(3, 12))
        out = nstep_returns(r, v)
        for b in range(3):
            np.testing.assert_allclose(out[b], oracle_returns(r[b], v[b], 4, 0.99), atol=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            nstep_returns(np.zeros(3), np.zeros(4))


class TestPolicy:
    def test_deterministic_act(self):
        pi = PolicyNetwork(OBS_DIM, N_ACTUATORS, rng=np.random.default_rng(0))
        obs = np.random.default_rng(1).normal(size=(5, OBS_DIM))
        a1 = pi.act(obs, explore=False)[0]
        a2 = pi.act(obs, explore=False)[0]
        assert a1.tobytes() == a2.tobytes()

    def test_exploration_std(self):
        pi = PolicyNetwork(OBS_DIM, N_ACTUATORS, rng=np.random.default_rng(0))
        obs = np.zeros((10_000, OBS_DIM))
        clamped, raw, logp = pi.act(obs, np.random.default_rng(2))
        dev = raw - pi.mean_action(obs)
        np.testing.assert_allclose(dev.std(axis=0), 0.5, rtol=0.1)
        assert np.all(np.abs(clamped) <= 1)
        assert np.all(np.isfinite(logp))

    def test_log_prob_matches_density(self):
        pi = PolicyNetwork(4, 2, hidden=(5,), std=0.7)
        mean = np.array([[0.1, -0.2]])
        x = np.array([[0.5, 0.3]])
        expect = np.sum(-0.5 * ((x - mean) / 0.7) ** 2 - np.log(0.7 * np.sqrt(2 * np.pi)))
        assert pi.log_prob(x, mean)[0] == pytest.approx(expect)

    def test_corrupted(self):
        pi = PolicyNetwork(4, 2, hidden=(5,))
        pi.params[0][0, 0] = np.nan
        with pytest.raises(CorruptedModelError):
            pi.act(np.zeros((1, 4)), explore=False)

    def test_param_count(self):
        pi = PolicyNetwork(OBS_DIM, N_ACTUATORS, hidden=(64, 64))
        assert pi.n_params == OBS_DIM * 64 + 64 + 64 * 64 + 64 + 64 * N_ACTUATORS + N_ACTUATORS
        assert ValueNetwork(OBS_DIM).n_params == OBS_DIM * 64 + 64 + 64 * 64 + 64 + 65

    def test_flat_round_trip(self):
        net = MLP((3, 4, 2), np.random.default_rng(0))
        flat = net.get_flat()
        twin = net.copy()
        twin.set_flat(flat * 2)
        np.testing.assert_array_equal(net.get_flat(), flat)
        np.testing.assert_array_equal(twin.get_flat(), flat * 2)
        with pytest.raises(ValueError):
            net.set_flat(flat[:-1])

    def test_copy_keeps_type(self):
        pi = PolicyNetwork(4, 2, hidden=(3,))
        assert isinstance(pi.copy(), PolicyNetwork)
        assert pi.copy().std == pi.std


class TestGradients:
    def test_linear_squared_loss(self):
        net = MLP((4, 3), np.random.default_rng(0))
        rng = np.random.default_rng(1)
        rep = mse_check(net, rng.normal(size=(6, 4)), rng.normal(size=(6, 3)), tolerance=1e-7)
        assert rep.passed, rep

    def test_three_layer_net(self):
        net = MLP((5, 8, 8, 2), np.random.default_rng(2), output_activation="tanh")
        rng = np.random.default_rng(3)
        assert mse_check(net, rng.normal(size=(7, 5)), rng.normal(size=(7, 2))).passed

    def test_zero_loss_zero_grad(self):
        net = MLP((3, 4, 2), np.random.default_rng(4))
        x = np.random.default_rng(5).normal(size=(5, 3))
        y, cache = net.forward(x)
        grads = net.backward(cache, 2.0 * (y - y) / y.size)
        assert all(np.all(g == 0) for g in grads)

    @pytest.mark.parametrize("seed", range(10))
    def test_ppo_loss(self, seed):
        rep = ppo_gradient_check(seed)
        assert rep.passed, rep

    def test_size_limit(self):
        big = MLP((50, 40, 2))
        with pytest.raises(ValueError):
            gradient_check(big.params, lambda: (0.0, [np.zeros_like(p) for p in big.params]))


class TestPPOLoss:
    def test_identity_ratio(self):
        actor, critic, batch = random_ppo_instance(np.random.default_rng(0), n=6)
        mean = actor.mean_action(batch.obs)
        batch.log_probs = actor.log_prob(batch.actions, mean)
        stats, _, _ = ppo_loss(actor, critic, batch, 0.2)
        assert stats.actor_loss == pytest.approx(-batch.advantages.mean())
        assert stats.clip_fraction == 0.0

    def test_clipped_branch_has_no_actor_gradient(self):
        actor, critic, batch = random_ppo_instance(np.random.default_rng(1), n=4)
        mean = actor.mean_action(batch.obs)
        batch.log_probs = actor.log_prob(batch.actions, mean) - np.log(1.4)  # ratio = 1 + 2 * clip
        batch.advantages = np.abs(batch.advantages) + 0.1
        stats, ga, _ = ppo_loss(actor, critic, batch, 0.2)
        assert stats.clip_fraction == 1.0
        assert stats.actor_loss == pytest.approx(-1.2 * batch.advantages.mean())
        assert all(np.all(g == 0) for g in ga)


def tiny_learner(seed=0, **kw):
    cfg = TrainerConfig(actor_hidden=(16,), critic_hidden=(16,), minibatch=64, epochs=2, **kw)
    return PPOLearner(OBS_DIM, N_ACTUATORS, cfg, np.random.default_rng(seed))


def rollout(learner, seed=0, b=4, steps=20):
    rng = np.random.default_rng(seed)
    cmds = rng.uniform(-1, 1, (b, 3))
    return simulate(learner.policy, cmds, "nominal", steps, rng.standard_normal((b, steps, N_ACTUATORS)))


class TestLearner:
    def test_config_validation(self):
        for kw in (dict(clip=0), dict(gamma=0), dict(gamma=1.5), dict(n_step=0)):
            with pytest.raises(ValueError):
                TrainerConfig(**kw)
        cfg = TrainerConfig(lr_decay_at=100)
        assert TrainerConfig.from_dict(cfg.to_dict()) == cfg

    def test_batch_shapes_and_normalization(self):
        ln = tiny_learner()
        batch = ln.make_batch(rollout(ln))
        assert len(batch) == 80
        assert batch.obs.shape == (80, OBS_DIM)
        assert abs(batch.advantages.mean()) < 1e-9
        assert batch.advantages.std() == pytest.approx(1.0, abs=1e-6)

    def test_faulted_simulations_excluded(self):
        ln = tiny_learner()
        tr = rollout(ln)
        tr.faulted[1] = True
        assert len(ln.make_batch(tr)) == 60

    def test_zero_lr_is_noop(self):
        ln = tiny_learner(lr=0.0, lr_final=0.0)
        before = [p.copy() for p in ln.actor.params + ln.critic.params]
        ln.update(ln.make_batch(rollout(ln)), np.random.default_rng(0))
        for a, b in zip(before, ln.actor.params + ln.critic.params):
            np.testing.assert_array_equal(a, b)

    def test_update_changes_parameters(self):
        ln = tiny_learner()
        before = ln.actor.get_flat()
        stats = ln.update(ln.make_batch(rollout(ln)), np.random.default_rng(0))
        assert np.isfinite(stats.total)
        assert not np.array_equal(before, ln.actor.get_flat())
        assert ln.updates == 1

    def test_reproducible(self):
        def train(seed):
            ln = tiny_learner(seed)
            for k in range(3):
                ln.update(ln.make_batch(rollout(ln, k)), np.random.default_rng(k))
            return ln.actor.get_flat(), ln.critic.get_flat()

        a, b = train(7), train(7)
        assert a[0].tobytes() == b[0].tobytes() and a[1].tobytes() == b[1].tobytes()

    def test_lr_decay(self):
        ln = tiny_learner(lr_decay_at=10)
        assert ln.current_lr() == 3e-4
        ln.simulations_seen = 10
        assert ln.current_lr() == 1e-4

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_non_finite_loss_restores_state(self):
        ln = tiny_learner()
        batch = ln.make_batch(rollout(ln))
        batch.returns[0] = np.inf
        before = ln.state_dict()
        with pytest.raises(TrainingFault):
            ln.update(batch, np.random.default_rng(0))
        for a, b in zip(before["actor"] + before["critic"], ln.actor.params + ln.critic.params):
            np.testing.assert_array_equal(a, b)
        assert ln.actor_opt.t == before["actor_opt"]["t"]

    def test_empty_batch(self):
        ln = tiny_learner()
        empty = Batch(np.zeros((0, OBS_DIM)), np.zeros((0, 8)), np.zeros(0), np.zeros(0), np.zeros(0))
        with pytest.raises(ValueError):
            ln.update(empty, np.random.default_rng(0))

    def test_state_dict_round_trip(self):
        ln = tiny_learner(1)
        ln.update(ln.make_batch(rollout(ln)), np.random.default_rng(0))
        twin = tiny_learner(2)
        twin.load_state_dict(ln.state_dict())
        np.testing.assert_array_equal(twin.actor.get_flat(), ln.actor.get_flat())
        batch = ln.make_batch(rollout(ln, 5))
        ln.update(batch, np.random.default_rng(3))
        twin.update(batch, np.random.default_rng(3))
        np.testing.assert_array_equal(twin.actor.get_flat(), ln.actor.get_flat())

    def test_learns_a_bandit(self):
        # one-step problem: reward peaks at action +0.3
        rng = np.random.default_rng(0)
        cfg = TrainerConfig(actor_hidden=(8,), critic_hidden=(8,), minibatch=128, epochs=4, lr=3e-3)
        ln = PPOLearner(2, 1, cfg, rng)
        obs = np.ones((512, 2))
        for _ in range(80):
            _, raw, logp = ln.act(obs, rng)
            r = -(raw[:, 0] - 0.3) ** 2
            adv = (r - r.mean()) / r.std()
            ln.update(Batch(obs, raw, logp, r, adv), rng)
        assert ln.policy.mean_action(obs[:1])[0, 0] == pytest.approx(0.3, abs=0.05)


class TestAdam:
    def test_first_step_magnitude(self):
        p = [np.array([1.0, -1.0])]
        opt = Adam(p, lr=0.1)
        opt.step([np.array([3.0, -0.01])])
        np.testing.assert_allclose(p[0], [0.9, -0.9], atol=1e-6)

    def test_state_round_trip(self):
        p = [np.zeros(3)]
        opt = Adam(p)
        opt.step([np.ones(3)])
        twin = Adam([np.zeros(3)])
        twin.load_state_dict(opt.state_dict())
        assert twin.t == 1
        np.testing.assert_array_equal(twin.m[0], opt.m[0])
