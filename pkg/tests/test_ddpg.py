import numpy as np
import pytest
from scipy import stats

from irsuav.ddpg import DdpgAgent, DdpgConfig, ReplayBuffer, Transition
from irsuav.nn import numeric_gradients

SD, AD = 4, 2


def small_agent(seed=0, **kw):
    cfg = DdpgConfig(hidden=(16, 16), batch_size=8, **kw)
    return DdpgAgent(SD, AD, cfg, np.random.default_rng(seed))


def random_batch(rng, n=8):
    return (rng.normal(size=(n, SD)), rng.uniform(-1, 1, size=(n, AD)),
            rng.normal(size=n), rng.normal(size=(n, SD)))


def fill(agent, rng, n):
    for _ in range(n):
        agent.store(rng.normal(size=SD), rng.uniform(-1, 1, AD), rng.normal(), rng.normal(size=SD))


def test_zero_noise_is_greedy(rng):
    agent = small_agent(noise_scale=0.0)
    s = rng.normal(size=SD)
    np.testing.assert_array_equal(agent.act_with_noise(s), np.clip(agent.act(s), -1, 1))
    np.testing.assert_array_equal(agent.act_with_noise(s), agent.act_with_noise(s))


def test_noise_decay_closed_form():
    agent = small_agent()
    s = np.zeros(SD)
    for _ in range(10_000):
        agent.act_with_noise(s)
    assert agent.noise_scale == pytest.approx(3 * 0.99995 ** 10_000, rel=1e-9)
    assert agent.noise_scale == pytest.approx(1.8196, abs=1e-3)


def test_noisy_actions_stay_in_range(rng):
    agent = small_agent()
    for _ in range(50):
        a = agent.act_with_noise(rng.normal(size=SD))
        assert np.all(np.abs(a) <= 1)


def tr(i):
    return Transition(np.full(SD, i, float), np.zeros(AD), float(i), np.zeros(SD))


def test_ring_eviction():
    buf = ReplayBuffer(3, SD, AD)
    for i in range(4):
        buf.store(tr(i))
    assert len(buf) == 3
    assert sorted(buf.r.tolist()) == [1.0, 2.0, 3.0]
    assert buf.r[buf.ordered_indices()].tolist() == [1.0, 2.0, 3.0]


def test_eviction_keeps_most_recent(rng):
    buf = ReplayBuffer(7, SD, AD)
    for i in range(30):
        buf.store(tr(i))
    assert buf.r[buf.ordered_indices()].tolist() == list(map(float, range(23, 30)))


def test_single_item_sampling(rng):
    buf = ReplayBuffer(5, SD, AD)
    buf.store(tr(9))
    out = buf.sample(4, rng)
    assert len(out) == 4 and all(t.r == 9.0 for t in out)


def test_empty_buffer_sample_raises(rng):
    with pytest.raises(ValueError):
        ReplayBuffer(5, SD, AD).sample(1, rng)


def test_sampling_uniformity(rng):
    buf = ReplayBuffer(16, SD, AD)
    for i in range(16):
        buf.store(tr(i))
    counts = np.bincount(buf.sample_indices(100_000, rng), minlength=16)
    assert stats.chisquare(counts).pvalue > 0.01


def test_critic_target_zeta_zero(rng):
    agent = small_agent(zeta=0.0)
    _, _, r, s2 = random_batch(rng)
    np.testing.assert_array_equal(agent.critic_targets(r, s2), r)


def test_critic_target_constant_network(rng):
    agent = small_agent()
    for p in agent.critic_target.params:
        p[...] = 0
    agent.critic_target.params[-1][...] = 2.5
    _, _, r, s2 = random_batch(rng)
    np.testing.assert_allclose(agent.critic_targets(r, s2), r + 0.9 * 2.5, rtol=1e-15)


def test_critic_target_and_loss_match_scalar_oracle(rng):
    agent = small_agent()
    s, a, r, s2 = random_batch(rng)
    y = agent.critic_targets(r, s2)
    loss = 0.0
    for i in range(len(r)):
        a2 = agent.actor_target(s2[i])
        q2 = agent.critic_target(np.concatenate([s2[i], a2]))[0]
        assert y[i] == pytest.approx(r[i] + 0.9 * q2, abs=1e-12)
        loss += (y[i] - agent.critic(np.concatenate([s[i], a[i]]))[0]) ** 2
    assert agent.critic_loss(s, a, r, s2) == pytest.approx(loss / len(r), abs=1e-12)


def test_critic_gradients_finite_difference(rng):
    agent = small_agent()
    s, a, r, s2 = random_batch(rng)
    y = agent.critic_targets(r, s2)
    _, grads = agent.critic_gradients(s, a, r, s2)
    num = numeric_gradients(lambda: float(np.mean((y - agent.q(s, a)) ** 2)), agent.critic.params)
    for g, n in zip(grads, num):
        np.testing.assert_allclose(g, n, rtol=1e-5, atol=1e-8)


def test_perfect_critic_is_unchanged(rng):
    agent = small_agent(zeta=0.0)
    s, a, _, s2 = random_batch(rng)
    r = agent.q(s, a)
    before = [p.copy() for p in agent.critic.params]
    loss = agent.train_step((s, a, r, s2))
    assert loss == 0.0
    for b, p in zip(before, agent.critic.params):
        assert np.array_equal(b, p)


def test_kappa_one_copies_online(rng):
    agent = small_agent(kappa=1.0)
    agent.train_step(random_batch(rng))
    for t, o in ((agent.actor_target, agent.actor), (agent.critic_target, agent.critic)):
        assert all(np.array_equal(x, y) for x, y in zip(t.params, o.params))


def test_underfull_buffer_is_noop(rng):
    agent = small_agent()
    fill(agent, rng, 7)
    before = [p.copy() for p in agent.actor.params]
    assert agent.train_step() is None
    assert all(np.array_equal(b, p) for b, p in zip(before, agent.actor.params))
    fill(agent, rng, 1)
    assert agent.train_step() is not None


def test_actor_gradient_under_sum_critic(rng):
    """With Q(s, a) = sum(a) the actor gradient is -grad of mean sum(mu)."""
    agent = small_agent()
    c = agent.critic
    for p in c.params:
        p[...] = 0
    # route each action dim through its own ReLU unit with a large positive bias
    W0 = c.params[0]
    for j in range(AD):
        W0[SD + j, j] = 1.0
        c.params[1][j] = 10.0
        c.params[2][j, j] = 1.0
        c.params[3][j] = 0.0
        c.params[4][j, 0] = 1.0
    s = rng.normal(size=(5, SD))
    mu = agent.actor(s)
    np.testing.assert_allclose(agent.q(s, mu), mu.sum(1) + 10 * AD, rtol=1e-12)
    grads = agent.actor_gradients(s)
    num = numeric_gradients(lambda: -float(np.mean(agent.actor(s).sum(1))), agent.actor.params)
    for g, n in zip(grads, num):
        np.testing.assert_allclose(g, n, rtol=1e-5, atol=1e-10)


def test_critic_loss_nonincreasing_on_fixed_batch(rng):
    agent = small_agent(actor_lr=0.0, kappa=0.0)
    batch = random_batch(rng, 32)
    losses = [agent.critic_loss(*batch)]
    for _ in range(100):
        agent.train_step(batch)
        losses.append(agent.critic_loss(*batch))
    assert losses[-1] < losses[0]
    assert np.all(np.diff(losses) <= 1e-12)


def test_save_load_round_trip(tmp_path, rng):
    agent = small_agent()
    fill(agent, rng, 10)
    agent.act_with_noise(np.zeros(SD))
    agent.train_step()
    agent.save(tmp_path)
    other = small_agent(seed=5)
    other.load(tmp_path)
    s = rng.normal(size=SD)
    np.testing.assert_array_equal(other.act(s), agent.act(s))
    assert other.noise_scale == agent.noise_scale
    assert other.critic_opt.t == agent.critic_opt.t
