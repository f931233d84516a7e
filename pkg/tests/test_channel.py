import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irsuav.channel import (
    ChannelModel, ChannelParams, aa_channel, ag_channel, aod_cosine, aoa_cosine,
    dbm_to_watts, db_to_linear, distance, effective_channel, steering_vector,
)
from irsuav import oracles
from conftest import ZeroNormalRng

UAV = (0.0, 0.0, 200.0)
IRS = (500.0, 500.0, 30.0)
coord = st.floats(-1e4, 1e4, allow_nan=False)
point = st.tuples(coord, coord, st.floats(0, 1e3))


def test_distance_examples():
    assert distance(UAV, IRS) == pytest.approx(math.sqrt(528900))
    assert distance(UAV, IRS) == pytest.approx(727.255, abs=1e-3)
    assert distance((1, 2, 3), (1, 2, 3)) == 0
    assert distance((0, 0, 0), (3, 4, 0)) == 5


@given(point, point, point)
def test_distance_symmetric_and_triangle(a, b, c):
    assert distance(a, b) == distance(b, a)
    assert distance(a, c) <= distance(a, b) + distance(b, c) + 1e-9


def test_steering_vector_examples():
    np.testing.assert_array_equal(steering_vector(0.0, 4), np.ones(4))
    np.testing.assert_allclose(steering_vector(1.0, 2, 0.5), [1, -1], atol=1e-15)
    v = steering_vector(0.5, 3, 0.5)
    np.testing.assert_allclose(v, np.exp(1j * np.array([0, -np.pi / 2, -np.pi])), atol=1e-15)


def test_steering_vector_rejects_bad_cosine():
    with pytest.raises(ValueError):
        steering_vector(1.2, 4)


@given(st.floats(-1, 1), st.integers(1, 64), st.floats(0.05, 2))
def test_steering_vector_unit_modulus(c, K, dl):
    v = steering_vector(c, K, dl)
    assert v[0] == 1 + 0j
    np.testing.assert_allclose(np.abs(v), 1.0, rtol=1e-14)


def test_aa_channel_magnitudes():
    p = ChannelParams(beta0=1e-3, kappa1=2, K=6)
    H = aa_channel((0, 0, 100), (0, 0, 0), p)
    np.testing.assert_allclose(np.abs(H), 3.1623e-4, rtol=1e-4)
    H1 = aa_channel(UAV, IRS, ChannelParams(K=1))
    assert H1.shape == (1,)
    assert np.angle(H1[0]) == 0.0
    assert abs(H1[0]) == pytest.approx(math.sqrt(1e-3 / 528900))
    H = aa_channel(UAV, IRS, ChannelParams(K=8))
    np.testing.assert_allclose(np.abs(H), 4.349e-5, rtol=1e-3)


def test_aa_channel_deterministic_and_singular():
    p = ChannelParams(K=5)
    assert np.array_equal(aa_channel(UAV, IRS, p), aa_channel(UAV, IRS, p))
    with pytest.raises(ValueError):
        aa_channel(IRS, IRS, p)


def test_ag_channel_los_only_magnitude():
    p = ChannelParams(beta1=4.0, K=5)
    ue = (100.0, 50.0, 0.0)
    h = ag_channel(IRS, ue, p, ZeroNormalRng())
    base = math.sqrt(p.beta0 * distance(IRS, ue) ** -p.kappa2)
    np.testing.assert_allclose(np.abs(h), base * math.sqrt(0.8), rtol=1e-12)
    assert math.sqrt(0.8) == pytest.approx(0.8944, abs=1e-4)


def test_ag_channel_rician_factor_zero_is_pure_nlos(rng):
    p = ChannelParams(beta1=0.0, K=4)
    ue = (100.0, 50.0, 0.0)
    assert np.all(ag_channel(IRS, ue, p, ZeroNormalRng()) == 0)
    h = ag_channel(IRS, ue, p, rng)
    assert np.all(np.abs(h) > 0)


def test_ag_channel_second_moment():
    p = ChannelParams(K=1)
    ue = (100.0, 50.0, 0.0)
    g = np.random.default_rng(7)
    draws = np.array([ag_channel(IRS, ue, p, g)[0] for _ in range(100_000)])
    expected = p.beta0 * distance(IRS, ue) ** -p.kappa2
    assert np.mean(np.abs(draws) ** 2) == pytest.approx(expected, rel=0.02)


def test_ag_channel_singular():
    with pytest.raises(ValueError):
        ag_channel(IRS, IRS, ChannelParams(), np.random.default_rng(0))


def test_angle_cosines():
    assert aoa_cosine((500, 0, 200), IRS) == 0.0
    assert aod_cosine((0, 0, 0), (10, 0, 0)) == 1.0
    assert aoa_cosine(UAV, IRS) == pytest.approx(-500 / 727.255, rel=1e-6)
    assert aoa_cosine(UAV, IRS) == pytest.approx(-0.6876, abs=1e-4)
    with pytest.raises(ValueError):
        aod_cosine(IRS, IRS)


@given(point, point)
def test_cosines_in_range(a, b):
    if distance(a, b) > 1e-6:
        assert -1 <= aoa_cosine(a, b) <= 1


def test_effective_channel_examples(rng):
    assert abs(effective_channel([1, 1], [0, np.pi], [1, 1])) < 1e-15
    H = rng.normal(size=6) + 1j * rng.normal(size=6)
    h = rng.normal(size=6) + 1j * rng.normal(size=6)
    aligned = effective_channel(H, -(np.angle(H) + np.angle(h)), h)
    assert abs(aligned) == pytest.approx(np.sum(np.abs(H) * np.abs(h)), rel=1e-13)
    with pytest.raises(ValueError):
        effective_channel([1, 1], [0], [1, 1])


def test_effective_channel_matches_straight_line_oracle(rng):
    for _ in range(20):
        H = rng.normal(size=8) + 1j * rng.normal(size=8)
        h = rng.normal(size=8) + 1j * rng.normal(size=8)
        th = rng.uniform(0, 2 * np.pi, 8)
        got, ref = effective_channel(H, th, h), oracles.effective_channel(H, th, h)
        assert abs(got - ref) <= 1e-12 * abs(ref)


@settings(max_examples=50)
@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_alignment_bound(K, seed):
    g = np.random.default_rng(seed)
    H = g.normal(size=K) + 1j * g.normal(size=K)
    h = g.normal(size=K) + 1j * g.normal(size=K)
    bound = np.sum(np.abs(H) * np.abs(h))
    assert abs(effective_channel(H, g.uniform(0, 7, K), h)) <= bound * (1 + 1e-12)


def test_db_conversions():
    assert db_to_linear(-30) == pytest.approx(1e-3)
    assert dbm_to_watts(-134) == pytest.approx(3.981e-17, rel=1e-3)


def test_channel_params_validation():
    with pytest.raises(ValueError):
        ChannelParams(beta0=0)
    with pytest.raises(ValueError):
        ChannelParams(K=0)
    with pytest.raises(ValueError):
        ChannelParams(beta1=-1)


def test_model_reproducible_realizations():
    def draws(seed):
        g = np.random.default_rng(seed)
        m = ChannelModel([UAV, (200, 300, 200)], IRS, ChannelParams(K=4))
        m.sample_ues(3, 500.0, g)
        return [m.draw(g) for _ in range(3)]

    a, b, c = draws(5), draws(5), draws(6)
    for x, y in zip(a, b):
        assert np.array_equal(x.aa, y.aa) and np.array_equal(x.ag, y.ag)
    assert not np.array_equal(a[0].ag, c[0].ag)


def test_model_ue_placement_in_disc(rng):
    m = ChannelModel([UAV, (200, 300, 200)], IRS, ChannelParams(K=4))
    ues = m.sample_ues(200, 500.0, rng)
    assert ues.shape == (2, 200, 3)
    assert np.all(ues[..., 2] == 0)
    r = np.hypot(ues[..., 0] - m.uavs[:, None, 0], ues[..., 1] - m.uavs[:, None, 1])
    assert np.all(r <= 500.0)


def test_model_draw_matches_single_link_formula():
    # the vectorised draw and ag_channel consume the same CN(0,1) stream
    m = ChannelModel([UAV], IRS, ChannelParams(K=4))
    ue = np.array([[[10.0, 20.0, 0.0]]])
    m.place_ues(ue)
    real = m.draw(np.random.default_rng(3))
    ref = ag_channel(IRS, ue[0, 0], m.params, np.random.default_rng(3))
    np.testing.assert_allclose(real.ag[0, 0], ref, rtol=1e-12)
    np.testing.assert_allclose(real.aa[0], aa_channel(UAV, IRS, m.params), rtol=1e-15)
