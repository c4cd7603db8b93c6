import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from oracles import scalar_params
from grbm_mf import (
    GrbmParams,
    SampleSpace,
    energy,
    hidden_field_given_visible,
    marginalize,
    sample_params,
    visible_mean_given_hidden,
)


def test_sample_space_constructors():
    assert SampleSpace.binary().values == (-1.0, 1.0)
    assert SampleSpace.ternary().values == (-1.0, 0.0, 1.0)
    assert SampleSpace.parse("custom:0,1,2.5").values == (0.0, 1.0, 2.5)
    assert SampleSpace.parse("ternary") == SampleSpace.ternary()


@pytest.mark.parametrize("values", [(), (1.0, 1.0), (0.0, float("inf"))])
def test_sample_space_rejects(values):
    with pytest.raises(ValueError):
        SampleSpace(values)


def test_sample_space_parse_rejects_garbage():
    with pytest.raises(ValueError):
        SampleSpace.parse("quaternary")
    with pytest.raises(ValueError):
        SampleSpace.parse("custom:1,x")


def test_params_validation():
    ok = dict(b=[0.0], c=[0.0, 0.0], w=[[1.0, 1.0]], sigma2=[1.0], space=SampleSpace.binary())
    GrbmParams(**ok)
    with pytest.raises(ValueError):
        GrbmParams(**{**ok, "sigma2": [0.0]})
    with pytest.raises(ValueError):
        GrbmParams(**{**ok, "w": [[1.0]]})
    with pytest.raises(ValueError):
        GrbmParams(**{**ok, "b": [np.nan]})
    p = GrbmParams(**ok)
    with pytest.raises(ValueError):
        p.w[0, 0] = 3.0


def test_energy_examples():
    assert energy([0.0], [1.0], scalar_params(w=0.0)) == 0.0
    assert energy([1.0], [1.0], scalar_params(w=1.0)) == pytest.approx(-0.5, abs=1e-15)
    assert energy([2.0], [1.0], scalar_params(w=0.0, b=2.0, c=3.0, sigma2=4.0)) == pytest.approx(-3.0, abs=1e-15)


def test_energy_rejects_bad_hidden():
    p = scalar_params()
    with pytest.raises(ValueError):
        energy([0.0], [0.5], p)
    with pytest.raises(ValueError):
        energy([0.0, 1.0], [1.0], p)


def test_visible_mean_examples():
    p = GrbmParams(b=[1.0], c=[0.0, 0.0], w=[[2.0, -1.0]], sigma2=[1.0], space=SampleSpace.binary())
    assert visible_mean_given_hidden(p, [1.0, 1.0])[0] == 2.0
    assert visible_mean_given_hidden(p, [-1.0, 1.0])[0] == -2.0
    flat = p.replace(w=np.zeros((1, 2)))
    assert visible_mean_given_hidden(flat, [-1.0, 1.0])[0] == 1.0
    with pytest.raises(ValueError):
        visible_mean_given_hidden(p, [1.0])


def test_hidden_field_examples():
    p = GrbmParams(b=[0.0, 0.0], c=[0.0], w=[[1.0], [1.0]], sigma2=[1.0, 4.0], space=SampleSpace.binary())
    assert hidden_field_given_visible(p, [1.0, 1.0])[0] == pytest.approx(1.25)
    assert hidden_field_given_visible(p.replace(c=[0.7]), [0.0, 0.0])[0] == 0.7
    q = scalar_params(w=2.0, c=-1.0)
    assert hidden_field_given_visible(q, [0.5])[0] == pytest.approx(0.0, abs=1e-15)


def test_marginalize_examples():
    p = sample_params(5, 3, 0.5, 0.5, 0.0, 2.0, SampleSpace.binary(), seed=1)
    m = marginalize(p)
    np.testing.assert_array_equal(m.B, p.c)
    np.testing.assert_array_equal(m.D, 0.0)
    np.testing.assert_array_equal(m.J, 0.0)
    assert m.log_zH == pytest.approx(0.5 * 5 * np.log(4 * np.pi))

    m = marginalize(scalar_params(w=1.0))
    assert m.B[0] == 0.0 and m.D[0] == 0.5
    assert m.log_zH == pytest.approx(0.5 * np.log(2 * np.pi))

    p = GrbmParams(b=[1.0], c=[0.0, 0.0], w=[[1.0, -1.0]], sigma2=[1.0], space=SampleSpace.binary())
    m = marginalize(p)
    np.testing.assert_allclose(m.B, [1.0, -1.0])
    np.testing.assert_allclose(m.D, [0.5, 0.5])
    assert m.J[0, 1] == -1.0 and m.J[1, 0] == -1.0


@pytest.mark.parametrize("space", [SampleSpace.binary(), SampleSpace.ternary()])
def test_marginal_matches_quadrature(space):
    # int exp(-E(v, h)) dv over one visible unit versus the marginal weight
    p = GrbmParams(b=[0.3], c=[0.2, -0.4], w=[[0.8, -0.5]], sigma2=[1.7], space=space)
    mbm = marginalize(p)
    for h in [(1.0, 1.0), (-1.0, 1.0), (space.values[1], -1.0)]:
        h = np.array(h)
        numeric, _ = integrate.quad(lambda v: np.exp(-energy([v], h, p)), -np.inf, np.inf, epsabs=1e-13)
        logw = mbm.log_zH + mbm.B @ h + mbm.D @ h**2 + 0.5 * h @ mbm.J @ h
        assert np.log(numeric) == pytest.approx(logw, abs=1e-10)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), t=st.floats(0.1, 3.0))
def test_marginalize_scaling(seed, t):
    p = sample_params(7, 4, 0.5, 0.5, 0.5, 1.0, SampleSpace.binary(), seed=seed)
    p = p.replace(sigma2=np.linspace(0.5, 2.0, 7))
    m1 = marginalize(p)
    m2 = marginalize(p.replace(w=t * p.w))
    np.testing.assert_allclose(m2.D, t**2 * m1.D, rtol=1e-12)
    np.testing.assert_allclose(m2.J, t**2 * m1.J, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(m2.B - p.c, t * (m1.B - p.c), rtol=1e-12, atol=1e-14)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_marginal_structure(seed):
    p = sample_params(6, 5, 0.3, 0.3, 0.7, 1.5, SampleSpace.ternary(), seed=seed)
    m = marginalize(p)
    assert np.array_equal(m.J, m.J.T)
    assert np.all(np.diag(m.J) == 0)
    assert np.all(m.D >= 0)
    for j in range(5):
        for k in range(5):
            if j != k:
                direct = sum(p.w[i, j] * p.w[i, k] / p.sigma2[i] for i in range(6))
                assert m.J[j, k] == pytest.approx(direct, abs=1e-14)


def test_energy_weight_ratio():
    p = sample_params(3, 2, 0.5, 0.5, 0.5, 1.0, SampleSpace.ternary(), seed=5)
    v1, h1 = np.array([0.2, -1.0, 0.4]), np.array([1.0, 0.0])
    v2, h2 = np.array([-0.3, 0.5, 1.1]), np.array([-1.0, 1.0])
    e1, e2 = energy(v1, h1, p), energy(v2, h2, p)
    # independent unnormalized weight exp(-E) built term by term
    def weight(v, h):
        s = 0.0
        for i in range(3):
            s -= (v[i] - p.b[i]) ** 2 / (2 * p.sigma2[i])
            for j in range(2):
                s += p.w[i, j] * v[i] * h[j] / p.sigma2[i]
        s += p.c @ h
        return np.exp(s)
    assert weight(v1, h1) / weight(v2, h2) == pytest.approx(np.exp(e2 - e1), rel=1e-12)


def test_sample_params_contract():
    p = sample_params(4, 3, 0.0, 0.0, 0.0, 1.0, SampleSpace.binary(), seed=0)
    assert np.all(p.b == 0) and np.all(p.c == 0) and np.all(p.w == 0)
    a = sample_params(24, 12, 0.1, 0.1, 0.5, 1.0, SampleSpace.binary(), seed=7)
    b = sample_params(24, 12, 0.1, 0.1, 0.5, 1.0, SampleSpace.binary(), seed=7)
    assert np.array_equal(a.w, b.w) and np.array_equal(a.b, b.b) and np.array_equal(a.c, b.c)
    assert a.w.shape == (24, 12) and np.all(a.sigma2 == 1.0)
    with pytest.raises(ValueError):
        sample_params(2, 2, 0.1, 0.1, 0.1, 0.0, SampleSpace.binary(), seed=0)
    with pytest.raises(ValueError):
        sample_params(2, 2, -0.1, 0.1, 0.1, 1.0, SampleSpace.binary(), seed=0)


def test_sample_params_draw_order():
    rng = np.random.default_rng(11)
    b, c, w = rng.standard_normal(3), rng.standard_normal(2), rng.standard_normal((3, 2))
    p = sample_params(3, 2, 1.0, 2.0, 3.0, 1.0, SampleSpace.binary(), seed=11)
    np.testing.assert_array_equal(p.b, b)
    np.testing.assert_array_equal(p.c, 2 * c)
    np.testing.assert_array_equal(p.w, 3 * w)


def test_sample_params_moments():
    p = sample_params(400, 300, 0.1, 0.2, 0.5, 1.0, SampleSpace.binary(), seed=3)
    assert p.w.std() == pytest.approx(0.5, rel=0.01)
    assert abs(p.w.mean()) < 0.005
