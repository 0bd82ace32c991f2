import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from cumadv import distributions as d
from cumadv.distributions import inverse_transform, sample, sample_many
from cumadv.rng import make_rng


def test_zero_variance_normal_is_exact(rng):
    assert sample(d.Normal(0, 0), rng) == 0.0


def test_uniform_mean_clt(rng):
    x = sample_many(d.Uniform01(), rng, 10 ** 6)
    assert abs(x.mean() - 0.5) < 0.002


def test_gamma_mean_clt(rng):
    x = sample_many(d.Gamma(2, 3), rng, 10 ** 6)
    assert abs(x.mean() - 6.0) < 0.03


@pytest.mark.parametrize("bad", [
    lambda: d.Normal(0, -1),
    lambda: d.LogNormal(0, -0.1),
    lambda: d.Gamma(0, 1),
    lambda: d.Gamma(1, 0),
    lambda: d.Exponential(0),
    lambda: d.Bernoulli(1.5),
    lambda: d.Discrete((0.5, 0.6)),
    lambda: d.Discrete((-0.1, 1.1)),
    lambda: d.Uniform(1, 0),
])
def test_domain_enforced_at_construction(bad):
    with pytest.raises(ValueError):
        bad()


CONTINUOUS = [
    (d.Uniform01(), stats.uniform().cdf),
    (d.Normal(1.5, 4.0), stats.norm(1.5, 2.0).cdf),
    (d.LogNormal(0.3, 0.25), stats.lognorm(0.5, scale=math.exp(0.3)).cdf),
    (d.Gamma(2.0, 3.0), stats.gamma(2.0, scale=3.0).cdf),
    (d.Gamma(0.3, 0.5), stats.gamma(0.3, scale=0.5).cdf),
    (d.Exponential(2.5), stats.expon(scale=0.4).cdf),
]


@pytest.mark.parametrize("dist,cdf", CONTINUOUS, ids=lambda x: type(x).__name__ if hasattr(x, "draw") else "")
def test_sampler_matches_cdf_ks(dist, cdf):
    x = sample_many(dist, make_rng(99), 10 ** 5)
    assert stats.kstest(x, cdf).pvalue > 1e-3


@pytest.mark.parametrize("dist,pmf", [
    (d.Bernoulli(0.3), [0.7, 0.3]),
    (d.Discrete((0.1, 0.2, 0.3, 0.4)), [0.1, 0.2, 0.3, 0.4]),
])
def test_sampler_matches_pmf_chisquare(dist, pmf):
    x = sample_many(dist, make_rng(98), 10 ** 5).astype(int)
    obs = np.bincount(x, minlength=len(pmf))
    assert stats.chisquare(obs, np.asarray(pmf) * x.size).pvalue > 1e-3


def test_inverse_transform_identity():
    assert inverse_transform(lambda u: u, 0.3) == 0.3


def test_inverse_transform_exponential_median():
    assert inverse_transform(d.Exponential(1.0).quantile, 0.5) == pytest.approx(math.log(2), abs=1e-12)
    assert inverse_transform(d.Exponential(1.0).quantile, 0.5) == pytest.approx(0.693147, abs=1e-6)


def test_inverse_transform_bernoulli_step():
    q = d.Bernoulli(0.25).quantile
    assert inverse_transform(q, 0.2) == 0
    assert inverse_transform(q, 0.9) == 1


@pytest.mark.parametrize("u", [-0.01, 1.01])
def test_inverse_transform_rejects_u(u):
    with pytest.raises(ValueError):
        inverse_transform(lambda v: v, u)


@given(st.floats(min_value=0.001, max_value=0.999))
def test_gamma_quantile_inverts_cdf(u):
    g = d.Gamma(0.7, 2.0)
    assert stats.gamma(0.7, scale=2.0).cdf(g.quantile(u)) == pytest.approx(u, abs=1e-9)


@pytest.mark.parametrize("text,expected", [
    ("uniform", d.Uniform()),
    ("uniform:0:0.2", d.Uniform(0, 0.2)),
    ("normal:0:1", d.Normal(0, 1)),
    ("point:1", d.Normal(1, 0)),
    ("gamma:2:3", d.Gamma(2, 3)),
    ("discrete:0.25;0.75", d.Discrete((0.25, 0.75))),
])
def test_parse_roundtrip(text, expected):
    dist = d.parse_distribution(text)
    assert dist == expected
    assert d.parse_distribution(d.format_distribution(dist)) == dist


def test_parse_unknown():
    with pytest.raises(ValueError):
        d.parse_distribution("cauchy:0:1")
