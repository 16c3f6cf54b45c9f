import numpy as np
import pytest
from scipy import stats as sps

from sirratio.bayes import GammaParam, PosteriorPair, posterior_update, r0_posterior, sample_posterior
from sirratio.estimators import build_stats, fit
from sirratio.rng import RngStream

from conftest import small_path

PRIOR = (GammaParam(2.0, 10.0), GammaParam(3.0, 20.0))


def test_empty_data_returns_prior(epidemic):
    stats = build_stats(epidemic).window(1, 0)
    post = posterior_update(PRIOR, stats)
    assert post.a == PRIOR[0] and post.c == PRIOR[1]


def test_flat_prior_mean_matches_poisson_estimates(epidemic):
    stats = build_stats(epidemic)
    post = posterior_update((GammaParam(1e-9, 1e-9), GammaParam(1e-9, 1e-9)), stats)
    res = fit(stats, "poisson-aml")
    assert post.a.mean == pytest.approx(res.a_hat, rel=1e-8)
    assert post.c.mean == pytest.approx(res.c_hat, rel=1e-8)


def test_sequential_equals_batch(epidemic):
    stats = build_stats(epidemic)
    once = posterior_update(PRIOR, stats)
    twice = posterior_update(posterior_update(PRIOR, stats.window(1, 300)), stats.window(301, stats.T))
    for x, y in ((once.a, twice.a), (once.c, twice.c)):
        assert x.nu == pytest.approx(y.nu, rel=1e-12) and x.lam == pytest.approx(y.lam, rel=1e-12)


def test_median_is_one_for_symmetric_posterior():
    post = r0_posterior(PosteriorPair(GammaParam(7.0, 3.0), GammaParam(7.0, 3.0)))
    assert post.quantile(0.5) == pytest.approx(1.0, rel=1e-10)


def test_scaled_fisher_law_against_draws():
    pair = PosteriorPair(GammaParam(4.5, 30.0), GammaParam(6.0, 80.0))
    post = r0_posterior(pair)
    draws = sample_posterior(pair, 1_000_000, RngStream(13))[:, 2]
    assert sps.kstest(draws, post.cdf).pvalue > 0.01
    for q in (0.05, 0.5, 0.95):
        assert np.quantile(draws, q) == pytest.approx(post.quantile(q), rel=5e-3)


def test_mean_matches_sampling_oracle(epidemic):
    pair = posterior_update(PRIOR, build_stats(epidemic).window(1, 60))
    post = r0_posterior(pair)
    gen = np.random.default_rng(12)
    oracle = (gen.gamma(pair.a.nu, 1 / pair.a.lam, 1_000_000) / gen.gamma(pair.c.nu, 1 / pair.c.lam, 1_000_000)).mean()
    assert post.mean == pytest.approx(oracle, rel=0.01)


def test_mean_undefined_flag():
    undefined = r0_posterior(PosteriorPair(GammaParam(2.0, 1.0), GammaParam(1.0, 1.0)))
    assert np.isnan(undefined.mean) and undefined.flags == ("mean_undefined",)
    defined = r0_posterior(PosteriorPair(GammaParam(2.0, 1.0), GammaParam(1.0 + 1e-9, 1.0)))
    assert np.isfinite(defined.mean) and defined.flags == ()


def test_posterior_concentrates():
    pair = PosteriorPair(GammaParam(2e7, 1e8), GammaParam(1e7, 1e8))
    post = r0_posterior(pair)
    assert post.quantile(0.975) - post.quantile(0.025) < 0.01
    assert post.mean == pytest.approx(2.0, rel=1e-4)


def test_invalid_prior():
    with pytest.raises(ValueError):
        GammaParam(0.0, 1.0)
    with pytest.raises(ValueError):
        sample_posterior(PosteriorPair(*PRIOR), 0, RngStream(1))


def test_sampling_is_seeded():
    pair = PosteriorPair(*PRIOR)
    assert np.array_equal(sample_posterior(pair, 50, RngStream(3)), sample_posterior(pair, 50, RngStream(3)))
    assert not np.array_equal(sample_posterior(pair, 50, RngStream(3)), sample_posterior(pair, 50, RngStream(4)))


def test_accepts_count_path():
    _, p = small_path(5)
    assert posterior_update(PRIOR, p) == posterior_update(PRIOR, build_stats(p))
