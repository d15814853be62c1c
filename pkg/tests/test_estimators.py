import numpy as np
import pytest

from clrbte import distribution as dist
from clrbte.datasets import Sample, failure_sample, survival_sample
from clrbte.distribution import Params
from clrbte.estimators import (
    ALL_ESTIMATORS,
    EstimatorId,
    bootstrap_pvalues,
    cvme_from_F,
    fit,
    lse_from_F,
    mpse_from_F,
    msade_from_F,
    msalde_from_F,
    neg_log_likelihood,
    objective_value,
    rtade_from_F,
    score,
    wlse_from_F,
    wlse_weights,
)
from clrbte.registry import CLRBTE, E, TE, TGR
from clrbte.transmute import DomainError


def _plotting(n):
    return np.arange(1, n + 1) / (n + 1.0)


def test_score_matches_finite_differences():
    s = survival_sample().scaled(0.01)
    p = Params(1.3, 0.4, 0.35)
    g = score(p, s)
    h = 1e-6
    v = p.as_vector()
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        fd = -(neg_log_likelihood(Params.from_vector(v + e), s) - neg_log_likelihood(Params.from_vector(v - e), s)) / (2 * h)
        assert g[j] == pytest.approx(fd, rel=1e-5, abs=1e-6)


def test_exponential_loglik():
    s = failure_sample()
    lam = 0.5
    want = s.n * np.log(lam) - lam * s.values.sum()
    assert -neg_log_likelihood(Params(lam, 1.0, 0.0), s) == pytest.approx(want, rel=1e-12)


def test_perfect_fit_objectives():
    n = 9
    F = _plotting(n)
    assert lse_from_F(F) < 1e-18
    assert wlse_from_F(F) < 1e-18
    assert wlse_weights(n)[0] == pytest.approx(100 * 11 / 9)
    assert mpse_from_F(F) == pytest.approx(-np.log(n + 1))
    assert msade_from_F(F) == pytest.approx(0.0, abs=1e-15)
    assert msalde_from_F(F) == pytest.approx(0.0, abs=1e-13)


def test_cvm_at_midpoints():
    for n in (1, 7, 40):
        F = (2 * np.arange(1, n + 1) - 1) / (2.0 * n)
        assert cvme_from_F(F) == pytest.approx(1 / (12 * n))


def test_single_observation_spacings():
    # spacings 0.7 and 0.3 against target 0.5
    assert msade_from_F(np.array([0.7])) == pytest.approx(0.4)


def test_rtade_direct_sum():
    F = np.sort(np.random.default_rng(2).random(12))
    n = len(F)
    want = n / 2 - 2 * F.sum() - sum((2 * i - 1) * np.log(1 - F[n - i]) for i in range(1, n + 1)) / n
    assert rtade_from_F(F) == pytest.approx(want, rel=1e-12)


def test_mpse_tie_uses_log_density():
    s = Sample(np.array([0.5, 1.0, 1.0, 2.0, 3.0]))
    th = np.array([0.8, 0.4, 0.3])
    v = objective_value(CLRBTE, EstimatorId.MPSE, th, s)
    assert np.isfinite(v)
    F = CLRBTE.cdf(th, s.values)
    I = np.diff(np.concatenate(([0.0], F, [1.0])))
    I[2] = CLRBTE.pdf(th, np.array([1.0]))[0]
    assert v == pytest.approx(np.mean(np.log(I)))


def test_estimator_names():
    assert EstimatorId.parse("tade") is EstimatorId.RTADE
    assert EstimatorId.RTADE.table_name == "TADE"
    assert EstimatorId.parse("cvme") is EstimatorId.CvME
    with pytest.raises(DomainError, match="unknown estimator"):
        EstimatorId.parse("bayes")
    assert len(ALL_ESTIMATORS) == 9


def test_exponential_mle_closed_form():
    s = failure_sample()
    r = fit(E, "MLE", s)
    assert r.converged
    assert r.params["lambda"] == pytest.approx(1 / s.values.mean(), rel=1e-6)
    assert r.se["lambda"] == pytest.approx(r.params["lambda"] / np.sqrt(s.n), rel=1e-4)


def test_te_fit_on_survival():
    r = fit(TE, "MLE", survival_sample())
    assert r.params["lambda"] == pytest.approx(0.0206, abs=5e-4)
    assert r.params["theta"] == pytest.approx(0.3704, abs=5e-3)


@pytest.mark.parametrize("est", ALL_ESTIMATORS)
def test_every_estimator_beats_the_truth_and_tracks_the_cdf(est):
    # the three parameters trade off, so compare objectives and fitted CDFs
    p = Params(1.5, 0.5, 0.3)
    u = (np.arange(1, 401) - 0.5) / 400
    s = Sample(dist.quantile(p, u))
    r = fit(CLRBTE, est, s, with_se=False)
    assert r.converged
    at_truth = objective_value(CLRBTE, est, p.as_vector(), s)
    at_fit = objective_value(CLRBTE, est, r.estimates, s)
    if est is EstimatorId.MPSE:
        assert at_fit >= at_truth - 1e-9
    else:
        assert at_fit <= at_truth + 1e-9
    grid = np.geomspace(1e-3, 5, 200)
    assert np.max(np.abs(CLRBTE.cdf(r.estimates, grid) - dist.cdf(p, grid))) < 0.02


def test_competitors_are_mle_only():
    with pytest.raises(DomainError, match="supports MLE"):
        fit(TGR, "LSE", failure_sample())


def test_too_small_sample_refused():
    with pytest.raises(ValueError, match="at least 5"):
        fit(CLRBTE, "MLE", Sample(np.array([1.0, 2.0, 3.0, 4.0])))


def test_survival_fit_report():
    r = fit(CLRBTE, "MLE", survival_sample())
    d = r.to_dict()
    assert set(d["params"]) == {"lambda", "p1", "p2"}
    assert d["aic"] == pytest.approx(312.4142, abs=1e-3)
    assert r.se_reliable is True and all(v > 0 for v in d["se"].values())


def test_boundary_estimate_flags_standard_errors():
    # the global TGR optimum on the survival data sits at theta -> 1
    r = fit(TGR, "MLE", survival_sample())
    assert r.params["theta"] > 0.999
    assert r.se_reliable is False and r.se_note


def test_tgr_survival_likelihood_is_bimodal():
    s = survival_sample()
    interior = fit(TGR, "MLE", s, starts=[np.array([0.3067, 0.0089, 0.4276])], with_se=False)
    best = fit(TGR, "MLE", s, with_se=False)
    assert interior.converged
    assert interior.params["theta"] == pytest.approx(0.4276, abs=2e-3)
    assert interior.aic == pytest.approx(312.8597, abs=1e-3)
    assert best.aic < interior.aic - 0.05
    # interior point is stationary in log-lambda, log-beta, theta
    th = interior.estimates
    h = 1e-5
    for j, scale in enumerate((th[0], th[1], 1.0)):
        e = np.zeros(3)
        e[j] = h * scale
        g = (objective_value(TGR, EstimatorId.MLE, th + e, s) - objective_value(TGR, EstimatorId.MLE, th - e, s)) / (2 * h)
        assert abs(g) < 1e-3


def test_bootstrap_pvalues_in_unit_interval():
    s = failure_sample()
    r = fit(E, "MLE", s)
    b = bootstrap_pvalues(E, "MLE", s, r, B=20, seed=1)
    assert b["used"] == 20
    for k in ("p_ks", "p_ad", "p_cvm"):
        assert 1 / 21 <= b[k] <= 1
