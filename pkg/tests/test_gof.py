import numpy as np
import pytest
from scipy import integrate, special, stats

from clrbte.gof import (
    ad_pvalue,
    ad_statistic,
    choose_ks_method,
    compare,
    cvm_pvalue,
    cvm_statistic,
    gof_block,
    kolmogorov_sf,
    ks_pvalue,
    ks_statistic,
)


def _uniform_sample(n, seed):
    return np.sort(np.random.default_rng(seed).random(n))


def test_ks_statistic_matches_scipy():
    u = _uniform_sample(40, 1)
    assert ks_statistic(u) == pytest.approx(stats.kstest(u, "uniform").statistic, abs=1e-15)


@pytest.mark.parametrize("z", [0.3, 0.8, 1.0, 1.18, 1.5, 2.5])
def test_kolmogorov_sf_matches_scipy(z):
    assert kolmogorov_sf(z) == pytest.approx(special.kolmogorov(z), abs=1e-12)


def test_exact_ks_pvalue_matches_scipy():
    u = _uniform_sample(25, 2)
    d = ks_statistic(u)
    assert ks_pvalue(d, 25, "exact") == pytest.approx(stats.kstest(u, "uniform", method="exact").pvalue, abs=1e-10)


def test_ks_method_rule():
    assert choose_ks_method(20, False) == "exact"
    assert choose_ks_method(20, True) == "asymptotic"
    assert choose_ks_method(150, False) == "asymptotic"


def test_cvm_matches_scipy():
    for n, seed in ((10, 3), (33, 4), (200, 5)):
        u = _uniform_sample(n, seed)
        ref = stats.cramervonmises(u, "uniform")
        w = cvm_statistic(u)
        assert w == pytest.approx(ref.statistic, rel=1e-12)
        assert cvm_pvalue(w, n) == pytest.approx(ref.pvalue, abs=2e-4)


def test_cvm_support_edges():
    assert cvm_pvalue(1 / 120, 10) == 1.0
    assert cvm_pvalue(4.0, 10) == 0.0


def test_ad_statistic_matches_integral_definition():
    # n * int (Fn - u)^2 / (u (1 - u)) du for the empirical CDF of a uniform sample
    u = _uniform_sample(15, 6)
    n = len(u)
    edges = np.concatenate(([0.0], u, [1.0]))
    total = 0.0
    for k in range(n + 1):
        fn = k / n
        total += integrate.quad(lambda t: (fn - t) ** 2 / (t * (1 - t)), edges[k], edges[k + 1], limit=200)[0]
    assert ad_statistic(u) == pytest.approx(n * total, rel=1e-8)


@pytest.mark.parametrize("a2,p", [(1.933, 0.10), (2.492, 0.05), (3.070, 0.025), (3.857, 0.01)])
def test_ad_limit_critical_values(a2, p):
    # classical asymptotic upper-tail points of the AD statistic
    assert ad_pvalue(a2) == pytest.approx(p, abs=1e-3)


def test_ad_pvalue_against_monte_carlo():
    rng = np.random.default_rng(7)
    n = 20
    sims = np.array([ad_statistic(np.sort(rng.random(n))) for _ in range(20000)])
    for q in (0.5, 0.9):
        a2 = np.quantile(sims, q)
        assert ad_pvalue(a2, n) == pytest.approx(1 - q, abs=0.01)


def test_clamping_keeps_statistics_finite():
    F = np.array([0.0, 0.5, 1.0])
    assert np.isfinite(ad_statistic(F))


class _Fit:
    def __init__(self, label, aic, F, values):
        self.label = label
        self.distribution = label
        self.aic = aic
        self.gof = gof_block(F, aic)
        self.n = len(values)
        self.sample_values = values


class _S:
    def __init__(self, values):
        self.values = values
        self.source = "toy"


def test_compare_sorts_and_flags():
    x = np.array([1.0, 2.0, 3.0])
    fits = [_Fit("A", 10.0, np.array([0.2, 0.5, 0.8]), x), _Fit("B", 8.0, np.array([0.1, 0.6, 0.7]), x)]
    t = compare(_S(x), fits)
    assert [r.distribution for r in t.rows] == ["B", "A"]
    assert t.rows[0].best_aic and not t.rows[1].best_aic
    assert t.best("ks") == "A"
    text = t.to_text()
    assert text.splitlines()[0].split()[:3] == ["Distribution", "AIC", "KS"]


def test_compare_rejects_single_or_mismatched_fits():
    x = np.array([1.0, 2.0, 3.0])
    f = _Fit("A", 1.0, np.array([0.2, 0.5, 0.8]), x)
    with pytest.raises(ValueError):
        compare(_S(x), [f])
    g = _Fit("B", 1.0, np.array([0.2, 0.5, 0.8]), np.array([1.0, 2.0, 4.0]))
    with pytest.raises(ValueError, match="different sample"):
        compare(_S(x), [f, g])
