import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clrbte import distribution as dist
from clrbte.distribution import Params
from clrbte.transmute import DomainError, SimplexWeights, clrbt_cdf, clrbt_pdf, exponential_base

# (a, b) in the unit square maps onto the weight simplex
params = st.builds(
    lambda lam, a, b: Params(lam, a, (1.0 - a) * b),
    st.floats(0.05, 20.0),
    st.floats(0.0, 1.0),
    st.floats(0.0, 1.0),
)


def test_params_validation_names_the_violation():
    with pytest.raises(DomainError, match="lambda"):
        Params(0.0, 0.3, 0.3)
    with pytest.raises(DomainError, match=r"p1 \+ p2 <= 1"):
        Params(1.0, 0.7, 0.7)
    assert Params.relaxed(1.0, 0.7, 0.7).p3 == pytest.approx(-0.4)


def test_matches_generic_transmutation_of_exponential_base():
    p = Params(0.8, 0.25, 0.45)
    base = exponential_base(p.lam)
    w = SimplexWeights(p.p1, p.p2)
    x = np.geomspace(1e-4, 30, 300)
    assert np.allclose(dist.cdf(p, x), clrbt_cdf(base, w, x), rtol=1e-13, atol=1e-15)
    assert np.allclose(dist.pdf(p, x), clrbt_pdf(base, w, x), rtol=1e-12)


def test_negative_x_has_zero_mass():
    p = Params(1.0, 0.3, 0.3)
    assert dist.cdf(p, -1.0) == 0.0
    assert dist.pdf(p, -1.0) == 0.0
    assert dist.survival(p, -2.0) == 1.0
    assert dist.log_pdf(p, -1.0) == -np.inf


@settings(max_examples=80, deadline=None)
@given(params)
def test_quantile_inverts_cdf(p):
    u = np.array([1e-10, 1e-4, 0.1, 0.37, 0.5, 0.8, 0.99, 1 - 1e-9])
    x = dist.quantile(p, u)
    assert np.all(np.diff(x) > 0)
    # lower half on the CDF scale, upper half on the survival scale
    lo = u <= 0.5
    assert np.allclose(dist.cdf(p, x[lo]), u[lo], rtol=1e-10)
    assert np.allclose(dist.survival(p, x[~lo]), 1 - u[~lo], rtol=1e-7)


@settings(max_examples=40, deadline=None)
@given(params)
def test_quantile_agrees_with_bracketing_oracle(p):
    u = np.linspace(0.01, 0.99, 15)
    oracle = dist.invert_cdf(
        lambda z: float(dist.std_cdf(z, p.p1, p.p2)),
        lambda z: float(dist.std_sf(z, p.p1, p.p2)),
        u,
    ) / p.lam
    assert np.allclose(dist.quantile(p, u), oracle, rtol=1e-10)


def test_quantile_edges():
    p = Params(2.0, 0.3, 0.3)
    assert dist.quantile(p, 0.0) == 0.0
    for bad in (1.0, -0.1, float("nan")):
        with pytest.raises(DomainError):
            dist.quantile(p, bad)


@settings(max_examples=50, deadline=None)
@given(params, st.floats(0.1, 10.0))
def test_rate_is_a_scale_parameter(p, c):
    q = Params(p.lam * c, p.p1, p.p2)
    x = np.geomspace(1e-3, 10, 20) / p.lam
    assert np.allclose(dist.cdf(q, x / c), dist.cdf(p, x), rtol=1e-12, atol=1e-300)


def test_log_pdf_consistent_with_pdf():
    p = Params(1.7, 0.1, 0.2)
    x = np.geomspace(1e-6, 15, 100)
    assert np.allclose(dist.log_pdf(p, x), np.log(dist.pdf(p, x)), rtol=1e-12)


def test_survival_keeps_precision_in_upper_tail():
    p = Params(1.0, 0.2, 0.3)
    x = 60.0
    s = dist.survival(p, x)
    # 1 - F underflows when formed by subtraction; the incomplete-gamma form does not
    assert 0 < s < 1e-20
    assert 1.0 - dist.cdf(p, x) == 0.0
    # the first record component dominates the far tail: S(x) ~ p1 exp(-x)
    assert s == pytest.approx(0.2 * np.exp(-x), rel=1e-12)


def test_hazard():
    p = Params(1.0, 1.0, 0.0)
    assert np.allclose(dist.hazard(p, np.linspace(0, 20, 50)), 1.0)
    q = Params(1.0, 0.3, 0.3)
    x = np.linspace(0.1, 5, 30)
    assert np.allclose(dist.hazard(q, x), dist.pdf(q, x) / dist.survival(q, x))
    with pytest.raises(DomainError):
        dist.hazard(q, -1.0)
    with pytest.raises(OverflowError):
        dist.hazard(q, 1e4)


def test_hazard_decreasing_in_figure_region():
    p = Params(1.0, 0.3, 0.2)
    h = dist.hazard(p, np.linspace(0.01, 10, 100))
    assert np.all(np.diff(h) < 0)


def test_hazard_by_composition():
    p = Params(1.0, 0.5, 0.3)
    want = float(dist.pdf(p, 0.7)) / (1.0 - float(dist.cdf(p, 0.7)))
    assert float(dist.hazard(p, 0.7)) == pytest.approx(want, rel=1e-12)


def test_cdf_strictly_increasing_for_random_params():
    rng = np.random.default_rng(21)
    for _ in range(30):
        w = rng.dirichlet([1, 1, 1])
        p = Params(float(rng.uniform(0.1, 4)), float(w[0]), float(w[1]))
        x = np.sort(rng.uniform(0, 50 / p.lam, 200))
        x = x[np.diff(np.concatenate(([0.0], x))) > 1e-9]
        # F rounds to 1 in the far tail; the survival function keeps the resolution
        assert np.all(np.diff(dist.survival(p, x)) < 0)
        assert np.all(np.diff(dist.cdf(p, x)) >= 0)


def test_near_non_identifiable_pair():
    # two far-apart parameter points whose CDFs differ by less than 0.003 everywhere;
    # estimators cannot separate them at n in the thousands
    x = np.geomspace(1e-8, 30, 20000)
    a = dist.cdf(Params(1.5, 0.5, 0.3), x)
    b = dist.cdf(Params(0.6433, 0.0, 0.6075), x)
    assert np.max(np.abs(a - b)) < 3e-3
