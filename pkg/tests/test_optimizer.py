import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clrbte.optimizer import (
    PENALTY,
    ObjectiveSpec,
    ParamTransform,
    minimize,
    numerical_hessian,
    standard_errors,
)


@settings(max_examples=100, deadline=None)
@given(
    st.floats(1e-3, 1e3),
    st.floats(0.01, 0.98),
    st.floats(0.01, 0.98),
    st.floats(-0.99, 0.99),
)
def test_transform_roundtrip(lam, a, b, th):
    p1 = a
    p2 = (1 - a) * b * 0.99
    t = ParamTransform(("log", "simplex", "signed_unit"))
    theta = np.array([lam, p1, p2, th])
    assert np.allclose(t.inverse(t.forward(theta)), theta, rtol=1e-10, atol=1e-12)


def test_inverse_stays_feasible_for_extreme_inputs():
    t = ParamTransform(("log", "simplex", "signed_unit"))
    for u in ([800.0, 800.0, -800.0, 50.0], [-50.0, -900.0, 900.0, -50.0]):
        th = t.inverse(u)
        assert np.all(np.isfinite(th))
        assert th[0] > 0 and th[1] >= 0 and th[2] >= 0 and th[1] + th[2] <= 1
        assert abs(th[3]) < 1


def test_jacobian_matches_finite_differences():
    t = ParamTransform(("log", "simplex", "signed_unit"))
    u = np.array([0.3, -0.4, 0.7, 0.2])
    J = t.jacobian(u)
    h = 1e-6
    for j in range(4):
        e = np.zeros(4)
        e[j] = h
        col = (t.inverse(u + e) - t.inverse(u - e)) / (2 * h)
        assert np.allclose(J[:, j], col, atol=1e-8)


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        ParamTransform(("bogus",))


def test_minimize_quadratic_in_constrained_space():
    target = np.array([2.0, 0.2, 0.5])
    spec = ObjectiveSpec(lambda th: float(np.sum((th - target) ** 2)), ParamTransform(("log", "simplex")))
    r = minimize(spec, [np.array([1.0, 0.3, 0.3]), np.array([5.0, 0.1, 0.1])])
    assert r.converged
    assert np.allclose(r.point, target, atol=1e-5)


def test_maximize_direction():
    spec = ObjectiveSpec(lambda th: -float((th[0] - 3.0) ** 2), ParamTransform(("log",)), direction="maximize")
    r = minimize(spec, [np.array([1.0])])
    assert r.point[0] == pytest.approx(3.0, abs=1e-5)
    assert r.objective_value == pytest.approx(0.0, abs=1e-9)


def test_non_finite_objective_is_penalized_not_raised():
    spec = ObjectiveSpec(lambda th: float("nan"), ParamTransform(("log",)))
    assert spec.evaluate(np.array([0.0])) == PENALTY
    r = minimize(spec, [np.array([1.0])])
    assert not r.converged and np.all(np.isnan(r.point))


def test_infeasible_start_rejected():
    spec = ObjectiveSpec(lambda th: 0.0, ParamTransform(("log",)))
    with pytest.raises(ValueError, match="strictly feasible"):
        minimize(spec, [np.array([-1.0])])


def test_hessian_of_quadratic_form():
    A = np.array([[3.0, 1.0], [1.0, 2.0]])
    H = numerical_hessian(lambda x: 0.5 * x @ A @ x, np.array([0.4, -1.2]))
    assert np.allclose(H, A, atol=1e-6)


def test_standard_errors_from_inverse():
    H = np.array([[4.0, 1.0], [1.0, 3.0]])
    se = standard_errors(H)
    assert se.reliable
    assert np.allclose(se.se, np.sqrt(np.diag(np.linalg.inv(H))))


def test_standard_errors_flag_indefinite_hessian():
    se = standard_errors(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert not se.reliable and np.all(np.isnan(se.se))
    se = standard_errors(np.array([[1.0, 0.0], [0.0, 1e-16]]))
    assert not se.reliable
