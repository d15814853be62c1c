"""
Constrained minimization shared by every estimator.

Parameters are mapped to an unconstrained space (log for positive values,
a two-dimensional logistic map for the weight simplex, a scaled tanh for
open signed-unit intervals). Each start runs Nelder-Mead to a loose
tolerance, then smooth objectives are polished with BFGS on
central-difference gradients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import optimize as _opt

PENALTY = 1e100
THETA_EPS = 1e-6

NM_XATOL = 1e-6
NM_FATOL = 1e-10
GTOL = 1e-6
MAXITER = 2000

_KIND_SIZE = {"free": 1, "log": 1, "signed_unit": 1, "simplex": 2}


class ParamTransform:
    """
    Block-wise bijection between constrained and unconstrained coordinates.

    ``kinds`` is a sequence drawn from ``free``, ``log``, ``signed_unit``
    (onto ``(-1+eps, 1-eps)``) and ``simplex`` (two coordinates ``p1, p2`` with
    ``p1, p2 > 0`` and ``p1 + p2 < 1``).
    """

    def __init__(self, kinds: Sequence[str]):
        for k in kinds:
            if k not in _KIND_SIZE:
                raise ValueError(f"unknown transform kind {k!r}")
        self.kinds = tuple(kinds)
        self.size = sum(_KIND_SIZE[k] for k in self.kinds)

    def __repr__(self):
        return f"ParamTransform({list(self.kinds)!r})"

    def _blocks(self):
        i = 0
        for k in self.kinds:
            yield k, i
            i += _KIND_SIZE[k]

    def forward(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        u = np.empty(self.size)
        for k, i in self._blocks():
            if k == "free":
                u[i] = theta[i]
            elif k == "log":
                u[i] = math.log(theta[i])
            elif k == "signed_unit":
                u[i] = math.atanh(theta[i] / (1.0 - THETA_EPS))
            else:
                p1, p2 = theta[i], theta[i + 1]
                p3 = 1.0 - p1 - p2
                u[i] = math.log(p1 / p3)
                u[i + 1] = math.log(p2 / p3)
        return u

    def inverse(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        theta = np.empty(self.size)
        for k, i in self._blocks():
            if k == "free":
                theta[i] = u[i]
            elif k == "log":
                theta[i] = math.exp(min(u[i], 700.0))
            elif k == "signed_unit":
                theta[i] = (1.0 - THETA_EPS) * math.tanh(u[i])
            else:
                b, c = u[i], u[i + 1]
                m = max(b, c, 0.0)
                eb, ec, e0 = math.exp(b - m), math.exp(c - m), math.exp(-m)
                d = eb + ec + e0
                theta[i] = eb / d
                theta[i + 1] = ec / d
        return theta

    def jacobian(self, u) -> np.ndarray:
        """``d theta / d u`` at the unconstrained point ``u``."""
        u = np.asarray(u, dtype=float)
        theta = self.inverse(u)
        J = np.zeros((self.size, self.size))
        for k, i in self._blocks():
            if k == "free":
                J[i, i] = 1.0
            elif k == "log":
                J[i, i] = theta[i]
            elif k == "signed_unit":
                J[i, i] = (1.0 - THETA_EPS) * (1.0 - math.tanh(u[i]) ** 2)
            else:
                p = theta[i:i + 2]
                J[i:i + 2, i:i + 2] = np.diag(p) - np.outer(p, p)
        return J


@dataclass
class ObjectiveSpec:
    """
    An objective over constrained parameters.

    ``fn`` receives the constrained vector. ``evaluate`` works in unconstrained
    coordinates, flips the sign for maximization and replaces non-finite values
    by a large finite penalty so line searches never see NaN or inf.
    """

    fn: Callable[[np.ndarray], float]
    transform: ParamTransform
    direction: str = "minimize"
    smooth: bool = True

    def __post_init__(self):
        if self.direction not in ("minimize", "maximize"):
            raise ValueError("direction must be 'minimize' or 'maximize'")

    @property
    def n_free(self) -> int:
        return self.transform.size

    def evaluate(self, u) -> float:
        try:
            v = float(self.fn(self.transform.inverse(u)))
        except (ValueError, ArithmeticError, FloatingPointError):
            return PENALTY
        if self.direction == "maximize":
            v = -v
        if not math.isfinite(v):
            return PENALTY
        return min(v, PENALTY)


@dataclass
class OptResult:
    point: np.ndarray
    objective_value: float
    converged: bool
    iterations: int
    restarts_used: int
    n_evals: int = 0
    grad_norm: float = float("nan")
    best_start: int = -1
    message: str = ""


def central_gradient(f, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    g = np.empty_like(u)
    for i in range(len(u)):
        h = max(1e-6, 1e-6 * abs(u[i]))
        e = np.zeros_like(u)
        e[i] = h
        g[i] = (f(u + e) - f(u - e)) / (2.0 * h)
    return g


def _initial_simplex(u0, step=0.25):
    k = len(u0)
    sim = np.tile(u0, (k + 1, 1))
    for i in range(k):
        sim[i + 1, i] += step
    return sim


def _nelder_mead(f, u0, step=0.25):
    # fatol is relative to the objective's size, like the gradient test
    f0 = f(u0)
    scale = max(1.0, abs(f0)) if f0 < PENALTY else 1.0
    return _opt.minimize(
        f,
        u0,
        method="Nelder-Mead",
        options={
            "initial_simplex": _initial_simplex(u0, step),
            "xatol": NM_XATOL,
            "fatol": NM_FATOL * scale,
            "maxiter": MAXITER,
            "maxfev": 4 * MAXITER,
        },
    )


def _run_start(spec: ObjectiveSpec, u0):
    f = spec.evaluate
    evals = 0
    nit = 0
    res = _nelder_mead(f, u0)
    evals += res.nfev
    nit += res.nit
    if not spec.smooth:
        # a collapsed simplex on a kinked objective is restarted once from its best vertex
        res2 = _nelder_mead(f, res.x, step=0.05)
        evals += res2.nfev
        nit += res2.nit
        if res2.fun <= res.fun:
            res = res2
        converged = bool(res.success) and res.fun < PENALTY
        return res.x, float(res.fun), converged, nit, evals, float("nan"), res.message

    u, fu = res.x, float(res.fun)
    scale = max(1.0, abs(fu))
    if fu < PENALTY:
        jac = lambda v: central_gradient(f, v)
        try:
            with np.errstate(all="ignore"):
                q = _opt.minimize(f, u, method="BFGS", jac=jac,
                                  options={"gtol": GTOL * scale, "maxiter": MAXITER})
            evals += q.nfev + 2 * len(u) * q.njev
            nit += q.nit
            if q.fun <= fu:
                u, fu = q.x, float(q.fun)
        except (ValueError, ArithmeticError):
            pass
    gnorm = float(np.max(np.abs(central_gradient(f, u)))) if fu < PENALTY else float("inf")
    converged = fu < PENALTY and (gnorm <= GTOL * scale or bool(res.success))
    return u, fu, converged, nit, evals, gnorm, ""


def minimize(spec: ObjectiveSpec, starts: Sequence[Sequence[float]]) -> OptResult:
    """
    Multi-start minimization. Starts are constrained points strictly inside the
    feasible set; the best finite result wins, ties broken by start order.
    A result whose every start failed reports ``converged=False`` and a NaN
    point.

    Convergence: Nelder-Mead vertex spread below 1e-6 and value spread below
    1e-10, or a BFGS gradient infinity-norm below ``1e-6 * max(1, |f|)``.
    """
    if len(starts) == 0:
        raise ValueError("at least one start point is required")
    best = None
    total_it = 0
    total_ev = 0
    for idx, s in enumerate(starts):
        try:
            u0 = spec.transform.forward(s)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"start {idx} = {list(s)} is not strictly feasible") from exc
        if not np.all(np.isfinite(u0)):
            raise ValueError(f"start {idx} = {list(s)} is not strictly feasible")
        u, fu, conv, nit, ev, gnorm, msg = _run_start(spec, u0)
        total_it += nit
        total_ev += ev
        if best is None or fu < best[1]:
            best = (u, fu, conv, gnorm, idx, msg)
    u, fu, conv, gnorm, idx, msg = best
    if fu >= PENALTY:
        return OptResult(
            point=np.full(spec.transform.size, np.nan),
            objective_value=float("nan"),
            converged=False,
            iterations=total_it,
            restarts_used=len(starts),
            n_evals=total_ev,
            message="objective was non-finite at every start",
        )
    value = -fu if spec.direction == "maximize" else fu
    return OptResult(
        point=spec.transform.inverse(u),
        objective_value=value,
        converged=conv,
        iterations=total_it,
        restarts_used=len(starts),
        n_evals=total_ev,
        grad_norm=gnorm,
        best_start=idx,
        message=str(msg),
    )


def numerical_hessian(f: Callable[[np.ndarray], float], point, rel_step: float = 1e-4) -> np.ndarray:
    """Symmetric central-difference Hessian with steps ``rel_step * max(|x_i|, 1e-2)``."""
    x = np.asarray(point, dtype=float)
    k = len(x)
    h = rel_step * np.maximum(np.abs(x), 1e-2)
    f0 = f(x)
    H = np.empty((k, k))
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = h[i]
        H[i, i] = (f(x + ei) - 2.0 * f0 + f(x - ei)) / h[i] ** 2
        for j in range(i):
            ej = np.zeros(k)
            ej[j] = h[j]
            v = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4.0 * h[i] * h[j])
            H[i, j] = H[j, i] = v
    return H


@dataclass
class StandardErrors:
    se: np.ndarray
    reliable: bool
    reason: str = ""
    covariance: Optional[np.ndarray] = field(default=None, repr=False)


def standard_errors(hessian) -> StandardErrors:
    """
    Square roots of the diagonal of the inverse Hessian of a negative
    log-likelihood. A Hessian that is not positive definite, or is
    numerically singular, yields NaN errors flagged unreliable.
    """
    H = np.asarray(hessian, dtype=float)
    k = H.shape[0]
    if not np.all(np.isfinite(H)):
        return StandardErrors(np.full(k, np.nan), False, "non-finite Hessian")
    H = 0.5 * (H + H.T)
    try:
        L = np.linalg.cholesky(H)
    except np.linalg.LinAlgError:
        return StandardErrors(np.full(k, np.nan), False, "Hessian is not positive definite")
    if np.linalg.cond(H) > 1e14:
        return StandardErrors(np.full(k, np.nan), False, "Hessian is numerically singular")
    Linv = np.linalg.inv(L)
    cov = Linv.T @ Linv
    return StandardErrors(np.sqrt(np.diag(cov)), True, "", cov)
