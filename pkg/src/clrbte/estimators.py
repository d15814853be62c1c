"""
Nine point estimators for CLRBTE and maximum likelihood for the comparison
models.

Every objective is expressed through the fitted CDF (or log density) at the
sorted sample, so the same code serves any :class:`DistributionHandle`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import distribution as dist
from .datasets import Sample
from .distribution import Params
from .gof import F_HI, F_LO, GofBlock, ad_statistic, cvm_statistic, gof_block, ks_statistic
from .optimizer import (
    PENALTY,
    ObjectiveSpec,
    OptResult,
    minimize,
    numerical_hessian,
    standard_errors,
)
from .registry import CLRBTE, DistributionHandle
from .sampling import RngStream
from .transmute import DomainError, log1mexp

MIN_FIT_SIZE = 5


class EstimatorId(str, enum.Enum):
    MLE = "MLE"
    LSE = "LSE"
    WLSE = "WLSE"
    ADE = "ADE"
    CvME = "CvME"
    MPSE = "MPSE"
    RTADE = "RTADE"
    MSADE = "MSADE"
    MSALDE = "MSALDE"

    @classmethod
    def parse(cls, name: str) -> "EstimatorId":
        key = name.strip().upper()
        if key == "TADE":
            key = "RTADE"
        for e in cls:
            if e.value.upper() == key:
                return e
        raise DomainError(f"unknown estimator {name!r}; choose from {', '.join(e.value for e in cls)}")

    @property
    def table_name(self) -> str:
        return "TADE" if self is EstimatorId.RTADE else self.value


ALL_ESTIMATORS = tuple(EstimatorId)
# absolute-value objectives have kinks; they skip the gradient polish
NONSMOOTH = {EstimatorId.MSADE, EstimatorId.MSALDE}


# -- likelihood --------------------------------------------------------------

def neg_log_likelihood(p: Params, s: Sample) -> float:
    """Negative CLRBTE log-likelihood; a non-positive bracket returns the penalty."""
    x = s.values
    lg = log1mexp(p.lam * x)
    b = p.p1 - p.p2 * lg + 0.5 * p.p3 * lg * lg
    if np.any(~(b > 0)):
        return PENALTY
    return float(-(s.n * np.log(p.lam) - p.lam * np.sum(x) + np.sum(np.log(b))))


def score(p: Params, s: Sample) -> np.ndarray:
    """Gradient of the log-likelihood with respect to ``(lambda, p1, p2)``."""
    x = s.values
    e = np.exp(-p.lam * x)
    g = -np.expm1(-p.lam * x)
    lg = log1mexp(p.lam * x)
    b = p.p1 - p.p2 * lg + 0.5 * p.p3 * lg * lg
    d_lam = s.n / p.lam - np.sum(x) + np.sum(x * e * (-p.p2 + p.p3 * lg) / (g * b))
    d_p1 = np.sum((1.0 - 0.5 * lg * lg) / b)
    d_p2 = np.sum((-lg - 0.5 * lg * lg) / b)
    return np.array([d_lam, d_p1, d_p2])


# -- distance objectives on F(x_(i)) ----------------------------------------

def lse_from_F(F) -> float:
    F = np.asarray(F, dtype=float)
    n = len(F)
    i = np.arange(1, n + 1)
    return float(np.sum((F - i / (n + 1.0)) ** 2))


def wlse_weights(n: int) -> np.ndarray:
    i = np.arange(1, n + 1)
    return (n + 1.0) ** 2 * (n + 2.0) / (i * (n - i + 1.0))


def wlse_from_F(F) -> float:
    F = np.asarray(F, dtype=float)
    n = len(F)
    i = np.arange(1, n + 1)
    return float(np.sum(wlse_weights(n) * (F - i / (n + 1.0)) ** 2))


def ade_from_F(F) -> float:
    return ad_statistic(F)


def rtade_from_F(F) -> float:
    """Right-tail AD: ``n/2 - 2 sum F_i - (1/n) sum (2i-1) ln(1 - F_{n+1-i})``."""
    F = np.clip(np.asarray(F, dtype=float), F_LO, F_HI)
    n = len(F)
    i = np.arange(1, n + 1)
    return float(n / 2.0 - 2.0 * np.sum(F) - np.sum((2 * i - 1) * np.log1p(-F[::-1])) / n)


def cvme_from_F(F) -> float:
    return cvm_statistic(F)


def spacings(F) -> np.ndarray:
    """``F_(i) - F_(i-1)`` for ``i = 1..n+1`` with ``F_(0) = 0`` and ``F_(n+1) = 1``."""
    F = np.asarray(F, dtype=float)
    return np.diff(np.concatenate(([0.0], F, [1.0])))


def mpse_from_F(F, tied=None, log_density=None) -> float:
    """
    Mean log spacing (to be maximized). A spacing that is zero because
    ``x_(i) = x_(i-1)`` has its log replaced by ``ln f(x_(i))``.
    """
    I = spacings(F)
    with np.errstate(divide="ignore"):
        logs = np.log(np.maximum(I, F_LO))
    if tied is not None and np.any(tied):
        logs[:-1][tied] = np.asarray(log_density)[tied]
    return float(np.mean(logs))


def msade_from_F(F_unique) -> float:
    I = spacings(F_unique)
    return float(np.sum(np.abs(I - 1.0 / len(I))))


def msalde_from_F(F_unique) -> float:
    I = np.maximum(spacings(F_unique), F_LO)
    return float(np.sum(np.abs(np.log(I) - np.log(1.0 / len(I)))))


def _tied_mask(x):
    m = np.zeros(len(x), dtype=bool)
    m[1:] = x[1:] == x[:-1]
    return m


def objective_value(handle: DistributionHandle, est: EstimatorId, theta, s: Sample) -> float:
    """The estimator's objective at ``theta`` in its natural direction."""
    est = EstimatorId(est)
    x = s.values
    if est is EstimatorId.MLE:
        if handle is CLRBTE:
            return neg_log_likelihood(Params.from_vector(theta), s)
        return float(-np.sum(handle.log_pdf(theta, x)))
    if est in NONSMOOTH:
        F = handle.cdf(theta, np.unique(x))
        return msade_from_F(F) if est is EstimatorId.MSADE else msalde_from_F(F)
    F = handle.cdf(theta, x)
    if est is EstimatorId.MPSE:
        tied = _tied_mask(x)
        logf = handle.log_pdf(theta, x) if np.any(tied) else None
        return mpse_from_F(F, tied, logf)
    return {
        EstimatorId.LSE: lse_from_F,
        EstimatorId.WLSE: wlse_from_F,
        EstimatorId.ADE: ade_from_F,
        EstimatorId.CvME: cvme_from_F,
        EstimatorId.RTADE: rtade_from_F,
    }[est](F)


def lse_objective(p: Params, s: Sample) -> float:
    return objective_value(CLRBTE, EstimatorId.LSE, p.as_vector(), s)


def wlse_objective(p: Params, s: Sample) -> float:
    return objective_value(CLRBTE, EstimatorId.WLSE, p.as_vector(), s)


def ade_objective(p: Params, s: Sample) -> float:
    return objective_value(CLRBTE, EstimatorId.ADE, p.as_vector(), s)


def rtade_objective(p: Params, s: Sample) -> float:
    return objective_value(CLRBTE, EstimatorId.RTADE, p.as_vector(), s)


def cvme_objective(p: Params, s: Sample) -> float:
    return objective_value(CLRBTE, EstimatorId.CvME, p.as_vector(), s)


def mpse_objective(p: Params, s: Sample) -> float:
    return objective_value(CLRBTE, EstimatorId.MPSE, p.as_vector(), s)


def msade_objective(p: Params, s: Sample) -> float:
    return objective_value(CLRBTE, EstimatorId.MSADE, p.as_vector(), s)


def msalde_objective(p: Params, s: Sample) -> float:
    return objective_value(CLRBTE, EstimatorId.MSALDE, p.as_vector(), s)


def objective_spec(handle: DistributionHandle, est: EstimatorId, s: Sample) -> ObjectiveSpec:
    est = EstimatorId(est)
    return ObjectiveSpec(
        fn=lambda th: objective_value(handle, est, th, s),
        transform=handle.transform,
        direction="maximize" if est is EstimatorId.MPSE else "minimize",
        smooth=est not in NONSMOOTH,
    )


# -- fitting -----------------------------------------------------------------

@dataclass
class FitReport:
    distribution: str
    label: str
    estimator: str
    n: int
    source: str
    params: Dict[str, float]
    loglik: float
    aic: float
    gof: GofBlock
    converged: bool
    opt: OptResult
    se: Optional[Dict[str, float]] = None
    se_reliable: Optional[bool] = None
    se_note: str = ""
    sample_values: np.ndarray = field(default=None, repr=False)

    @property
    def estimates(self) -> np.ndarray:
        return np.array(list(self.params.values()))

    def to_dict(self) -> dict:
        return {
            "distribution": self.label,
            "estimator": self.estimator,
            "n": self.n,
            "source": self.source,
            "params": dict(self.params),
            "se": None if self.se is None else dict(self.se),
            "se_reliable": self.se_reliable,
            "se_note": self.se_note,
            "loglik": self.loglik,
            "aic": self.aic,
            "gof": self.gof.to_dict(),
            "converged": self.converged,
            "optimizer": {
                "objective_value": self.opt.objective_value,
                "iterations": self.opt.iterations,
                "restarts_used": self.opt.restarts_used,
                "evaluations": self.opt.n_evals,
                "grad_norm": self.opt.grad_norm,
                "best_start": self.opt.best_start,
                "message": self.opt.message,
            },
        }


def supports(handle: DistributionHandle, est: EstimatorId) -> bool:
    return handle is CLRBTE or EstimatorId(est) is EstimatorId.MLE


def _near_boundary(handle: DistributionHandle, theta, tol=1e-4) -> bool:
    for spec, v in zip(handle.param_space, theta):
        if spec.transform == "simplex" and (v < tol or v > 1 - tol):
            return True
        if spec.transform == "signed_unit" and abs(v) > 1 - tol:
            return True
        if spec.transform == "log" and v < 1e-12:
            return True
    if handle is CLRBTE and theta[1] + theta[2] > 1 - tol:
        return True
    return False


def _nll_unchecked(handle: DistributionHandle, theta, x) -> float:
    # original coordinates without domain validation, for finite differencing
    if handle is CLRBTE:
        lam, p1, p2 = theta
        if lam <= 0:
            return np.inf
        lg = log1mexp(lam * x)
        b = p1 - p2 * lg + 0.5 * (1 - p1 - p2) * lg * lg
        if np.any(b <= 0):
            return np.inf
        return float(-(len(x) * np.log(lam) - lam * np.sum(x) + np.sum(np.log(b))))
    try:
        return float(-np.sum(handle.log_pdf(theta, x)))
    except (ValueError, ArithmeticError):
        return np.inf


def mle_standard_errors(handle: DistributionHandle, theta, s: Sample):
    """Observed-information standard errors at an MLE in original coordinates."""
    theta = np.asarray(theta, dtype=float)
    H = numerical_hessian(lambda t: _nll_unchecked(handle, t, s.values), theta)
    res = standard_errors(H)
    if res.reliable and _near_boundary(handle, theta):
        res.reliable = False
        res.reason = "estimate lies within 1e-4 of the parameter-space boundary"
    return res


def fit(
    handle: DistributionHandle,
    est,
    s: Sample,
    starts: Optional[Sequence[Sequence[float]]] = None,
    with_se: bool = True,
) -> FitReport:
    """
    Estimate ``handle``'s parameters from ``s`` with estimator ``est``.

    Non-convergence is reported in-band (``converged=False``); the optimizer's
    best point is still returned with its diagnostics.
    """
    est = EstimatorId.parse(est) if isinstance(est, str) else EstimatorId(est)
    if not supports(handle, est):
        raise DomainError(f"{est.value} is only available for CLRBTE; {handle.label} supports MLE")
    if s.n < MIN_FIT_SIZE:
        raise ValueError(f"estimation needs at least {MIN_FIT_SIZE} observations, got {s.n}")
    if starts is None:
        starts = handle.starts(s.values)
    res = minimize(objective_spec(handle, est, s), starts)
    theta = res.point
    names = handle.param_names
    params = {k: float(v) for k, v in zip(names, theta)}
    if np.all(np.isfinite(theta)):
        loglik = float(np.sum(handle.log_pdf(theta, s.values)))
        F = handle.cdf(theta, s.values)
    else:
        loglik = float("nan")
        F = np.full(s.n, np.nan)
    aic = 2.0 * handle.n_params - 2.0 * loglik
    gof = gof_block(F, aic=aic, has_ties=s.has_ties)
    report = FitReport(
        distribution=handle.name,
        label=handle.label,
        estimator=est.value,
        n=s.n,
        source=s.source,
        params=params,
        loglik=loglik,
        aic=aic,
        gof=gof,
        converged=res.converged,
        opt=res,
        sample_values=s.values,
    )
    if with_se and est is EstimatorId.MLE and np.all(np.isfinite(theta)):
        se = mle_standard_errors(handle, theta, s)
        report.se = {k: float(v) for k, v in zip(names, se.se)}
        report.se_reliable = se.reliable
        report.se_note = se.reason
    return report


def bootstrap_pvalues(handle: DistributionHandle, est, s: Sample, report: FitReport,
                      B: int, seed: int = 0) -> dict:
    """
    Parametric-bootstrap p-values for KS, AD and CvM: simulate from the fitted
    model, refit with the same estimator, and count replicate statistics at
    least as large as the observed ones. Replicate ``b`` uses stream ``b``.
    """
    if B < 1:
        raise ValueError("B must be >= 1")
    theta = report.estimates
    observed = np.array([report.gof.ks, report.gof.ad, report.gof.cvm])
    exceed = np.zeros(3)
    used = 0
    for b in range(B):
        xb = handle.sampler(theta, s.n, RngStream(seed, b))
        sb = Sample(np.maximum(xb, np.finfo(float).tiny), f"bootstrap[{b}]")
        rb = fit(handle, est, sb, starts=[theta], with_se=False)
        if not rb.converged:
            continue
        F = handle.cdf(rb.estimates, sb.values)
        stats = np.array([ks_statistic(F), ad_statistic(F), cvm_statistic(F)])
        exceed += stats >= observed
        used += 1
    if used == 0:
        return {"B": B, "used": 0, "p_ks": float("nan"), "p_ad": float("nan"), "p_cvm": float("nan")}
    p = (1.0 + exceed) / (used + 1.0)
    return {"B": B, "used": used, "p_ks": float(p[0]), "p_ad": float(p[1]), "p_cvm": float(p[2])}
