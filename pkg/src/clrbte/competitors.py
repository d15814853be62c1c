"""
Comparison models: exponential (E), transmuted exponential (TE) and
transmuted generalized Rayleigh (TGR).

TE and TGR are the quadratic transmutation of an exponential and of a
generalized Rayleigh base ``(1 - exp(-(beta x)**2))**lam`` respectively.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .transmute import (
    BaseDistribution,
    DomainError,
    exponential_base,
    log1mexp,
    quadratic_transmuted_cdf,
    quadratic_transmuted_pdf,
)


def _positive(name, v):
    if not (np.isfinite(v) and v > 0):
        raise DomainError(f"{name} must be positive and finite, got {v!r}")


def _open_signed_unit(name, v):
    if not (np.isfinite(v) and -1.0 < v < 1.0):
        raise DomainError(f"{name} must lie in (-1, 1), got {v!r}")


@dataclass(frozen=True)
class E:
    lam: float

    def __post_init__(self):
        _positive("lambda", self.lam)


@dataclass(frozen=True)
class TE:
    lam: float
    theta: float

    def __post_init__(self):
        _positive("lambda", self.lam)
        _open_signed_unit("theta", self.theta)


@dataclass(frozen=True)
class TGR:
    lam: float
    beta: float
    theta: float

    def __post_init__(self):
        _positive("lambda", self.lam)
        _positive("beta", self.beta)
        _open_signed_unit("theta", self.theta)


def _out(a):
    return a[()] if np.ndim(a) == 0 else a


# -- exponential -------------------------------------------------------------

def e_pdf(lam, x):
    E(lam)
    x = np.asarray(x, dtype=float)
    return _out(np.where(x >= 0, lam * np.exp(-lam * np.maximum(x, 0)), 0.0))


def e_cdf(lam, x):
    E(lam)
    x = np.asarray(x, dtype=float)
    return _out(np.where(x > 0, -np.expm1(-lam * np.maximum(x, 0)), 0.0))


def e_sf(lam, x):
    x = np.asarray(x, dtype=float)
    return _out(np.where(x > 0, np.exp(-lam * np.maximum(x, 0)), 1.0))


def e_log_pdf(lam, x):
    x = np.asarray(x, dtype=float)
    return _out(np.where(x >= 0, np.log(lam) - lam * x, -np.inf))


def e_quantile(lam, u):
    u = np.asarray(u, dtype=float)
    return _out(-np.log1p(-u) / lam)


# -- transmuted exponential --------------------------------------------------

def te_pdf(lam, theta, x):
    TE(lam, theta)
    return quadratic_transmuted_pdf(exponential_base(lam), theta, x)


def te_cdf(lam, theta, x):
    TE(lam, theta)
    return quadratic_transmuted_cdf(exponential_base(lam), theta, x)


def te_sf(lam, theta, x):
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    s = np.exp(-lam * x)
    return _out(s * (1.0 - theta * (-np.expm1(-lam * x))))


def te_log_pdf(lam, theta, x):
    x = np.asarray(x, dtype=float)
    xx = np.maximum(x, 0.0)
    g = -np.expm1(-lam * xx)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(lam) - lam * xx + np.log(1.0 + theta - 2.0 * theta * g)
    return _out(np.where(x >= 0, out, -np.inf))


def _solve_quadratic_map(theta, u):
    # G with (1+theta) G - theta G^2 = u, the root in [0, 1]; cancellation-free form
    u = np.asarray(u, dtype=float)
    a = 1.0 + theta
    return 2.0 * u / (a + np.sqrt(np.maximum(a * a - 4.0 * theta * u, 0.0)))


def te_quantile(lam, theta, u):
    g = _solve_quadratic_map(theta, u)
    return _out(-np.log1p(-g) / lam)


# -- transmuted generalized Rayleigh ----------------------------------------

def generalized_rayleigh_base(lam: float, beta: float) -> BaseDistribution:
    """``G(x) = (1 - exp(-(beta x)**2))**lam``."""
    _positive("lambda", lam)
    _positive("beta", beta)

    def logcdf(x):
        x = np.asarray(x, dtype=float)
        return lam * log1mexp((beta * np.maximum(x, 0.0)) ** 2)

    def cdf(x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, np.exp(logcdf(x)), 0.0)

    def pdf(x):
        x = np.asarray(x, dtype=float)
        xx = np.maximum(x, 0.0)
        w = (beta * xx) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            val = 2.0 * lam * beta**2 * xx * np.exp(-w) * np.exp((lam - 1.0) * log1mexp(w))
        val = np.where(xx > 0, val, _gr_pdf_at_zero(lam, beta))
        return np.where(x >= 0, val, 0.0)

    return BaseDistribution(cdf=cdf, pdf=pdf, name=f"GR({lam:g},{beta:g})", logcdf=logcdf)


def _gr_pdf_at_zero(lam, beta):
    # x (beta x)^{2(lam-1)} ~ x^{2 lam - 1} near 0
    if lam > 0.5:
        return 0.0
    if lam == 0.5:
        return 2.0 * lam * beta
    return np.inf


def tgr_pdf(lam, beta, theta, x):
    TGR(lam, beta, theta)
    return quadratic_transmuted_pdf(generalized_rayleigh_base(lam, beta), theta, x)


def tgr_cdf(lam, beta, theta, x):
    TGR(lam, beta, theta)
    return quadratic_transmuted_cdf(generalized_rayleigh_base(lam, beta), theta, x)


def tgr_sf(lam, beta, theta, x):
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    logh = lam * log1mexp((beta * x) ** 2)
    h = np.exp(logh)
    return _out(-np.expm1(logh) * (1.0 - theta * h))


def tgr_log_pdf(lam, beta, theta, x):
    x = np.asarray(x, dtype=float)
    xx = np.where(x > 0, x, 1.0)
    w = (beta * xx) ** 2
    lg = log1mexp(w)
    h = np.exp(lam * lg)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (
            np.log(2.0 * lam * beta**2 * xx)
            - w
            + (lam - 1.0) * lg
            + np.log(1.0 + theta - 2.0 * theta * h)
        )
    return _out(np.where(x > 0, out, -np.inf))


def tgr_quantile(lam, beta, theta, u):
    """
    Closed-form inverse: undo the quadratic map, then the generalized
    Rayleigh base.
    """
    h = _solve_quadratic_map(theta, u)
    with np.errstate(divide="ignore"):
        w = -np.log1p(-np.power(h, 1.0 / lam))
    return _out(np.sqrt(w) / beta)
