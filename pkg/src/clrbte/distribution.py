"""
The CLRBTE(lambda, p1, p2) distribution.

Every function takes a :class:`Params` and an array of points. The bracket
term of the CDF depends on ``x`` only through ``lambda * x``, so the rate is a
pure scale parameter and the numerics are written in ``z = lambda * x``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammainc

from .transmute import DomainError, SimplexWeights, log1mexp


@dataclass(frozen=True)
class Params:
    """
    Parameter triple of CLRBTE.

    ``Params(lam, p1, p2)`` enforces the simplex; :meth:`relaxed` only keeps
    ``0 <= p1, p2 <= 1`` so that tabulated points with ``p1 + p2 > 1`` can
    still be evaluated.
    """

    lam: float
    p1: float
    p2: float
    strict: bool = field(default=True, compare=False)

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise DomainError(f"lambda must be positive and finite, got {self.lam!r}")
        SimplexWeights(self.p1, self.p2, strict=self.strict)

    @classmethod
    def relaxed(cls, lam: float, p1: float, p2: float) -> "Params":
        return cls(lam, p1, p2, strict=False)

    @classmethod
    def from_vector(cls, theta: Sequence[float], strict: bool = True) -> "Params":
        lam, p1, p2 = (float(v) for v in theta)
        return cls(lam, p1, p2, strict=strict)

    @property
    def p3(self) -> float:
        return 1.0 - self.p1 - self.p2

    @property
    def weights(self) -> SimplexWeights:
        return SimplexWeights(self.p1, self.p2, strict=self.strict)

    def as_vector(self) -> np.ndarray:
        return np.array([self.lam, self.p1, self.p2])


def _scalar_out(out):
    return out[()] if np.ndim(out) == 0 else out


def _neg_log_g(z):
    with np.errstate(divide="ignore"):
        return -log1mexp(z)


def _bracket_z(t, p1, p2, p3):
    with np.errstate(invalid="ignore", over="ignore"):
        b = np.full(np.shape(t), float(p1))
        if p2 != 0.0:
            b = b + p2 * t
        if p3 != 0.0:
            b = b + 0.5 * p3 * t * t
    return b


def std_cdf(z, p1: float, p2: float) -> np.ndarray:
    """CDF at unit rate, evaluated at ``z = lambda * x``."""
    z = np.asarray(z, dtype=float)
    pos = z > 0
    zp = np.where(pos, z, 1.0)
    g = -np.expm1(-zp)
    t = -log1mexp(zp)
    out = g * (1.0 + (1.0 - p1) * t + 0.5 * (1.0 - p1 - p2) * t * t)
    # upper half from the survival side, which keeps F monotone to the last ulp
    upper = pos & (out > 0.5)
    if np.any(upper):
        out = np.array(out, copy=True)
        out[upper] = 1.0 - std_sf(zp[upper], p1, p2)
    return np.where(pos, out, 0.0)


def std_sf(z, p1: float, p2: float) -> np.ndarray:
    """Survival at unit rate: ``p1 P(1,t) + p2 P(2,t) + p3 P(3,t)``, ``t = -ln G``."""
    z = np.asarray(z, dtype=float)
    pos = z > 0
    t = -log1mexp(np.where(pos, z, 1.0))
    p3 = 1.0 - p1 - p2
    out = p1 * (-np.expm1(-t)) + p2 * gammainc(2.0, t) + p3 * gammainc(3.0, t)
    return np.where(pos, out, 1.0)


def cdf(p: Params, x) -> np.ndarray:
    out = std_cdf(p.lam * np.asarray(x, dtype=float), p.p1, p.p2)
    if p.strict:
        out = np.clip(out, 0.0, 1.0)
    return _scalar_out(out)


def survival(p: Params, x) -> np.ndarray:
    out = std_sf(p.lam * np.asarray(x, dtype=float), p.p1, p.p2)
    if p.strict:
        out = np.clip(out, 0.0, 1.0)
    return _scalar_out(out)


def pdf(p: Params, x) -> np.ndarray:
    """Density; ``+inf`` at ``x = 0`` whenever ``p2 > 0`` or ``p1 + p2 < 1``."""
    x = np.asarray(x, dtype=float)
    z = p.lam * x
    ok = x >= 0
    zz = np.where(ok, z, 1.0)
    b = _bracket_z(_neg_log_g(zz), p.p1, p.p2, p.p3)
    with np.errstate(invalid="ignore"):
        out = np.where(ok, p.lam * np.exp(-zz) * b, 0.0)
    return _scalar_out(out)


def log_pdf(p: Params, x) -> np.ndarray:
    """Log density computed as ``ln lambda - lambda x + ln(bracket)``."""
    x = np.asarray(x, dtype=float)
    ok = x >= 0
    zz = np.where(ok, p.lam * x, 1.0)
    b = _bracket_z(_neg_log_g(zz), p.p1, p.p2, p.p3)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(ok, np.log(p.lam) - zz + np.log(b), -np.inf)
    return _scalar_out(out)


def hazard(p: Params, x) -> np.ndarray:
    """
    ``pdf / survival``.

    Raises OverflowError where the survival function has underflowed to zero.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("hazard is defined for x >= 0")
    s = np.asarray(survival(p, x))
    if np.any(s <= 0):
        raise OverflowError("survival underflowed to 0; hazard is not representable")
    return _scalar_out(np.asarray(pdf(p, x)) / s)


def invert_cdf(
    cdf_fn: Callable[[float], float],
    sf_fn: Callable[[float], float],
    u,
    x0: float = 1.0,
    max_doublings: int = 2000,
) -> np.ndarray:
    """
    Generic quantile by safeguarded bracketing (Brent's method).

    The bracket starts at ``[0, x0]`` and is doubled until it straddles the
    target. For ``u > 1/2`` the root is taken on the survival scale, which
    keeps relative accuracy in the upper tail.
    """
    u_arr = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any(~np.isfinite(u_arr)) or np.any(u_arr < 0) or np.any(u_arr >= 1):
        raise DomainError("quantile level must lie in [0, 1)")
    out = np.empty_like(u_arr)
    for i, ui in enumerate(u_arr.flat):
        if ui == 0.0:
            out.flat[i] = 0.0
            continue
        if ui <= 0.5:
            f = lambda x, ui=ui: cdf_fn(x) - ui
        else:
            q = 1.0 - ui
            f = lambda x, q=q: q - sf_fn(x)
        hi = x0
        for _ in range(max_doublings):
            if f(hi) > 0:
                break
            hi *= 2.0
        else:
            raise ArithmeticError(f"could not bracket quantile at u={ui!r}")
        out.flat[i] = brentq(f, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return _scalar_out(out.reshape(np.shape(u)))


def _solve_t(log_u, p1, p2, iters=100):
    """
    Root in ``t >= 0`` of ``h(t) = -t + ln Q(t) - ln u`` with
    ``Q(t) = 1 + (1-p1) t + (p3/2) t^2``; ``h`` is strictly decreasing.
    Newton steps are kept inside a shrinking bisection bracket.
    """
    p3 = 1.0 - p1 - p2
    a, c = 1.0 - p1, 0.5 * p3

    def h(t):
        return -t + np.log1p(a * t + c * t * t) - log_u

    lo = np.zeros_like(log_u)
    hi = np.maximum(-log_u, 1.0)
    for _ in range(200):
        bad = h(hi) > 0
        if not np.any(bad):
            break
        hi = np.where(bad, 2.0 * hi, hi)
    t = 0.5 * (lo + hi)
    for _ in range(iters):
        v = h(t)
        lo = np.where(v > 0, t, lo)
        hi = np.where(v > 0, hi, t)
        q = 1.0 + a * t + c * t * t
        d = -1.0 + (a + 2.0 * c * t) / q
        with np.errstate(divide="ignore", invalid="ignore"):
            step = t - v / d
        inside = np.isfinite(step) & (step > lo) & (step < hi)
        new = np.where(inside, step, 0.5 * (lo + hi))
        done = np.abs(new - t) <= 4.0 * np.finfo(float).eps * np.maximum(new, 1e-300)
        t = new
        if np.all(done | (hi - lo <= 4.0 * np.finfo(float).eps * hi)):
            break
    return t


def quantile(p: Params, u) -> np.ndarray:
    """
    Inverse CDF. ``u = 0`` maps to 0; ``u >= 1`` is a domain error because the
    support is unbounded.

    Solved for ``t = -ln G`` (the CDF is ``exp(-t) Q(t)``), then mapped back
    with ``lambda x = -ln(1 - exp(-t))``.
    """
    u = np.asarray(u, dtype=float)
    if np.any(~np.isfinite(u)) or np.any(u < 0) or np.any(u >= 1):
        raise DomainError("quantile level must lie in [0, 1)")
    pos = u > 0
    with np.errstate(divide="ignore"):
        log_u = np.log(np.where(pos, u, 0.5))
    t = _solve_t(np.atleast_1d(log_u), p.p1, p.p2).reshape(u.shape)
    with np.errstate(divide="ignore"):
        z = -log1mexp(t)
    return _scalar_out(np.where(pos, z / p.lam, 0.0))
