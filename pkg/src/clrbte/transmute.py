"""
Transmutation maps over an arbitrary base distribution.

Two maps are provided:

* the quadratic (order-2) transmutation ``(1 + theta) G - theta G**2``;
* the cubic lower record-based map, a mixture of the first three lower
  record value distributions of the base with weights ``(p1, p2, 1-p1-p2)``.

Everything here is a pure function of its inputs and works elementwise on
numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


ArrayFn = Callable[[np.ndarray], np.ndarray]


class DomainError(ValueError):
    """A parameter lies outside its admissible range."""


@dataclass(frozen=True)
class BaseDistribution:
    """
    A base CDF/PDF pair on ``[support_lower, inf)``.

    ``logcdf`` is optional; supplying it lets the record-based map work with
    ``-ln G`` directly instead of taking the log of a rounded CDF.
    """

    cdf: ArrayFn
    pdf: ArrayFn
    name: str = "base"
    support_lower: float = 0.0
    logcdf: Optional[ArrayFn] = None

    def neg_log_cdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            if self.logcdf is not None:
                return -np.asarray(self.logcdf(x), dtype=float)
            return -np.log(np.asarray(self.cdf(x), dtype=float))


@dataclass(frozen=True)
class SimplexWeights:
    """
    Mixing weights of the first two lower-record components.

    The closed simplex ``p1, p2 >= 0, p1 + p2 <= 1`` is admitted so that the
    base distribution itself (``p1=1, p2=0``) is representable. ``strict=False``
    drops the ``p1 + p2 <= 1`` check; the resulting third weight is negative
    and the map is then no longer guaranteed to be a distribution.
    """

    p1: float
    p2: float
    strict: bool = True

    def __post_init__(self):
        for name, v in (("p1", self.p1), ("p2", self.p2)):
            if not np.isfinite(v) or v < 0.0 or v > 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {v!r}")
        if self.strict and self.p1 + self.p2 > 1.0 + 1e-15:
            raise DomainError(
                f"p1 + p2 <= 1 violated: p1 + p2 = {self.p1 + self.p2!r}"
            )

    @property
    def p3(self) -> float:
        return 1.0 - self.p1 - self.p2


def exponential_base(lam: float) -> BaseDistribution:
    """Exponential base with rate ``lam`` and a cancellation-free ``ln G``."""
    if not (np.isfinite(lam) and lam > 0):
        raise DomainError(f"lambda must be positive and finite, got {lam!r}")

    def cdf(x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, -np.expm1(-lam * np.maximum(x, 0.0)), 0.0)

    def pdf(x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, lam * np.exp(-lam * np.maximum(x, 0.0)), 0.0)

    def logcdf(x):
        return log1mexp(lam * np.asarray(x, dtype=float))

    return BaseDistribution(cdf=cdf, pdf=pdf, name=f"exp({lam:g})", logcdf=logcdf)


def log1mexp(a) -> np.ndarray:
    """
    ``ln(1 - exp(-a))`` for ``a >= 0``, accurate at both ends.

    Returns ``-inf`` at ``a = 0`` and for negative ``a``.
    """
    a = np.asarray(a, dtype=float)
    out = np.full(a.shape, -np.inf)
    small = (a > 0) & (a <= np.log(2.0))
    large = a > np.log(2.0)
    out[small] = np.log(-np.expm1(-a[small]))
    out[large] = np.log1p(-np.exp(-a[large]))
    return out[()] if out.ndim == 0 else out


def _bracket(t, p1, p2, p3):
    # p1 + p2*t + (p3/2)*t**2 with t = -ln G; a zero coefficient kills its term at t = inf
    t = np.asarray(t, dtype=float)
    with np.errstate(invalid="ignore", over="ignore"):
        b = np.full(t.shape, float(p1))
        if p2 != 0.0:
            b = b + p2 * t
        if p3 != 0.0:
            b = b + 0.5 * p3 * t * t
    return b


def record_bracket(neg_log_g, w: SimplexWeights) -> np.ndarray:
    """``p1 - p2 ln G + ((1-p1-p2)/2) (ln G)**2`` written in ``t = -ln G``."""
    return _bracket(neg_log_g, w.p1, w.p2, w.p3)


def clrbt_cdf(base: BaseDistribution, w: SimplexWeights, x) -> np.ndarray:
    """
    CDF of the cubic lower record-based transmuted distribution,
    ``G [1 - (1-p1) ln G + ((1-p1-p2)/2) (ln G)**2]``.
    """
    x = np.asarray(x, dtype=float)
    g_cdf = np.asarray(base.cdf(x), dtype=float)
    t = base.neg_log_cdf(x)
    with np.errstate(invalid="ignore", over="ignore"):
        poly = 1.0 + (1.0 - w.p1) * t + 0.5 * w.p3 * t * t
        out = g_cdf * poly
    # G = 0: G * polylog(G) -> 0
    out = np.where(g_cdf > 0, out, 0.0)
    out = np.clip(out, 0.0, 1.0) if w.strict else out
    return out[()] if out.ndim == 0 else out


def clrbt_sf(base: BaseDistribution, w: SimplexWeights, x) -> np.ndarray:
    """
    Survival function ``1 - F`` without cancellation in the upper tail.

    Uses ``1 - F_k = P(k, t)``, the regularized lower incomplete gamma function
    at ``t = -ln G``, for each record component.
    """
    from scipy.special import gammainc

    t = base.neg_log_cdf(np.asarray(x, dtype=float))
    t = np.asarray(t, dtype=float)
    # P(1, t) = 1 - e^{-t}; the special-cased expm1 keeps full accuracy for small t
    with np.errstate(invalid="ignore"):
        s1 = np.where(np.isinf(t), 1.0, -np.expm1(-t))
        s2 = np.where(np.isinf(t), 1.0, gammainc(2.0, t))
        s3 = np.where(np.isinf(t), 1.0, gammainc(3.0, t))
    out = w.p1 * s1 + w.p2 * s2 + w.p3 * s3
    return out[()] if np.ndim(out) == 0 else out


def clrbt_pdf(base: BaseDistribution, w: SimplexWeights, x) -> np.ndarray:
    """
    Density ``g [p1 - p2 ln G + ((1-p1-p2)/2)(ln G)**2]``.

    Where ``G = 0`` and a log term carries a positive weight the density is
    ``+inf`` (an integrable singularity), not an error.
    """
    x = np.asarray(x, dtype=float)
    g = np.asarray(base.pdf(x), dtype=float)
    b = record_bracket(base.neg_log_cdf(x), w)
    with np.errstate(invalid="ignore"):
        out = np.where(g > 0, g * b, 0.0)
    return out[()] if out.ndim == 0 else out


def lower_record_cdf(base: BaseDistribution, k: int, x) -> np.ndarray:
    """CDF of the k-th lower record value, ``G sum_{j<k} (-ln G)^j / j!``."""
    if k < 1:
        raise DomainError(f"record index must be >= 1, got {k}")
    x = np.asarray(x, dtype=float)
    g_cdf = np.asarray(base.cdf(x), dtype=float)
    t = base.neg_log_cdf(x)
    total = np.zeros_like(g_cdf)
    term = np.ones_like(g_cdf)
    for j in range(k):
        if j > 0:
            term = term * t / j
        total = total + term
    with np.errstate(invalid="ignore"):
        out = np.where(g_cdf > 0, g_cdf * total, 0.0)
    return out[()] if out.ndim == 0 else out


def _check_theta(theta: float) -> None:
    if not np.isfinite(theta) or abs(theta) > 1.0:
        raise DomainError(f"theta must lie in [-1, 1], got {theta!r}")


def quadratic_transmuted_cdf(base: BaseDistribution, theta: float, x) -> np.ndarray:
    """``(1 + theta) G - theta G**2``."""
    _check_theta(theta)
    g_cdf = np.asarray(base.cdf(np.asarray(x, dtype=float)), dtype=float)
    out = (1.0 + theta) * g_cdf - theta * g_cdf * g_cdf
    return out[()] if out.ndim == 0 else out


def quadratic_transmuted_pdf(base: BaseDistribution, theta: float, x) -> np.ndarray:
    """``(1 + theta) g - 2 theta G g``."""
    _check_theta(theta)
    x = np.asarray(x, dtype=float)
    g_cdf = np.asarray(base.cdf(x), dtype=float)
    g = np.asarray(base.pdf(x), dtype=float)
    out = g * (1.0 + theta - 2.0 * theta * g_cdf)
    return out[()] if out.ndim == 0 else out
