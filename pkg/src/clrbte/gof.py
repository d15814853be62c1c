"""
Goodness-of-fit statistics and their p-values for a fully specified
continuous null.

All statistic functions take the fitted CDF evaluated at the sorted sample.
P-values treat the parameters as known ("case 0"), which is optimistic when
they were estimated from the same data; see :func:`clrbte.estimators.bootstrap_pvalues`
for the parametric-bootstrap alternative.

P-value approximations:

* KS: the Kolmogorov limit law, or the exact finite-n law (Simard and
  L'Ecuyer, via scipy) for ``n < 100`` samples without ties.
* AD: Marsaglia and Marsaglia (2004), limit distribution plus the finite-n
  error correction.
* CvM: Csörgő and Faraway (1996), limit series plus the first-order finite-n
  correction.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy.special import gammaln, kv

F_LO = 1e-300
F_HI = 1.0 - 1e-16


def _clamp(F):
    return np.clip(np.asarray(F, dtype=float), F_LO, F_HI)


# -- Kolmogorov-Smirnov ------------------------------------------------------

def ks_statistic(F_sorted) -> float:
    F = np.asarray(F_sorted, dtype=float)
    n = len(F)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def kolmogorov_sf(z: float) -> float:
    """Survival function of the Kolmogorov limit distribution at ``z``."""
    if z <= 0:
        return 1.0
    if z < 1.18:
        # theta-function form converges fast for small z
        c = -(math.pi**2) / (8.0 * z * z)
        s = sum(math.exp(c * (2 * k - 1) ** 2) for k in range(1, 8))
        return min(1.0, max(0.0, 1.0 - math.sqrt(2.0 * math.pi) / z * s))
    s = 0.0
    for k in range(1, 101):
        term = math.exp(-2.0 * k * k * z * z)
        s += term if k % 2 else -term
        if term < 1e-17:
            break
    return min(1.0, max(0.0, 2.0 * s))


def ks_pvalue(d: float, n: int, method: str = "asymptotic") -> float:
    """
    P-value of the one-sample KS statistic ``d``. ``method`` is
    ``"asymptotic"`` (Kolmogorov series at ``sqrt(n) d``) or ``"exact"``.
    """
    if method == "asymptotic":
        return kolmogorov_sf(math.sqrt(n) * d)
    if method == "exact":
        from scipy.stats import kstwo

        return float(min(1.0, max(0.0, kstwo.sf(d, n))))
    raise ValueError(f"unknown KS p-value method {method!r}")


# -- Anderson-Darling --------------------------------------------------------

def ad_statistic(F_sorted) -> float:
    F = _clamp(F_sorted)
    n = len(F)
    i = np.arange(1, n + 1)
    return float(-n - np.sum((2 * i - 1) * (np.log(F) + np.log1p(-F[::-1]))) / n)


def _adinf(z: float) -> float:
    if z <= 0:
        return 0.0
    if z < 2:
        return math.exp(-1.2337141 / z) / math.sqrt(z) * (
            2.00012 + (0.247105 - (0.0649821 - (0.0347962 - (0.011672 - 0.00168691 * z) * z) * z) * z) * z
        )
    return math.exp(
        -math.exp(1.0776 - (2.30695 - (0.43424 - (0.082433 - (0.008056 - 0.0003146 * z) * z) * z) * z) * z)
    )


def _ad_errfix(n: int, x: float) -> float:
    c = 0.01265 + 0.1757 / n
    if x < c:
        t = x / c
        t = math.sqrt(t) * (1.0 - t) * (49.0 * t - 102.0)
        return t * (0.0037 / n**3 + 0.00078 / n**2 + 0.00006 / n)
    if x < 0.8:
        t = (x - c) / (0.8 - c)
        t = -0.00022633 + (6.54034 - (14.6538 - (14.458 - (8.259 - 1.91864 * t) * t) * t) * t) * t
        return t * (0.04213 / n + 0.01365 / n**2)
    t = -130.2137 + (745.2337 - (1705.091 - (1950.646 - (1116.360 - 255.7844 * x) * x) * x) * x) * x
    return t / n


def ad_pvalue(a2: float, n: Optional[int] = None) -> float:
    """Upper-tail probability of the AD statistic; ``n=None`` uses the limit law only."""
    x = _adinf(a2)
    if n is not None:
        x += _ad_errfix(n, x)
    return float(min(1.0, max(0.0, 1.0 - x)))


# -- Cramér-von Mises --------------------------------------------------------

def cvm_statistic(F_sorted) -> float:
    F = np.asarray(F_sorted, dtype=float)
    n = len(F)
    i = np.arange(1, n + 1)
    return float(1.0 / (12 * n) + np.sum((F - (2 * i - 1) / (2.0 * n)) ** 2))


def _series(term, tol=1e-12, kmax=200):
    total = 0.0
    for k in range(kmax):
        t = term(k)
        total += t
        if abs(t) < tol:
            break
    return total


def cvm_limit_cdf(w: float) -> float:
    """CDF of the Cramér-von Mises limit law (Bessel-K series)."""
    if w <= 0:
        return 0.0

    def term(k):
        y = 4 * k + 1
        q = y * y / (16.0 * w)
        u = math.exp(gammaln(k + 0.5) - gammaln(k + 1)) / (math.pi**1.5 * math.sqrt(w))
        return u * math.sqrt(y) * math.exp(-q) * kv(0.25, q)

    return _series(term)


def _cvm_psi1(w: float) -> float:
    # first-order finite-n correction without its V(w)/12 part
    def ed2(y):
        z = y * y / 4.0
        return math.exp(-z) * (y / 2.0) ** 1.5 * (kv(0.25, z) + kv(0.75, z)) / math.sqrt(math.pi)

    def ed3(y):
        z = y * y / 4.0
        return (math.exp(-z) / math.sqrt(math.pi) * (y / 2.0) ** 2.5
                * (2 * kv(0.25, z) + 3 * kv(0.75, z) - kv(1.25, z)))

    sx = 2.0 * math.sqrt(w)
    y1 = w**0.75
    y2 = w**1.25

    def term(k):
        m = 2 * k + 1
        g1 = math.gamma(k + 0.5)
        g3 = math.gamma(k + 1.5)
        a = (m * g1 * ed2((4 * k + 3) / sx) / (9 * y1)
             + g1 * ed3((4 * k + 1) / sx) / (72 * y2)
             + 2 * (m + 2) * g3 * ed3((4 * k + 5) / sx) / (12 * y2)
             + 7 * m * g1 * ed2((4 * k + 1) / sx) / (144 * y1)
             + 7 * m * g1 * ed2((4 * k + 5) / sx) / (144 * y1))
        return -a / (math.pi * math.gamma(k + 1))

    return _series(term, kmax=60)


def cvm_pvalue(w: float, n: Optional[int] = None) -> float:
    """
    Upper-tail probability of the CvM statistic. ``n=None`` uses the limit
    law; otherwise the Csörgő-Faraway finite-n correction is added. The
    statistic's support is ``[1/(12n), n/3]``.
    """
    if n is None:
        return float(min(1.0, max(0.0, 1.0 - cvm_limit_cdf(w))))
    if w <= 1.0 / (12 * n):
        return 1.0
    if w >= n / 3.0:
        return 0.0
    cdf = cvm_limit_cdf(w) * (1.0 + 1.0 / (12 * n)) + _cvm_psi1(w) / n
    return float(min(1.0, max(0.0, 1.0 - cdf)))


# -- blocks and comparison tables -------------------------------------------

@dataclass
class GofBlock:
    ks: float
    ad: float
    cvm: float
    p_ks: float
    p_ad: float
    p_cvm: float
    aic: float = float("nan")
    ks_method: str = "asymptotic"
    bootstrap: Optional[dict] = None

    def to_dict(self) -> dict:
        return asdict(self)


def choose_ks_method(n: int, has_ties: bool) -> str:
    # exact law only for small, tie-free samples; ties break its continuity assumption
    return "exact" if n < 100 and not has_ties else "asymptotic"


def gof_block(F_sorted, aic: float = float("nan"), has_ties: bool = False,
              ks_method: str = "auto") -> GofBlock:
    F = np.asarray(F_sorted, dtype=float)
    n = len(F)
    if ks_method == "auto":
        ks_method = choose_ks_method(n, has_ties)
    d = ks_statistic(F)
    a2 = ad_statistic(F)
    w2 = cvm_statistic(F)
    return GofBlock(
        ks=d,
        ad=a2,
        cvm=w2,
        p_ks=ks_pvalue(d, n, ks_method),
        p_ad=ad_pvalue(a2, n),
        p_cvm=cvm_pvalue(w2, n),
        aic=aic,
        ks_method=ks_method,
    )


COLUMNS = ("Distribution", "AIC", "KS", "AD", "CvM", "p-value(KS)", "p-value(AD)", "p-value(CvM)")


@dataclass
class ComparisonRow:
    distribution: str
    aic: float
    ks: float
    ad: float
    cvm: float
    p_ks: float
    p_ad: float
    p_cvm: float
    best_aic: bool = False


@dataclass
class ComparisonTable:
    rows: List[ComparisonRow]
    source: str = ""
    n: int = 0

    def best(self, column: str) -> str:
        """Label of the row minimizing ``column`` (``aic``, ``ks``, ``ad`` or ``cvm``)."""
        return min(self.rows, key=lambda r: getattr(r, column)).distribution

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "n": self.n,
            "columns": list(COLUMNS),
            "rows": [asdict(r) for r in self.rows],
            "best": {c: self.best(c) for c in ("aic", "ks", "ad", "cvm")},
        }

    def to_text(self) -> str:
        body = [[r.distribution + (" *" if r.best_aic else "")] +
                [f"{v:.4f}" for v in (r.aic, r.ks, r.ad, r.cvm, r.p_ks, r.p_ad, r.p_cvm)]
                for r in self.rows]
        widths = [max(len(COLUMNS[j]), *(len(b[j]) for b in body)) for j in range(len(COLUMNS))]
        fmt = lambda cells: "  ".join(c.rjust(w) if j else c.ljust(w)
                                      for j, (c, w) in enumerate(zip(cells, widths)))
        lines = [fmt(COLUMNS), fmt(["-" * w for w in widths])]
        lines += [fmt(b) for b in body]
        lines.append("* minimum AIC")
        return "\n".join(lines)


def compare(sample, fits: Sequence) -> ComparisonTable:
    """
    Assemble the model-comparison table for fits on one sample, sorted by AIC.

    ``fits`` are :class:`clrbte.estimators.FitReport` objects; fits of
    different samples are rejected.
    """
    if len(fits) < 2:
        raise ValueError("comparison needs at least two fitted models")
    ref = np.asarray(sample.values)
    for f in fits:
        if f.n != len(ref) or not np.array_equal(np.asarray(f.sample_values), ref):
            raise ValueError(f"fit of {f.distribution} was made on a different sample")
    rows = [
        ComparisonRow(f.label, f.aic, f.gof.ks, f.gof.ad, f.gof.cvm, f.gof.p_ks, f.gof.p_ad, f.gof.p_cvm)
        for f in fits
    ]
    rows.sort(key=lambda r: (r.aic, r.distribution))
    rows[0].best_aic = True
    return ComparisonTable(rows=rows, source=sample.source, n=len(ref))
