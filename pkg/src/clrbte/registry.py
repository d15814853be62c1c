"""Uniform evaluation interface over CLRBTE and the comparison models."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from . import competitors as comp
from . import distribution as dist
from .distribution import Params
from .optimizer import ParamTransform
from .sampling import RngStream, _as_generator, sample_composition
from .transmute import DomainError


@dataclass(frozen=True)
class ParamSpec:
    name: str
    lower: float
    upper: float
    transform: str


@dataclass(frozen=True)
class DistributionHandle:
    """
    Vector-parameter view of one model family. All callables take the
    parameter vector first: ``pdf(theta, x)``, ``quantile(theta, u)``,
    ``sampler(theta, n, rng)``.
    """

    name: str
    label: str
    param_space: Tuple[ParamSpec, ...]
    transform_kinds: Tuple[str, ...]
    pdf: Callable
    cdf: Callable
    sf: Callable
    log_pdf: Callable
    quantile: Callable
    sampler: Callable
    validate: Callable
    starts: Callable[[np.ndarray], List[np.ndarray]]

    @property
    def n_params(self) -> int:
        return len(self.param_space)

    @property
    def param_names(self) -> Tuple[str, ...]:
        return tuple(s.name for s in self.param_space)

    @property
    def transform(self) -> ParamTransform:
        return ParamTransform(self.transform_kinds)


def _inversion_sampler(quantile):
    def sampler(theta, n, rng):
        u = _as_generator(rng).random(int(n))
        return np.asarray(quantile(theta, u), dtype=float)

    return sampler


# -- CLRBTE ------------------------------------------------------------------

def _clrbte_params(theta) -> Params:
    return Params.from_vector(theta)


def _clrbte_starts(x):
    lam0 = 1.0 / float(np.mean(x))
    return [np.array([lam0, a, b]) for a, b in
            ((0.3, 0.3), (0.6, 0.2), (0.2, 0.6), (0.8, 0.1), (0.1, 0.1))]


CLRBTE = DistributionHandle(
    name="clrbte",
    label="CLRBTE",
    param_space=(
        ParamSpec("lambda", 0.0, np.inf, "log"),
        ParamSpec("p1", 0.0, 1.0, "simplex"),
        ParamSpec("p2", 0.0, 1.0, "simplex"),
    ),
    transform_kinds=("log", "simplex"),
    pdf=lambda th, x: dist.pdf(_clrbte_params(th), x),
    cdf=lambda th, x: dist.cdf(_clrbte_params(th), x),
    sf=lambda th, x: dist.survival(_clrbte_params(th), x),
    log_pdf=lambda th, x: dist.log_pdf(_clrbte_params(th), x),
    quantile=lambda th, u: dist.quantile(_clrbte_params(th), u),
    sampler=lambda th, n, rng: sample_composition(_clrbte_params(th), n, rng),
    validate=_clrbte_params,
    starts=_clrbte_starts,
)


# -- competitors -------------------------------------------------------------

def _e_quantile(th, u):
    return comp.e_quantile(th[0], u)


E = DistributionHandle(
    name="e",
    label="E",
    param_space=(ParamSpec("lambda", 0.0, np.inf, "log"),),
    transform_kinds=("log",),
    pdf=lambda th, x: comp.e_pdf(th[0], x),
    cdf=lambda th, x: comp.e_cdf(th[0], x),
    sf=lambda th, x: comp.e_sf(th[0], x),
    log_pdf=lambda th, x: comp.e_log_pdf(th[0], x),
    quantile=_e_quantile,
    sampler=_inversion_sampler(_e_quantile),
    validate=lambda th: comp.E(*th),
    starts=lambda x: [np.array([1.0 / float(np.mean(x))])],
)


def _te_quantile(th, u):
    return comp.te_quantile(th[0], th[1], u)


TE = DistributionHandle(
    name="te",
    label="TE",
    param_space=(
        ParamSpec("lambda", 0.0, np.inf, "log"),
        ParamSpec("theta", -1.0, 1.0, "signed_unit"),
    ),
    transform_kinds=("log", "signed_unit"),
    pdf=lambda th, x: comp.te_pdf(th[0], th[1], x),
    cdf=lambda th, x: comp.te_cdf(th[0], th[1], x),
    sf=lambda th, x: comp.te_sf(th[0], th[1], x),
    log_pdf=lambda th, x: comp.te_log_pdf(th[0], th[1], x),
    quantile=_te_quantile,
    sampler=_inversion_sampler(_te_quantile),
    validate=lambda th: comp.TE(*th),
    starts=lambda x: [np.array([1.0 / float(np.mean(x)), t]) for t in (-0.5, 0.0, 0.5)],
)


def _tgr_quantile(th, u):
    return comp.tgr_quantile(th[0], th[1], th[2], u)


def _tgr_starts(x):
    # Rayleigh mean is 0.886/beta; shape values bracket the decreasing and unimodal regimes
    m = float(np.mean(x))
    out = []
    for lam in (0.3, 1.0):
        for bscale in (0.3, 0.886):
            for t in (-0.5, 0.0, 0.5):
                out.append(np.array([lam, bscale / m, t]))
    return out


TGR = DistributionHandle(
    name="tgr",
    label="TGR",
    param_space=(
        ParamSpec("lambda", 0.0, np.inf, "log"),
        ParamSpec("beta", 0.0, np.inf, "log"),
        ParamSpec("theta", -1.0, 1.0, "signed_unit"),
    ),
    transform_kinds=("log", "log", "signed_unit"),
    pdf=lambda th, x: comp.tgr_pdf(th[0], th[1], th[2], x),
    cdf=lambda th, x: comp.tgr_cdf(th[0], th[1], th[2], x),
    sf=lambda th, x: comp.tgr_sf(th[0], th[1], th[2], x),
    log_pdf=lambda th, x: comp.tgr_log_pdf(th[0], th[1], th[2], x),
    quantile=_tgr_quantile,
    sampler=_inversion_sampler(_tgr_quantile),
    validate=lambda th: comp.TGR(*th),
    starts=_tgr_starts,
)


DISTRIBUTIONS: Dict[str, DistributionHandle] = {h.name: h for h in (CLRBTE, E, TE, TGR)}


def get_distribution(name: str) -> DistributionHandle:
    try:
        return DISTRIBUTIONS[name.lower()]
    except KeyError:
        raise DomainError(
            f"unknown distribution {name!r}; choose from {', '.join(DISTRIBUTIONS)}"
        ) from None
