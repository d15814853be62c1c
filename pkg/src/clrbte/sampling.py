"""
Random variate generation for CLRBTE.

``sample_composition`` is exact: a lower record value ``X_L(k)`` satisfies
``G(X_L(k)) ~ U_1 U_2 ... U_k`` for independent standard uniforms, so a draw
is "pick a record index, multiply that many uniforms, invert the exponential
CDF". ``sample_ar`` is the acceptance-rejection scheme with a Weibull
proposal, kept for fidelity and as a cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from . import distribution as dist
from .distribution import Params


class EnvelopeError(RuntimeError):
    """The acceptance-rejection envelope constant is too small or unbounded."""


@dataclass(frozen=True)
class RngStream:
    """
    A reproducible random stream identified by ``(seed, stream_id)``.

    Streams are derived with numpy's ``SeedSequence`` spawn keys, so distinct
    ``stream_id`` values give statistically independent PCG64 generators and
    can be consumed on different workers in any order.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if not (0 <= int(v) < 2**64):
                raise ValueError(f"{name} must be a 64-bit unsigned integer, got {v!r}")

    def generator(self, *subkeys: int) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id), *map(int, subkeys)))
        return np.random.Generator(np.random.PCG64(ss))

    def substream(self, stream_id: int) -> "RngStream":
        return RngStream(self.seed, stream_id)


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return RngStream(int(rng)).generator()


def sample_composition(p: Params, n: int, rng) -> np.ndarray:
    """
    Exact CLRBTE draws.

    Each variate consumes one row of four uniforms: column 0 picks the record
    index J (1, 2 or 3 with probabilities p1, p2, 1-p1-p2), columns 1..J are
    multiplied to form ``V = G(X)``, and ``X = -ln(1 - V) / lambda``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not p.strict:
        raise ValueError("composition sampling needs simplex weights")
    u = _as_generator(rng).random((int(n), 4))
    j = np.where(u[:, 0] < p.p1, 1, np.where(u[:, 0] < p.p1 + p.p2, 2, 3))
    v = u[:, 1].copy()
    v = np.where(j >= 2, v * u[:, 2], v)
    v = np.where(j >= 3, v * u[:, 3], v)
    return -np.log1p(-v) / p.lam


@dataclass(frozen=True)
class ArProposal:
    """Weibull proposal ``g(x) = gamma nu x^(nu-1) exp(-gamma x^nu)`` with envelope ``k``."""

    gamma: float
    nu: float
    envelope_k: float

    def __post_init__(self):
        if not (self.gamma > 0 and self.nu > 0):
            raise ValueError("gamma and nu must be positive")
        if not (np.isfinite(self.envelope_k) and self.envelope_k >= 1.0):
            raise ValueError(f"envelope_k must be finite and >= 1, got {self.envelope_k!r}")

    def log_pdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return np.log(self.gamma * self.nu) + (self.nu - 1.0) * np.log(x) - self.gamma * x**self.nu

    def draw(self, gen: np.random.Generator, size: int) -> np.ndarray:
        e = -np.log1p(-gen.random(size))
        return (e / self.gamma) ** (1.0 / self.nu)


def envelope_log_ratio(p: Params, gamma: float, nu: float, x) -> np.ndarray:
    """``ln f(x) - ln g(x)`` for the CLRBTE target and a Weibull(gamma, nu) proposal."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        log_g = np.log(gamma * nu) + (nu - 1.0) * np.log(x) - gamma * x**nu
    return dist.log_pdf(p, x) - log_g


@dataclass
class ArDraws:
    values: np.ndarray
    n_proposed: int
    envelope_violations: int = 0

    @property
    def acceptance_rate(self) -> float:
        return len(self.values) / self.n_proposed if self.n_proposed else float("nan")


def sample_ar(p: Params, proposal: ArProposal, n: int, rng, batch: int = 4096) -> ArDraws:
    """
    Acceptance-rejection: draw Y from the proposal and U uniform, accept Y when
    ``U < f(Y) / (k g(Y))``.

    Aborts with EnvelopeError if, after at least 1000 proposals, the running
    acceptance rate is below ``1 / (10 k)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    gen = _as_generator(rng)
    log_k = np.log(proposal.envelope_k)
    accepted = []
    n_acc = 0
    n_prop = 0
    violations = 0
    floor = 1.0 / (10.0 * proposal.envelope_k)
    while n_acc < n:
        y = proposal.draw(gen, batch)
        u = gen.random(batch)
        log_ratio = dist.log_pdf(p, y) - proposal.log_pdf(y) - log_k
        violations += int(np.count_nonzero(log_ratio > 0))
        with np.errstate(divide="ignore"):
            take = np.log(u) < log_ratio
        # accept in proposal order so the output is a prefix-stable sequence
        idx = np.flatnonzero(take)
        need = n - n_acc
        if len(idx) >= need:
            last = idx[need - 1]
            n_prop += int(last) + 1
            accepted.append(y[idx[:need]])
            n_acc = n
            break
        n_prop += batch
        accepted.append(y[idx])
        n_acc += len(idx)
        if n_prop >= 1000 and n_acc / n_prop < floor:
            raise EnvelopeError(
                f"acceptance rate {n_acc / n_prop:.3g} after {n_prop} proposals is below "
                f"1/(10k) = {floor:.3g}; envelope_k={proposal.envelope_k:g} looks wrong"
            )
    return ArDraws(np.concatenate(accepted), n_prop, violations)


def tune_envelope(p: Params, nu: float | None = None, safety: float = 1.05) -> ArProposal:
    """
    Pick a Weibull proposal and its envelope constant.

    For the exponential special case the proposal is the target itself
    (``nu = 1, gamma = lambda``). Otherwise ``nu`` defaults to 0.8, which
    dominates the ``(ln x)**2`` blow-up of the target at 0, and ``gamma`` is
    the value minimizing the envelope constant. ``k`` is the maximum of
    ``ln f - ln g`` over a log grid on ``[1e-8, 50] / lambda`` refined by a
    bounded scalar search, times ``safety``.
    """
    exponential = p.p1 == 1.0 and p.p2 == 0.0
    if nu is None:
        nu = 1.0 if exponential else 0.8
    lo, hi = 1e-8 / p.lam, 50.0 / p.lam
    grid = np.geomspace(lo, hi, 2000)
    if exponential and nu == 1.0:
        gamma = p.lam
    else:
        # k(gamma) is the grid maximum of the log ratio; search log(gamma) around lambda^nu
        c = nu * np.log(p.lam)
        res = minimize_scalar(
            lambda s: float(np.max(envelope_log_ratio(p, np.exp(s), nu, grid))),
            bounds=(c - 6.0, c + 6.0),
            method="bounded",
            options={"xatol": 1e-6},
        )
        gamma = float(np.exp(res.x))
    lr = envelope_log_ratio(p, gamma, nu, grid)
    if not np.all(np.isfinite(lr)):
        raise EnvelopeError("target/proposal ratio is not finite on the search grid")
    i = int(np.argmax(lr))
    if i == 0 and lr[0] > lr[1] + 1e-12:
        raise EnvelopeError(
            f"target/proposal ratio grows toward x -> 0 for nu={nu:g}; the envelope is unbounded"
        )
    if i == len(grid) - 1 and lr[-1] > lr[-2] + 1e-12:
        raise EnvelopeError(
            f"target/proposal ratio grows toward the upper grid edge for nu={nu:g}"
        )
    best = lr[i]
    a = np.log(grid[max(i - 1, 0)])
    b = np.log(grid[min(i + 1, len(grid) - 1)])
    if b > a:
        res = minimize_scalar(
            lambda s: -float(envelope_log_ratio(p, gamma, nu, np.exp(s))),
            bounds=(a, b),
            method="bounded",
            options={"xatol": 1e-10},
        )
        best = max(best, -res.fun)
    return ArProposal(gamma=float(gamma), nu=float(nu), envelope_k=float(np.exp(best) * safety))
