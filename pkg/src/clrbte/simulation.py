"""
Monte-Carlo study of the CLRBTE estimators: bias, MSE and MRE per
(estimator, n, parameter) with Monte-Carlo standard errors.

Replication ``r`` draws its size-``n`` sample from stream ``r`` of the
scenario seed (substream keyed by ``n``), so every cell is reproducible in
isolation. Workers return raw estimates; the reduction runs in replication
order in the parent, so the report does not depend on the worker count.
"""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .datasets import Sample
from .distribution import Params
from .estimators import ALL_ESTIMATORS, EstimatorId, fit
from .registry import CLRBTE
from .sampling import RngStream, sample_composition

PARAM_NAMES = ("lambda", "p1", "p2")
CSV_COLUMNS = ("estimator", "n", "parameter", "bias", "mse", "mre", "mc_se_bias",
               "convergence_rate", "mc_se_mse", "n_converged", "degenerate")
DEGENERATE_RATE = 0.5
FULL_REPLICATIONS = 5000


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimScenario:
    truth: Params
    sizes: Tuple[int, ...]
    estimators: Tuple[EstimatorId, ...] = ALL_ESTIMATORS
    replications: int = 500
    base_seed: int = 20240101
    name: str = ""

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.sizes)
        if not sizes:
            raise ConfigError("sizes must be non-empty")
        if list(sizes) != sorted(set(sizes)):
            raise ConfigError(f"sizes must be strictly ascending, got {list(sizes)}")
        if sizes[0] < 5:
            raise ConfigError("every sample size must be at least 5")
        if int(self.replications) < 1:
            raise ConfigError("replications must be >= 1")
        if not self.estimators:
            raise ConfigError("at least one estimator is required")
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "replications", int(self.replications))
        object.__setattr__(self, "estimators", tuple(EstimatorId(e) for e in self.estimators))

    def with_replications(self, reps: int) -> "SimScenario":
        return SimScenario(self.truth, self.sizes, self.estimators, reps, self.base_seed, self.name)


def _floats(text: str) -> List[float]:
    return [float(t) for t in text.replace(",", " ").split()]


def parse_config(text: str, origin: str = "<config>") -> SimScenario:
    """
    ``key = value`` lines with ``#`` comments. Keys: ``truth`` (lambda, p1, p2),
    ``sizes``, ``estimators`` (``all`` or a list), ``reps``, ``seed``, ``name``.
    """
    kv: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected 'key = value', got {line!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        k = k.lower()
        if k not in ("truth", "sizes", "estimators", "reps", "seed", "name"):
            raise ConfigError(f"{origin}:{lineno}: unknown key {k!r}")
        kv[k] = v
    if "truth" not in kv or "sizes" not in kv:
        raise ConfigError(f"{origin}: 'truth' and 'sizes' are required")
    try:
        truth = _floats(kv["truth"])
        if len(truth) != 3:
            raise ConfigError(f"{origin}: truth needs three values (lambda, p1, p2)")
        sizes = tuple(int(v) for v in _floats(kv["sizes"]))
        est_text = kv.get("estimators", "all").strip()
        if est_text.lower() == "all":
            ests = ALL_ESTIMATORS
        else:
            ests = tuple(EstimatorId.parse(t) for t in est_text.replace(",", " ").split())
        return SimScenario(
            truth=Params(*truth),
            sizes=sizes,
            estimators=ests,
            replications=int(kv.get("reps", 500)),
            base_seed=int(kv.get("seed", 20240101)),
            name=kv.get("name", ""),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{origin}: {exc}") from exc


def read_config(path: Union[str, Path]) -> SimScenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from exc
    return parse_config(text, str(path))


# -- replication worker ------------------------------------------------------

def default_fitter(est: EstimatorId, s: Sample, truth: np.ndarray):
    """Single optimizer start at the true parameters."""
    r = fit(CLRBTE, est, s, starts=[truth], with_se=False)
    return r.estimates, r.converged


def simulate_sample(sc: SimScenario, rep: int, n: int) -> np.ndarray:
    return sample_composition(sc.truth, n, RngStream(sc.base_seed, rep).generator(n))


def _run_reps(args):
    sc, reps, fitter = args
    truth = sc.truth.as_vector()
    k = len(sc.estimators)
    out = np.full((len(reps), len(sc.sizes), k, 3), np.nan)
    ok = np.zeros((len(reps), len(sc.sizes), k), dtype=bool)
    for a, r in enumerate(reps):
        for b, n in enumerate(sc.sizes):
            s = Sample(simulate_sample(sc, r, n), f"rep{r}")
            for c, est in enumerate(sc.estimators):
                try:
                    theta, conv = fitter(est, s, truth)
                except (ValueError, ArithmeticError):
                    continue
                theta = np.asarray(theta, dtype=float)
                if conv and np.all(np.isfinite(theta)):
                    out[a, b, c] = theta
                    ok[a, b, c] = True
    return out, ok


# -- reduction ---------------------------------------------------------------

@dataclass
class SimCell:
    estimator: str
    n: int
    parameter: str
    bias: float
    mse: float
    mre: float
    mc_se_bias: float
    mc_se_mse: float
    convergence_rate: float
    n_converged: int
    degenerate: bool


@dataclass
class SimReport:
    scenario: SimScenario
    cells: List[SimCell]
    wall_time: float = float("nan")

    def cell(self, estimator, n: int, parameter: str) -> SimCell:
        name = estimator.value if isinstance(estimator, EstimatorId) else EstimatorId.parse(estimator).value
        for c in self.cells:
            if c.estimator == name and c.n == n and c.parameter == parameter:
                return c
        raise KeyError((name, n, parameter))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for c in self.cells:
            w.writerow([c.estimator, c.n, c.parameter, _g(c.bias), _g(c.mse), _g(c.mre),
                        _g(c.mc_se_bias), _g(c.convergence_rate), _g(c.mc_se_mse),
                        c.n_converged, int(c.degenerate)])
        return buf.getvalue()

    def to_text(self) -> str:
        """One block per estimator: rows are sizes, column groups are Bias, MSE, MRE."""
        t = self.scenario.truth
        head = (f"lambda={t.lam:g}, p1={t.p1:g}, p2={t.p2:g}; "
                f"{self.scenario.replications} replications")
        sub = ["Bias"] * 3 + ["MSE"] * 3 + ["MRE"] * 3
        lines = [head, f"{'Est':<7}{'n':>6}" + "".join(f"{s:>10}" for s in sub),
                 f"{'':<7}{'':>6}" + "".join(f"{p:>10}" for p in PARAM_NAMES * 3)]
        for est in self.scenario.estimators:
            for n in self.scenario.sizes:
                cs = [self.cell(est, n, p) for p in PARAM_NAMES]
                vals = [c.bias for c in cs] + [c.mse for c in cs] + [c.mre for c in cs]
                flag = " !" if any(c.degenerate for c in cs) else ""
                lines.append(f"{est.table_name:<7}{n:>6}" + "".join(f"{v:>10.4f}" for v in vals) + flag)
        if any(c.degenerate for c in self.cells):
            lines.append("! degenerate cell: convergence rate below 0.5 or fewer than 2 converged fits")
        return "\n".join(lines)


def _g(v: float) -> str:
    return repr(float(v)) if math.isfinite(v) else "nan"


def _reduce(sc: SimScenario, est_arr: np.ndarray, ok: np.ndarray) -> List[SimCell]:
    truth = sc.truth.as_vector()
    R = sc.replications
    cells = []
    for c, est in enumerate(sc.estimators):
        for b, n in enumerate(sc.sizes):
            mask = ok[:, b, c]
            m = int(mask.sum())
            rate = m / R
            degenerate = rate < DEGENERATE_RATE or m < 2
            for j, name in enumerate(PARAM_NAMES):
                d = est_arr[mask, b, c, j] - truth[j]
                if m == 0:
                    bias = mse = mre = se_b = se_m = float("nan")
                else:
                    bias = float(np.mean(d))
                    sq = d * d
                    mse = float(np.mean(sq))
                    mre = float(np.mean(np.abs(d)) / truth[j])
                    se_b = float(np.std(d, ddof=1) / math.sqrt(m)) if m > 1 else float("nan")
                    se_m = float(np.std(sq, ddof=1) / math.sqrt(m)) if m > 1 else float("nan")
                cells.append(SimCell(est.value, n, name, bias, mse, mre, se_b, se_m, rate, m, degenerate))
    return cells


def run_scenario(sc: SimScenario, parallelism: int = 1,
                 fitter: Callable = default_fitter) -> SimReport:
    """
    Run every replication of ``sc``. ``fitter(est, sample, truth) ->
    (theta, converged)`` must be a module-level function when
    ``parallelism > 1``. Non-converged fits are excluded from the moments and
    counted in ``convergence_rate``.
    """
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    t0 = time.perf_counter()
    reps = list(range(sc.replications))
    if parallelism == 1:
        est_arr, ok = _run_reps((sc, reps, fitter))
    else:
        chunks = [reps[i::parallelism] for i in range(parallelism) if reps[i::parallelism]]
        est_arr = np.full((sc.replications, len(sc.sizes), len(sc.estimators), 3), np.nan)
        ok = np.zeros((sc.replications, len(sc.sizes), len(sc.estimators)), dtype=bool)
        with ProcessPoolExecutor(max_workers=parallelism) as ex:
            for chunk, (e, o) in zip(chunks, ex.map(_run_reps, [(sc, ch, fitter) for ch in chunks])):
                est_arr[chunk] = e
                ok[chunk] = o
    cells = _reduce(sc, est_arr, ok)
    return SimReport(sc, cells, wall_time=time.perf_counter() - t0)


def rank_estimators(rep: SimReport) -> Dict[Tuple[int, str], List[str]]:
    """Estimators ordered by MSE within each (n, parameter); ties broken by |bias| then name."""
    if len(rep.scenario.estimators) < 2:
        raise ValueError("ranking needs at least two estimators")
    groups: Dict[Tuple[int, str], List[SimCell]] = {}
    for c in rep.cells:
        groups.setdefault((c.n, c.parameter), []).append(c)

    def key(c):
        mse = c.mse if math.isfinite(c.mse) else math.inf
        ab = abs(c.bias) if math.isfinite(c.bias) else math.inf
        return (mse, ab, c.estimator)

    return {k: [c.estimator for c in sorted(v, key=key)]
            for k, v in sorted(groups.items())}
