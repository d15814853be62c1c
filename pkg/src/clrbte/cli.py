"""
Command-line interface: ``clrbte {describe,sample,fit,compare,simulate,plotdata}``.

JSON results are wrapped in an envelope (tool version, command line, seed,
timestamp, payload). Floats are printed with 17 significant digits so a
payload parses back to the identical values.

Exit codes: 0 success, 2 input or domain error, 3 sampler envelope failure,
4 optimizer non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import math
import os
import shlex
import sys
from typing import List, Optional, Sequence

import numpy as np

from . import __version__
from .datasets import DataFileError, Sample, read_sample
from .distribution import Params
from .estimators import EstimatorId, bootstrap_pvalues, fit
from .gof import compare
from .properties import IntegrationError, describe
from .registry import DISTRIBUTIONS, get_distribution
from .sampling import EnvelopeError, RngStream, sample_ar, sample_composition, tune_envelope
from .simulation import FULL_REPLICATIONS, ConfigError, read_config, run_scenario
from .transmute import DomainError

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_ENVELOPE = 3
EXIT_NONCONVERGED = 4

PLOT_POINTS = 400


class UsageError(Exception):
    pass


# -- JSON --------------------------------------------------------------------

def _fmt_float(v: float) -> str:
    if math.isnan(v):
        return "NaN"
    if math.isinf(v):
        return "Infinity" if v > 0 else "-Infinity"
    s = format(v, ".17g")
    if not any(c in s for c in ".eE"):
        s += ".0"
    return s


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = (_dt.datetime.fromtimestamp(int(epoch), _dt.timezone.utc) if epoch
         else _dt.datetime.now(_dt.timezone.utc))
    return t.replace(microsecond=0).isoformat()


def envelope(command: str, payload, seed: Optional[int] = None) -> dict:
    return {
        "tool_version": __version__,
        "command": command,
        "seed": seed,
        "timestamp": _timestamp(),
        "payload": payload,
    }


# -- helpers -----------------------------------------------------------------

def _params(args, relaxed=False) -> Params:
    if relaxed:
        return Params.relaxed(args.lam, args.p1, args.p2)
    return Params(args.lam, args.p1, args.p2)


def _add_params(p: argparse.ArgumentParser, required=True):
    p.add_argument("--lambda", dest="lam", type=float, required=required, help="rate parameter, > 0")
    p.add_argument("--p1", type=float, required=required)
    p.add_argument("--p2", type=float, required=required)


def _float_list(text: str) -> List[float]:
    try:
        return [float(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}") from None


# -- subcommands -------------------------------------------------------------

def cmd_describe(args, out) -> int:
    p = _params(args, relaxed=args.relaxed)
    rep = describe(p)
    payload = {"params": {"lambda": p.lam, "p1": p.p1, "p2": p.p2}, "relaxed": bool(args.relaxed)}
    payload.update(rep.to_dict())
    out.write(dumps(envelope(args.cmdline, payload)) + "\n")
    return EXIT_OK


def cmd_sample(args, out) -> int:
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    p = _params(args)
    gen = RngStream(args.seed, args.stream).generator()
    if args.method == "composition":
        x = sample_composition(p, args.n, gen)
    else:
        proposal = tune_envelope(p, nu=args.nu)
        draws = sample_ar(p, proposal, args.n, gen)
        x = draws.values
        if args.diagnostics:
            sys.stderr.write(
                f"envelope k={proposal.envelope_k:.6g} gamma={proposal.gamma:.6g} nu={proposal.nu:g} "
                f"acceptance={draws.acceptance_rate:.4f} violations={draws.envelope_violations}\n"
            )
    out.write("".join(repr(float(v)) + "\n" for v in x))
    return EXIT_OK


def cmd_fit(args, out) -> int:
    s = read_sample(args.data)
    h = get_distribution(args.dist)
    est = EstimatorId.parse(args.estimator)
    rep = fit(h, est, s)
    payload = rep.to_dict()
    if args.bootstrap_p:
        boot = bootstrap_pvalues(h, est, s, rep, args.bootstrap_p, seed=args.seed)
        payload["gof"]["bootstrap"] = boot
    out.write(dumps(envelope(args.cmdline, payload, args.seed if args.bootstrap_p else None)) + "\n")
    if not rep.converged:
        sys.stderr.write(f"warning: optimizer did not converge ({rep.opt.message or 'see diagnostics'})\n")
        return EXIT_NONCONVERGED
    return EXIT_OK


def cmd_compare(args, out) -> int:
    names = [t for t in args.dists.replace(",", " ").split() if t]
    if len(names) < 2:
        raise UsageError("--dists needs at least two models")
    handles = [get_distribution(n) for n in names]
    if len({h.name for h in handles}) != len(handles):
        raise UsageError("--dists lists a model twice")
    s = read_sample(args.data)
    fits = [fit(h, EstimatorId.MLE, s) for h in handles]
    table = compare(s, fits)
    if args.format in ("text", "both"):
        out.write(table.to_text() + "\n")
    if args.format in ("json", "both"):
        payload = table.to_dict()
        payload["fits"] = [f.to_dict() for f in fits]
        out.write(dumps(envelope(args.cmdline, payload)) + "\n")
    if not all(f.converged for f in fits):
        bad = ", ".join(f.label for f in fits if not f.converged)
        sys.stderr.write(f"warning: optimizer did not converge for {bad}\n")
        return EXIT_NONCONVERGED
    return EXIT_OK


def cmd_simulate(args, out) -> int:
    sc = read_config(args.config)
    reps = args.reps if args.reps is not None else sc.replications
    if args.full:
        reps = FULL_REPLICATIONS
        sys.stderr.write(f"warning: {reps} replications per cell; expect hours of wall time\n")
    sc = sc.with_replications(reps)
    rep = run_scenario(sc, parallelism=args.parallel)
    text = rep.to_csv() if args.format == "csv" else rep.to_text() + "\n"
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        out.write(text)
    return EXIT_OK


def plot_grid(s: Sample, points: int = PLOT_POINTS) -> np.ndarray:
    return np.linspace(0.0, 1.05 * float(s.values[-1]), points)


def cmd_plotdata(args, out) -> int:
    s = read_sample(args.data)
    h = get_distribution(args.dist)
    if args.params:
        theta = np.array(_float_list(args.params))
        if len(theta) != h.n_params:
            raise UsageError(f"{h.label} takes {h.n_params} parameters ({', '.join(h.param_names)})")
        h.validate(theta)
    else:
        r = fit(h, EstimatorId.parse(args.estimator), s, with_se=False)
        theta = r.estimates
    x = plot_grid(s)
    ecdf = np.searchsorted(s.values, x, side="right") / s.n
    F = h.cdf(theta, x)
    f = h.pdf(theta, x)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("x", "empirical_cdf", "fitted_cdf", "fitted_pdf"))
    for row in zip(x, ecdf, F, f):
        w.writerow([_fmt_float(float(v)) for v in row])
    out.write(buf.getvalue())
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="clrbte", description="CLRBTE lifetime distribution toolkit")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("describe", help="moments and shape statistics")
    _add_params(p)
    p.add_argument("--relaxed", action="store_true",
                   help="allow p1 + p2 > 1 (outside the valid family; for tabulated comparisons)")
    p.set_defaults(func=cmd_describe)

    p = sub.add_parser("sample", help="draw random variates, one per line")
    _add_params(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--method", choices=("composition", "ar"), default="composition")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stream", type=int, default=0, help="independent stream index under --seed")
    p.add_argument("--nu", type=float, default=None, help="Weibull proposal shape for --method ar")
    p.add_argument("--diagnostics", action="store_true", help="print AR envelope diagnostics to stderr")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("fit", help="fit one model to a data file")
    p.add_argument("--data", required=True)
    p.add_argument("--dist", default="clrbte", choices=sorted(DISTRIBUTIONS))
    p.add_argument("--estimator", default="mle", help="one of " + ", ".join(e.value for e in EstimatorId))
    p.add_argument("--bootstrap-p", type=int, default=0, metavar="B",
                   help="add parametric-bootstrap GoF p-values from B replicates")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("compare", help="MLE fits of several models and their GoF table")
    p.add_argument("--data", required=True)
    p.add_argument("--dists", default="clrbte,te,e,tgr")
    p.add_argument("--format", choices=("text", "json", "both"), default="both")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("simulate", help="Monte-Carlo study from a scenario file")
    p.add_argument("--config", required=True)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--full", action="store_true", help=f"use {FULL_REPLICATIONS} replications")
    p.add_argument("--parallel", type=int, default=1)
    p.add_argument("--format", choices=("csv", "text"), default="csv")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("plotdata", help="empirical and fitted CDF/PDF on a grid, as CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--dist", default="clrbte", choices=sorted(DISTRIBUTIONS))
    p.add_argument("--params", default=None, help="comma-separated parameters; fitted when omitted")
    p.add_argument("--estimator", default="mle")
    p.set_defaults(func=cmd_plotdata)
    return ap


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    out = sys.stdout if out is None else out
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    args.cmdline = "clrbte " + shlex.join(argv)
    try:
        return args.func(args, out)
    except EnvelopeError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ENVELOPE
    except (DomainError, DataFileError, ConfigError, UsageError, ValueError, IntegrationError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
