"""Command-line front end.

Subcommands: ``predict``, ``simulate``, ``sweep``, ``exact``, ``gumbel``.  Data
goes to standard output (or ``--output``); diagnostics go to standard error.
Exit status is 0 on success, 2 for usage and validation errors, 1 for
capacity and safety-valve errors.  Output formats are described in
``docs/output_formats.md``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from contextlib import contextmanager
from fractions import Fraction

import numpy as np

from . import analytic, exact, stats
from .errors import CapacityError, SafetyValveError, ValidationError
from .process import Model, ModelParams, StopRule, default_threads, replicate

SCHEMA_VERSION = 1

PREDICT_HEADER = ["kind", "n", "r", "s", "alpha", "value", "conjecture", "note"]
SIMULATE_HEADER = ["model", "rule", "alpha", "n", "r", "s", "reps", "seed", "mean",
                   "stderr", "min", "max", "prediction", "ratio", "norm_id"]
RAW_HEADER = ["replication", "seed", "rounds"]
SWEEP_HEADER = ["grid", "param", "reps", "mean", "stderr", "prediction", "ratio", "norm_id"]
EXACT_HEADER = ["quantity", "index", "exact", "decimal"]
GUMBEL_HEADER = ["n", "r", "s", "reps", "seed", "ks", "mean_normalized", "warning"]
QUANTILE_HEADER = ["p", "empirical_q", "gumbel_q"]
HIST_HEADER = ["left", "right", "count", "density", "gumbel_density"]


class UsageError(Exception):
    pass


# -- shared helpers -----------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(row.get(col)) for col in header])
    return buf.getvalue()


def _json_text(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


@contextmanager
def _sink(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _emit(config, command, header, rows, extra=None):
    if config.format == "json":
        doc = {"schema_version": SCHEMA_VERSION, "command": command, "records": rows}
        if extra:
            doc.update(extra)
        text = _json_text(doc)
    else:
        text = _csv_text(header, rows)
    with _sink(config.output) as fh:
        fh.write(text)


def _params(config) -> ModelParams:
    return ModelParams(config.n, config.r, config.s)


def _rule(config) -> StopRule:
    rule = config.rule or ("fraction" if config.alpha is not None else "all")
    if rule == "fraction":
        if config.alpha is None:
            raise UsageError("--rule fraction needs --alpha")
        return StopRule.fraction(config.alpha)
    if config.alpha is not None:
        raise UsageError("--alpha only applies to --rule fraction")
    return StopRule.all()


def _prediction(params: ModelParams, rule: StopRule, model: Model, norm: str = "prediction"):
    """``(value, norm_id)`` used to normalise a simulated mean, or ``(None, "none")``."""
    n, r, s = params.n, params.r, params.s
    if norm == "figure":
        if model is Model.RW:
            if rule.alpha is not None or s != 2:
                return None, "none"
            return analytic.fig_scale_T_rw(n, r), "fig_T_rw"
        if rule.alpha is None:
            return analytic.fig_scale_T(n, r, s), "fig_T"
        return analytic.fig_scale_T_alpha(n, r, s, rule.alpha), "fig_T_alpha"
    if model is Model.RW:
        if rule.alpha is not None:
            return None, "none"
        return analytic.predicted_T_rw(n, r, s).value, "T_rw"
    if rule.alpha is None:
        return analytic.predicted_T(n, r, s).value, "T"
    return analytic.predicted_T_alpha(n, r, s, rule.alpha).value, "T_alpha"


def _ratio(mean: float, prediction):
    if prediction is None or prediction == 0:
        return None
    return mean / prediction


# -- commands -----------------------------------------------------------------

def cmd_predict(config) -> list[dict]:
    params = _params(config)
    n, r, s = params.n, params.r, params.s
    preds = [analytic.predicted_T(n, r, s)]
    if config.alpha is not None:
        preds.append(analytic.predicted_T_alpha(n, r, s, config.alpha))
    if r < n:
        preds.append(analytic.predicted_T_rw(n, r, s))
    return [
        {"kind": p.kind, "n": n, "r": r, "s": s, "alpha": p.alpha, "value": p.value,
         "conjecture": p.conjecture, "note": p.note}
        for p in preds
    ]


def cmd_simulate(config) -> tuple[dict, np.ndarray]:
    params = _params(config)
    rule = _rule(config)
    model = Model(config.model)
    rounds = replicate(params, rule, model, config.reps, config.seed, config.threads)
    summary = stats.summarize(rounds)
    prediction, norm_id = _prediction(params, rule, model)
    record = {
        "model": model.value, "rule": rule.kind, "alpha": rule.alpha,
        "n": params.n, "r": params.r, "s": params.s, "reps": summary.reps,
        "seed": config.seed, "mean": summary.mean, "stderr": summary.stderr,
        "min": summary.min, "max": summary.max, "prediction": prediction,
        "ratio": _ratio(summary.mean, prediction), "norm_id": norm_id,
    }
    return record, rounds


def cmd_sweep(config) -> list[dict]:
    if not config.values:
        raise UsageError("sweep needs a nonempty --values grid")
    rule = _rule(config)
    model = Model(config.model)
    rows = []
    for value in config.values:
        fixed = {"n": config.n, "r": config.r, "s": config.s}
        fixed[config.vary] = value
        if any(v is None for v in fixed.values()):
            missing = [k for k, v in fixed.items() if v is None]
            raise UsageError(f"sweep needs --{' --'.join(missing)}")
        params = ModelParams(**fixed)
        rounds = replicate(params, rule, model, config.reps, config.seed, config.threads)
        summary = stats.summarize(rounds)
        prediction, norm_id = _prediction(params, rule, model, config.norm)
        rows.append({
            "grid": value, "param": config.vary, "reps": summary.reps,
            "mean": summary.mean, "stderr": summary.stderr, "prediction": prediction,
            "ratio": _ratio(summary.mean, prediction), "norm_id": norm_id,
        })
    return rows


def _exact_row(quantity, index, value):
    if value is None:
        return {"quantity": quantity, "index": index, "exact": None, "decimal": None}
    if isinstance(value, Fraction):
        return {"quantity": quantity, "index": index, "exact": str(value),
                "decimal": float(value)}
    return {"quantity": quantity, "index": index, "exact": None, "decimal": float(value)}


def cmd_exact(config) -> list[dict]:
    rows = []
    if config.hitting or config.cover:
        profile = exact.hitting_profile(config.n, config.r)
        if config.hitting:
            rows += [_exact_row("h", k, v) for k, v in enumerate(profile.h)]
            rows += [_exact_row("x", k + 1, v)
                     for k, v in enumerate(exact.x_profile(config.n, config.r))]
        if config.cover:
            bounds = exact.matthews_bounds(config.n, config.r)
            rows += [_exact_row("matthews_lower", None, bounds.lower),
                     _exact_row("matthews_upper", None, bounds.upper),
                     _exact_row("harmonic", None, bounds.harmonic),
                     _exact_row("T_rw_rr", None, exact.exact_T_rw_rs(config.n, config.r))]
    else:
        if config.s is None:
            raise UsageError("exact expected T needs --s")
        rows.append(_exact_row("expected_T", None,
                               exact.exact_expected_T(config.n, config.r, config.s)))
    return rows


def cmd_gumbel(config) -> dict:
    params = _params(config)
    rounds = replicate(params, StopRule.all(), Model.IID, config.reps, config.seed,
                       config.threads)
    x = analytic.normalize_T(rounds, params.n, params.r, params.s)
    summary = stats.summarize(x)
    ks = stats.ks_distance(x, analytic.gumbel_cdf)
    hist = stats.histogram(x, config.bins)
    p, emp_q, gum_q = stats.quantile_pairs(x, analytic.gumbel_ppf)
    warning = "degenerate sample: a single replication" if summary.low_reps else None
    return {
        "summary": {"n": params.n, "r": params.r, "s": params.s, "reps": summary.reps,
                    "seed": config.seed, "ks": ks, "mean_normalized": summary.mean,
                    "warning": warning},
        "quantiles": [{"p": a, "empirical_q": b, "gumbel_q": c}
                      for a, b, c in zip(p.tolist(), emp_q.tolist(), gum_q.tolist())],
        "histogram": [{"left": lo, "right": hi, "count": int(c), "density": d,
                       "gumbel_density": float(analytic.gumbel_pdf(0.5 * (lo + hi)))}
                      for lo, hi, c, d in zip(hist.edges[:-1].tolist(),
                                              hist.edges[1:].tolist(),
                                              hist.counts.tolist(), hist.density.tolist())],
    }


# -- argument parsing ---------------------------------------------------------

def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2**64)")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="supercoupon",
        description="Super-coupon collector: predictions, simulation and exact oracles.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, sim=True):
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--output", "-o", default=None, help="write data here instead of stdout")
        if sim:
            p.add_argument("--reps", type=_positive, default=200)
            p.add_argument("--seed", type=_seed, default=0, help="64-bit master seed")
            p.add_argument("--threads", type=_positive, default=None,
                           help="worker threads (default: $SUPERCOUPON_THREADS or 1)")

    p = sub.add_parser("predict", help="first-order stopping-time predictions")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--alpha", type=float)
    common(p, sim=False)

    p = sub.add_parser("simulate", help="Monte Carlo stopping times for one configuration")
    p.add_argument("--model", choices=["iid", "rw"], default="iid")
    p.add_argument("--rule", choices=["all", "fraction"], default=None)
    p.add_argument("--alpha", type=float)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--raw", default=None, help="write per-replication stopping times (CSV)")
    common(p)

    p = sub.add_parser("sweep", help="simulate over a grid of n or r values")
    p.add_argument("--vary", choices=["n", "r"], required=True)
    p.add_argument("--values", type=int, nargs="*", default=[])
    p.add_argument("--model", choices=["iid", "rw"], default="iid")
    p.add_argument("--rule", choices=["all", "fraction"], default=None)
    p.add_argument("--alpha", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--norm", choices=["prediction", "figure"], default="prediction",
                   help="divide by the first-order prediction or by the n^s log n form")
    common(p)

    p = sub.add_parser("exact", help="exact oracle values")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--s", type=int)
    p.add_argument("--hitting", action="store_true", help="Johnson-graph hitting times")
    p.add_argument("--cover", action="store_true",
                   help="Matthews bounds and exact walk collection time (s = r)")
    common(p, sim=False)

    p = sub.add_parser("gumbel", help="compare normalised stopping times with the Gumbel law")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--bins", type=_positive, default=30)
    p.add_argument("--quantiles", default=None, help="write the Q-Q table (CSV)")
    p.add_argument("--hist", default=None, help="write the histogram table (CSV)")
    common(p)
    return parser


def _dispatch(config) -> None:
    if getattr(config, "threads", None) is None and hasattr(config, "reps"):
        config.threads = default_threads()
    cmd = config.command
    if cmd == "predict":
        _emit(config, cmd, PREDICT_HEADER, cmd_predict(config))
    elif cmd == "simulate":
        record, rounds = cmd_simulate(config)
        raw = [{"replication": i, "seed": config.seed, "rounds": int(t)}
               for i, t in enumerate(rounds)]
        extra = {"replications": raw} if config.format == "json" and config.raw else None
        _emit(config, cmd, SIMULATE_HEADER, [record], extra)
        if config.raw and config.raw != "-":
            with open(config.raw, "w", newline="") as fh:
                fh.write(_csv_text(RAW_HEADER, raw))
    elif cmd == "sweep":
        _emit(config, cmd, SWEEP_HEADER, cmd_sweep(config))
    elif cmd == "exact":
        _emit(config, cmd, EXACT_HEADER, cmd_exact(config))
    elif cmd == "gumbel":
        report = cmd_gumbel(config)
        if config.format == "json":
            _emit(config, cmd, GUMBEL_HEADER, [report["summary"]],
                  {"quantiles": report["quantiles"], "histogram": report["histogram"]})
        else:
            _emit(config, cmd, GUMBEL_HEADER, [report["summary"]])
        if config.quantiles:
            with open(config.quantiles, "w", newline="") as fh:
                fh.write(_csv_text(QUANTILE_HEADER, report["quantiles"]))
        if config.hist:
            with open(config.hist, "w", newline="") as fh:
                fh.write(_csv_text(HIST_HEADER, report["histogram"]))
        if report["summary"]["warning"]:
            print(f"warning: {report['summary']['warning']}", file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    config = parser.parse_args(argv)
    try:
        _dispatch(config)
    except (UsageError, ValidationError) as exc:
        print(f"{parser.prog} {config.command}: usage error: {exc}", file=sys.stderr)
        return 2
    except (CapacityError, SafetyValveError, OverflowError) as exc:
        print(f"{parser.prog} {config.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
