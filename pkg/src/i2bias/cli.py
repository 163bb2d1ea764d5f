"""Command line interface: ``i2bias analyze|bias-curve|simulate|ci``."""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

from . import bias, figures
from .errors import DomainError, InsufficientDataError, QuadratureError
from .interval import i2_confidence_interval
from .meta import MetaAnalysis, Study, analyze
from .simulate import Mode, SimConfig, simulate

EXIT_INVALID = 2
EXIT_INSUFFICIENT = 3
EXIT_NUMERIC = 4

HEADER = ["study_id", "effect", "std_err"]


class CliError(Exception):
    def __init__(self, message, code=EXIT_INVALID):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _num(v) -> str:
    return f"{v:.10g}"


def _json_float(v):
    return None if v is None or math.isnan(v) else v


# -- analyze ----------------------------------------------------------------

def read_studies(path: Path) -> MetaAnalysis:
    """Parse a ``study_id,effect,std_err`` CSV.  Bad rows raise CliError naming the line."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}")
    except UnicodeDecodeError:
        raise CliError(f"{path}: not valid UTF-8")
    reader = csv.reader(text.splitlines())
    header = next(reader, None)
    if header is None:
        raise CliError(f"{path}: line 1: empty file")
    if [h.strip() for h in header] != HEADER:
        raise CliError(f"{path}: line 1: header must be {','.join(HEADER)}")
    studies = []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise CliError(f"{path}: line {line}: expected 3 fields, got {len(row)}")
        sid, effect, se = (c.strip() for c in row)
        try:
            study = Study(sid, float(effect), float(se))
        except ValueError as exc:
            detail = str(exc) if isinstance(exc, DomainError) else "effect and std_err must be numbers"
            raise CliError(f"{path}: line {line}: {detail}")
        studies.append(study)
    if len(studies) < 2:
        raise CliError(f"{path}: need at least 2 studies, got {len(studies)}", EXIT_INSUFFICIENT)
    return MetaAnalysis(studies)


def cmd_analyze(args) -> str:
    report = analyze(read_studies(Path(args.file)))
    ci = i2_confidence_interval(report.q_stat, report.df) if report.df >= 2 else None
    if args.json:
        doc = {
            "k": report.k,
            "pooled_effect": report.pooled_effect,
            "q": report.q_stat,
            "df": report.df,
            "p_value": report.p_value,
            "i2_raw": _json_float(report.i2_raw),
            "i2": report.i2,
            "ci": None if ci is None else {
                "level": ci.level, "lower": ci.lower, "upper": ci.upper,
                "degenerate": ci.degenerate,
            },
        }
        return json.dumps(doc)
    raw = _num(report.i2_raw) if report.i2_raw_defined else "undefined (Q = 0)"
    if ci is None:
        ci_text = "n/a (needs at least 3 studies)"
    else:
        ci_text = f"[{_num(ci.lower)}, {_num(ci.upper)}]" + (" (degenerate: Q = 0)" if ci.degenerate else "")
    rows = [
        ("studies", str(report.k)),
        ("pooled effect", _num(report.pooled_effect)),
        ("Q", _num(report.q_stat)),
        ("df", str(report.df)),
        ("p-value", _num(report.p_value)),
        ("I^2 raw", raw),
        ("I^2", _num(report.i2)),
        ("95% CI for I^2", ci_text),
    ]
    return "\n".join(f"{k:<16}{v}" for k, v in rows)


# -- bias-curve -------------------------------------------------------------

def parse_grid(spec: str) -> list[float]:
    try:
        a, b, step = (float(p) for p in spec.split(":"))
    except ValueError:
        raise CliError(f"--i2-grid must look like start:stop:step, got {spec!r}")
    if step <= 0 or b < a:
        raise CliError(f"--i2-grid needs step > 0 and stop >= start, got {spec!r}")
    n = int(math.floor((b - a) / step + 1e-9))
    return [round(a + i * step, 12) for i in range(n + 1)]


def cmd_bias_curve(args) -> None:
    values = [args.i2] if args.i2 is not None else parse_grid(args.i2_grid)
    for v in values:
        if not 0 <= v < 1:
            raise CliError(f"I^2 must lie in [0, 1), got {v}")
    if not 2 <= args.k_min <= args.k_max <= 500:
        raise CliError(f"need 2 <= k-min <= k-max <= 500, got {args.k_min}..{args.k_max}")
    curves = [bias.bias_curve(v, args.k_min, args.k_max) for v in values]
    if args.format == "csv":
        text = figures.curve_csv(curves)
    else:
        text = figures.render_svg([figures.series_from_points(c) for c in curves])
    out = Path(args.out)
    try:
        out.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot write {out}: {exc.strerror}")
    print(f"wrote {len(curves)} series x {args.k_max - args.k_min + 1} points to {out}", file=sys.stderr)
    return None


# -- simulate ---------------------------------------------------------------

def cmd_simulate(args) -> str:
    try:
        cfg = SimConfig(k=args.k, i2_true=args.i2, reps=args.reps, seed=args.seed,
                        sigma=args.sigma, mode=Mode(args.mode))
    except DomainError as exc:
        raise CliError(str(exc))
    if args.workers < 1:
        raise CliError("--workers must be >= 1")
    res = simulate(cfg, workers=args.workers)
    point = bias.bias_point(bias.BiasQuery(cfg.k, cfg.i2_true))
    diff = res.mean_i2_hat - point.expectation
    se = res.std_error_of_mean
    agree = abs(diff) < 3 * se if se > 0 else diff == 0
    verdict = "AGREE" if agree else "DISAGREE"
    if args.json:
        return json.dumps({
            "k": cfg.k, "i2_true": cfg.i2_true, "mode": cfg.mode.value, "reps": res.reps_used,
            "seed": cfg.seed, "sigma": cfg.sigma,
            "mean_i2_hat": res.mean_i2_hat, "mean_i2_raw": _json_float(res.mean_i2_raw),
            "std_error_of_mean": se, "prob_zero": res.prob_zero,
            "analytic_expectation": point.expectation, "analytic_method": point.method.value,
            "verdict": verdict,
        })
    z = f" ({diff / se:+.2f} SE)" if se > 0 else ""
    rows = [
        ("config", f"K={cfg.k} I^2={_num(cfg.i2_true)} mode={cfg.mode.value} "
                   f"reps={res.reps_used} seed={cfg.seed}"),
        ("mean I^2", _num(res.mean_i2_hat)),
        ("Monte Carlo SE", _num(se)),
        ("P(I^2 = 0)", _num(res.prob_zero)),
        ("mean raw I^2", _num(res.mean_i2_raw)),
        ("analytic E", f"{_num(point.expectation)} ({point.method.value})"),
        ("difference", f"{_num(diff)}{z}"),
        ("verdict", verdict),
    ]
    if cfg.mode is Mode.RANDOM:
        rows.append(("note", "random mode: analytic value assumes the noncentral law; "
                             "a gap here is informational"))
    return "\n".join(f"{k:<16}{v}" for k, v in rows)


# -- ci ---------------------------------------------------------------------

def cmd_ci(args) -> str:
    if args.df < 2:
        raise CliError(f"--df must be >= 2, got {args.df}")
    if not (args.q >= 0 and math.isfinite(args.q)):
        raise CliError(f"--q must be finite and >= 0, got {args.q}")
    ci = i2_confidence_interval(args.q, args.df)
    text = f"I^2 = {_num(ci.point)}  95% CI [{_num(ci.lower)}, {_num(ci.upper)}]"
    if ci.degenerate:
        text += "  (degenerate: Q = 0)"
    return text


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="i2bias", description="Heterogeneity statistics and the bias of I^2.")
    sub = parser.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="heterogeneity report for a study CSV")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("bias-curve", help="E(I^2 estimate) against K, as CSV or SVG")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--i2", type=float)
    g.add_argument("--i2-grid", metavar="START:STOP:STEP")
    p.add_argument("--k-min", type=int, required=True)
    p.add_argument("--k-max", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["csv", "svg"], default="csv")
    p.set_defaults(func=cmd_bias_curve)

    p = sub.add_parser("simulate", help="Monte Carlo check of the analytic expectation")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--i2", type=float, required=True)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--mode", choices=[m.value for m in Mode], default="fixed")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("ci", help="95% interval for I^2 from Q and df")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--df", type=int, required=True)
    p.set_defaults(func=cmd_ci)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        out = args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except InsufficientDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INSUFFICIENT
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (QuadratureError, ArithmeticError) as exc:
        print(f"error: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if out is not None:
        print(out)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
