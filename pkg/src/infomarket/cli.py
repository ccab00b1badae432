"""Command-line entry point: ``infomarket <command> ... --out PATH``.

Every command writes a UTF-8 CSV to ``--out`` and a JSON manifest next to it
at ``<out>.manifest``. Exit codes: 0 success, 1 a validation check failed,
2 bad usage or bad input.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .analytics import (
    RATIO_HEADER,
    CheckResult,
    LogScoreCurve,
    ValidationConfig,
    average_log_score_curve,
    empirical_density,
    epsilon_edges,
    ratio_rows,
    stratified_winner_loser_ratio,
    transitions,
    validate_theory,
    winner_loser_ratio,
)
from .detector import METHODS, DetectionPolicy, EventHit, detect_events, detect_events_pooled
from .errors import InfoMarketError
from .explainer import RANK_HEADER, ExplainConfig, SplitSpec, explain, load_stoplist, rank_rows
from .ingest import load_corpus, load_prices, parse_date, write_prices
from .simulator import RNG_ALGORITHM, SimConfig, simulate_ensemble

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return value


def _nonneg_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {value}")
    return value


def _fraction(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {value}")
    return value


def _date(text):
    try:
        return parse_date(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a YYYY-MM-DD date") from None


def _digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _cell(value):
    if isinstance(value, float):
        return repr(value)
    return value


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def write_manifest(out: Path, command: str, config: dict, inputs: list[str], extra: dict | None = None) -> Path:
    manifest = {
        "command": command,
        "config": config,
        "seed": config.get("seed"),
        "inputs": {str(p): _digest(p) for p in inputs},
        "output_sha256": _digest(out),
        "tool_version": __version__,
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    manifest.update(extra or {})
    path = Path(f"{out}.manifest")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")
    return path


def _config_of(args) -> dict:
    skip = {"func", "command"}
    return {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items()) if k not in skip}


# --------------------------------------------------------------------------
# commands


def cmd_simulate(args) -> int:
    config = SimConfig(
        n=args.n,
        i0=args.i0,
        k0=args.k0,
        flips_per_step=args.flips_per_step,
        num_markets=args.markets,
        seed=args.seed,
    )
    write_prices(simulate_ensemble(config), args.out)
    write_manifest(args.out, "simulate", _config_of(args), [], {"rng": RNG_ALGORITHM})
    return EXIT_OK


def cmd_score(args) -> int:
    curve: LogScoreCurve = average_log_score_curve(load_prices(args.prices))
    write_csv(args.out, LogScoreCurve.header, curve.rows())
    write_manifest(args.out, "score", _config_of(args), [args.prices])
    return EXIT_OK


def cmd_dist(args) -> int:
    t = transitions(load_prices(args.prices), include_gaps=args.include_gaps)
    est = empirical_density(t.epsilon, args.window)
    write_csv(args.out, est.header, est.rows())
    write_manifest(args.out, "dist", _config_of(args), [args.prices])
    return EXIT_OK


def cmd_ratio(args) -> int:
    t = transitions(load_prices(args.prices), include_gaps=args.include_gaps)
    if args.stratified:
        bins = stratified_winner_loser_ratio(t)
        edges = "stratified: ll bins 0.25 on [-5,5], step bins 0.1 on [-3,3]"
    else:
        bins = winner_loser_ratio(t, epsilon_edges(bins_per_sign=args.bins))
        edges = f"log-spaced |eps| in [1e-3, 20], {args.bins} per sign"
    write_csv(args.out, RATIO_HEADER, ratio_rows(bins))
    write_manifest(args.out, "ratio", _config_of(args), [args.prices], {"bins": edges})
    return EXIT_OK


def cmd_validate(args) -> int:
    inputs = []
    extra = {}
    if args.prices is not None:
        data = load_prices(args.prices)
        inputs.append(args.prices)
    else:
        sim = SimConfig(n=args.n, flips_per_step=args.flips_per_step, num_markets=args.markets, seed=args.seed)
        data = simulate_ensemble(sim)
        extra["rng"] = RNG_ALGORITHM
    report = validate_theory(transitions(data), ValidationConfig(bins=args.bins))
    write_csv(args.out, CheckResult.header, report.rows())
    extra["summary"] = report.summary()
    write_manifest(args.out, "validate", _config_of(args), inputs, extra)
    for check, ok in report.summary().items():
        print(f"{'PASS' if ok else 'FAIL'} {check}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_detect(args) -> int:
    markets = load_prices(args.prices)
    parameter = args.k if args.method == "top_k" else args.threshold
    policy = DetectionPolicy(args.method, parameter)
    series = [c for m in markets for c in m.candidates]
    if args.scope == "pooled":
        hits = detect_events_pooled(series, policy)
    else:
        hits = [h for s in series for h in detect_events(s, policy)]
    write_csv(args.out, EventHit.header, [h.row() for h in hits])
    write_manifest(args.out, "detect", _config_of(args), [args.prices])
    return EXIT_OK


def cmd_explain(args) -> int:
    corpus = load_corpus(args.corpus)
    inputs = [args.corpus]
    stoplist = frozenset()
    if args.stoplist is not None:
        stoplist = load_stoplist(args.stoplist)
        inputs.append(args.stoplist)
    spec = SplitSpec(args.pivot, args.pos_window_days, args.neg_window_days)
    config = ExplainConfig(min_pos_fraction=args.min_pos_fraction, stoplist=stoplist, top_k=args.top_k)
    stats = explain(corpus, spec, config)
    write_csv(args.out, RANK_HEADER, rank_rows(stats))
    write_manifest(args.out, "explain", _config_of(args), inputs)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="infomarket", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.set_defaults(func=func)
        p.add_argument("--out", type=Path, required=True, help="output CSV path")
        return p

    p = add("simulate", cmd_simulate, "Simulate coin-flip markets and write them as a price CSV.")
    p.add_argument("--n", type=_positive_int, default=1200, help="coin flips per market")
    p.add_argument("--i0", type=_nonneg_int, default=0, help="tails already seen at the start")
    p.add_argument("--k0", type=_nonneg_int, default=0, help="flips already revealed at the start")
    p.add_argument("--flips-per-step", type=_positive_int, default=2)
    p.add_argument("--markets", type=_positive_int, default=22)
    p.add_argument("--seed", type=_nonneg_int, default=0)

    p = add("score", cmd_score, "Average log score per day offset.")
    p.add_argument("prices", type=Path)

    p = add("dist", cmd_dist, "Density of daily log-likelihood changes.")
    p.add_argument("prices", type=Path)
    p.add_argument("--window", type=_positive_int, default=50, help="rank half-window")
    p.add_argument("--include-gaps", action="store_true", help="also pair days across missing dates")

    p = add("ratio", cmd_ratio, "Winner/loser frequency ratio of daily changes, with e^eps theory.")
    p.add_argument("prices", type=Path)
    p.add_argument("--bins", type=_positive_int, default=40, help="log-spaced bins per sign")
    p.add_argument("--stratified", action="store_true", help="condition on the previous log-likelihood price")
    p.add_argument("--include-gaps", action="store_true")

    p = add("validate", cmd_validate, "Check martingale, e^eps law, conditional ratio and drift.")
    p.add_argument("prices", type=Path, nargs="?", help="price CSV; omitted means simulate")
    p.add_argument("--bins", type=_positive_int, default=20, help="price bins on [0, 1]")
    p.add_argument("--n", type=_positive_int, default=100)
    p.add_argument("--flips-per-step", type=_positive_int, default=1)
    p.add_argument("--markets", type=_positive_int, default=10000)
    p.add_argument("--seed", type=_nonneg_int, default=0)

    p = add("detect", cmd_detect, "Flag days after exceptionally large log-likelihood changes.")
    p.add_argument("prices", type=Path)
    p.add_argument("--method", choices=METHODS, default="robust_z")
    p.add_argument("--threshold", type=float, default=None, help="robust z or absolute change threshold")
    p.add_argument("--k", type=_positive_int, default=None, help="number of days for top_k")
    p.add_argument("--scope", choices=("series", "pooled"), default="series",
                   help="treat each series alone, or share median/MAD/top-k across all series")

    p = add("explain", cmd_explain, "Rank n-grams that separate documents after a pivot date from earlier ones.")
    p.add_argument("corpus", type=Path)
    p.add_argument("--pivot", type=_date, required=True, help="YYYY-MM-DD")
    p.add_argument("--pos-window-days", type=_positive_int, default=7)
    p.add_argument("--neg-window-days", type=_positive_int, default=None)
    p.add_argument("--min-pos-fraction", type=_fraction, default=0.075)
    p.add_argument("--stoplist", type=Path, default=None, help="newline-delimited features to drop")
    p.add_argument("--top-k", type=_positive_int, default=10)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (InfoMarketError, ValueError, OSError) as exc:
        print(f"infomarket {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
