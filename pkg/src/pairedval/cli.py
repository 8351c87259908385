"""Command-line front end for paired reader-study validation.

Exit codes: 0 success, 1 reproduction mismatch, 2 bad input (unreadable or
malformed files, schema or validation errors, bad options).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from contextlib import contextmanager
from dataclasses import replace
from pathlib import Path

from . import __version__
from .analysis import analyze
from .annotations import SchemaError, StudyDataset, load_dataset, validate_dataset
from .calibration import calibrate, load_scenarios
from .counts import CountsFormatError, StudyCounts, counts_from_dataset, read_counts_csv, write_counts_csv
from .fixtures import paper_counts
from .lroc import write_curve_csv
from .matching import DEFAULT_MIN_DICE, THRESHOLDS
from .paired_tests import TestConfig
from .report import build_tables, failed_checks, render_csv, render_latex, render_markdown, reproduce_paper

log = logging.getLogger("pairedval")

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


# --------------------------------------------------------------------- I/O

@contextmanager
def _atomic(path: Path):
    """Yield a temp path next to ``path``; move it into place on success."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=path.suffix, dir=path.parent)
    os.close(fd)
    try:
        yield Path(tmp)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _write_text(path: Path, text: str) -> Path:
    with _atomic(path) as tmp:
        tmp.write_text(text, encoding="utf-8")
    return path


def _load_checked_dataset(path: str) -> StudyDataset:
    try:
        dataset = load_dataset(path)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None
    except SchemaError as exc:
        raise InputError(str(exc)) from None
    problems = validate_dataset(dataset)
    if problems:
        raise InputError("\n".join(f"{path}: {v}" for v in problems))
    return dataset


def _load_counts(path: str) -> StudyCounts:
    try:
        return read_counts_csv(path)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None
    except CountsFormatError as exc:
        raise InputError(str(exc)) from None


def _config(args) -> TestConfig:
    try:
        return TestConfig(args.alpha, args.beta_error, args.confidence)
    except ValueError as exc:
        raise InputError(str(exc)) from None


# ---------------------------------------------------------------- commands

def cmd_tally(args) -> int:
    dataset = _load_checked_dataset(args.dataset)
    counts = counts_from_dataset(dataset, args.threshold, args.min_dice, curves=not args.no_auc)
    if args.output == "-":
        write_counts_csv(counts, sys.stdout)
    else:
        out = Path(args.output)
        with _atomic(out) as tmp:
            write_counts_csv(counts, tmp)
        log.info("wrote %s", out)
    return EXIT_OK


def _counts_for_report(args) -> StudyCounts:
    if args.fixture == "paper":
        return paper_counts()
    if not args.input:
        raise InputError("report needs an input file or --fixture paper")
    if args.input.lower().endswith(".csv"):
        return _load_counts(args.input)
    dataset = _load_checked_dataset(args.input)
    return counts_from_dataset(dataset, args.threshold, args.min_dice)


def _write_report(analysis, out_dir: Path, emit_latex: bool, figures: bool) -> list[Path]:
    tables = build_tables(analysis)
    written = [_write_text(out_dir / "report.md", render_markdown(analysis, tables)),
               _write_text(out_dir / "report.csv", render_csv(analysis, tables))]
    if emit_latex:
        written.append(_write_text(out_dir / "report.tex", render_latex(analysis, tables)))
    if figures and analysis.rows:
        from . import plotting

        with _atomic(out_dir / "endpoints.svg") as tmp:
            plotting.plot_endpoint_forest(analysis, tmp)
        written.append(out_dir / "endpoints.svg")
        if any(r.auc_control is not None for r in analysis.rows):
            with _atomic(out_dir / "auc.svg") as tmp:
                plotting.plot_auc_intervals(analysis, tmp)
            written.append(out_dir / "auc.svg")
        pairs = [r.counts.curves for r in analysis.rows if r.counts.curves]
        if pairs:
            with _atomic(out_dir / "lroc_grid.svg") as tmp:
                plotting.plot_lroc_grid(pairs, tmp)
            written.append(out_dir / "lroc_grid.svg")
    return written


def cmd_report(args) -> int:
    cfg = _config(args)
    analysis = analyze(_counts_for_report(args), cfg, args.r_method)
    for w in analysis.warnings:
        log.warning("%s", w)
    for path in _write_report(analysis, Path(args.out_dir), args.emit_latex, not args.no_figures):
        log.info("wrote %s", path)
    return EXIT_OK


def cmd_roc(args) -> int:
    from . import plotting

    dataset = _load_checked_dataset(args.dataset)
    counts = counts_from_dataset(dataset, 50, args.min_dice, curves=True)
    out_dir = Path(args.out_dir)
    pairs = []
    for anomaly, ac in counts.items():
        if ac.curves is None:
            log.warning("%s: no positives or no negatives; curve skipped", anomaly.value)
            continue
        pairs.append(ac.curves)
        with _atomic(out_dir / f"lroc_{anomaly.value}.csv") as tmp:
            write_curve_csv(ac.curves, tmp)
        with _atomic(out_dir / f"lroc_{anomaly.value}.svg") as tmp:
            plotting.plot_lroc(ac.curves, tmp)
        print(f"{anomaly.value}: AUC control {ac.auc_control:.3f}, study {ac.auc_study:.3f}")
    if pairs:
        with _atomic(out_dir / "lroc_grid.svg") as tmp:
            plotting.plot_lroc_grid(pairs, tmp)
    return EXIT_OK


def cmd_calibrate(args) -> int:
    cfg = _config(args)
    try:
        scenarios = load_scenarios(args.scenario)
    except OSError as exc:
        raise InputError(f"{args.scenario}: {exc.strerror or exc}") from None
    except ValueError as exc:  # includes JSON and TOML decode errors
        raise InputError(f"{args.scenario}: {exc}") from None
    overrides = {k: v for k, v in (("seed", args.seed), ("replications", args.replications)) if v is not None}
    summaries = []
    for sc in scenarios:
        if overrides:
            try:
                sc = replace(sc, **overrides)
            except ValueError as exc:
                raise InputError(str(exc)) from None
        summaries.append(calibrate(sc, cfg))
    text = json.dumps(summaries if len(summaries) != 1 else summaries[0], indent=2) + "\n"
    if args.output == "-":
        sys.stdout.write(text)
    else:
        _write_text(Path(args.output), text)
    return EXIT_OK


def cmd_reproduce(args) -> int:
    counts = _load_counts(args.counts) if args.counts else paper_counts()
    analysis, checks = reproduce_paper(counts, TestConfig(), args.r_method)
    bad = failed_checks(checks)
    if args.out_dir:
        _write_report(analysis, Path(args.out_dir), args.emit_latex, not args.no_figures)
    if args.emit_latex:
        sys.stdout.write(render_latex(analysis))
    if args.verbose:
        for c in checks:
            print(c.describe() + ("  (informational)" if c.informational else ""))
    for c in bad:
        print(c.describe(), file=sys.stderr)
    enforced = [c for c in checks if not c.informational]
    print(f"{len(enforced) - len(bad)}/{len(enforced)} published values reproduced")
    return EXIT_OK if not bad else EXIT_MISMATCH


# ------------------------------------------------------------------ parser

def _threshold(text: str) -> int:
    v = int(text)
    if v not in THRESHOLDS:
        raise argparse.ArgumentTypeError(f"threshold must be one of {sorted(THRESHOLDS)}")
    return v


def _add_dataset_opts(p, threshold=True):
    if threshold:
        p.add_argument("--threshold", type=_threshold, default=50, help="confidence threshold (default 50)")
    p.add_argument("--min-dice", type=float, default=DEFAULT_MIN_DICE,
                   help=f"minimum Dice overlap for a match (default {DEFAULT_MIN_DICE})")


def _add_stat_opts(p):
    p.add_argument("--alpha", type=float, default=0.05, help="Type-I error (default 0.05)")
    p.add_argument("--beta-error", type=float, default=0.10, help="Type-II error bound (default 0.10)")
    p.add_argument("--confidence", type=float, default=0.95, help="interval confidence (default 0.95)")


def _add_r_method(p):
    p.add_argument("--r-method", choices=("table", "average"), default="table",
                   help="correlation between the areas: table lookup or plain average")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="paired-val", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-q", "--quiet", action="store_true", help="only print errors")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-q", "--quiet", action="store_true", default=argparse.SUPPRESS,
                        help="only print errors")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tally", parents=[common], help="dataset JSON -> counts CSV")
    p.add_argument("dataset")
    p.add_argument("-o", "--output", default="-", help="counts CSV path (default stdout)")
    p.add_argument("--no-auc", action="store_true", help="skip the LROC areas")
    _add_dataset_opts(p)
    p.set_defaults(func=cmd_tally)

    p = sub.add_parser("report", parents=[common], help="counts CSV or dataset JSON -> report.md, report.csv, figures")
    p.add_argument("input", nargs="?")
    p.add_argument("--fixture", choices=("paper",), help="use the embedded published counts")
    p.add_argument("--out-dir", default="report")
    p.add_argument("--emit-latex", action="store_true", help="also write report.tex")
    p.add_argument("--no-figures", action="store_true")
    _add_dataset_opts(p)
    _add_stat_opts(p)
    _add_r_method(p)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("roc", parents=[common], help="dataset JSON -> per-anomaly LROC CSV and SVG")
    p.add_argument("dataset")
    p.add_argument("--out-dir", default="roc")
    _add_dataset_opts(p, threshold=False)
    p.set_defaults(func=cmd_roc)

    p = sub.add_parser("calibrate", parents=[common], help="Monte Carlo calibration from a TOML/JSON scenario file")
    p.add_argument("scenario")
    p.add_argument("-o", "--output", default="-", help="summary JSON path (default stdout)")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--replications", type=int, help="override the number of replicates")
    _add_stat_opts(p)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("reproduce-paper", parents=[common], help="recompute the published tables and compare")
    p.add_argument("--counts", help="alternate counts CSV in place of the embedded fixture")
    p.add_argument("--emit-latex", action="store_true", help="print the tables as LaTeX tabulars")
    p.add_argument("--out-dir", help="also write the full report here")
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("-v", "--verbose", action="store_true", help="list every compared cell")
    _add_r_method(p)
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.INFO,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
