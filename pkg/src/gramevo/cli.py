"""Command-line entry point, results folders, charts and the experiment manager.

Subcommands::

    gramevo run [--parameters FILE] [--<parameter> VALUE ...]
    gramevo experiment --seeds 1-30 [--parameters FILE] [--<parameter> VALUE ...]
    gramevo parse-grammar FILE [--n_vars N]

Flags given on the command line override the parameters file, which
overrides the built-in defaults. With no subcommand, ``run`` is assumed.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import statistics
import sys
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from xml.sax.saxutils import escape

from .engine import GenerationStats, Run, search_loop
from .errors import ConfigurationError, GramevoError
from .grammar import GrammarContext, load_grammar
from .individual import WORST
from .params import FIELD_TYPES, Parameters, load_parameters, parse_value, save_parameters

log = logging.getLogger(__name__)

RESULTS_ENV = "GRAMEVO_RESULTS"
SUBCOMMANDS = ("run", "experiment", "parse-grammar")


def default_results_root() -> Path:
    return Path(os.environ.get(RESULTS_ENV, "results"))


# -- results folders -----------------------------------------------------------


def make_results_folder(root, seed) -> Path:
    """Create ``<root>/<timestamp>_<seed>``, adding ``_<n>`` if it already exists."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    stem = f"{datetime.now().strftime('%Y%m%d-%H%M%S')}_{seed}"
    candidate, n = root / stem, 1
    while True:
        try:
            candidate.mkdir()
            return candidate
        except FileExistsError:
            candidate = root / f"{stem}_{n}"
            n += 1


def _number(value):
    """A fitness as a CSV/plot number; WORST and None become None."""
    if value is None or value is WORST:
        return None
    return float(value)


def _cell(value):
    if value is None:
        return ""
    return repr(value) if isinstance(value, float) else str(value)


def write_stats(history, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(GenerationStats.COLUMNS)
        writer.writerows(stats.row() for stats in history)


def write_timing(history, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("generation", "elapsed_seconds"))
        writer.writerows((s.generation, f"{s.elapsed:.6f}") for s in history)


def write_best(best, problem, path):
    test = None
    if best.fitness is not WORST and best.phenotype is not None:
        try:
            test = problem.test(best.phenotype)
        except (GramevoError, ArithmeticError, ValueError):
            test = "failed"
    lines = [
        f"phenotype: {best.phenotype}",
        f"training fitness: {best.fitness}",
        f"test fitness: {'n/a' if test is None else test}",
        f"used codons: {best.used_codons}",
        f"depth: {best.depth}",
        f"nodes: {best.nodes}",
        f"genome: {best.genome}",
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# -- charts --------------------------------------------------------------------

_W, _H, _PAD = 640, 400, 50


def _svg(points, title, ylabel):
    """A self-contained SVG line chart of ``(x, y)`` points; y grows upwards."""
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="24" text-anchor="middle" font-size="16">{escape(title)}</text>',
        f'<line x1="{_PAD}" y1="{_H - _PAD}" x2="{_W - _PAD}" y2="{_H - _PAD}" stroke="black"/>',
        f'<line x1="{_PAD}" y1="{_PAD}" x2="{_PAD}" y2="{_H - _PAD}" stroke="black"/>',
        f'<text x="{_W / 2}" y="{_H - 12}" text-anchor="middle" font-size="12">generation</text>',
        f'<text x="14" y="{_H / 2}" font-size="12" transform="rotate(-90 14 {_H / 2})" '
        f'text-anchor="middle">{escape(ylabel)}</text>',
    ]
    if points:
        xs, ys = [p[0] for p in points], [p[1] for p in points]
        x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
        span_x, span_y = (x1 - x0) or 1, (y1 - y0) or 1
        inner_w, inner_h = _W - 2 * _PAD, _H - 2 * _PAD

        def sx(x):
            return _PAD + (x - x0) / span_x * inner_w

        def sy(y):
            # screen y grows downwards
            if y1 == y0:
                return _H / 2
            return _PAD + (y1 - y) / span_y * inner_h

        for value, ypos in ((y1, sy(y1)), (y0, sy(y0))):
            parts.append(f'<text x="{_PAD - 4}" y="{ypos:.2f}" text-anchor="end" '
                         f'font-size="10">{value:.4g}</text>')
        if len(points) == 1:
            parts.append(f'<circle cx="{sx(xs[0]):.2f}" cy="{sy(ys[0]):.2f}" r="4" fill="steelblue"/>')
        else:
            coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in points)
            parts.append(f'<polyline fill="none" stroke="steelblue" stroke-width="2" '
                         f'points="{coords}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_chart(history, path, title="Best fitness"):
    """Write ``path`` (SVG of best fitness) and a sibling CSV of generation, best, mean.

    Returns ``(csv_path, svg_path)``.
    """
    if not history:
        raise ValueError("history is empty")
    svg_path = Path(path)
    csv_path = svg_path.with_suffix(".csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("generation", "best", "mean"))
        for s in history:
            writer.writerow((s.generation, _cell(_number(s.best_fitness)), _cell(s.mean_fitness)))
    points = [(s.generation, _number(s.best_fitness)) for s in history
              if _number(s.best_fitness) is not None]
    svg_path.write_text(_svg(points, title, "best fitness"), encoding="utf-8")
    return csv_path, svg_path


# -- run -----------------------------------------------------------------------


@dataclass
class RunRecord:
    folder: Path
    best: object
    history: list


def run_once(params: Parameters, results_root=None, on_generation=None) -> RunRecord:
    """Execute one search and write its results folder."""
    run = Run(params)
    best, history = search_loop(run.params, run=run, on_generation=on_generation)
    folder = make_results_folder(results_root or default_results_root(), run.params.random_seed)
    save_parameters(run.params, folder / "parameters.txt")
    write_stats(history, folder / "stats.csv")
    write_timing(history, folder / "timing.csv")
    write_best(best, run.problem, folder / "best.txt")
    emit_chart(history, folder / "fitness.svg")
    return RunRecord(folder, best, history)


# -- experiments ---------------------------------------------------------------


@dataclass
class SeedResult:
    seed: int
    best_fitness: float | None = None
    folder: Path | None = None
    error: str | None = None


@dataclass
class ExperimentReport:
    seeds: list[int]
    # one entry per seed, in the order given (duplicates included)
    results: list[SeedResult] = field(default_factory=list)
    # one row per generation: (generation, mean, median, std, runs)
    aggregate: list[tuple] = field(default_factory=list)
    folder: Path | None = None

    @property
    def failures(self) -> list[SeedResult]:
        return [r for r in self.results if r.error is not None]

    @property
    def best_fitness(self) -> list[float | None]:
        return [r.best_fitness for r in self.results]


def parse_seeds(text: str) -> list[int]:
    """``"1,4,7"``, ``"1-30"`` or ``"1..30"`` (inclusive), or a mix of these."""
    seeds = []
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        sep = ".." if ".." in part else ("-" if "-" in part[1:] else None)
        if sep:
            lo, hi = part.split(sep, 1) if sep == ".." else part.rsplit("-", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ValueError(f"empty seed range {part!r}")
            seeds.extend(range(lo, hi + 1))
        else:
            seeds.append(int(part))
    if not seeds:
        raise ValueError("no seeds given")
    return seeds


def aggregate_histories(histories):
    """Per-generation mean, median and sample std of best fitness across runs."""
    rows = []
    length = max((len(h) for h in histories), default=0)
    for gen in range(length):
        values = [v for h in histories if gen < len(h)
                  for v in [_number(h[gen].best_fitness)] if v is not None]
        if values:
            std = statistics.stdev(values) if len(values) > 1 else 0.0
            rows.append((gen, statistics.fmean(values), statistics.median(values), std, len(values)))
        else:
            rows.append((gen, math.nan, math.nan, math.nan, 0))
    return rows


def _experiment_job(params, root):
    try:
        record = run_once(params, root)
        return SeedResult(params.random_seed, _number(record.best.fitness), record.folder), \
            record.history
    except Exception as exc:  # noqa: BLE001 - reported per seed, the experiment carries on
        log.debug("run failed", exc_info=True)
        return SeedResult(params.random_seed, error=f"{type(exc).__name__}: {exc}"), None


def experiment(params: Parameters, seeds, results_root=None, jobs: int = 1) -> ExperimentReport:
    """Run once per seed, then write ``summary.csv`` and an aggregate chart.

    A failing seed is recorded with its error and the others still run.
    """
    seeds = list(seeds)
    if not seeds:
        raise ConfigurationError("seeds", "at least one seed is required")
    folder = make_results_folder(results_root or default_results_root(), "experiment")
    configs = [params.replace(random_seed=s) for s in seeds]
    runs_root = folder / "runs"
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_experiment_job, configs, [runs_root] * len(configs)))
    else:
        outcomes = [_experiment_job(c, runs_root) for c in configs]

    report = ExperimentReport(seeds, [r for r, _ in outcomes], folder=folder)
    report.aggregate = aggregate_histories([h for _, h in outcomes if h is not None])

    with open(folder / "summary.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("seed", "best_fitness", "folder", "error"))
        for r in report.results:
            writer.writerow((r.seed, _cell(r.best_fitness), r.folder or "", r.error or ""))
    with open(folder / "aggregate.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("generation", "mean_best", "median_best", "std_best", "runs"))
        writer.writerows((g, _cell(a), _cell(m), _cell(s), n) for g, a, m, s, n in report.aggregate)
    points = [(g, m) for g, _, m, _, n in report.aggregate if n]
    (folder / "aggregate.svg").write_text(
        _svg(points, "Median best fitness", "median best fitness"), encoding="utf-8")
    return report


# -- argument handling ---------------------------------------------------------


def _add_parameter_flags(parser):
    parser.add_argument("--parameters", metavar="FILE",
                        help="parameters file (a path, or a name from the bundled set)")
    group = parser.add_argument_group("parameters")
    for key, annotation in FIELD_TYPES.items():
        group.add_argument(f"--{key}", metavar=annotation.replace(" | None", "").upper(),
                           default=None)
    parser.add_argument("--results_root", default=None,
                        help=f"where results folders go (default ${RESULTS_ENV} or ./results)")
    parser.add_argument("-v", "--verbose", action="store_true", help="log every generation")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gramevo", description="Grammatical evolution runs.")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_parameter_flags(sub.add_parser("run", help="execute one search"))
    exp = sub.add_parser("experiment", help="repeat a search over several seeds")
    _add_parameter_flags(exp)
    exp.add_argument("--seeds", required=True, help='e.g. "1-30" or "1,2,3"')
    exp.add_argument("--jobs", type=int, default=1, help="concurrent runs")
    lint = sub.add_parser("parse-grammar", help="check a grammar and print its rule table")
    lint.add_argument("grammar")
    lint.add_argument("--n_vars", type=int, default=None,
                      help="dataset width for GE_RANGE:dataset_n_vars")
    return parser


def params_from_args(ns) -> Parameters:
    """Defaults, then the parameters file, then command-line flags."""
    params = load_parameters(ns.parameters) if ns.parameters else Parameters()
    overrides = {key: parse_value(key, getattr(ns, key))
                 for key in FIELD_TYPES if getattr(ns, key) is not None}
    return params.replace(**overrides)


def _print_grammar(path, n_vars):
    grammar = load_grammar(path, GrammarContext(n_vars))
    print(f"start: <{grammar.start}>")
    print(f"{'rule':<20} {'choices':>7} {'min depth':>9}  recursive  unit")
    for name, rule in grammar.rules.items():
        print(f"{'<' + name + '>':<20} {rule.num_choices:>7} {rule.min_depth:>9}  "
              f"{'yes' if rule.is_recursive else 'no':<9}  {'yes' if rule.is_unit else 'no'}")
    print(f"terminals: {len(grammar.terminals)}")


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or (argv[0] not in SUBCOMMANDS and argv[0] not in ("-h", "--help")):
        argv.insert(0, "run")
    ns = build_parser().parse_args(argv)
    if getattr(ns, "verbose", False):
        logging.basicConfig(level=logging.INFO, format="%(message)s")

    try:
        if ns.command == "parse-grammar":
            _print_grammar(ns.grammar, ns.n_vars)
            return 0
        params = params_from_args(ns).resolved().validate()
        if ns.command == "run":
            record = run_once(params, ns.results_root, _log_generation)
            print(f"best phenotype: {record.best.phenotype}")
            print(f"best fitness: {record.best.fitness}")
            print(f"results: {record.folder}")
            return 0
        try:
            seeds = parse_seeds(ns.seeds)
        except ValueError as exc:
            raise ConfigurationError("seeds", str(exc)) from None
        report = experiment(params, seeds, ns.results_root, ns.jobs)
        for r in report.results:
            if r.error is None:
                print(f"seed {r.seed}: best fitness {r.best_fitness}")
            else:
                print(f"seed {r.seed}: failed ({r.error})", file=sys.stderr)
        print(f"results: {report.folder}")
        return 1 if report.failures else 0
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (GramevoError, OSError, ValueError, RuntimeError) as exc:
        log.debug("%s", traceback.format_exc())
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _log_generation(stats):
    log.info("gen %d  best %s  mean %.6g  invalids %d", stats.generation, stats.best_fitness,
             stats.mean_fitness, stats.invalids)


def entry():
    sys.exit(main())


__all__ = ["ExperimentReport", "RunRecord", "SeedResult", "aggregate_histories", "build_parser",
           "default_results_root", "emit_chart", "experiment", "main", "make_results_folder",
           "params_from_args", "parse_seeds", "run_once"]
