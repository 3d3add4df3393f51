"""Command line front end.

Exit codes: 0 success, 1 usage error, 2 input error, 3 infeasible
computation.  Every command is deterministic given its inputs, flags and
seed.
"""

from __future__ import annotations

import argparse
import csv
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Sequence

from . import __version__
from .batch import analyze_corpus, load_corpus, write_records
from .catalog import GRAPH_METRICS, MetricSuite, format_value, resolve, write_metric_csv
from .errors import ComputationError, InputError, UnsupportedMetricError
from .evolution import diff, edge_breakdown, evolution_summary, sort_versions
from .graph import dumps, graph_summary, load_graph
from .mutation import KINDS, MutationSpec, mutate, parse_kind
from .reliability import DEFAULT_REPETITIONS

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_INFEASIBLE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _metric_names(raw: Sequence[str] | None) -> list[str]:
    names = []
    for chunk in raw or ():
        for name in chunk.split(","):
            if name.strip():
                try:
                    names.append(resolve(name.strip()))
                except UnsupportedMetricError as exc:
                    raise UsageError(str(exc)) from None
    return list(dict.fromkeys(names))


def _mutation_kinds(raw: str | None) -> list[str]:
    if not raw:
        return []
    if raw.strip().lower() == "all":
        return list(KINDS)
    try:
        return list(dict.fromkeys(parse_kind(k) for k in raw.split(",") if k.strip()))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


@contextmanager
def _output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
        return
    with open(path, "w", encoding="utf-8", newline="") as f:
        yield f


# --- commands ------------------------------------------------------------------------


def cmd_metrics(args) -> int:
    if args.all:
        names = list(GRAPH_METRICS)
    else:
        names = _metric_names(args.metric)
    if not names:
        raise UsageError("select metrics with --metric NAME or --all")
    g = load_graph(args.graph)
    suite = MetricSuite(g)
    vectors = [suite[name] for name in names]
    with _output(args.out) as out:
        write_metric_csv(vectors, out)
    return EXIT_OK


PAIR_COLUMNS = ("artifact", "earlier_version", "later_version", "measure", "value")


def pair_rows(earlier, later) -> list[tuple[str, str]]:
    """(measure, value) rows: the evolution summary, then per edge kind the
    counts and their percentages."""
    pair = diff(earlier, later)
    summary = evolution_summary(pair)
    rows = []
    for name in summary.__dataclass_fields__:
        value = getattr(summary, name)
        rows.append((name, "" if value is None else format_value(float(value))))
    for kind, counts in edge_breakdown(pair).items():
        for name in counts.__dataclass_fields__:
            value = getattr(counts, name)
            rows.append((f"{kind}.{name}", "" if value is None else format_value(value)))
    return rows


def cmd_pair(args) -> int:
    earlier, later = load_graph(args.earlier), load_graph(args.later)
    rows = pair_rows(earlier, later)
    with _output(args.out) as out:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(PAIR_COLUMNS)
        for measure, value in rows:
            w.writerow([earlier.artifact, earlier.version, later.version, measure, value])
    return EXIT_OK


def cmd_reliability(args) -> int:
    metrics = _metric_names(args.metric) or None
    mutations = _mutation_kinds(args.mutations)
    corpus = load_corpus(args.corpus)
    report = analyze_corpus(corpus, metrics, mutations, args.repetitions, args.seed, args.jobs)
    if args.out is None:
        write_records(report.records, sys.stdout)
    else:
        for path in report.write(args.out):
            print(path, file=sys.stderr)
    return EXIT_OK


def cmd_mutate(args) -> int:
    try:
        kind = parse_kind(args.kind)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    pair = diff(load_graph(args.earlier), load_graph(args.later))
    mutant = mutate(pair, MutationSpec(kind, args.seed))
    with _output(args.out) as out:
        out.write(dumps(mutant))
    return EXIT_OK


def cmd_summary(args) -> int:
    graphs = []
    for raw in args.paths:
        path = Path(raw)
        if path.is_dir():
            for artifact, members in sorted(load_corpus(path).items()):
                by_version = {g.version: g for g in members}
                graphs.extend(by_version[v] for v in sort_versions(by_version, artifact))
        else:
            graphs.append(load_graph(path))
    with _output(args.out) as out:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(("artifact", "version", "types", "packages", "edges"))
        for g in graphs:
            s = graph_summary(g)
            w.writerow([g.artifact, g.version, s.types, s.packages, s.edges])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="metrel", description="Dependency-graph metrics and their reliability across versions.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("metrics", help="per-type metric values of one graph")
    p.add_argument("graph")
    sel = p.add_mutually_exclusive_group()
    sel.add_argument("--metric", action="append", help="metric name (repeatable, or comma separated)")
    sel.add_argument("--all", action="store_true", help="every metric computable from the graph alone")
    p.add_argument("--out", help="output file (default: standard output)")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("pair", help="evolution report of a version pair")
    p.add_argument("earlier")
    p.add_argument("later")
    p.add_argument("--out", help="output file (default: standard output)")
    p.set_defaults(func=cmd_pair)

    p = sub.add_parser("reliability", help="metric reliability over a corpus directory")
    p.add_argument("corpus")
    p.add_argument("--metric", action="append", help="restrict to these metrics")
    p.add_argument("--mutations", help="comma separated mutation kinds, or 'all'")
    p.add_argument("--repetitions", type=_positive, default=DEFAULT_REPETITIONS)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--jobs", type=_positive, default=1)
    p.add_argument("--out", help="output directory (default: records table on standard output)")
    p.set_defaults(func=cmd_reliability)

    p = sub.add_parser("mutate", help="write a random mutant standing in for a version")
    p.add_argument("earlier")
    p.add_argument("later")
    p.add_argument("kind", help="m0-grow, m0-shrink or m1..m5")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", help="output file (default: standard output)")
    p.set_defaults(func=cmd_mutate)

    p = sub.add_parser("summary", help="size of graphs or corpus directories")
    p.add_argument("paths", nargs="+")
    p.add_argument("--out", help="output file (default: standard output)")
    p.set_defaults(func=cmd_summary)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"metrel: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InputError, OSError) as exc:
        print(f"metrel: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ComputationError as exc:
        print(f"metrel: cannot compute: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
