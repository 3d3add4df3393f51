"""Corpus batch driver: loading, per-pair jobs and the report tables.

A corpus directory holds one sub-directory per artifact, each with one
``.graph`` file per version.  Versions are ordered by their parsed Dewey
levels, never by file name or time.  Each consecutive pair is one job; job
results are merged in key order, so ``jobs`` never changes the output.
"""

from __future__ import annotations

import csv
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, TextIO

from .catalog import GLOBAL_NUMERICAL, MARKERS, NUMERICAL, MetricSuite, format_value
from .errors import InputError, PairingError
from .evolution import VersionPair, consecutive_pairs, diff
from .graph import VersionedGraph, load_graph
from .reliability import (
    DEFAULT_REPETITIONS,
    MARKER_KIND,
    NEGATION_KIND,
    NUMERICAL_KIND,
    SKIP_MISSING,
    Advantage,
    CorrelationRecord,
    ReliabilityRecord,
    StyleResult,
    marker_reliability,
    mutation_advantages,
    negation_reliability,
    numerical_reliability,
    prevalence_change,
    reliability_vs_cardinality,
    skipped_record,
    style_preservation,
)
from .stats import summarize

GRAPH_SUFFIX = ".graph"


def load_corpus(root: str | Path) -> dict[str, list[VersionedGraph]]:
    """Graphs per artifact, keyed by directory name, in file-name order.

    Every file must declare the artifact its directory is named after.
    """
    root = Path(root)
    if not root.is_dir():
        raise InputError(f"{root}: not a corpus directory")
    corpus = {}
    for sub in sorted(p for p in root.iterdir() if p.is_dir()):
        graphs = []
        for path in sorted(sub.glob("*" + GRAPH_SUFFIX)):
            g = load_graph(path)
            if g.artifact != sub.name:
                raise PairingError(f"{path}: declares artifact {g.artifact!r}, expected {sub.name!r}")
            graphs.append(g)
        if graphs:
            corpus[sub.name] = graphs
    if not corpus:
        raise InputError(f"{root}: no artifacts with {GRAPH_SUFFIX} files")
    return corpus


def corpus_pairs(corpus: dict[str, list[VersionedGraph]]) -> list[VersionPair]:
    pairs = []
    for artifact in sorted(corpus):
        pairs.extend(consecutive_pairs(corpus[artifact]))
    return pairs


@dataclass(frozen=True)
class PairReport:
    key: tuple[str, str, str]
    records: list[ReliabilityRecord]
    style: list[StyleResult]
    prevalence: list[tuple[str, float]]  # (marker, change in points)
    advantages: list[Advantage] = field(default_factory=list)


@dataclass(frozen=True)
class PairJob:
    earlier: VersionedGraph
    later: VersionedGraph
    metrics: tuple[str, ...]
    mutations: tuple[str, ...] = ()
    repetitions: int = DEFAULT_REPETITIONS
    seed: int = 0


def run_pair(job: PairJob) -> PairReport:
    """Every selected metric's reliability (and mutation advantages) on one pair."""
    pair = diff(job.earlier, job.later)
    early, late = MetricSuite(pair.earlier), MetricSuite(pair.later)
    records, style, prevalence = [], [], []
    for name in job.metrics:
        is_marker = name.rstrip("'") in MARKERS
        kinds = (MARKER_KIND, NEGATION_KIND) if is_marker else (NUMERICAL_KIND,)
        if not (early.available(name) and late.available(name)):
            records.extend(skipped_record(pair, name, k, SKIP_MISSING) for k in kinds)
            continue
        e, l = early[name], late[name]
        if is_marker:
            records.append(marker_reliability(pair, e, l))
            records.append(negation_reliability(pair, e, l))
            style.append(style_preservation(pair, e, l))
            if pair.earlier.nodes and pair.later.nodes:
                prevalence.append((name, prevalence_change(pair, e, l)))
        else:
            records.append(numerical_reliability(pair, e, l))
    advantages = []
    targets = [m for m in job.metrics if m in GLOBAL_NUMERICAL]
    for kind in job.mutations:
        advantages.extend(mutation_advantages(pair, targets, kind, job.repetitions, job.seed, (early, late)))
    return PairReport(pair.key, records, style, prevalence, advantages)


def run_jobs(jobs: Sequence[PairJob], workers: int = 1) -> list[PairReport]:
    """Run pair jobs, in parallel when ``workers`` > 1, sorted by pair key."""
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(run_pair, jobs))
    else:
        reports = [run_pair(j) for j in jobs]
    return sorted(reports, key=lambda r: r.key)


def default_metrics() -> tuple[str, ...]:
    return MARKERS + NUMERICAL


# --- report tables -----------------------------------------------------------------


def _fmt(value) -> str:
    return "" if value is None else format_value(value)


def _writer(out: TextIO):
    return csv.writer(out, lineterminator="\n")


RECORD_COLUMNS = (
    "artifact",
    "earlier_version",
    "later_version",
    "metric_name",
    "kind",
    "value",
    "support",
    "p_value",
    "cardinality",
    "reason",
)


def write_records(records: Iterable[ReliabilityRecord], out: TextIO) -> None:
    w = _writer(out)
    w.writerow(RECORD_COLUMNS)
    for r in records:
        card = "" if r.cardinality is None else str(r.cardinality)
        w.writerow([r.artifact, r.earlier_version, r.later_version, r.metric_name, r.kind,
                    _fmt(r.value), r.support, _fmt(r.p_value), card, r.reason])


def _stats_row(values: list[float]) -> list[str]:
    if not values:
        return ["0"] + [""] * 6
    s = summarize(values)
    return [str(s.count)] + [_fmt(x) for x in (s.mean, s.std, s.median, s.mad, s.min, s.max)]


STATS_COLUMNS = ("count", "mean", "std", "median", "mad", "min", "max")


def write_aggregates(records: Sequence[ReliabilityRecord], out: TextIO) -> None:
    """Per (metric, kind) summary of the non-skipped reliability values,
    with the number of skipped records alongside."""
    groups: dict[tuple[str, str], list[ReliabilityRecord]] = {}
    for r in records:
        groups.setdefault((r.metric_name, r.kind), []).append(r)
    w = _writer(out)
    w.writerow(("metric_name", "kind", *STATS_COLUMNS, "skipped"))
    for (metric, kind), members in sorted(groups.items()):
        values = [r.value for r in members if not r.skipped]
        w.writerow([metric, kind, *_stats_row(values), len(members) - len(values)])


def write_plot_data(records: Sequence[ReliabilityRecord], out: TextIO) -> None:
    """Reliability against change cardinality, one row per usable record."""
    w = _writer(out)
    w.writerow(("metric_name", "kind", "artifact", "earlier_version", "later_version", "reliability", "cardinality"))
    for r in sorted(records, key=lambda r: (r.metric_name, r.kind, r.artifact, r.earlier_version, r.later_version)):
        if not r.skipped and r.cardinality is not None:
            w.writerow([r.metric_name, r.kind, r.artifact, r.earlier_version, r.later_version,
                        _fmt(r.value), _fmt(float(r.cardinality))])


def write_correlations(rows: Iterable[CorrelationRecord], out: TextIO) -> None:
    w = _writer(out)
    w.writerow(("metric_name", "kind", "grouping", "artifact", "n", "tau_b", "p_value", "reason"))
    for c in sorted(rows, key=lambda c: (c.metric_name, c.kind, c.grouping, c.artifact)):
        w.writerow([c.metric_name, c.kind, c.grouping, c.artifact, c.n, _fmt(c.tau_b), _fmt(c.p_value), c.reason])


def write_style(reports: Sequence[PairReport], out: TextIO) -> None:
    w = _writer(out)
    w.writerow(("artifact", "earlier_version", "later_version", "metric_name",
                "prevalence_change", "chi2", "p_value", "significant", "reason"))
    for rep in reports:
        change = dict(rep.prevalence)
        for s in rep.style:
            sig = "" if s.significant is None else str(int(s.significant))
            w.writerow([s.artifact, s.earlier_version, s.later_version, s.metric_name,
                        _fmt(change.get(s.metric_name)), _fmt(s.statistic), _fmt(s.p_value), sig, s.reason])


def write_advantages(advantages: Iterable[Advantage], out: TextIO) -> None:
    w = _writer(out)
    w.writerow(("artifact", "earlier_version", "later_version", "metric_name", "mutation",
                "real_reliability", "mutant_reliability", "advantage", "repetitions", "reason"))
    for a in advantages:
        w.writerow([a.artifact, a.earlier_version, a.later_version, a.metric_name, a.mutation,
                    _fmt(a.real_reliability), _fmt(a.mutant_reliability), _fmt(a.advantage), a.repetitions, a.reason])


def _metric_order(names: Iterable[str]) -> list[str]:
    rank = {m: i for i, m in enumerate(GLOBAL_NUMERICAL)}
    return sorted(set(names), key=lambda m: (rank.get(m, len(rank)), m))


def write_advantage_medians(advantages: Sequence[Advantage], out: TextIO) -> None:
    """Median advantage (with M.A.D.) over pairs, per metric and mutation."""
    groups: dict[tuple[str, str], list[float]] = {}
    for a in advantages:
        vals = groups.setdefault((a.metric_name, a.mutation), [])
        if a.advantage is not None:
            vals.append(a.advantage)
    w = _writer(out)
    w.writerow(("metric_name", "mutation", "median", "mad", "count"))
    for metric in _metric_order(m for m, _ in groups):
        for (m, kind), vals in sorted(groups.items(), key=lambda kv: kv[0][1]):
            if m != metric:
                continue
            s = summarize(vals) if vals else None
            w.writerow([m, kind, _fmt(s and s.median), _fmt(s and s.mad), len(vals)])


def write_reliability_medians(
    records: Sequence[ReliabilityRecord], advantages: Sequence[Advantage], out: TextIO
) -> None:
    """Median reliability over pairs of each global metric, for the real
    pairs (series ``real``) and for each mutation."""
    series: dict[tuple[str, str], list[float]] = {}
    for r in records:
        if r.kind == NUMERICAL_KIND and r.metric_name in GLOBAL_NUMERICAL and not r.skipped:
            series.setdefault((r.metric_name, "real"), []).append(r.value)
    for a in advantages:
        vals = series.setdefault((a.metric_name, a.mutation), [])
        if a.mutant_reliability is not None:
            vals.append(a.mutant_reliability)
    w = _writer(out)
    w.writerow(("metric_name", "series", "median", "count"))
    order = lambda kv: (kv[0][1] != "real", kv[0][1])
    for metric in _metric_order(m for m, _ in series):
        for (m, name), vals in sorted(series.items(), key=order):
            if m == metric:
                w.writerow([m, name, _fmt(statistics.median(vals) if vals else None), len(vals)])


@dataclass(frozen=True)
class CorpusReport:
    reports: list[PairReport]

    @property
    def records(self) -> list[ReliabilityRecord]:
        return [r for rep in self.reports for r in rep.records]

    @property
    def advantages(self) -> list[Advantage]:
        return [a for rep in self.reports for a in rep.advantages]

    def write(self, out_dir: str | Path) -> list[Path]:
        """Write every table into ``out_dir``; returns the paths written."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        records = self.records
        tables = {
            "records.csv": lambda f: write_records(records, f),
            "aggregates.csv": lambda f: write_aggregates(records, f),
            "plot.csv": lambda f: write_plot_data(records, f),
            "correlations.csv": lambda f: write_correlations(reliability_vs_cardinality(records), f),
            "style.csv": lambda f: write_style(self.reports, f),
        }
        if self.advantages:
            advantages = self.advantages
            tables["advantages.csv"] = lambda f: write_advantages(advantages, f)
            tables["advantage_medians.csv"] = lambda f: write_advantage_medians(advantages, f)
            tables["reliability_medians.csv"] = lambda f: write_reliability_medians(records, advantages, f)
        written = []
        for name, fill in tables.items():
            path = out_dir / name
            with open(path, "w", encoding="utf-8", newline="") as f:
                fill(f)
            written.append(path)
        return written


def analyze_corpus(
    corpus: dict[str, list[VersionedGraph]],
    metrics: Sequence[str] | None = None,
    mutations: Sequence[str] = (),
    repetitions: int = DEFAULT_REPETITIONS,
    seed: int = 0,
    workers: int = 1,
) -> CorpusReport:
    metrics = tuple(metrics or default_metrics())
    jobs = [
        PairJob(p.earlier, p.later, metrics, tuple(mutations), repetitions, seed)
        for p in corpus_pairs(corpus)
    ]
    if not jobs:
        raise InputError("the corpus has no version pairs")
    return CorpusReport(run_jobs(jobs, workers))
