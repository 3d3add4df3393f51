"""Reliability of metrics across a version pair.

Marker metrics: the share of core types keeping the marker (or, for the
negation, keeping its absence).  Numerical metrics: Kendall's tau-b between
the two versions' values over the core types.  The same measures are taken
against random mutants to separate what real evolution preserves from what
any small change would preserve.
"""

from __future__ import annotations

import hashlib
import statistics
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .catalog import MetricSuite
from .errors import (
    ComputationError,
    DegenerateRankingError,
    InfeasibleError,
    InsufficientDataError,
    MetrelError,
    NormalizationError,
)
from .evolution import VersionPair, change_cardinality, diff
from .mutation import MutationSpec, mutate
from .stats import chi_squared_prevalence, kendall_tau_b
from .topo import MetricVector

MARKER_KIND = "marker"
NEGATION_KIND = "marker_negation"
NUMERICAL_KIND = "numerical"

SKIP_NO_SUPPORT = "no-support"
SKIP_DEGENERATE = "degenerate-ranking"
SKIP_INSUFFICIENT = "insufficient-data"
SKIP_NO_NEW_TYPES = "no-new-types"
SKIP_DEGENERATE_TABLE = "degenerate-table"
SKIP_MISSING = "missing-attribute"
SKIP_INFEASIBLE = "infeasible-mutation"

ALPHA = 0.05
DEFAULT_REPETITIONS = 30


@dataclass(frozen=True)
class ReliabilityRecord:
    artifact: str
    earlier_version: str
    later_version: str
    metric_name: str
    kind: str
    value: float | None
    support: int
    p_value: float | None = None
    cardinality: Fraction | None = None
    reason: str = ""

    @property
    def skipped(self) -> bool:
        return self.value is None


def _cardinality(pair: VersionPair) -> Fraction | None:
    try:
        return change_cardinality(pair.earlier.version, pair.later.version).cardinality
    except MetrelError:
        # identical or unparsable labels (mutants, ad hoc pairs): no cardinality
        return None


def _record(pair, metric, kind, value, support, p_value=None, reason=""):
    return ReliabilityRecord(
        pair.earlier.artifact,
        pair.earlier.version,
        pair.later.version,
        metric,
        kind,
        value,
        support,
        p_value,
        _cardinality(pair),
        reason,
    )


def skipped_record(pair: VersionPair, metric: str, kind: str, reason: str) -> ReliabilityRecord:
    return _record(pair, metric, kind, None, 0, reason=reason)


def _preservation(pair, metric, kind, before: dict, after: dict, flag: bool) -> ReliabilityRecord:
    held = [v for v in sorted(pair.core) if before[v] == flag]
    if not held:
        return _record(pair, metric, kind, None, 0, reason=SKIP_NO_SUPPORT)
    kept = sum(1 for v in held if after[v] == flag)
    return _record(pair, metric, kind, kept / len(held), len(held))


def marker_reliability(pair: VersionPair, earlier: MetricVector, later: MetricVector) -> ReliabilityRecord:
    """Share of core types marked in the earlier version that stay marked."""
    return _preservation(pair, earlier.metric_name, MARKER_KIND, earlier.values, later.values, True)


def negation_reliability(pair: VersionPair, earlier: MetricVector, later: MetricVector) -> ReliabilityRecord:
    """Share of unmarked core types that stay unmarked."""
    return _preservation(pair, earlier.metric_name, NEGATION_KIND, earlier.values, later.values, False)


def numerical_reliability(
    pair: VersionPair, earlier: MetricVector, later: MetricVector, *, p_value: bool = True
) -> ReliabilityRecord:
    """tau-b of the metric's values on the core types in the two versions."""
    core = sorted(pair.core)
    name = earlier.metric_name
    try:
        tau = kendall_tau_b([earlier[v] for v in core], [later[v] for v in core], p_value=p_value)
    except DegenerateRankingError:
        return _record(pair, name, NUMERICAL_KIND, None, len(core), reason=SKIP_DEGENERATE)
    except InsufficientDataError:
        return _record(pair, name, NUMERICAL_KIND, None, len(core), reason=SKIP_INSUFFICIENT)
    return _record(pair, name, NUMERICAL_KIND, tau.tau_b, len(core), tau.p_value)


@dataclass(frozen=True)
class StyleResult:
    artifact: str
    earlier_version: str
    later_version: str
    metric_name: str
    statistic: float | None
    p_value: float | None
    significant: bool | None
    reason: str = ""


def style_preservation(pair: VersionPair, earlier: MetricVector, later: MetricVector) -> StyleResult:
    """Chi-squared comparison of marker prevalence in the earlier version and
    among the newly added types."""
    args = (pair.earlier.artifact, pair.earlier.version, pair.later.version, earlier.metric_name)
    new = sorted(pair.new_nodes)
    if not new:
        return StyleResult(*args, None, None, None, SKIP_NO_NEW_TYPES)
    if not pair.earlier.nodes:
        return StyleResult(*args, None, None, None, SKIP_DEGENERATE_TABLE)
    before = (sum(1 for x in earlier.values.values() if x), len(earlier.values))
    added = (sum(1 for v in new if later[v]), len(new))
    try:
        chi = chi_squared_prevalence(before, added)
    except ComputationError:
        return StyleResult(*args, None, None, None, SKIP_DEGENERATE_TABLE)
    return StyleResult(*args, chi.statistic, chi.p_value, chi.p_value < ALPHA)


def prevalence(vec: MetricVector) -> float:
    if not vec.values:
        raise NormalizationError(f"{vec.metric_name}: empty version")
    return 100.0 * sum(1 for x in vec.values.values() if x) / len(vec.values)


def prevalence_change(pair: VersionPair, earlier: MetricVector, later: MetricVector) -> float:
    """Change of marker prevalence, in percentage points."""
    return prevalence(later) - prevalence(earlier)


@dataclass(frozen=True)
class CorrelationRecord:
    grouping: str  # "ensemble" or "artifact"
    artifact: str  # "*" for the ensemble
    metric_name: str
    kind: str
    n: int
    tau_b: float | None
    p_value: float | None
    reason: str = ""


def reliability_vs_cardinality(records: Iterable[ReliabilityRecord]) -> list[CorrelationRecord]:
    """tau-b between change cardinality and reliability, per (metric, kind),
    over the whole ensemble and within each artifact.  Positive values mean
    higher reliability at more cardinal changes."""
    usable = [r for r in records if not r.skipped and r.cardinality is not None]
    groups: dict[tuple[str, str, str, str], list[ReliabilityRecord]] = {}
    for r in usable:
        groups.setdefault(("ensemble", "*", r.metric_name, r.kind), []).append(r)
        groups.setdefault(("artifact", r.artifact, r.metric_name, r.kind), []).append(r)
    out = []
    for key in sorted(groups):
        members = groups[key]
        try:
            tau = kendall_tau_b([float(r.cardinality) for r in members], [r.value for r in members])
        except DegenerateRankingError:
            out.append(CorrelationRecord(*key, len(members), None, None, SKIP_DEGENERATE))
            continue
        except InsufficientDataError:
            out.append(CorrelationRecord(*key, len(members), None, None, SKIP_INSUFFICIENT))
            continue
        out.append(CorrelationRecord(*key, len(members), tau.tau_b, tau.p_value))
    return out


# --- mutation baseline ----------------------------------------------------------


def derive_seed(master: int, *key) -> int:
    """Per-job 64-bit seed: the first 8 bytes (big endian) of
    SHA-256 over ``master`` and the job key joined by ``/``."""
    text = "/".join([str(master), *map(str, key)])
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "big")


@dataclass(frozen=True)
class Advantage:
    artifact: str
    earlier_version: str
    later_version: str
    metric_name: str
    mutation: str
    real_reliability: float | None
    mutant_reliability: float | None
    advantage: float | None
    repetitions: int
    reason: str = ""


def _tau_only(pair: VersionPair, earlier: MetricVector, later: MetricVector) -> float | None:
    return numerical_reliability(pair, earlier, later, p_value=False).value


def mutation_advantages(
    pair: VersionPair,
    metrics: Sequence[str],
    kind: str,
    repetitions: int = DEFAULT_REPETITIONS,
    seed: int = 0,
    suites: tuple[MetricSuite, MetricSuite] | None = None,
) -> list[Advantage]:
    """Real-pair tau-b minus the mean tau-b against ``repetitions`` mutants,
    for several metrics at once (each mutant is generated once)."""
    if repetitions < 1:
        raise ValueError("repetitions must be positive")
    early, late = suites or (MetricSuite(pair.earlier), MetricSuite(pair.later))
    real = {m: _tau_only(pair, early[m], late[m]) for m in metrics}
    samples: dict[str, list[float]] = {m: [] for m in metrics}
    infeasible = 0
    for rep in range(repetitions):
        spec = MutationSpec(kind, derive_seed(seed, *pair.key, kind, rep))
        try:
            mutant = mutate(pair, spec)
        except InfeasibleError:
            infeasible += 1
            continue
        msuite = MetricSuite(mutant)
        if kind == "M0_shrink":
            mpair = diff(mutant, pair.earlier)
            vectors = lambda m: (msuite[m], early[m])
        else:
            mpair = diff(pair.earlier, mutant)
            vectors = lambda m: (early[m], msuite[m])
        for m in metrics:
            value = _tau_only(mpair, *vectors(m))
            if value is not None:
                samples[m].append(value)
    out = []
    for m in metrics:
        base = (pair.earlier.artifact, pair.earlier.version, pair.later.version, m, kind)
        vals = samples[m]
        if real[m] is None:
            out.append(Advantage(*base, None, None, None, len(vals), SKIP_DEGENERATE))
        elif not vals:
            reason = SKIP_INFEASIBLE if infeasible == repetitions else SKIP_DEGENERATE
            out.append(Advantage(*base, real[m], None, None, 0, reason))
        else:
            mean = statistics.fmean(vals)
            out.append(Advantage(*base, real[m], mean, real[m] - mean, len(vals)))
    return out


def mutation_advantage(
    pair: VersionPair, metric: str, kind: str, repetitions: int = DEFAULT_REPETITIONS, seed: int = 0
) -> Advantage:
    return mutation_advantages(pair, [metric], kind, repetitions, seed)[0]
