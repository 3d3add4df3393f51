"""Consecutive-version diffs: node partition, edge-kind breakdown, growth and
preservation ratios, and version-change cardinality."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, cmp_to_key
from typing import Iterable, Sequence

from .errors import NoChangeError, NormalizationError, OrderingError, PairingError, VersionParseError
from .graph import VersionedGraph
from .stats import TauResult, kendall_tau_b

EDGE_KINDS = (
    "core_core_preserved",
    "core_core_added",
    "core_core_removed",
    "core_new",
    "new_core",
    "new_new",
    "core_removed",
    "removed_core",
    "removed_removed",
)
ADDED_KINDS = ("core_core_added", "core_new", "new_core", "new_new")


@dataclass(frozen=True, eq=False)
class VersionPair:
    earlier: VersionedGraph
    later: VersionedGraph

    @cached_property
    def core(self) -> frozenset[str]:
        return frozenset(self.earlier.nodes.keys() & self.later.nodes.keys())

    @cached_property
    def removed(self) -> frozenset[str]:
        return frozenset(self.earlier.nodes.keys() - self.later.nodes.keys())

    @cached_property
    def new_nodes(self) -> frozenset[str]:
        return frozenset(self.later.nodes.keys() - self.earlier.nodes.keys())

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.earlier.artifact, self.earlier.version, self.later.version)

    def edge_kind(self, edge: tuple[str, str]) -> str:
        s, t = edge
        core = self.core
        if s in core and t in core:
            in_e = edge in self.earlier.edges
            in_l = edge in self.later.edges
            if in_e and in_l:
                return "core_core_preserved"
            return "core_core_added" if in_l else "core_core_removed"
        side = lambda v: "core" if v in core else ("new" if v in self.new_nodes else "removed")
        return f"{side(s)}_{side(t)}"

    @cached_property
    def edges_by_kind(self) -> dict[str, frozenset[tuple[str, str]]]:
        groups: dict[str, set] = {k: set() for k in EDGE_KINDS}
        for e in self.earlier.edges | self.later.edges:
            groups[self.edge_kind(e)].add(e)
        return {k: frozenset(v) for k, v in groups.items()}


def diff(earlier: VersionedGraph, later: VersionedGraph) -> VersionPair:
    if earlier.artifact != later.artifact:
        raise PairingError(f"cannot pair artifact {earlier.artifact!r} with {later.artifact!r}")
    return VersionPair(earlier, later)


@dataclass(frozen=True)
class KindCounts:
    edges: int
    sources: int
    targets: int
    edges_pct: float | None
    sources_pct: float
    targets_pct: float


def edge_breakdown(pair: VersionPair) -> dict[str, KindCounts]:
    """Per edge kind: edge count and distinct source/target nodes, each also
    as a percentage of the earlier version's edges (resp. types).  The edge
    percentage is ``None`` when the earlier version has no edges."""
    n_types = len(pair.earlier.nodes)
    n_edges = len(pair.earlier.edges)
    if n_types == 0:
        raise NormalizationError("earlier version is empty")
    out = {}
    for kind, edges in pair.edges_by_kind.items():
        sources = len({s for s, _ in edges})
        targets = len({t for _, t in edges})
        out[kind] = KindCounts(
            edges=len(edges),
            sources=sources,
            targets=targets,
            edges_pct=100.0 * len(edges) / n_edges if n_edges else None,
            sources_pct=100.0 * sources / n_types,
            targets_pct=100.0 * targets / n_types,
        )
    return out


@dataclass(frozen=True)
class EvolutionSummary:
    """Exact ratios (as fractions) of growth and preservation in a pair.

    Edge-based ratios are ``None`` when their denominator is zero; the
    unchanged-type fractions are ``None`` when the pair has no core types.
    """

    types: Fraction
    edges: Fraction | None
    remaining_types: Fraction
    continuing_types: Fraction | None
    remaining_edges: Fraction | None
    continuing_edges: Fraction | None
    unchanged_outgoing: Fraction | None
    unchanged_incoming: Fraction | None
    unchanged_both: Fraction | None


def _ratio(num: int, den: int) -> Fraction | None:
    return Fraction(num, den) if den else None


def evolution_summary(pair: VersionPair) -> EvolutionSummary:
    e, l = pair.earlier, pair.later
    if not e.nodes:
        raise NormalizationError("earlier version is empty")
    core = pair.core
    preserved = len(pair.edges_by_kind["core_core_preserved"])
    same_out = same_in = same_both = 0
    for v in core:
        o = e.successors[v] == l.successors[v]
        i = e.predecessors[v] == l.predecessors[v]
        same_out += o
        same_in += i
        same_both += o and i
    return EvolutionSummary(
        types=Fraction(len(l.nodes), len(e.nodes)),
        edges=_ratio(len(l.edges), len(e.edges)),
        remaining_types=Fraction(len(core), len(e.nodes)),
        continuing_types=_ratio(len(core), len(l.nodes)),
        remaining_edges=_ratio(preserved, len(e.edges)),
        continuing_edges=_ratio(preserved, len(l.edges)),
        unchanged_outgoing=_ratio(same_out, len(core)),
        unchanged_incoming=_ratio(same_in, len(core)),
        unchanged_both=_ratio(same_both, len(core)),
    )


# --- version labels ---------------------------------------------------------------

_COMPONENT = re.compile(r"^(\d+)[-_+]?(.*)$")
_LEVEL = re.compile(r"^[0-9A-Za-z]+$")


def parse_version(label: str) -> tuple[str, ...]:
    """Dewey levels of a version label.

    Components are split on ``.``; a trailing non-digit suffix of a numeric
    component becomes a deeper level, so ``20.0-b11`` gives
    ``('20', '0', 'b11')``.
    """
    if not label:
        raise VersionParseError("empty version label")
    levels: list[str] = []
    for part in label.split("."):
        m = _COMPONENT.match(part)
        if m and m.group(2):
            pieces = [m.group(1), m.group(2)]
        else:
            pieces = [part]
        for piece in pieces:
            if not _LEVEL.match(piece):
                raise VersionParseError(f"cannot parse version label {label!r}")
            levels.append(piece)
    return tuple(levels)


@dataclass(frozen=True)
class CardinalityRank:
    level: int

    @property
    def cardinality(self) -> Fraction:
        return Fraction(1, 2 ** (self.level - 1))


def change_cardinality(earlier_version: str, later_version: str) -> CardinalityRank:
    a, b = parse_version(earlier_version), parse_version(later_version)
    if a == b:
        raise NoChangeError(f"versions {earlier_version!r} and {later_version!r} are identical")
    for level, (x, y) in enumerate(zip(a, b), start=1):
        if x != y:
            return CardinalityRank(level)
    return CardinalityRank(min(len(a), len(b)) + 1)


def _level_key(level: str):
    return (0, int(level)) if level.isdigit() else (1, level)


def compare_versions(a: str, b: str) -> int:
    """Componentwise Dewey order: numbers numerically, tags as strings, a
    prefix before its extensions.  A number and a tag at the same level are
    incomparable."""
    pa, pb = parse_version(a), parse_version(b)
    for x, y in zip(pa, pb):
        if x == y:
            continue
        kx, ky = _level_key(x), _level_key(y)
        if kx[0] != ky[0]:
            raise OrderingError(f"cannot order {a!r} against {b!r}: {x!r} vs {y!r}")
        if kx[1] != ky[1]:
            return -1 if kx[1] < ky[1] else 1
    if len(pa) != len(pb):
        return -1 if len(pa) < len(pb) else 1
    if a != b:
        raise OrderingError(f"versions {a!r} and {b!r} have the same Dewey levels")
    return 0


def sort_versions(labels: Iterable[str], artifact: str = "") -> list[str]:
    try:
        return sorted(labels, key=cmp_to_key(compare_versions))
    except (OrderingError, VersionParseError) as exc:
        raise OrderingError(f"artifact {artifact!r}: {exc}") from None


def consecutive_pairs(graphs: Sequence[VersionedGraph]) -> list[VersionPair]:
    """Pairs of subsequent versions, after ordering by version label."""
    by_version = {g.version: g for g in graphs}
    if len(by_version) != len(graphs):
        raise OrderingError("duplicate version labels")
    artifact = graphs[0].artifact if graphs else ""
    ordered = [by_version[v] for v in sort_versions(by_version, artifact)]
    return [diff(a, b) for a, b in zip(ordered, ordered[1:])]


def relative_magnitude(pair: VersionPair, measure: str = "types") -> float:
    """Relative increase in types (or edges) from the earlier version."""
    if measure == "types":
        before, after = len(pair.earlier.nodes), len(pair.later.nodes)
    elif measure == "edges":
        before, after = len(pair.earlier.edges), len(pair.later.edges)
    else:
        raise ValueError(f"unknown magnitude measure {measure!r}")
    if before == 0:
        raise NormalizationError(f"earlier version has no {measure}")
    return (after - before) / before


def correlate_cardinality(magnitudes: Sequence[float], cardinalities: Sequence[float], **kw) -> TauResult:
    """tau-b between the ranking by change cardinality and by magnitude."""
    return kendall_tau_b([float(c) for c in cardinalities], list(magnitudes), **kw)


def correlate_pairs(pairs: Sequence[VersionPair], measure: str = "types", per_artifact: bool = False):
    """Ensemble-wide (key ``None``) or per-artifact correlation of change
    cardinality with relative magnitude."""
    groups: dict[str | None, list[VersionPair]] = {}
    for p in pairs:
        groups.setdefault(p.earlier.artifact if per_artifact else None, []).append(p)
    out = {}
    for key, members in sorted(groups.items(), key=lambda kv: (kv[0] is not None, kv[0] or "")):
        mags = [relative_magnitude(p, measure) for p in members]
        cards = [change_cardinality(p.earlier.version, p.later.version).cardinality for p in members]
        out[key] = correlate_cardinality(mags, cards)
    return out
