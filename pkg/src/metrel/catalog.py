"""The metric suite: taxonomy, name resolution, duals and batch computation."""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from typing import Callable, Iterable, TextIO

from .errors import UnsupportedMetricError
from .graph import VersionedGraph
from . import semantic, topo
from .topo import CONTINUOUS, DISCRETE, MARKER, MetricVector

PRIME = "'"


@dataclass(frozen=True)
class MetricInfo:
    name: str
    nature: str  # topological | semantical
    directional: bool
    scope: str  # internal | local | global
    range: str  # marker | discrete | continuous


def _info(name, nature, directional, scope, rng):
    return MetricInfo(name, nature, directional, scope, rng)


_T, _S = "topological", "semantical"

# Base metrics in the order of the taxonomy table.
BASE_METRICS: tuple[MetricInfo, ...] = (
    _info("final", _S, False, "internal", MARKER),
    _info("abstract", _S, False, "internal", MARKER),
    _info("interface", _S, False, "internal", MARKER),
    _info("sink", _T, True, "local", MARKER),
    _info("source", _T, True, "local", MARKER),
    _info("balloon", _T, True, "local", MARKER),
    _info("wrapper", _T, True, "local", MARKER),
    _info("pure", _S, False, "internal", MARKER),
    _info("pool", _S, False, "internal", MARKER),
    _info("designator", _S, False, "internal", MARKER),
    _info("function_pointer", _S, False, "internal", MARKER),
    _info("stateless", _S, False, "internal", MARKER),
    _info("sampler", _S, False, "internal", MARKER),
    _info("canopy", _S, False, "internal", MARKER),
    _info("DIT", _S, False, "local", DISCRETE),
    _info("NOA", _S, False, "local", DISCRETE),
    _info("NOC", _S, False, "local", DISCRETE),
    _info("CBO", _S, False, "local", DISCRETE),
    _info("RFC", _S, False, "local", DISCRETE),
    _info("WMC", _S, False, "local", DISCRETE),
    _info("#Incoming", _T, True, "local", DISCRETE),
    _info("#Clients", _T, True, "global", DISCRETE),
    _info("#Outgoing", _T, True, "local", DISCRETE),
    _info("#Descendants", _T, True, "global", DISCRETE),
    _info("#SCCIncoming", _T, True, "global", DISCRETE),
    _info("#SCCClients", _T, True, "global", DISCRETE),
    _info("#SCCOutgoing", _T, True, "global", DISCRETE),
    _info("#SCCDescendants", _T, True, "global", DISCRETE),
    _info("SCCSize", _T, False, "global", DISCRETE),
    _info("#DominatedBy", _T, True, "global", DISCRETE),
    _info("#DominatorHeight", _T, True, "global", DISCRETE),
    _info("#DominatorWeight", _T, True, "global", DISCRETE),
    _info("PageRank", _T, True, "global", CONTINUOUS),
    _info("Betweenness", _T, True, "global", CONTINUOUS),
    _info("Belonging", _S, False, "local", CONTINUOUS),
)
BY_NAME = {m.name: m for m in BASE_METRICS}

DIRECTIONAL = tuple(m.name for m in BASE_METRICS if m.directional)
DUALS = tuple(name + PRIME for name in DIRECTIONAL)

MARKERS = tuple(m.name for m in BASE_METRICS if m.range == MARKER)
TOPOLOGICAL_MARKERS = tuple(m.name for m in BASE_METRICS if m.range == MARKER and m.nature == _T)
SEMANTICAL_MARKERS = tuple(m.name for m in BASE_METRICS if m.range == MARKER and m.nature == _S)

# Everything computable from the graph file alone: topology, packages, duals.
GRAPH_METRICS = tuple(
    m.name for m in BASE_METRICS if m.nature == _T or m.name == "Belonging"
) + DUALS

LOCAL_NUMERICAL = ("DIT", "NOA", "NOC", "CBO", "RFC", "WMC", "#Incoming", "#Outgoing", "Belonging")
GLOBAL_NUMERICAL = (
    "#Clients",
    "#Descendants",
    "#SCCIncoming",
    "#SCCClients",
    "#SCCOutgoing",
    "#SCCDescendants",
    "SCCSize",
    "#DominatedBy",
    "#DominatedBy'",
    "#DominatorHeight",
    "#DominatorHeight'",
    "#DominatorWeight",
    "#DominatorWeight'",
    "PageRank",
    "PageRank'",
    "Betweenness",
    "Betweenness'",
)
NUMERICAL = LOCAL_NUMERICAL + GLOBAL_NUMERICAL

ALL_METRICS = tuple(m.name for m in BASE_METRICS) + DUALS

_ALIASES = {"baloon": "balloon", "betweeness": "Betweenness", "functionpointer": "function_pointer"}


def _squash(name: str) -> str:
    return re.sub(r"[#\s_\-]", "", name).lower()


_LOOKUP = {_squash(n): n for n in ALL_METRICS}
for _alias, _target in _ALIASES.items():
    _LOOKUP[_alias] = _target
    if BY_NAME[_target].directional:
        _LOOKUP[_alias + PRIME] = _target + PRIME


def resolve(name: str) -> str:
    """Canonical metric name for a user-supplied spelling.

    Matching ignores case, ``#``, spaces, dashes and underscores, so
    ``pagerank``, ``dominated-by'`` and ``function pointer`` all resolve.
    """
    key = _squash(name)
    if key.endswith("dual"):
        key = key[: -len("dual")] + PRIME
    try:
        return _LOOKUP[key]
    except KeyError:
        raise UnsupportedMetricError(f"unknown metric {name!r}") from None


def metric_kind(name: str) -> str:
    return BY_NAME[name.rstrip(PRIME)].range


def is_directional(name: str) -> bool:
    info = BY_NAME.get(name)
    return info is not None and info.directional


class MetricSuite:
    """Computes metrics of one graph, sharing work between metrics of the
    same family (all SCC metrics come from one condensation, and so on)."""

    _FAMILIES: dict[str, Callable[[VersionedGraph], dict[str, MetricVector]]] = {
        "degree": topo.degree_metrics,
        "reach": topo.reachability_metrics,
        "scc": topo.scc_metrics,
        "dom": topo.dominator_metrics,
    }
    _FAMILY_OF = {
        "#Incoming": "degree",
        "#Outgoing": "degree",
        "#Clients": "reach",
        "#Descendants": "reach",
        "SCCSize": "scc",
        "#SCCIncoming": "scc",
        "#SCCOutgoing": "scc",
        "#SCCClients": "scc",
        "#SCCDescendants": "scc",
        "#DominatedBy": "dom",
        "#DominatorHeight": "dom",
        "#DominatorWeight": "dom",
    }
    _SINGLES: dict[str, Callable[[VersionedGraph], MetricVector]] = {
        "sink": topo.marker_sink,
        "source": topo.marker_source,
        "balloon": topo.marker_balloon,
        "wrapper": topo.marker_wrapper,
        "PageRank": topo.pagerank,
        "Betweenness": topo.betweenness,
        "Belonging": semantic.belonging,
    }

    def __init__(self, g: VersionedGraph):
        self.graph = g
        self._cache: dict[str, MetricVector] = {}
        self._families: dict[str, dict[str, MetricVector]] = {}
        self._dual_suite: MetricSuite | None = None

    def __getitem__(self, name: str) -> MetricVector:
        if name not in self._cache:
            self._cache[name] = self._compute(name)
        return self._cache[name]

    def _compute(self, name: str) -> MetricVector:
        if name.endswith(PRIME):
            base = name[: -len(PRIME)]
            if not is_directional(base):
                raise UnsupportedMetricError(f"{base!r} has no dual: it is not a directional metric")
            if self._dual_suite is None:
                self._dual_suite = MetricSuite(topo.reversed_view(self.graph))
            return self._dual_suite[base].renamed(name)
        family = self._FAMILY_OF.get(name)
        if family is not None:
            if family not in self._families:
                self._families[family] = self._FAMILIES[family](self.graph)
            return self._families[family][name]
        if name in self._SINGLES:
            return self._SINGLES[name](self.graph)
        if name in BY_NAME:
            return semantic.semantic_vector(self.graph, name)
        raise UnsupportedMetricError(f"unknown metric {name!r}")

    def available(self, name: str) -> bool:
        base = name.rstrip(PRIME)
        info = BY_NAME.get(base)
        if info is None:
            return False
        if info.nature == _T or base == "Belonging":
            return True
        return semantic.has_attribute(self.graph, base)


def compute_metric(g: VersionedGraph, name: str) -> MetricVector:
    return MetricSuite(g)[name]


def dual_metric(metric_name: str, g: VersionedGraph) -> MetricVector:
    """The primed metric: ``metric_name`` computed on the reversed graph."""
    if not is_directional(metric_name):
        raise UnsupportedMetricError(f"{metric_name!r} is not a directional metric")
    return MetricSuite(g)[metric_name + PRIME]


def format_value(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    return format(value, ".12g")


def write_metric_csv(vectors: Iterable[MetricVector], out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["node_id", "metric_name", "value"])
    for vec in vectors:
        for node in sorted(vec.values):
            writer.writerow([node, vec.metric_name, format_value(vec.values[node])])
