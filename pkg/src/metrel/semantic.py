"""Attribute-backed metrics (CK suite, semantical markers) and Belonging."""

from __future__ import annotations

from .errors import MissingAttributeError, UnsupportedMetricError
from .graph import MARKER_NAMES, SEMANTIC_METRICS, VersionedGraph
from .topo import CONTINUOUS, DISCRETE, MARKER, MetricVector


def semantic_vector(g: VersionedGraph, metric_name: str) -> MetricVector:
    """Copy a node attribute into a metric vector.

    Every node must carry the attribute; the first node (in id order) that
    does not raises :class:`MissingAttributeError`.
    """
    if metric_name in MARKER_NAMES:
        values = {}
        for v in g.node_ids:
            markers = g.nodes[v].markers
            if metric_name not in markers:
                raise MissingAttributeError(v, metric_name)
            values[v] = markers[metric_name]
        return MetricVector(metric_name, MARKER, values)
    if metric_name in SEMANTIC_METRICS:
        values = {}
        for v in g.node_ids:
            sem = g.nodes[v].semantic_values
            if metric_name not in sem:
                raise MissingAttributeError(v, metric_name)
            values[v] = sem[metric_name]
        return MetricVector(metric_name, DISCRETE, values)
    raise UnsupportedMetricError(f"{metric_name!r} is not an attribute-backed metric")


def has_attribute(g: VersionedGraph, metric_name: str) -> bool:
    if metric_name in MARKER_NAMES:
        return all(metric_name in a.markers for a in g.nodes.values())
    return all(metric_name in a.semantic_values for a in g.nodes.values())


def belonging(g: VersionedGraph) -> MetricVector:
    """Share of a node's incident edges (in and out) whose other end lies in
    the same package.  Isolated nodes get 0.0."""
    inside = dict.fromkeys(g.node_ids, 0)
    total = dict.fromkeys(g.node_ids, 0)
    for s, t in g.edges:
        total[s] += 1
        total[t] += 1
        if g.nodes[s].package == g.nodes[t].package:
            inside[s] += 1
            inside[t] += 1
    return MetricVector(
        "Belonging",
        CONTINUOUS,
        {v: (inside[v] / total[v] if total[v] else 0.0) for v in g.node_ids},
    )
