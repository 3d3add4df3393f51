"""Versioned dependency graphs and the line-oriented ``.graph`` file format.

A graph file looks like::

    graph junit 3.8.1
    node junit.framework.Test junit.framework marker=interface val=DIT:0
    node junit.framework.TestCase junit.framework val=DIT:1 val=WMC:42
    edge junit.framework.TestCase junit.framework.Test

``marker=<name>`` sets a marker to true; ``marker=<name>:0`` records an
explicit false.  A marker that is not mentioned is *not provided*, which is
different from false.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from types import MappingProxyType
from typing import IO, Iterable, Mapping

from .errors import GraphParseError, GraphValidationError, ReferentialIntegrityError

MARKER_NAMES = (
    "final",
    "abstract",
    "interface",
    "pure",
    "pool",
    "designator",
    "function_pointer",
    "stateless",
    "sampler",
    "canopy",
)
SEMANTIC_METRICS = ("DIT", "NOA", "NOC", "CBO", "RFC", "WMC")

_TOKEN = re.compile(r"\S+")


@dataclass(frozen=True)
class NodeAttrs:
    package: str
    markers: Mapping[str, bool] = field(default_factory=dict)
    semantic_values: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.package:
            raise GraphValidationError("package must be non-empty")
        for name in self.markers:
            if name not in MARKER_NAMES:
                raise GraphValidationError(f"unknown marker {name!r}")
        for name, value in self.semantic_values.items():
            if name not in SEMANTIC_METRICS:
                raise GraphValidationError(f"unknown semantic metric {name!r}")
            if isinstance(value, bool) or not isinstance(value, int) or value < 0:
                raise GraphValidationError(f"{name} must be a non-negative integer, got {value!r}")
        object.__setattr__(self, "markers", MappingProxyType(dict(self.markers)))
        object.__setattr__(self, "semantic_values", MappingProxyType(dict(self.semantic_values)))

    def __eq__(self, other):
        if not isinstance(other, NodeAttrs):
            return NotImplemented
        return (
            self.package == other.package
            and dict(self.markers) == dict(other.markers)
            and dict(self.semantic_values) == dict(other.semantic_values)
        )

    def __reduce__(self):  # mapping proxies do not pickle
        return (NodeAttrs, (self.package, dict(self.markers), dict(self.semantic_values)))

    def __hash__(self):
        return hash((self.package, tuple(sorted(self.markers.items())), tuple(sorted(self.semantic_values.items()))))


@dataclass(frozen=True)
class SizeSummary:
    types: int
    packages: int
    edges: int


@dataclass(frozen=True)
class IndexedAdjacency:
    ids: tuple[str, ...]
    position: Mapping[str, int]
    succ: list[list[int]]
    pred: list[list[int]]


@dataclass(frozen=True, eq=False)
class VersionedGraph:
    """Immutable directed graph of one artifact version.

    Edges point from a type to the types it uses.  Adjacency views are built
    lazily and cached; the graph itself never changes after construction.
    """

    artifact: str
    version: str
    nodes: Mapping[str, NodeAttrs]
    edges: frozenset[tuple[str, str]]

    def __post_init__(self):
        object.__setattr__(self, "nodes", MappingProxyType(dict(self.nodes)))
        object.__setattr__(self, "edges", frozenset(self.edges))
        for node in self.nodes:
            if not node or _TOKEN.fullmatch(node) is None:
                raise GraphValidationError(f"invalid node id {node!r}")
        for s, t in self.edges:
            if s == t:
                raise GraphValidationError(f"self-loop on {s!r}")
            for end in (s, t):
                if end not in self.nodes:
                    raise ReferentialIntegrityError(f"edge ({s}, {t}) refers to undeclared node {end!r}")

    def __eq__(self, other):
        if not isinstance(other, VersionedGraph):
            return NotImplemented
        return (
            self.artifact == other.artifact
            and self.version == other.version
            and dict(self.nodes) == dict(other.nodes)
            and self.edges == other.edges
        )

    def __hash__(self):
        return hash((self.artifact, self.version, len(self.nodes), self.edges))

    def __len__(self):
        return len(self.nodes)

    def __reduce__(self):  # drops the cached views along with the proxy
        return (VersionedGraph, (self.artifact, self.version, dict(self.nodes), self.edges))

    @cached_property
    def node_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self.nodes))

    @cached_property
    def successors(self) -> Mapping[str, tuple[str, ...]]:
        out: dict[str, list[str]] = {v: [] for v in self.node_ids}
        for s, t in self.edges:
            out[s].append(t)
        return MappingProxyType({v: tuple(sorted(ts)) for v, ts in out.items()})

    @cached_property
    def predecessors(self) -> Mapping[str, tuple[str, ...]]:
        inc: dict[str, list[str]] = {v: [] for v in self.node_ids}
        for s, t in self.edges:
            inc[t].append(s)
        return MappingProxyType({v: tuple(sorted(ss)) for v, ss in inc.items()})

    @cached_property
    def indexed(self) -> "IndexedAdjacency":
        """Integer-indexed adjacency, nodes numbered in sorted id order."""
        ids = self.node_ids
        pos = {v: i for i, v in enumerate(ids)}
        succ: list[list[int]] = [[] for _ in ids]
        pred: list[list[int]] = [[] for _ in ids]
        for s, t in sorted(self.edges):
            succ[pos[s]].append(pos[t])
            pred[pos[t]].append(pos[s])
        return IndexedAdjacency(ids, pos, succ, pred)

    def replace(self, *, version=None, nodes=None, edges=None) -> "VersionedGraph":
        return VersionedGraph(
            self.artifact,
            self.version if version is None else version,
            self.nodes if nodes is None else nodes,
            self.edges if edges is None else edges,
        )


def reverse(g: VersionedGraph) -> VersionedGraph:
    """Same nodes and attributes with every edge flipped."""
    return g.replace(edges=frozenset((t, s) for s, t in g.edges))


def graph_summary(g: VersionedGraph) -> SizeSummary:
    packages = {attrs.package for attrs in g.nodes.values()}
    return SizeSummary(types=len(g.nodes), packages=len(packages), edges=len(g.edges))


# --- file format -------------------------------------------------------------


def _parse_node_attr(token: str, lineno: int, col: int, markers: dict, values: dict):
    key, sep, rest = token.partition("=")
    if not sep or not rest:
        raise GraphParseError(f"expected marker=<name> or val=<metric>:<int>, got {token!r}", lineno, col)
    if key == "marker":
        name, colon, flag = rest.partition(":")
        if colon and flag not in ("0", "1"):
            raise GraphParseError(f"marker flag must be 0 or 1, got {flag!r}", lineno, col)
        if name not in MARKER_NAMES:
            raise GraphParseError(f"unknown marker {name!r}", lineno, col)
        if name in markers:
            raise GraphParseError(f"marker {name!r} given twice", lineno, col)
        markers[name] = flag != "0"
    elif key == "val":
        name, colon, num = rest.partition(":")
        if not colon or not num.isdigit() or not num.isascii():
            raise GraphParseError(f"expected val=<metric>:<int>, got {token!r}", lineno, col)
        if name not in SEMANTIC_METRICS:
            raise GraphParseError(f"unknown semantic metric {name!r}", lineno, col)
        if name in values:
            raise GraphParseError(f"value {name!r} given twice", lineno, col)
        values[name] = int(num)
    else:
        raise GraphParseError(f"unknown node attribute {key!r}", lineno, col)


def parse_graph(lines: Iterable[str]) -> VersionedGraph:
    header = None
    nodes: dict[str, NodeAttrs] = {}
    edges: dict[tuple[str, str], int] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0]
        tokens = [(m.group(), m.start() + 1) for m in _TOKEN.finditer(line)]
        if not tokens:
            continue
        keyword, col = tokens[0]
        if keyword == "graph":
            if header is not None:
                raise GraphParseError("duplicate graph header", lineno, col)
            if len(tokens) != 3:
                raise GraphParseError("expected 'graph <artifact> <version>'", lineno, col)
            header = (tokens[1][0], tokens[2][0])
            continue
        if header is None:
            raise GraphParseError("missing 'graph <artifact> <version>' header", lineno, col)
        if keyword == "node":
            if len(tokens) < 3:
                raise GraphParseError("expected 'node <id> <package> ...'", lineno, col)
            node_id, node_col = tokens[1]
            if node_id in nodes:
                raise GraphParseError(f"node {node_id!r} declared twice", lineno, node_col)
            markers: dict[str, bool] = {}
            values: dict[str, int] = {}
            for token, tcol in tokens[3:]:
                _parse_node_attr(token, lineno, tcol, markers, values)
            nodes[node_id] = NodeAttrs(tokens[2][0], markers, values)
        elif keyword == "edge":
            if len(tokens) != 3:
                raise GraphParseError("expected 'edge <src> <dst>'", lineno, col)
            s, t = tokens[1][0], tokens[2][0]
            if s == t:
                raise GraphValidationError(f"line {lineno}: self-loop on {s!r}")
            edges.setdefault((s, t), lineno)
        else:
            raise GraphParseError(f"unknown keyword {keyword!r}", lineno, col)
    if header is None:
        raise GraphParseError("empty input: missing graph header", 1)
    for (s, t), lineno in edges.items():
        for end in (s, t):
            if end not in nodes:
                raise ReferentialIntegrityError(f"line {lineno}: edge ({s}, {t}) refers to undeclared node {end!r}")
    return VersionedGraph(header[0], header[1], nodes, frozenset(edges))


def load_graph(source: bytes | str | Path | IO[bytes] | IO[str]) -> VersionedGraph:
    """Read a graph from raw bytes, a path, or an open stream."""
    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            data = fh.read()
    elif isinstance(source, bytes):
        data = source
    else:
        data = source.read()
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            line = data[: exc.start].count(b"\n") + 1
            raise GraphParseError("input is not valid UTF-8", line) from None
    else:
        text = data
    return parse_graph(io.StringIO(text))


def dumps(g: VersionedGraph) -> str:
    out = [f"graph {g.artifact} {g.version}"]
    for v in g.node_ids:
        attrs = g.nodes[v]
        parts = ["node", v, attrs.package]
        for name in sorted(attrs.markers):
            parts.append(f"marker={name}" if attrs.markers[name] else f"marker={name}:0")
        for name in sorted(attrs.semantic_values):
            parts.append(f"val={name}:{attrs.semantic_values[name]}")
        out.append(" ".join(parts))
    for s, t in sorted(g.edges):
        out.append(f"edge {s} {t}")
    return "\n".join(out) + "\n"


def save_graph(g: VersionedGraph, path: str | Path) -> None:
    Path(path).write_bytes(dumps(g).encode("utf-8"))
