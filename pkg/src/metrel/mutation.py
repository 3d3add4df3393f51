"""Random mutations that stand in for a real successor version.

``M0`` grows the earlier graph (or shrinks the later one) to the other
version's size with uniformly random nodes and edges.  ``M1``..``M5`` start
from the deterministic base graph (later node set, preserved core/core
edges) and add exactly as many edges of each added kind as the real
successor has, choosing endpoints by a per-locus policy.

Randomness comes from numpy's PCG64.  A mutation seed is expanded with
``numpy.random.SeedSequence(seed).spawn(n)``; structured mutations use child
0 for the core locus, 1 for the cut locus and 2 for the new locus, M0 uses
child 0 for node changes and child 1 for edge changes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InfeasibleError, InfeasiblePolicyError
from .evolution import VersionPair
from .graph import NodeAttrs, VersionedGraph

SAME = "Same"
RANDOM = "Random"
BOUNDARY = "RandomBoundary"

KINDS = ("M0_grow", "M0_shrink", "M1", "M2", "M3", "M4", "M5")

POLICIES = {
    "M1": {"core": RANDOM, "cut": RANDOM, "new": RANDOM},
    "M2": {"core": BOUNDARY, "cut": BOUNDARY, "new": BOUNDARY},
    "M3": {"core": SAME, "cut": BOUNDARY, "new": BOUNDARY},
    "M4": {"core": BOUNDARY, "cut": BOUNDARY, "new": SAME},
    "M5": {"core": SAME, "cut": BOUNDARY, "new": SAME},
}

# added edge kind -> (locus, source group, target group)
_KIND_LOCUS = {
    "core_core_added": ("core", "core", "core"),
    "core_new": ("cut", "core", "new"),
    "new_core": ("cut", "new", "core"),
    "new_new": ("new", "new", "new"),
}
_LOCI = ("core", "cut", "new")

SYNTHETIC_PREFIX = "~m0."
SYNTHETIC_PACKAGE = "~synthetic"
REDRAW_FACTOR = 100


@dataclass(frozen=True)
class MutationSpec:
    kind: str
    seed: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown mutation kind {self.kind!r}; expected one of {KINDS}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @property
    def policies(self) -> dict[str, str]:
        return dict(POLICIES.get(self.kind, {}))

    def label(self, version: str) -> str:
        return f"{version}+{self.kind}+{self.seed}"


def parse_kind(name: str) -> str:
    """Accept ``m0-grow``, ``M0_grow``, ``m3`` and similar spellings."""
    key = name.strip().lower().replace("-", "_")
    for kind in KINDS:
        if kind.lower() == key:
            return kind
    raise ValueError(f"unknown mutation kind {name!r}")


def _streams(seed: int, n: int) -> list[np.random.Generator]:
    return [np.random.Generator(np.random.PCG64(child)) for child in np.random.SeedSequence(seed).spawn(n)]


def _add_uniform_edges(rng, nodes: Sequence[str], edges: set, count: int) -> None:
    """Add ``count`` edges drawn uniformly without replacement from the
    absent non-loop pairs over ``nodes``."""
    n = len(nodes)
    absent = n * (n - 1) - len(edges)
    if count > absent:
        raise InfeasibleError(f"cannot place {count} more edges on {n} nodes ({absent} free pairs)")
    if count == 0:
        return
    if 2 * count <= absent:
        while count:
            s, t = rng.integers(n, size=2)
            if s == t:
                continue
            e = (nodes[s], nodes[t])
            if e not in edges:
                edges.add(e)
                count -= 1
        return
    pool = [(s, t) for s in nodes for t in nodes if s != t and (s, t) not in edges]
    for i in sorted(rng.choice(len(pool), size=count, replace=False)):
        edges.add(pool[i])


def _remove_uniform_edges(rng, edges: set, count: int) -> None:
    if count == 0:
        return
    ordered = sorted(edges)
    for i in rng.choice(len(ordered), size=count, replace=False):
        edges.discard(ordered[i])


def mutate_m0_grow(g: VersionedGraph, target: VersionedGraph, seed: int) -> VersionedGraph:
    """Resize ``g`` to ``target``'s node and edge counts at random.

    Missing nodes get fresh synthetic ids, surplus nodes are dropped
    uniformly; then edges are added (or removed) uniformly.
    """
    n_target, e_target = len(target.nodes), len(target.edges)
    if e_target > n_target * (n_target - 1):
        raise InfeasibleError(f"{e_target} edges do not fit on {n_target} nodes")
    node_rng, edge_rng = _streams(seed, 2)
    nodes = dict(g.nodes)
    edges = set(g.edges)
    if n_target > len(nodes):
        i = 0
        for _ in range(n_target - len(g.nodes)):
            while f"{SYNTHETIC_PREFIX}{i}" in nodes:
                i += 1
            nodes[f"{SYNTHETIC_PREFIX}{i}"] = NodeAttrs(SYNTHETIC_PACKAGE)
            i += 1
    elif n_target < len(nodes):
        ids = g.node_ids
        drop = {ids[i] for i in node_rng.choice(len(ids), size=len(ids) - n_target, replace=False)}
        for v in drop:
            del nodes[v]
        edges = {(s, t) for s, t in edges if s not in drop and t not in drop}
    ids = sorted(nodes)
    if len(edges) < e_target:
        _add_uniform_edges(edge_rng, ids, edges, e_target - len(edges))
    else:
        _remove_uniform_edges(edge_rng, edges, len(edges) - e_target)
    return VersionedGraph(g.artifact, MutationSpec("M0_grow", seed).label(target.version), nodes, frozenset(edges))


def mutate_m0_shrink(g_star: VersionedGraph, target: VersionedGraph, seed: int) -> VersionedGraph:
    """Shrink ``g_star`` to ``target``'s size.

    Nodes go first, isolated ones preferred; a non-isolated node is only
    removed when its incident edges can be spared without dropping below the
    edge target.  The remaining surplus edges are then removed uniformly.
    """
    n_target, e_target = len(target.nodes), len(target.edges)
    if n_target > len(g_star.nodes) or e_target > len(g_star.edges):
        raise InfeasibleError(
            f"cannot shrink {len(g_star.nodes)} nodes/{len(g_star.edges)} edges "
            f"to {n_target} nodes/{e_target} edges"
        )
    node_rng, edge_rng = _streams(seed, 2)
    nodes = dict(g_star.nodes)
    edges = set(g_star.edges)
    degree = {v: len(g_star.successors[v]) + len(g_star.predecessors[v]) for v in nodes}
    adjacent = {v: set(g_star.successors[v]) | set(g_star.predecessors[v]) for v in nodes}
    for _ in range(len(nodes) - n_target):
        alive = sorted(nodes)
        isolated = [v for v in alive if degree[v] == 0]
        spare = len(edges) - e_target
        candidates = isolated or [v for v in alive if degree[v] <= spare]
        if not candidates:
            raise InfeasibleError(
                f"every remaining node carries more than the {spare} removable edges; "
                f"cannot reach {n_target} nodes with {e_target} edges"
            )
        v = candidates[int(node_rng.integers(len(candidates)))]
        for u in adjacent[v]:
            edges.discard((v, u))
            edges.discard((u, v))
            adjacent[u].discard(v)
            degree[u] -= (u, v) in g_star.edges
            degree[u] -= (v, u) in g_star.edges
        del nodes[v], degree[v], adjacent[v]
    _remove_uniform_edges(edge_rng, edges, len(edges) - e_target)
    return VersionedGraph(
        g_star.artifact, MutationSpec("M0_shrink", seed).label(g_star.version), nodes, frozenset(edges)
    )


def transform_base(pair: VersionPair) -> VersionedGraph:
    """Later node set with only the preserved core/core edges."""
    return pair.later.replace(edges=pair.edges_by_kind["core_core_preserved"])


def _draw_edges(rng, sources: list[str], targets: list[str], count: int, forbidden: set, kind: str) -> list:
    if count == 0:
        return []
    if not sources or not targets:
        raise InfeasiblePolicyError(f"{kind}: {count} edges required but the endpoint set is empty")
    source_set, target_set = set(sources), set(targets)
    blocked = len(source_set & target_set) + sum(
        1 for s, t in forbidden if s in source_set and t in target_set and s != t
    )
    pool = len(sources) * len(targets) - blocked
    if pool < count:
        raise InfeasibleError(f"{kind}: only {pool} admissible pairs for {count} edges")
    chosen: dict[tuple[str, str], None] = {}
    budget = REDRAW_FACTOR * count
    while len(chosen) < count:
        if budget == 0:
            raise InfeasibleError(f"{kind}: redraw budget exhausted after {REDRAW_FACTOR * count} draws")
        budget -= 1
        s = sources[int(rng.integers(len(sources)))]
        t = targets[int(rng.integers(len(targets)))]
        e = (s, t)
        if s == t or e in forbidden or e in chosen:
            continue
        chosen[e] = None
    return list(chosen)


def mutate_structured(pair: VersionPair, spec: MutationSpec) -> VersionedGraph:
    if spec.kind not in POLICIES:
        raise ValueError(f"{spec.kind} is not a structured mutation")
    policies = spec.policies
    rngs = dict(zip(_LOCI, _streams(spec.seed, len(_LOCI))))
    groups = {"core": sorted(pair.core), "new": sorted(pair.new_nodes)}
    by_kind = pair.edges_by_kind
    edges = set(by_kind["core_core_preserved"])
    # an added core/core edge must not already exist in the earlier version,
    # otherwise it would count as preserved
    earlier_core = {e for e in pair.earlier.edges if e[0] in pair.core and e[1] in pair.core}
    for kind, (locus, src_group, dst_group) in _KIND_LOCUS.items():
        real = by_kind[kind]
        policy = policies[locus]
        if policy == SAME:
            edges |= real
            continue
        if policy == RANDOM:
            sources, targets = groups[src_group], groups[dst_group]
        else:
            sources = sorted({s for s, _ in real})
            targets = sorted({t for _, t in real})
        forbidden = earlier_core if kind == "core_core_added" else set()
        edges.update(_draw_edges(rngs[locus], sources, targets, len(real), forbidden, kind))
    return pair.later.replace(version=spec.label(pair.later.version), edges=frozenset(edges))


def mutate(pair: VersionPair, spec: MutationSpec) -> VersionedGraph:
    """The mutant standing in for ``pair.later`` (for ``M0_shrink``, the
    mutant stands in for ``pair.earlier``)."""
    if spec.kind == "M0_grow":
        return mutate_m0_grow(pair.earlier, pair.later, spec.seed)
    if spec.kind == "M0_shrink":
        return mutate_m0_shrink(pair.later, pair.earlier, spec.seed)
    return mutate_structured(pair, spec)
