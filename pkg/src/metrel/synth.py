"""Scripted generator of evolving layered artifacts.

Types live in packages stacked in layers; dependencies point from a layer to
the ones below it, except inside a few small package-local cycles.  Each new
version adds types on top of the existing design (new types mostly use core
types), adds dependencies inside existing modules, and drops a small
number of types and edges.  Semantic markers and values drift slowly, so the
graphs also exercise the semantical metrics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import NodeAttrs, VersionedGraph, reverse
from .topo import VIRTUAL_ROOT, dominator_tree

DEFAULT_VERSIONS = ("1.0", "1.1", "1.2", "2.0", "2.1")

_MARKER_RATES = {"final": 0.3, "abstract": 0.1, "interface": 0.15, "stateless": 0.2, "pure": 0.05}


@dataclass(frozen=True)
class SynthConfig:
    nodes: int = 200  # types in the first version
    modules: int = 20  # top-level modules, each with a base type
    layers: int = 8
    versions: tuple[str, ...] = DEFAULT_VERSIONS
    out_degree: float = 2.5  # mean extra dependencies of a type
    locality: float = 0.9  # share of those that stay inside the module
    utility_layers: int = 2  # layers holding shared utilities
    cycles_per_layer: int = 2
    growth: float = 0.06  # new types per version, relative to size
    core_edge_growth: float = 0.1  # new dependencies among existing types, relative to edges
    utility_share: float = 0.3  # share of those among utilities
    shortcut_bias: float = 1.0  # preference for shortcuts around large dominator subtrees
    core_users: float = 0.0  # dependencies of existing types on new ones, per new type
    node_loss: float = 0.01
    edge_loss: float = 0.01
    marker_flip: float = 0.02
    semantics: bool = True


class _State:
    def __init__(self, artifact: str, cfg: SynthConfig, rng: np.random.Generator):
        self.artifact = artifact
        self.cfg = cfg
        self.rng = rng
        self.layer: dict[str, int] = {}
        self.markers: dict[str, dict[str, bool]] = {}
        self.values: dict[str, dict[str, int]] = {}
        self.edges: set[tuple[str, str]] = set()
        self.counter = 0
        self.children: dict[str, list[str]] = {}

    def new_type(self, layer: int) -> str:
        v = f"{self.artifact}.l{layer}.T{self.counter}"
        self.counter += 1
        self.layer[v] = layer
        if self.cfg.semantics:
            self.markers[v] = {m: bool(self.rng.random() < p) for m, p in _MARKER_RATES.items()}
            self.values[v] = {
                "DIT": int(self.rng.integers(0, 4)),
                "NOA": int(self.rng.poisson(3)),
                "NOC": 0,
                "CBO": 0,
                "RFC": int(self.rng.poisson(8)),
                "WMC": int(self.rng.poisson(6)),
            }
        return v

    def below(self, layer: int, pool=None) -> list[str]:
        pool = self.layer if pool is None else pool
        return sorted(v for v in pool if self.layer[v] < layer)

    def pick_targets(self, src: str, k: int, pool=None) -> list[str]:
        """Up to ``k`` distinct lower-layer targets, favoring popular types."""
        cands = self.below(self.layer[src], pool)
        if not cands or k <= 0:
            return []
        indeg = {v: 0 for v in cands}
        for _, t in self.edges:
            if t in indeg:
                indeg[t] += 1
        w = np.array([indeg[v] + 1.0 for v in cands])
        k = min(k, len(cands))
        idx = self.rng.choice(len(cands), size=k, replace=False, p=w / w.sum())
        return [cands[i] for i in sorted(idx)]

    def random_layer(self) -> int:
        return int(self.rng.integers(self.cfg.layers))

    def degree(self) -> int:
        return int(self.rng.poisson(self.cfg.out_degree))

    def snapshot(self, version: str) -> VersionedGraph:
        nodes = {}
        for v in self.layer:
            out = sum(1 for s, _ in self.edges if s == v) if self.cfg.semantics else 0
            if self.cfg.semantics:
                vals = dict(self.values[v], CBO=out)
                nodes[v] = NodeAttrs(f"{self.artifact}.l{self.layer[v]}", self.markers[v], vals)
            else:
                nodes[v] = NodeAttrs(f"{self.artifact}.l{self.layer[v]}")
        return VersionedGraph(self.artifact, version, nodes, frozenset(self.edges))


def _ancestors(parent_of: dict, v: str) -> set[str]:
    """``v`` and its dominators."""
    out = {v}
    while v in parent_of:
        v = parent_of[v]
        out.add(v)
    return out


def _reachable(edges) -> dict[str, list[str]]:
    succ: dict[str, list[str]] = {}
    for s, t in sorted(edges):
        succ.setdefault(s, []).append(t)
    out = {}
    for v in succ:
        seen, stack = set(), list(succ[v])
        while stack:
            w = stack.pop()
            if w not in seen:
                seen.add(w)
                stack.extend(succ.get(w, ()))
        seen.discard(v)
        out[v] = sorted(seen)
    return out


def _subtree_sizes(parent_of: dict) -> dict[str, int]:
    """Number of proper descendants of each node in a tree given by parents."""
    size = dict.fromkeys(parent_of, 0)
    for v in parent_of:
        p = parent_of[v]
        while p in size:
            size[p] += 1
            p = parent_of[p]
    return size


def _subtree(children: dict, v: str) -> list[str]:
    out, stack = [], list(children.get(v, ()))
    while stack:
        w = stack.pop()
        out.append(w)
        stack.extend(children.get(w, ()))
    return sorted(out)


def _initial(state: _State) -> None:
    cfg = state.cfg
    top = cfg.layers - 1
    if cfg.nodes < 2 * cfg.modules or cfg.layers < 2:
        raise ValueError("need at least two layers and two types per module")
    for _ in range(cfg.modules):
        state.new_type(top)
    for _ in range(cfg.nodes - 2 * cfg.modules):
        state.new_type(int(state.rng.integers(top)))
    by_layer: dict[int, list[str]] = {}
    for v in sorted(state.layer):
        by_layer.setdefault(state.layer[v], []).append(v)
    # every type below the top has a user one layer up: a module hierarchy
    children = state.children
    for layer in range(cfg.layers - 1):
        users = by_layer.get(layer + 1, [])
        for v in by_layer.get(layer, []) if users else []:
            parent = users[int(state.rng.integers(len(users)))]
            state.edges.add((parent, v))
            children.setdefault(parent, []).append(v)
    # each top-level module funnels into a base type its leaves build on
    for head in by_layer[top]:
        base = state.new_type(0)
        for v in [head, *_subtree(children, head)]:
            if not children.get(v):
                state.edges.add((v, base))
    # dependencies leaving the module go to low-level utilities
    utilities = [v for v in sorted(state.layer) if state.layer[v] < cfg.utility_layers]
    for v in sorted(state.layer, key=lambda x: (state.layer[x], x)):
        module = _subtree(children, v)
        for _ in range(state.degree()):
            if state.rng.random() < cfg.locality:
                if module:
                    state.edges.add((v, module[int(state.rng.integers(len(module)))]))
            else:
                for t in state.pick_targets(v, 1, utilities):
                    state.edges.add((v, t))
    # small cycles among sibling types of one module
    parents = [p for p in sorted(children) if len(children[p]) >= 2]
    for _ in range(cfg.cycles_per_layer * cfg.layers):
        if not parents:
            break
        siblings = children[parents[int(state.rng.integers(len(parents)))]]
        size = int(state.rng.integers(2, min(4, len(siblings)) + 1))
        ring = [siblings[i] for i in state.rng.choice(len(siblings), size=size, replace=False)]
        for x, y in zip(ring, ring[1:] + ring[:1]):
            state.edges.add((x, y))


def _evolve(state: _State) -> None:
    cfg, rng = state.cfg, state.rng
    size = len(state.layer)
    # losses
    alive = sorted(state.layer)
    for i in rng.choice(len(alive), size=int(round(cfg.node_loss * size)), replace=False):
        v = alive[i]
        del state.layer[v]
        state.markers.pop(v, None)
        state.values.pop(v, None)
    state.edges = {(s, t) for s, t in state.edges if s in state.layer and t in state.layer}
    ordered = sorted(state.edges)
    for i in rng.choice(len(ordered), size=int(round(cfg.edge_loss * len(ordered))), replace=False):
        state.edges.discard(ordered[i])
    # marker drift on surviving types
    for v in sorted(state.markers):
        for m in sorted(state.markers[v]):
            if rng.random() < cfg.marker_flip:
                state.markers[v][m] = not state.markers[v][m]
    # new core/core dependencies: shortcuts to types already used indirectly
    # inside the same module, chosen so reachability and dominance stay put
    core = dict(state.layer)
    heads = sorted(core)
    now = state.snapshot("")
    fwd = dict(dominator_tree(now).parent_of)
    bwd = dict(dominator_tree(reverse(now)).parent_of)
    utilities = [v for v in sorted(core) if 0 < state.layer[v] < cfg.utility_layers] or sorted(core)
    # neither end may lose its place among the entries of either direction
    used = {t for _, t in state.edges}
    using = {s for s, _ in state.edges}
    up = {v: _ancestors(fwd, v) for v in core}
    reach = _reachable(state.edges)
    down = {v: _ancestors(bwd, v) for v in core}
    module_pairs = [
        (src, w)
        for src in heads
        if src in using
        for w in reach[src]
        if w in core
        and w in used
        and (src, w) not in state.edges
        and fwd[w] != VIRTUAL_ROOT
        and fwd[w] in up[src]
        and bwd[src] in down[w]
    ]
    utility_pairs = [
        (src, w)
        for src in utilities
        if src in using
        for w in state.below(state.layer[src])
        if w in used and (src, w) not in state.edges and fwd[w] in up[src] and bwd[src] in down[w]
    ]
    # favor shortcuts whose rewiring would move large dominator subtrees
    fsize, bsize = _subtree_sizes(fwd), _subtree_sizes(bwd)
    wanted = int(round(cfg.core_edge_growth * len(state.edges)))
    n_utility = int(round(cfg.utility_share * wanted))
    for pairs, n in ((module_pairs, wanted - n_utility), (utility_pairs, n_utility)):
        n = min(n, len(pairs))
        if not n:
            continue
        w = np.array([(1.0 + fsize[t]) * (1.0 + bsize[s]) for s, t in pairs]) ** cfg.shortcut_bias
        for i in sorted(rng.choice(len(pairs), size=n, replace=False, p=w / w.sum())):
            state.edges.add(pairs[i])
    forward = dict(dominator_tree(state.snapshot("")).parent_of)
    # new types build on shared utilities: types no other type dominates
    shared = {v for v, p in forward.items() if p == VIRTUAL_ROOT and v in used}
    added = [state.new_type(state.random_layer()) for _ in range(max(1, int(round(cfg.growth * size))))]
    for v in added:
        pool = state.below(state.layer[v], shared)
        k = min(len(pool), state.degree() + 1)
        for i in rng.choice(len(pool), size=k, replace=False) if k else ():
            state.edges.add((v, pool[i]))
    # a few core types start using new ones
    upper = sorted(core)
    for _ in range(int(round(cfg.core_users * len(added)))):
        src = upper[int(rng.integers(len(upper)))]
        cands = [v for v in added if state.layer[v] < state.layer[src]]
        if cands:
            state.edges.add((src, cands[int(rng.integers(len(cands)))]))


def evolve_artifact(artifact: str, config: SynthConfig = SynthConfig(), seed: int = 0) -> list[VersionedGraph]:
    """The versions of one synthetic artifact, oldest first."""
    state = _State(artifact, config, np.random.default_rng(seed))
    _initial(state)
    graphs = [state.snapshot(config.versions[0])]
    for version in config.versions[1:]:
        _evolve(state)
        graphs.append(state.snapshot(version))
    return graphs
