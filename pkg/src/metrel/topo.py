"""Topological metrics: markers, degree and reachability counts, strongly
connected components, dominator trees, PageRank and betweenness.

All functions take a :class:`VersionedGraph` and return one or more
:class:`MetricVector` objects keyed by node id.  Internally nodes are numbered
in sorted id order so every result is deterministic.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import ConvergenceError
from .graph import VersionedGraph, reverse

MARKER = "marker"
DISCRETE = "discrete"
CONTINUOUS = "continuous"

VIRTUAL_ROOT = "<virtual root>"  # contains whitespace, so never a valid node id

PAGERANK_DAMPING = 0.85
PAGERANK_TOLERANCE = 1e-9
PAGERANK_MAX_ITER = 10_000


@dataclass(frozen=True)
class MetricVector:
    metric_name: str
    kind: str
    values: Mapping[str, bool | int | float]

    def __getitem__(self, node):
        return self.values[node]

    def __len__(self):
        return len(self.values)

    def renamed(self, name: str) -> "MetricVector":
        return MetricVector(name, self.kind, self.values)


def _vector(g: VersionedGraph, name: str, kind: str, values) -> MetricVector:
    return MetricVector(name, kind, dict(zip(g.node_ids, values)))


# --- simple degree based metrics ---------------------------------------------


def degree_metrics(g: VersionedGraph) -> dict[str, MetricVector]:
    adj = g.indexed
    return {
        "#Incoming": _vector(g, "#Incoming", DISCRETE, [len(p) for p in adj.pred]),
        "#Outgoing": _vector(g, "#Outgoing", DISCRETE, [len(s) for s in adj.succ]),
    }


def marker_balloon(g: VersionedGraph) -> MetricVector:
    return _vector(g, "balloon", MARKER, [len(p) == 1 for p in g.indexed.pred])


def marker_wrapper(g: VersionedGraph) -> MetricVector:
    return _vector(g, "wrapper", MARKER, [len(s) == 1 for s in g.indexed.succ])


# --- strongly connected components -------------------------------------------


@dataclass(frozen=True)
class SccIndex:
    component_of: Mapping[str, int]
    component_sizes: Mapping[int, int]
    condensation_edges: frozenset[tuple[int, int]]


def _tarjan(succ: list[list[int]]) -> tuple[list[int], int]:
    """Iterative Tarjan.  Components are numbered in the order they are
    completed, so every edge of the condensation goes from a higher number to
    a lower one."""
    n = len(succ)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    comp = [-1] * n
    stack: list[int] = []
    counter = 0
    ncomp = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, i = work[-1]
            if i < len(succ[v]):
                work[-1] = (v, i + 1)
                w = succ[v][i]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
                continue
            work.pop()
            if work:
                u = work[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
    return comp, ncomp


@dataclass
class _Condensation:
    comp: list[int]
    ncomp: int
    members: list[list[int]]
    csucc: list[list[int]]
    cpred: list[list[int]]


def _condense(g: VersionedGraph) -> _Condensation:
    cached = g.__dict__.get("_condensation")
    if cached is not None:
        return cached
    adj = g.indexed
    comp, ncomp = _tarjan(adj.succ)
    members: list[list[int]] = [[] for _ in range(ncomp)]
    for v, c in enumerate(comp):
        members[c].append(v)
    cs: list[set[int]] = [set() for _ in range(ncomp)]
    for v, ws in enumerate(adj.succ):
        for w in ws:
            if comp[v] != comp[w]:
                cs[comp[v]].add(comp[w])
    csucc = [sorted(x) for x in cs]
    cpred: list[list[int]] = [[] for _ in range(ncomp)]
    for c, ds in enumerate(csucc):
        for d in ds:
            cpred[d].append(c)
    result = _Condensation(comp, ncomp, members, csucc, cpred)
    g.__dict__["_condensation"] = result
    return result


def scc_index(g: VersionedGraph) -> SccIndex:
    cond = _condense(g)
    ids = g.node_ids
    return SccIndex(
        component_of={ids[v]: c for v, c in enumerate(cond.comp)},
        component_sizes={c: len(m) for c, m in enumerate(cond.members)},
        condensation_edges=frozenset((c, d) for c, ds in enumerate(cond.csucc) for d in ds),
    )


def _closure_masks(cond: _Condensation, forward: bool) -> tuple[list[int], list[int]]:
    """For every component, the bitmask of nodes and of components strictly
    reachable from it (forward) or reaching it (backward)."""
    node_mask = [0] * cond.ncomp
    for c, ms in enumerate(cond.members):
        for v in ms:
            node_mask[c] |= 1 << v
    reach_nodes = [0] * cond.ncomp
    reach_comps = [0] * cond.ncomp
    # completion order is a reverse topological order of the condensation
    order = range(cond.ncomp) if forward else range(cond.ncomp - 1, -1, -1)
    nbrs = cond.csucc if forward else cond.cpred
    for c in order:
        rn = rc = 0
        for d in nbrs[c]:
            rn |= node_mask[d] | reach_nodes[d]
            rc |= (1 << d) | reach_comps[d]
        reach_nodes[c] = rn
        reach_comps[c] = rc
    return reach_nodes, reach_comps


def reachability_metrics(g: VersionedGraph) -> dict[str, MetricVector]:
    cond = _condense(g)
    down, _ = _closure_masks(cond, forward=True)
    up, _ = _closure_masks(cond, forward=False)
    desc = []
    clients = []
    for v, c in enumerate(cond.comp):
        same = len(cond.members[c]) - 1
        desc.append(down[c].bit_count() + same)
        clients.append(up[c].bit_count() + same)
    return {
        "#Clients": _vector(g, "#Clients", DISCRETE, clients),
        "#Descendants": _vector(g, "#Descendants", DISCRETE, desc),
    }


def marker_sink(g: VersionedGraph) -> MetricVector:
    """A sink is reached from every other node."""
    n = len(g.nodes)
    clients = reachability_metrics(g)["#Clients"]
    return _vector(g, "sink", MARKER, [clients[v] == n - 1 for v in g.node_ids])


def marker_source(g: VersionedGraph) -> MetricVector:
    """A source reaches every other node."""
    n = len(g.nodes)
    desc = reachability_metrics(g)["#Descendants"]
    return _vector(g, "source", MARKER, [desc[v] == n - 1 for v in g.node_ids])


def scc_metrics(g: VersionedGraph) -> dict[str, MetricVector]:
    cond = _condense(g)
    _, down = _closure_masks(cond, forward=True)
    _, up = _closure_masks(cond, forward=False)
    per_comp = {
        "SCCSize": [len(m) for m in cond.members],
        "#SCCIncoming": [len(p) for p in cond.cpred],
        "#SCCOutgoing": [len(s) for s in cond.csucc],
        "#SCCClients": [m.bit_count() for m in up],
        "#SCCDescendants": [m.bit_count() for m in down],
    }
    return {
        name: _vector(g, name, DISCRETE, [vals[c] for c in cond.comp])
        for name, vals in per_comp.items()
    }


# --- dominators ---------------------------------------------------------------


@dataclass(frozen=True)
class DominatorTree:
    parent_of: Mapping[str, str]
    virtual_root: str = VIRTUAL_ROOT

    def children(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {self.virtual_root: []}
        for v in self.parent_of:
            out.setdefault(v, [])
        for v, p in sorted(self.parent_of.items()):
            out[p].append(v)
        return out


def root_entries(g: VersionedGraph) -> list[int]:
    """Nodes the virtual root points at: every node without incoming edges,
    plus the smallest node of every source component that has none."""
    cond = _condense(g)
    adj = g.indexed
    entries = {v for v in range(len(adj.ids)) if not adj.pred[v]}
    for c in range(cond.ncomp):
        if not cond.cpred[c] and len(cond.members[c]) > 1:
            entries.add(min(cond.members[c]))
    return sorted(entries)


def _immediate_dominators(g: VersionedGraph) -> tuple[list[int], list[int]]:
    """Lengauer-Tarjan on the graph augmented with a virtual root.

    Returns ``(idom, order)`` over indices ``0..n`` where ``n`` is the
    virtual root; ``order`` is the DFS preorder, in which every node comes
    after its immediate dominator.
    """
    adj = g.indexed
    n = len(adj.ids)
    root = n
    succ = adj.succ + [root_entries(g)]
    pred = [list(p) for p in adj.pred] + [[]]
    for v in succ[root]:
        pred[v].append(root)

    dfnum = [-1] * (n + 1)
    parent = [-1] * (n + 1)
    vertex: list[int] = []
    stack = [(root, -1)]
    while stack:
        v, p = stack.pop()
        if dfnum[v] != -1:
            continue
        dfnum[v] = len(vertex)
        vertex.append(v)
        parent[v] = p
        for w in reversed(succ[v]):
            if dfnum[w] == -1:
                stack.append((w, v))

    semi = dfnum[:]
    ancestor = [-1] * (n + 1)
    label = list(range(n + 1))
    idom = [-1] * (n + 1)
    bucket: list[list[int]] = [[] for _ in range(n + 1)]

    def evaluate(v: int) -> int:
        if ancestor[v] == -1:
            return v
        path = []
        x = v
        while ancestor[ancestor[x]] != -1:
            path.append(x)
            x = ancestor[x]
        while path:
            y = path.pop()
            a = ancestor[y]
            if semi[label[a]] < semi[label[y]]:
                label[y] = label[a]
            ancestor[y] = ancestor[a]
        return label[v]

    for w in reversed(vertex[1:]):
        for v in pred[w]:
            u = evaluate(v)
            if semi[u] < semi[w]:
                semi[w] = semi[u]
        bucket[vertex[semi[w]]].append(w)
        p = parent[w]
        ancestor[w] = p
        for v in bucket[p]:
            u = evaluate(v)
            idom[v] = u if semi[u] < semi[v] else p
        bucket[p].clear()
    for w in vertex[1:]:
        if idom[w] != vertex[semi[w]]:
            idom[w] = idom[idom[w]]
    idom[root] = root
    return idom, vertex


def dominator_tree(g: VersionedGraph) -> DominatorTree:
    idom, _ = _immediate_dominators(g)
    ids = g.node_ids
    n = len(ids)
    return DominatorTree({ids[v]: (VIRTUAL_ROOT if idom[v] == n else ids[idom[v]]) for v in range(n)})


def dominator_metrics(g: VersionedGraph) -> dict[str, MetricVector]:
    idom, order = _immediate_dominators(g)
    n = len(g.node_ids)
    depth = [0] * (n + 1)
    for v in order[1:]:
        depth[v] = depth[idom[v]] + 1
    weight = [0] * (n + 1)
    height = [0] * (n + 1)
    for v in reversed(order[1:]):
        p = idom[v]
        weight[p] += weight[v] + 1
        if height[v] + 1 > height[p]:
            height[p] = height[v] + 1
    return {
        "#DominatedBy": _vector(g, "#DominatedBy", DISCRETE, [depth[v] - 1 for v in range(n)]),
        "#DominatorHeight": _vector(g, "#DominatorHeight", DISCRETE, height[:n]),
        "#DominatorWeight": _vector(g, "#DominatorWeight", DISCRETE, weight[:n]),
    }


# --- centrality ----------------------------------------------------------------


def pagerank(
    g: VersionedGraph,
    damping: float = PAGERANK_DAMPING,
    tolerance: float = PAGERANK_TOLERANCE,
    max_iter: int = PAGERANK_MAX_ITER,
) -> MetricVector:
    """Power iteration with uniform teleport; dangling nodes spread their
    mass uniformly.  Stops once the L1 change between sweeps is below
    ``tolerance``."""
    if not 0.0 < damping < 1.0:
        raise ValueError("damping must lie in (0, 1)")
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    adj = g.indexed
    n = len(adj.ids)
    if n == 0:
        return MetricVector("PageRank", CONTINUOUS, {})
    src = np.array([s for s, ts in enumerate(adj.succ) for _ in ts], dtype=np.int64)
    dst = np.array([t for ts in adj.succ for t in ts], dtype=np.int64)
    outdeg = np.array([len(ts) for ts in adj.succ], dtype=float)
    dangling = outdeg == 0
    inv_out = np.zeros(n)
    inv_out[~dangling] = 1.0 / outdeg[~dangling]
    p = np.full(n, 1.0 / n)
    residual = float("inf")
    for _ in range(max_iter):
        flow = np.bincount(dst, weights=(p * inv_out)[src], minlength=n)
        new = damping * (flow + p[dangling].sum() / n) + (1.0 - damping) / n
        residual = float(np.abs(new - p).sum())
        p = new
        if residual < tolerance:
            break
    else:
        raise ConvergenceError(f"PageRank did not converge in {max_iter} iterations", residual)
    return _vector(g, "PageRank", CONTINUOUS, [float(x) for x in p])


def betweenness(g: VersionedGraph) -> MetricVector:
    """Brandes' accumulation over unweighted directed shortest paths,
    endpoints excluded, unnormalised."""
    adj = g.indexed
    n = len(adj.ids)
    score = [0.0] * n
    for s in range(n):
        order = []
        preds: list[list[int]] = [[] for _ in range(n)]
        sigma = [0] * n
        dist = [-1] * n
        sigma[s] = 1
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            order.append(v)
            dv = dist[v] + 1
            for w in adj.succ[v]:
                if dist[w] < 0:
                    dist[w] = dv
                    queue.append(w)
                if dist[w] == dv:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = [0.0] * n
        for w in reversed(order):
            coeff = (1.0 + delta[w]) / sigma[w]
            for v in preds[w]:
                delta[v] += sigma[v] * coeff
            if w != s:
                score[w] += delta[w]
    return _vector(g, "Betweenness", CONTINUOUS, score)


# --- duals -------------------------------------------------------------------------


def reversed_view(g: VersionedGraph) -> VersionedGraph:
    """``reverse(g)``, memoised on ``g``."""
    cached = g.__dict__.get("_reversed")
    if cached is None:
        cached = reverse(g)
        g.__dict__["_reversed"] = cached
    return cached
