"""Undirected simple graphs with optional node features and labels.

Node ids are caller-provided non-negative integers. Every iteration order in
this module (and downstream) is ascending by id, so algorithms built on top of
it are deterministic.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

from .errors import CapacityError, InputError

Edge = tuple[int, int]

MAX_CLIQUE_NODES = 64


def _edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected simple graph.

    ``features`` is an ``(n, d)`` array aligned with ``nodes`` (or ``None``).
    ``labels``, ``targets`` and ``node_types`` are partial maps: only the
    supervised nodes need an entry.
    """

    nodes: tuple[int, ...]
    edges: frozenset[Edge]
    features: np.ndarray | None = None
    labels: Mapping[int, int] = field(default_factory=dict)
    targets: Mapping[int, float] = field(default_factory=dict)
    node_types: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        nodes = tuple(sorted(int(v) for v in self.nodes))
        if len(set(nodes)) != len(nodes):
            raise InputError("duplicate node ids")
        if nodes and nodes[0] < 0:
            raise InputError(f"node ids must be non-negative, got {nodes[0]}")
        node_set = set(nodes)
        edges = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise InputError(f"self-loop on node {u}")
            if u not in node_set or v not in node_set:
                raise InputError(f"edge ({u}, {v}) has an endpoint that is not a node")
            edges.add(_edge(u, v))
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", frozenset(edges))
        if self.features is not None:
            feats = np.array(self.features, dtype=float)
            if feats.ndim != 2 or feats.shape[0] != len(nodes):
                raise InputError(
                    f"features must have shape (num_nodes, d); got {feats.shape}"
                )
            feats.setflags(write=False)
            object.__setattr__(self, "features", feats)
        for name in ("labels", "targets", "node_types"):
            mapping = dict(getattr(self, name))
            unknown = set(mapping) - node_set
            if unknown:
                raise InputError(f"{name} given for unknown nodes {sorted(unknown)}")
            object.__setattr__(self, name, mapping)
        for v, lab in self.labels.items():
            if int(lab) != lab or lab < 0:
                raise InputError(f"label of node {v} must be a non-negative int")

    # -- basic accessors -------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def feature_dim(self) -> int:
        return 0 if self.features is None else self.features.shape[1]

    @cached_property
    def index(self) -> dict[int, int]:
        """Map node id -> row in ``features``."""
        return {v: i for i, v in enumerate(self.nodes)}

    @cached_property
    def adj(self) -> dict[int, tuple[int, ...]]:
        nbrs: dict[int, list[int]] = {v: [] for v in self.nodes}
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return {v: tuple(sorted(ns)) for v, ns in nbrs.items()}

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adj[v]

    def has_edge(self, u: int, v: int) -> bool:
        return _edge(u, v) in self.edges

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def feature(self, v: int) -> np.ndarray:
        if self.features is None:
            raise InputError("graph has no features")
        return self.features[self.index[v]]

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        if self.nodes != other.nodes or self.edges != other.edges:
            return False
        if (self.features is None) != (other.features is None):
            return False
        if self.features is not None and not np.array_equal(self.features, other.features):
            return False
        return (
            dict(self.labels) == dict(other.labels)
            and dict(self.targets) == dict(other.targets)
            and dict(self.node_types) == dict(other.node_types)
        )

    def __repr__(self):
        return f"Graph(n={self.n}, m={len(self.edges)}, d={self.feature_dim})"

    def with_edges(self, edges: Iterable[Edge]) -> "Graph":
        """Same nodes and node data, different edge set."""
        return Graph(self.nodes, frozenset(edges), self.features, self.labels,
                     self.targets, self.node_types)

    def with_features(self, features) -> "Graph":
        return Graph(self.nodes, self.edges, features, self.labels, self.targets,
                     self.node_types)


def from_edges(edges: Iterable[Edge], nodes: Iterable[int] | None = None, **kw) -> Graph:
    """Build a graph from an edge list; nodes default to the edge endpoints."""
    edges = list(edges)
    node_set = set(nodes) if nodes is not None else set()
    for u, v in edges:
        node_set.update((u, v))
    return Graph(tuple(node_set), frozenset(_edge(u, v) for u, v in edges), **kw)


def complete_graph(nodes: Iterable[int]) -> Graph:
    nodes = sorted(nodes)
    return Graph(tuple(nodes), frozenset(
        (u, v) for i, u in enumerate(nodes) for v in nodes[i + 1:]))


def induced_subgraph(g: Graph, a: Iterable[int]) -> Graph:
    """The subgraph ``G[a]``; features, labels and types are restricted to ``a``."""
    a = sorted(set(a))
    missing = [v for v in a if v not in g.index]
    if missing:
        raise InputError(f"unknown node ids {missing}")
    keep = set(a)
    edges = frozenset(e for e in g.edges if e[0] in keep and e[1] in keep)
    feats = None
    if g.features is not None:
        feats = g.features[[g.index[v] for v in a]]
    return Graph(
        tuple(a), edges, feats,
        {v: y for v, y in g.labels.items() if v in keep},
        {v: y for v, y in g.targets.items() if v in keep},
        {v: y for v, y in g.node_types.items() if v in keep},
    )


def is_complete(g: Graph) -> bool:
    n = g.n
    return len(g.edges) == n * (n - 1) // 2


def maximal_cliques(g: Graph) -> list[tuple[int, ...]]:
    """All inclusion-maximal cliques, each sorted, in lexicographic order.

    Bron-Kerbosch with pivoting. Oracle-scale only: capped at 64 nodes.
    """
    if g.n > MAX_CLIQUE_NODES:
        raise CapacityError(f"maximal_cliques is limited to {MAX_CLIQUE_NODES} nodes, got {g.n}")
    adj = {v: set(ns) for v, ns in g.adj.items()}
    out: list[tuple[int, ...]] = []

    def expand(r: list[int], p: set[int], x: set[int]):
        if not p and not x:
            out.append(tuple(sorted(r)))
            return
        pivot = max(sorted(p | x), key=lambda u: len(adj[u] & p))
        for v in sorted(p - adj[pivot]):
            expand(r + [v], p & adj[v], x & adj[v])
            p = p - {v}
            x = x | {v}

    if g.n:
        expand([], set(g.nodes), set())
    return sorted(out)


def connected_components(g: Graph) -> list[tuple[int, ...]]:
    """Components as sorted node tuples, ordered by smallest member."""
    seen: set[int] = set()
    comps = []
    for s in g.nodes:
        if s in seen:
            continue
        seen.add(s)
        comp = [s]
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in g.adj[u]:
                if w not in seen:
                    seen.add(w)
                    comp.append(w)
                    queue.append(w)
        comps.append(tuple(sorted(comp)))
    return comps


def bfs_distances(adj: Mapping[int, Iterable[int]], source: int) -> dict[int, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def diameter(g: Graph) -> int:
    """Largest shortest-path hop count between two nodes of a connected graph."""
    if g.n == 0:
        raise InputError("diameter of an empty graph is undefined")
    best = 0
    for v in g.nodes:
        dist = bfs_distances(g.adj, v)
        if len(dist) != g.n:
            raise InputError("diameter requires a connected graph")
        best = max(best, max(dist.values()))
    return best


# -- JSON format ---------------------------------------------------------

def graph_to_dict(g: Graph) -> dict:
    nodes = []
    for v in g.nodes:
        rec: dict = {"id": v}
        if g.features is not None:
            rec["features"] = [float(x) for x in g.feature(v)]
        if v in g.labels:
            rec["label"] = int(g.labels[v])
        if v in g.targets:
            rec["target"] = float(g.targets[v])
        if v in g.node_types:
            rec["type"] = int(g.node_types[v])
        nodes.append(rec)
    return {"nodes": nodes, "edges": [list(e) for e in g.sorted_edges()]}


def _require_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InputError(f"{where} must be an integer")
    return value


def graph_from_dict(obj) -> Graph:
    if not isinstance(obj, dict) or "nodes" not in obj or "edges" not in obj:
        raise InputError("graph object needs 'nodes' and 'edges'")
    if not isinstance(obj["nodes"], list):
        raise InputError("'nodes' must be a list")
    ids, feats, labels, targets, types = [], [], {}, {}, {}
    with_feats = 0
    for i, rec in enumerate(obj["nodes"]):
        if not isinstance(rec, dict) or "id" not in rec:
            raise InputError(f"nodes[{i}] needs an 'id'")
        v = _require_int(rec["id"], f"nodes[{i}].id")
        ids.append(v)
        if "features" in rec:
            with_feats += 1
            if not isinstance(rec["features"], list):
                raise InputError(f"nodes[{i}].features must be a list")
            feats.append([float(x) for x in rec["features"]])
        if "label" in rec:
            labels[v] = _require_int(rec["label"], f"nodes[{i}].label")
        if "target" in rec:
            targets[v] = float(rec["target"])
        if "type" in rec:
            types[v] = _require_int(rec["type"], f"nodes[{i}].type")
    if with_feats not in (0, len(ids)):
        raise InputError("features must be given on all nodes or on none")
    if with_feats and len({len(f) for f in feats}) > 1:
        raise InputError("feature vectors must share one dimension")
    edges = []
    if not isinstance(obj["edges"], list):
        raise InputError("'edges' must be a list")
    for j, e in enumerate(obj["edges"]):
        if not isinstance(e, list) or len(e) != 2:
            raise InputError(f"edges[{j}] must be a pair [u, v]")
        u = _require_int(e[0], f"edges[{j}][0]")
        v = _require_int(e[1], f"edges[{j}][1]")
        if u >= v:
            raise InputError(f"edges[{j}] must satisfy u < v")
        edges.append((u, v))
    if len(set(edges)) != len(edges):
        raise InputError("duplicate edges")
    features = None
    if with_feats:
        order = np.argsort(ids, kind="stable")
        features = np.array(feats, dtype=float).reshape(len(ids), -1)[order]
    return Graph(tuple(ids), frozenset(edges), features, labels, targets, types)


def dumps_graph(g: Graph) -> str:
    return json.dumps(graph_to_dict(g), separators=(",", ":"))


def loads_graph(text: str) -> Graph:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON: {exc}") from exc
    return graph_from_dict(obj)


def read_jsonl(path) -> list[Graph]:
    graphs = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                graphs.append(loads_graph(line))
            except InputError as exc:
                raise InputError(f"line {lineno}: {exc}") from exc
    return graphs


def dumps_jsonl(graphs: Iterable[Graph]) -> str:
    return "".join(dumps_graph(g) + "\n" for g in graphs)
