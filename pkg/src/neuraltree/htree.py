"""Hierarchical trees (H-trees) built by recursive tree decomposition.

The top layer of an H-tree is the junction tree of the input graph (the root
set). Every bag ``B`` either receives one leaf per member, when ``G[B]`` is
complete, or hosts the H-tree of ``G[B]`` with its own root-to-root edges cut
and each of its roots linked to the bag's node.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InputError
from .graph import Graph, bfs_distances, induced_subgraph, is_complete
from .treedecomp import TreeDecomposition, junction_tree, width


@dataclass(frozen=True, eq=False)
class HTreeNode:
    id: int
    kind: str  # "clique" or "leaf"
    bag: tuple[int, ...] = ()
    vertex: int | None = None

    def to_dict(self) -> dict:
        if self.kind == "leaf":
            return {"id": self.id, "kind": "leaf", "vertex": self.vertex}
        return {"id": self.id, "kind": "clique", "bag": list(self.bag)}


@dataclass(frozen=True, eq=False)
class HTree:
    """An H-tree over a source graph.

    ``parent`` maps every non-root node to its parent; ``root_edges`` are the
    edges of the top tree decomposition. Together they make up ``edges``.
    """

    nodes: tuple[HTreeNode, ...]
    roots: tuple[int, ...]
    root_edges: tuple[tuple[int, int], ...]
    parent: dict[int, int]
    leaf_features: np.ndarray | None  # rows aligned with ``leaves``

    @cached_property
    def edges(self) -> tuple[tuple[int, int], ...]:
        es = set(self.root_edges)
        es.update((min(c, p), max(c, p)) for c, p in self.parent.items())
        return tuple(sorted(es))

    @cached_property
    def adj(self) -> dict[int, tuple[int, ...]]:
        nbrs: dict[int, list[int]] = {u.id: [] for u in self.nodes}
        for a, b in self.edges:
            nbrs[a].append(b)
            nbrs[b].append(a)
        return {u: tuple(sorted(ns)) for u, ns in nbrs.items()}

    @cached_property
    def children(self) -> dict[int, tuple[int, ...]]:
        kids: dict[int, list[int]] = {u.id: [] for u in self.nodes}
        for c, p in sorted(self.parent.items()):
            kids[p].append(c)
        return {u: tuple(ks) for u, ks in kids.items()}

    @cached_property
    def leaves(self) -> tuple[int, ...]:
        return tuple(u.id for u in self.nodes if u.kind == "leaf")

    @cached_property
    def leaf_map(self) -> dict[int, int]:
        """Leaf id -> source vertex."""
        return {u.id: u.vertex for u in self.nodes if u.kind == "leaf"}

    def node(self, uid: int) -> HTreeNode:
        return self.nodes[uid]

    def is_leaf(self, uid: int) -> bool:
        return self.nodes[uid].kind == "leaf"

    def root_decomposition(self, source_n: int = 0) -> TreeDecomposition:
        ids = {r: i for i, r in enumerate(self.roots)}
        bags = {ids[r]: self.nodes[r].bag for r in self.roots}
        edges = tuple(sorted((ids[a], ids[b]) for a, b in self.root_edges))
        return TreeDecomposition(bags, edges, source_n)

    def to_dict(self) -> dict:
        return {
            "nodes": [u.to_dict() for u in self.nodes],
            "edges": [list(e) for e in self.edges],
            "roots": list(self.roots),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))


class _Builder:
    def __init__(self):
        self.nodes: list[HTreeNode] = []
        self.parent: dict[int, int] = {}

    def new(self, kind, bag=(), vertex=None) -> int:
        uid = len(self.nodes)
        self.nodes.append(HTreeNode(uid, kind, tuple(bag), vertex))
        return uid

    def attach_leaves(self, tau: int, bag):
        for v in sorted(bag):
            self.parent[self.new("leaf", vertex=v)] = tau

    def build(self, g: Graph, td: TreeDecomposition | None = None):
        """Returns ``(root ids, root-to-root edges)`` for ``g``."""
        if td is None:
            td = junction_tree(g)
        tau = {b: self.new("clique", bag=sorted(td.bags[b])) for b in td.bag_ids}
        root_edges = [(tau[a], tau[b]) for a, b in td.tree_edges]
        for b in td.bag_ids:
            bag = sorted(td.bags[b])
            sub = induced_subgraph(g, bag)
            if is_complete(sub):
                self.attach_leaves(tau[b], bag)
                continue
            sub_td = junction_tree(sub)
            if len(sub_td.bags) == 1 and sorted(sub_td.bags[0]) == bag:
                # degenerate decomposition; recursing would not terminate
                self.attach_leaves(tau[b], bag)
                continue
            sub_roots, _dropped = self.build(sub, sub_td)
            for r in sub_roots:
                self.parent[r] = tau[b]
        return [tau[b] for b in td.bag_ids], root_edges


def build_htree(g: Graph, td: TreeDecomposition | None = None) -> HTree:
    """Build the H-tree of ``g`` (optionally from a precomputed top decomposition)."""
    if g.n == 0:
        raise InputError("cannot build an H-tree of an empty graph")
    b = _Builder()
    roots, root_edges = b.build(g, td)
    nodes = tuple(b.nodes)
    feats = None
    if g.features is not None:
        leaf_vertices = [u.vertex for u in nodes if u.kind == "leaf"]
        feats = g.features[[g.index[v] for v in leaf_vertices]]
        feats.setflags(write=False)
    return HTree(nodes, tuple(roots),
                 tuple(sorted((min(a, c), max(a, c)) for a, c in root_edges)),
                 dict(sorted(b.parent.items())), feats)


def leaf_groups(h: HTree) -> dict[int, tuple[int, ...]]:
    """Source vertex -> the leaves that replicate it."""
    groups: dict[int, list[int]] = {}
    for leaf in h.leaves:
        groups.setdefault(h.leaf_map[leaf], []).append(leaf)
    return {v: tuple(ls) for v, ls in sorted(groups.items())}


def _components(h: HTree) -> list[list[int]]:
    seen: set[int] = set()
    comps = []
    for u in h.adj:
        if u in seen:
            continue
        dist = bfs_distances(h.adj, u)
        seen.update(dist)
        comps.append(sorted(dist))
    return comps


def htree_stats(h: HTree) -> dict[str, int]:
    """Structural counts. ``depth`` is the largest hop distance from a node to
    the root set; ``diameter`` is the largest per-component diameter."""
    depth = 0
    for comp in _components(h):
        roots = [r for r in h.roots if r in set(comp)]
        # multi-source BFS from the roots of this component
        dist = {r: 0 for r in roots}
        frontier = list(roots)
        while frontier:
            nxt = []
            for u in frontier:
                for w in h.adj[u]:
                    if w not in dist:
                        dist[w] = dist[u] + 1
                        nxt.append(w)
            frontier = nxt
        depth = max(depth, max(dist.values()))
    diam = 0
    for comp in _components(h):
        # two-sweep BFS is exact on trees
        far = max(sorted(bfs_distances(h.adj, comp[0]).items()), key=lambda kv: kv[1])[0]
        diam = max(diam, max(bfs_distances(h.adj, far).values()))
    return {
        "num_nodes": len(h.nodes),
        "num_leaves": len(h.leaves),
        "depth": depth,
        "diameter": diam,
        "max_degree": max((len(ns) for ns in h.adj.values()), default=0),
    }


def incoming_degree(h: HTree, uid: int) -> int:
    """Number of links into ``uid`` once the H-tree is directed towards its roots.

    Root-to-root edges are dropped in that orientation and every root gains
    one outgoing link to a final aggregator, so this is the child count.
    """
    return len(h.children[uid])


def param_bound_theorem(h: HTree, eps: float) -> float:
    """Order-of-magnitude parameter count for an ``eps``-approximation.

    ``sum_u (d_u - 1) * (eps / (d_u - 1)) ** -(d_u - 1)`` over non-leaf nodes,
    with ``d_u - 1`` the incoming degree in the root-directed H-tree and the
    hidden constant set to 1.
    """
    if not eps > 0:
        raise InputError(f"eps must be positive, got {eps}")
    total = 0.0
    for u in h.nodes:
        if u.kind == "leaf":
            continue
        k = incoming_degree(h, u.id)
        total += k * (eps / k) ** (-k)
    return total


def param_bound_corollary(n: int, tw: int, eps: float) -> float:
    """``n * (tw + 1) ** (2 tw + 3) * eps ** -(tw + 1)``, constant taken as 1."""
    if n < 1 or tw < 0 or not (0 < eps <= 1):
        raise InputError(f"need n >= 1, tw >= 0, 0 < eps <= 1; got {n}, {tw}, {eps}")
    return n * (tw + 1) ** (2 * tw + 3) * eps ** (-(tw + 1))


def root_width(h: HTree) -> int:
    return width(h.root_decomposition())
