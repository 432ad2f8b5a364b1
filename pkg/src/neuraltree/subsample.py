"""Bounded-treewidth edge subsampling.

Greedy and self-certifying: keep a spanning forest (width 1), then visit the
remaining edges in a seeded random order and keep an edge only if the min-fill
junction tree of its component stays within the width bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .graph import Edge, Graph, connected_components, induced_subgraph
from .treedecomp import TreeDecomposition, _min_fill_order, junction_tree, min_fill_width


@dataclass(frozen=True)
class SampledSubgraph:
    subgraph: Graph
    decomposition: TreeDecomposition
    dropped_edges: tuple[Edge, ...]


def _degeneracy(adj: dict[int, set[int]]) -> int:
    """Largest minimum degree over subgraphs; a lower bound on treewidth."""
    adj = {v: set(ns) for v, ns in adj.items()}
    best = 0
    while adj:
        v = min(adj, key=lambda u: (len(adj[u]), u))
        best = max(best, len(adj[v]))
        for w in adj[v]:
            adj[w].discard(v)
        del adj[v]
    return best


def sample_bounded_treewidth(g: Graph, k: int, seed: int) -> SampledSubgraph:
    """Edge subgraph of ``g`` with a certified decomposition of width <= ``k``.

    Components whose own junction tree already has width <= ``k`` are kept
    whole. Connectivity of ``g`` is preserved.
    """
    if k < 1:
        raise InputError(f"treewidth bound k must be >= 1, got {k}")
    rng = np.random.default_rng(seed)
    kept: set[Edge] = set()
    for comp in connected_components(g):
        sub = induced_subgraph(g, comp)
        edges = sub.sorted_edges()
        if not edges:
            continue
        if min_fill_width(sub, max_width=k) <= k:
            kept.update(edges)
            continue
        order = [edges[i] for i in rng.permutation(len(edges))]
        # spanning tree first, in visit order
        parent = {v: v for v in comp}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        adj: dict[int, set[int]] = {v: set() for v in comp}
        rest = []
        for u, v in order:
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
                adj[u].add(v)
                adj[v].add(u)
            else:
                rest.append((u, v))
        for u, v in rest:
            adj[u].add(v)
            adj[v].add(u)
            ok = _degeneracy(adj) <= k and _min_fill_order(adj, max_width=k)[2] <= k
            if not ok:
                adj[u].discard(v)
                adj[v].discard(u)
        kept.update(_edges_of(adj))
    subgraph = g.with_edges(kept)
    dropped = tuple(e for e in g.sorted_edges() if e not in kept)
    return SampledSubgraph(subgraph, junction_tree(subgraph), dropped)


def _edges_of(adj: dict[int, set[int]]) -> set[Edge]:
    return {(u, v) for u, ns in adj.items() for v in ns if u < v}
