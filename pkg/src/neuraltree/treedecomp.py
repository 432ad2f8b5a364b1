"""Tree decompositions: min-fill triangulation, junction trees, validity checks.

A junction tree is built by triangulating the graph with the min-fill
heuristic (ties broken by lowest node id), taking the maximal cliques of the
chordal graph as bags, and extracting a maximum-weight spanning tree of the
bag intersection graph.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field

from .errors import CapacityError, InputError
from .graph import Edge, Graph, _edge

EXACT_TREEWIDTH_MAX_NODES = 10


@dataclass(frozen=True)
class TreeDecomposition:
    """Bags keyed by bag id plus the tree (or forest) edges between bag ids."""

    bags: dict[int, tuple[int, ...]]
    tree_edges: tuple[tuple[int, int], ...]
    source_n: int

    @property
    def bag_ids(self) -> list[int]:
        return sorted(self.bags)

    def tree_adj(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {b: [] for b in self.bags}
        for a, b in self.tree_edges:
            if a in adj and b in adj:
                adj[a].append(b)
                adj[b].append(a)
        return {b: sorted(ns) for b, ns in adj.items()}

    def to_dict(self) -> dict:
        return {
            "bags": {str(b): list(self.bags[b]) for b in self.bag_ids},
            "edges": [list(e) for e in self.tree_edges],
            "width": width(self),
        }


def decomposition_from_dict(obj, source_n: int = 0) -> TreeDecomposition:
    bags = {int(k): tuple(sorted(int(v) for v in vs)) for k, vs in obj["bags"].items()}
    edges = tuple(sorted(_edge(int(a), int(b)) for a, b in obj["edges"]))
    return TreeDecomposition(bags, edges, source_n)


def _min_fill_order(adj: dict[int, set[int]], max_width: int | None = None):
    """Min-fill elimination on a mutable adjacency copy.

    Returns ``(order, fill_edges, width)``; when ``max_width`` is given and an
    eliminated vertex has more than ``max_width`` remaining neighbours, stops
    early and returns ``width = max_width + 1`` with a partial order.
    """
    adj = {v: set(ns) for v, ns in adj.items()}

    def fill_cost(v: int) -> int:
        ns = sorted(adj[v])
        missing = 0
        for i, a in enumerate(ns):
            na = adj[a]
            for b in ns[i + 1:]:
                if b not in na:
                    missing += 1
        return missing

    cost = {v: fill_cost(v) for v in adj}
    heap = [(c, v) for v, c in cost.items()]
    heapq.heapify(heap)
    order: list[int] = []
    fills: list[Edge] = []
    best_width = -1
    while heap:
        c, v = heapq.heappop(heap)
        if v not in adj or cost[v] != c:
            continue
        ns = sorted(adj[v])
        if max_width is not None and len(ns) > max_width:
            return order, fills, max_width + 1
        best_width = max(best_width, len(ns))
        order.append(v)
        affected = set(ns)
        for i, a in enumerate(ns):
            for b in ns[i + 1:]:
                if b not in adj[a]:
                    adj[a].add(b)
                    adj[b].add(a)
                    fills.append(_edge(a, b))
                    affected |= adj[a] & adj[b]
        for a in ns:
            adj[a].discard(v)
        del adj[v]
        del cost[v]
        affected.discard(v)
        for w in affected:
            cw = fill_cost(w)
            if cw != cost[w]:
                cost[w] = cw
                heapq.heappush(heap, (cw, w))
    return order, fills, best_width


def triangulate(g: Graph) -> tuple[Graph, set[Edge], list[int]]:
    """Min-fill triangulation.

    Returns ``(chordal, fill_edges, elimination_order)``; the order is a
    perfect elimination ordering of ``chordal``.
    """
    order, fills, _ = _min_fill_order({v: set(ns) for v, ns in g.adj.items()})
    chordal = g.with_edges(set(g.edges) | set(fills))
    return chordal, set(fills), order


def min_fill_width(g: Graph, max_width: int | None = None) -> int:
    """Width of the min-fill junction tree, without building it.

    With ``max_width`` set, any value above it is reported as ``max_width + 1``.
    """
    if g.n == 0:
        return -1
    _, _, w = _min_fill_order({v: set(ns) for v, ns in g.adj.items()}, max_width)
    return w


def _cliques_from_order(chordal: Graph, order: list[int]) -> list[tuple[int, ...]]:
    pos = {v: i for i, v in enumerate(order)}
    cands = []
    for v in order:
        later = [w for w in chordal.adj[v] if pos[w] > pos[v]]
        cands.append(frozenset([v, *later]))
    # keep only maximal candidates
    cands = sorted(set(cands), key=lambda c: (-len(c), sorted(c)))
    kept: list[frozenset] = []
    for c in cands:
        if not any(c <= k for k in kept):
            kept.append(c)
    return sorted(tuple(sorted(c)) for c in kept)


def _max_spanning_forest(bags: list[tuple[int, ...]]) -> tuple[tuple[int, int], ...]:
    members: dict[int, list[int]] = {}
    for i, b in enumerate(bags):
        for v in b:
            members.setdefault(v, []).append(i)
    weights: dict[tuple[int, int], int] = {}
    for ids in members.values():
        for a, b in itertools.combinations(ids, 2):
            weights[(a, b)] = weights.get((a, b), 0) + 1
    parent = list(range(len(bags)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    chosen = []
    for (a, b), _w in sorted(weights.items(), key=lambda kv: (-kv[1], kv[0])):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            chosen.append((a, b))
    return tuple(sorted(chosen))


def junction_tree(g: Graph) -> TreeDecomposition:
    """Junction-tree decomposition; a forest when ``g`` is disconnected.

    Bag ids follow the lexicographic order of the sorted bags.
    """
    if g.n == 0:
        return TreeDecomposition({}, (), 0)
    chordal, _, order = triangulate(g)
    bags = _cliques_from_order(chordal, order)
    edges = _max_spanning_forest(bags)
    return TreeDecomposition(dict(enumerate(bags)), edges, g.n)


def width(td: TreeDecomposition) -> int:
    """Largest bag size minus one."""
    if not td.bags:
        raise InputError("width of an empty decomposition is undefined")
    return max(len(b) for b in td.bags.values()) - 1


@dataclass
class Violation:
    kind: str
    witness: object

    def to_dict(self):
        w = self.witness
        return {"kind": self.kind, "witness": list(w) if isinstance(w, tuple) else w}


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}


def validate_decomposition(g: Graph, td: TreeDecomposition) -> ValidationReport:
    """Check the connectedness and covering properties (plus basic sanity).

    Violations are returned as data with a witness each; an empty report
    means ``td`` is a valid tree decomposition of ``g``.
    """
    report = ValidationReport()
    node_set = set(g.nodes)
    for b in td.bag_ids:
        for v in td.bags[b]:
            if v not in node_set:
                report.violations.append(Violation("unknown_node", v))
    adj = td.tree_adj()
    for a, b in td.tree_edges:
        if a not in td.bags or b not in td.bags:
            report.violations.append(Violation("unknown_bag", (a, b)))
    # acyclicity via union-find
    parent = {b: b for b in td.bags}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in td.tree_edges:
        if a in parent and b in parent:
            ra, rb = find(a), find(b)
            if ra == rb:
                report.violations.append(Violation("cycle", (a, b)))
            else:
                parent[ra] = rb

    holders: dict[int, list[int]] = {v: [] for v in g.nodes}
    for b in td.bag_ids:
        for v in td.bags[b]:
            if v in holders:
                holders[v].append(b)
    for v in g.nodes:
        hs = holders[v]
        if not hs:
            report.violations.append(Violation("uncovered_vertex", v))
            continue
        hset = set(hs)
        seen = {hs[0]}
        stack = [hs[0]]
        while stack:
            x = stack.pop()
            for y in adj.get(x, ()):
                if y in hset and y not in seen:
                    seen.add(y)
                    stack.append(y)
        if len(seen) != len(hset):
            report.violations.append(Violation("connectedness", v))
    bag_sets = [set(td.bags[b]) for b in td.bag_ids]
    for u, v in g.sorted_edges():
        if not any(u in s and v in s for s in bag_sets):
            report.violations.append(Violation("covering", (u, v)))
    return report


def exact_treewidth(g: Graph) -> int:
    """Exact treewidth by dynamic programming over elimination prefixes.

    ``TW(S) = min_{v in S} max(TW(S - v), |Q(S - v, v)|)`` where ``Q(S, v)`` is
    the set of vertices outside ``S + v`` reachable from ``v`` through ``S``.
    Equivalent to exhaustive search over elimination orderings. Tests only.
    """
    n = g.n
    if n > EXACT_TREEWIDTH_MAX_NODES:
        raise CapacityError(
            f"exact_treewidth is limited to {EXACT_TREEWIDTH_MAX_NODES} nodes, got {n}")
    if n == 0:
        return -1
    idx = g.index
    nbr = [0] * n
    for u, v in g.edges:
        nbr[idx[u]] |= 1 << idx[v]
        nbr[idx[v]] |= 1 << idx[u]

    def q_size(s: int, v: int) -> int:
        seen = 1 << v
        frontier = 1 << v
        reach = 0
        while frontier:
            nxt = 0
            f = frontier
            while f:
                low = f & -f
                i = low.bit_length() - 1
                nxt |= nbr[i]
                f ^= low
            nxt &= ~seen
            seen |= nxt
            reach |= nxt & ~s
            frontier = nxt & s
        return bin(reach).count("1")

    full = (1 << n) - 1
    tw = [0] * (1 << n)
    tw[0] = -1
    for s in range(1, full + 1):
        best = n
        t = s
        while t:
            low = t & -t
            v = low.bit_length() - 1
            rest = s ^ low
            val = max(tw[rest], q_size(rest, v))
            if val < best:
                best = val
            t ^= low
        tw[s] = best
    return tw[full]
