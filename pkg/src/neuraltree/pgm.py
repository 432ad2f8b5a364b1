"""Graph-compatible functions and discrete graphical models.

A compatible function is a sum of clique terms over the maximal cliques of a
graph. Discrete terms are log-potential tables with one axis per clique
member (members in ascending id order); continuous terms are Lipschitz
piecewise-linear functions on ``[0, 1]^|C|``.

Exact inference is provided twice, by full enumeration and by sum-product on
the junction tree, so each can check the other.
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import CapacityError, DecompositionError, InputError
from .graph import Graph, from_edges, maximal_cliques
from .treedecomp import TreeDecomposition, junction_tree, validate_decomposition

MAX_STATES = 2 ** 20
MAX_BAG_STATES = 2 ** 22
GRID = 16
COARSE = 4  # cells per axis of the random lattice behind continuous clique functions
MAX_GRID_POINTS = 2_000_000


class PiecewiseLinear:
    """Multilinear interpolant of values on a uniform grid over ``[0, 1]^k``.

    Adjacent grid values differ by at most ``lipschitz / (k * GRID)``, which
    makes the function ``lipschitz``-Lipschitz in the sup norm.
    """

    def __init__(self, values: np.ndarray, lipschitz: float):
        self.values = np.asarray(values, dtype=float)
        self.k = self.values.ndim
        self.lipschitz = float(lipschitz)

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.k:
            raise InputError(f"expected {self.k} coordinates, got {x.shape[1]}")
        if np.any((x < 0) | (x > 1)):
            raise InputError("continuous clique functions are defined on [0, 1]")
        g = self.values.shape[0] - 1
        pos = x * g
        lo = np.minimum(np.floor(pos).astype(int), g - 1)
        frac = pos - lo
        out = np.zeros(x.shape[0])
        for corner in itertools.product((0, 1), repeat=self.k):
            c = np.array(corner)
            w = np.prod(np.where(c == 1, frac, 1.0 - frac), axis=1)
            out += w * self.values[tuple((lo + c).T)]
        return out


@dataclass
class CompatibleFunction:
    """``f(X) = sum_C theta_C(x_C)`` over the maximal cliques of ``source_graph``."""

    source_graph: Graph
    cliques: list[tuple[int, ...]]
    tables: list[np.ndarray] | None = None
    domain: int | None = None
    fns: list[PiecewiseLinear] | None = None

    def __post_init__(self):
        self.cliques = [tuple(sorted(c)) for c in self.cliques]
        node_set = set(self.source_graph.nodes)
        for c in self.cliques:
            if not c or not set(c) <= node_set:
                raise InputError(f"clique {list(c)} is empty or names unknown nodes")
        if self.tables is not None:
            if self.domain is None:
                raise InputError("discrete compatible functions need a domain size")
            self.tables = [np.asarray(t, dtype=float) for t in self.tables]
            for c, t in zip(self.cliques, self.tables):
                if t.shape != (self.domain,) * len(c):
                    raise InputError(
                        f"table for clique {list(c)} has shape {t.shape}, "
                        f"expected {(self.domain,) * len(c)}")
        elif self.fns is None:
            raise InputError("need either discrete tables or continuous functions")
        n_terms = len(self.tables if self.tables is not None else self.fns)
        if n_terms != len(self.cliques):
            raise InputError("one clique term per clique is required")

    @property
    def is_discrete(self) -> bool:
        return self.tables is not None

    @property
    def nodes(self) -> tuple[int, ...]:
        return self.source_graph.nodes

    def term(self, i: int, xs) -> np.ndarray:
        """Clique term ``i`` on a batch of clique assignments ``xs`` ``(m, |C|)``."""
        xs = np.atleast_2d(xs)
        if self.is_discrete:
            return self.tables[i][tuple(np.asarray(xs, dtype=int).T)]
        return self.fns[i](xs)

    def term_at(self, i: int, x: Mapping[int, float]) -> float:
        return float(self.term(i, [[x[v] for v in self.cliques[i]]])[0])

    def evaluate_batch(self, xs: np.ndarray) -> np.ndarray:
        """Evaluate on rows of ``xs`` with columns aligned to ``self.nodes``."""
        xs = np.atleast_2d(xs)
        idx = self.source_graph.index
        out = np.zeros(xs.shape[0])
        for i, c in enumerate(self.cliques):
            out += self.term(i, xs[:, [idx[v] for v in c]])
        return out


def _check_assignment(f: CompatibleFunction, x: Mapping[int, float]):
    missing = [v for v in f.nodes if v not in x]
    if missing:
        raise InputError(f"assignment is missing nodes {missing}")
    if f.is_discrete:
        for v in f.nodes:
            if x[v] != int(x[v]) or not 0 <= x[v] < f.domain:
                raise InputError(f"value {x[v]} of node {v} is outside the domain")


def eval_compatible(f: CompatibleFunction, x: Mapping[int, float]) -> float:
    _check_assignment(f, x)
    return float(sum(f.term_at(i, x) for i in range(len(f.cliques))))


# -- factorization -------------------------------------------------------

def root_order(td: TreeDecomposition) -> list[int]:
    """BFS over the decomposition from the lowest bag id; fresh BFS per tree."""
    adj = td.tree_adj()
    seen: set[int] = set()
    order = []
    for start in td.bag_ids:
        if start in seen:
            continue
        seen.add(start)
        queue = deque([start])
        while queue:
            b = queue.popleft()
            order.append(b)
            for c in adj[b]:
                if c not in seen:
                    seen.add(c)
                    queue.append(c)
    return order


@dataclass
class Factorization:
    """Partition of the clique terms of ``f`` over the bags of ``td``."""

    f: CompatibleFunction
    td: TreeDecomposition
    ordered_roots: list[int]
    assignment: dict[int, tuple[int, ...]]  # bag id -> clique indices

    def component(self, r: int, x: Mapping[int, float]) -> float:
        return float(sum(self.f.term_at(i, x) for i in self.assignment[r]))

    def component_batch(self, r: int, xs: np.ndarray) -> np.ndarray:
        xs = np.atleast_2d(xs)
        idx = self.f.source_graph.index
        out = np.zeros(xs.shape[0])
        for i in self.assignment[r]:
            out += self.f.term(i, xs[:, [idx[v] for v in self.f.cliques[i]]])
        return out

    def total(self, x: Mapping[int, float]) -> float:
        return float(sum(self.component(r, x) for r in self.ordered_roots))


def factorize(f: CompatibleFunction, td: TreeDecomposition) -> Factorization:
    """Ordered scan assigning each clique to the first bag (in root order) holding it."""
    order = root_order(td)
    taken: set[int] = set()
    assignment: dict[int, tuple[int, ...]] = {}
    for r in order:
        bag = set(td.bags[r])
        mine = tuple(i for i, c in enumerate(f.cliques)
                     if i not in taken and set(c) <= bag)
        taken.update(mine)
        assignment[r] = mine
    leftover = [f.cliques[i] for i in range(len(f.cliques)) if i not in taken]
    if leftover:
        raise DecompositionError(f"cliques {leftover} fit in no bag of the decomposition")
    return Factorization(f, td, order, assignment)


# -- exact inference -----------------------------------------------------

def _broadcast(table: np.ndarray, vars_: Sequence[int], target: Sequence[int]) -> np.ndarray:
    """Reshape a table over sorted ``vars_`` to broadcast against sorted ``target``."""
    present = set(vars_)
    shape = [table.shape[list(vars_).index(v)] if v in present else 1 for v in target]
    return table.reshape(shape)


def _require_discrete(m: CompatibleFunction):
    if not m.is_discrete:
        raise InputError("exact inference needs a discrete model")


def joint_log_table(m: CompatibleFunction) -> np.ndarray:
    _require_discrete(m)
    n = len(m.nodes)
    if m.domain ** n > MAX_STATES:
        raise CapacityError(f"state space {m.domain}^{n} exceeds {MAX_STATES}")
    full = np.zeros((m.domain,) * n)
    for c, t in zip(m.cliques, m.tables):
        full = full + _broadcast(t, c, m.nodes)
    return full


def brute_force_marginals(m: CompatibleFunction) -> dict[int, np.ndarray]:
    """Per-node marginals of ``p(X) proportional to exp f(X)`` by enumeration."""
    full = joint_log_table(m)
    log_z = logsumexp(full)
    out = {}
    for i, v in enumerate(m.nodes):
        axes = tuple(a for a in range(full.ndim) if a != i)
        out[v] = np.exp(logsumexp(full, axis=axes) - log_z) if axes else np.exp(full - log_z)
    return out


def junction_tree_marginals(m: CompatibleFunction,
                            td: TreeDecomposition | None = None) -> dict[int, np.ndarray]:
    """Per-node marginals by two-pass sum-product on the junction tree (log domain)."""
    _require_discrete(m)
    g = m.source_graph
    td = junction_tree(g) if td is None else td
    D = m.domain
    for b, bag in td.bags.items():
        if D ** len(bag) > MAX_BAG_STATES:
            raise CapacityError(f"bag {b} needs {D}^{len(bag)} states")
    fac = factorize(m, td)
    bags = {b: tuple(sorted(bag)) for b, bag in td.bags.items()}
    pot = {}
    for b in td.bag_ids:
        p = np.zeros((D,) * len(bags[b]))
        for i in fac.assignment[b]:
            p = p + _broadcast(m.tables[i], m.cliques[i], bags[b])
        pot[b] = p
    adj = td.tree_adj()
    msgs: dict[tuple[int, int], np.ndarray] = {}

    def send(a: int, b: int):
        # message a -> b over the separator, in b's axis layout
        belief = pot[a]
        for c in adj[a]:
            if c != b:
                belief = belief + msgs[(c, a)]
        sep = set(bags[a]) & set(bags[b])
        axes = tuple(i for i, v in enumerate(bags[a]) if v not in sep)
        red = logsumexp(belief, axis=axes) if axes else belief
        red = red - red.max()
        kept = [v for v in bags[a] if v in sep]
        msgs[(a, b)] = _broadcast(red, kept, bags[b])

    order = root_order(td)
    parent: dict[int, int | None] = {}
    for b in order:
        if b not in parent:
            parent[b] = None
        for c in adj[b]:
            if c not in parent:
                parent[c] = b
    for b in reversed(order):  # collect towards each tree's root
        if parent[b] is not None:
            send(b, parent[b])
    for b in order:  # distribute back out
        for c in adj[b]:
            if parent.get(c) == b:
                send(b, c)
    out: dict[int, np.ndarray] = {}
    for b in td.bag_ids:
        belief = pot[b]
        for c in adj[b]:
            belief = belief + msgs[(c, b)]
        for i, v in enumerate(bags[b]):
            if v in out:
                continue
            axes = tuple(a for a in range(belief.ndim) if a != i)
            lm = logsumexp(belief, axis=axes) if axes else belief
            out[v] = np.exp(lm - logsumexp(lm))
    return {v: out[v] for v in g.nodes}


# -- labels --------------------------------------------------------------

@dataclass
class LabelModel:
    """Clique log-potentials ``log psi_C(x_C, y_C)`` over discrete features and labels.

    Each table has shape ``(D,) * |C| + (L,) * |C|``: feature axes first,
    then label axes, both in ascending node order.
    """

    source_graph: Graph
    cliques: list[tuple[int, ...]]
    tables: list[np.ndarray]
    domain: int
    num_labels: int

    def conditioned(self, x: Mapping[int, int]) -> CompatibleFunction:
        """The compatible function over labels obtained by fixing features ``x``."""
        tabs = []
        for c, t in zip(self.cliques, self.tables):
            tabs.append(t[tuple(int(x[v]) for v in c)])
        return CompatibleFunction(self.source_graph, self.cliques, tabs, self.num_labels)


def map_labels(m: LabelModel, x: Mapping[int, int]) -> dict[int, int]:
    """Exhaustive argmax over joint labelings; ties go to the lexicographically
    smallest labeling (in ascending node order)."""
    nodes = m.source_graph.nodes
    if m.num_labels ** len(nodes) > MAX_STATES:
        raise CapacityError(f"label space {m.num_labels}^{len(nodes)} exceeds {MAX_STATES}")
    missing = [v for v in nodes if v not in x]
    if missing:
        raise InputError(f"features missing for nodes {missing}")
    full = joint_log_table(m.conditioned(x))
    best = np.unravel_index(int(np.argmax(full)), full.shape)
    return {v: int(y) for v, y in zip(nodes, best)}


# -- moralization --------------------------------------------------------

def moralize(parents: Mapping[int, Sequence[int]]) -> Graph:
    """Moral graph of a DAG given as ``child -> parents``; co-parents are married."""
    nodes = set(parents)
    for ps in parents.values():
        nodes.update(ps)
    indeg = {v: len(set(parents.get(v, ()))) for v in nodes}
    children: dict[int, list[int]] = {v: [] for v in nodes}
    for c, ps in parents.items():
        for p in set(ps):
            if p == c:
                raise InputError(f"self-loop on node {c}")
            children[p].append(c)
    queue = deque(sorted(v for v in nodes if indeg[v] == 0))
    visited = 0
    while queue:
        v = queue.popleft()
        visited += 1
        for c in children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                queue.append(c)
    if visited != len(nodes):
        raise InputError("directed graph has a cycle")
    edges = set()
    for c, ps in parents.items():
        ps = sorted(set(ps))
        edges.update((min(p, c), max(p, c)) for p in ps)
        edges.update(itertools.combinations(ps, 2))
    return from_edges(edges, nodes=nodes)


# -- random models -------------------------------------------------------

def _lipschitz_grid(rng: np.random.Generator, k: int, step: float) -> np.ndarray:
    """Uniform values on a coarse lattice, multilinearly refined to the grid and
    lowered to the largest minorant moving at most ``step`` per grid cell."""
    if (GRID + 1) ** k > MAX_GRID_POINTS:
        raise CapacityError(f"clique of size {k} is too large for a {GRID}-cell grid")
    v = rng.uniform(0.0, 1.0, size=(COARSE + 1,) * k)
    coarse, fine = np.linspace(0, 1, COARSE + 1), np.linspace(0, 1, GRID + 1)
    for axis in range(k):
        v = np.apply_along_axis(lambda a: np.interp(fine, coarse, a), axis, v)
    for axis in range(k):
        v = np.moveaxis(v, axis, 0).copy()
        for i in range(1, GRID + 1):
            v[i] = np.minimum(v[i], v[i - 1] + step)
        for i in range(GRID - 1, -1, -1):
            v[i] = np.minimum(v[i], v[i + 1] + step)
        v = np.moveaxis(v, 0, axis)
    return v


def sample_random_compatible(g: Graph, mode: str = "discrete", seed: int = 0, *,
                             domain: int = 2, lipschitz: float = 1.0) -> CompatibleFunction:
    """Random compatible function on ``g``.

    ``mode="discrete"``: i.i.d. uniform ``[0, 1]`` table entries over ``domain``
    states per node. ``mode="continuous"``: piecewise-linear clique functions
    with range in ``[0, 1]`` and sup-norm Lipschitz constant ``lipschitz``.
    """
    rng = np.random.default_rng(seed)
    cliques = maximal_cliques(g)
    if mode == "discrete":
        tables = [rng.uniform(0.0, 1.0, size=(domain,) * len(c)) for c in cliques]
        return CompatibleFunction(g, cliques, tables, domain)
    if mode == "continuous":
        fns = []
        for c in cliques:
            step = lipschitz / (len(c) * GRID)
            fns.append(PiecewiseLinear(_lipschitz_grid(rng, len(c), step), lipschitz))
        return CompatibleFunction(g, cliques, fns=fns)
    raise InputError(f"unknown mode {mode!r}")


# -- file format and self-check -------------------------------------------

def compatible_to_dict(f: CompatibleFunction) -> dict:
    if not f.is_discrete:
        raise InputError("only discrete compatible functions have a file format")
    return {
        "cliques": [list(c) for c in f.cliques],
        "tables": {str(i): [float(v) for v in t.ravel()] for i, t in enumerate(f.tables)},
        "domain": f.domain,
    }


def compatible_from_dict(obj) -> CompatibleFunction:
    """Parse the model file; the graph is the union of the listed cliques unless
    a ``graph`` object is supplied."""
    from .graph import graph_from_dict

    if not isinstance(obj, dict):
        raise InputError("model must be a JSON object")
    for key in ("cliques", "tables", "domain"):
        if key not in obj:
            raise InputError(f"model is missing field {key!r}")
    domain = obj["domain"]
    if isinstance(domain, bool) or not isinstance(domain, int) or domain < 1:
        raise InputError("field 'domain' must be a positive integer")
    cliques = obj["cliques"]
    if not isinstance(cliques, list) or not all(isinstance(c, list) for c in cliques):
        raise InputError("field 'cliques' must be a list of node lists")
    cliques = [tuple(sorted(int(v) for v in c)) for c in cliques]
    if not isinstance(obj["tables"], dict):
        raise InputError("field 'tables' must map clique index -> entries")
    tables = []
    for i, c in enumerate(cliques):
        flat = obj["tables"].get(str(i))
        if flat is None:
            raise InputError(f"field 'tables' has no entry for clique {i}")
        if len(flat) != domain ** len(c):
            raise InputError(f"tables[{i}] needs {domain ** len(c)} entries, got {len(flat)}")
        tables.append(np.array(flat, dtype=float).reshape((domain,) * len(c)))
    if "graph" in obj:
        g = graph_from_dict(obj["graph"])
    else:
        edges = set()
        nodes = set()
        for c in cliques:
            nodes.update(c)
            edges.update(itertools.combinations(c, 2))
        g = from_edges(edges, nodes=nodes)
    return CompatibleFunction(g, cliques, tables, domain)


@dataclass
class CheckReport:
    passed: bool
    checks: dict[str, bool] = field(default_factory=dict)
    witnesses: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"status": "PASS" if self.passed else "FAIL",
                "checks": {k: "PASS" if v else "FAIL" for k, v in self.checks.items()},
                "witnesses": self.witnesses}


def check_model(f: CompatibleFunction, tol: float = 1e-9) -> CheckReport:
    """Clique, factorization and inference-equivalence checks on one model."""
    rep = CheckReport(True)
    g = f.source_graph
    expected = maximal_cliques(g)
    ok = sorted(f.cliques) == expected
    rep.checks["cliques"] = ok
    if not ok:
        rep.witnesses.append({"check": "cliques", "expected": [list(c) for c in expected],
                              "got": [list(c) for c in f.cliques]})
    td = junction_tree(g)
    vr = validate_decomposition(g, td)
    rep.checks["decomposition"] = vr.ok
    rep.witnesses.extend({"check": "decomposition", **v.to_dict()} for v in vr.violations)
    try:
        fac = factorize(f, td)
    except DecompositionError as exc:
        rep.checks["factorization"] = False
        rep.witnesses.append({"check": "factorization", "error": str(exc)})
        rep.passed = False
        return rep
    n = len(g.nodes)
    if f.domain ** n <= MAX_STATES:
        xs = np.array(list(itertools.product(range(f.domain), repeat=n)))
        total = sum(fac.component_batch(r, xs) for r in fac.ordered_roots)
        diff = np.abs(total - f.evaluate_batch(xs))
        worst = int(np.argmax(diff))
        ok = bool(diff[worst] <= 1e-12)
        rep.checks["factorization"] = ok
        if not ok:
            rep.witnesses.append({"check": "factorization",
                                  "assignment": [int(v) for v in xs[worst]],
                                  "abs_error": float(diff[worst])})
        bf = brute_force_marginals(f)
        jt = junction_tree_marginals(f, td)
        errs = {v: float(np.max(np.abs(bf[v] - jt[v]))) for v in g.nodes}
        v_worst = max(errs, key=lambda v: (errs[v], -v))
        ok = errs[v_worst] <= tol
        rep.checks["inference"] = ok
        if not ok:
            rep.witnesses.append({"check": "inference", "node": v_worst,
                                  "linf": errs[v_worst]})
    rep.passed = all(rep.checks.values())
    return rep


def dumps_compatible(f: CompatibleFunction) -> str:
    return json.dumps(compatible_to_dict(f), separators=(",", ":"))
