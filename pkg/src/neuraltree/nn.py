"""Message-passing networks on H-trees (neural trees) and on input graphs.

One engine serves both architectures. A :class:`Structure` describes where
messages flow (sparse adjacency split by edge type), how input features seed
the message-passing nodes, and how final node states pool into per-vertex
outputs. For a neural tree, leaves are seeded with the features of their
vertex, clique nodes start at zero, and each vertex pools the mean over its
leaves. For the baseline GNN all three maps are the identity on the graph.

Gradients are computed by hand-written reverse passes. Everything runs in
float64.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import InputError
from .graph import Graph
from .htree import HTree, leaf_groups

CHECKPOINT_FORMAT = "neuraltree-checkpoint/1"
AGGREGATORS = ("gcn_mean", "shallow_relu")
TASKS = ("classification", "regression")


@dataclass
class ModelConfig:
    hidden_dim: int = 32
    iterations: int | None = 2
    aggregator: str = "gcn_mean"
    shallow_units: int | None = None
    task: str = "classification"
    num_classes: int = 2
    num_node_types: int = 1
    dropout: float = 0.0
    edge_types: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.aggregator not in AGGREGATORS:
            raise InputError(f"aggregator must be one of {AGGREGATORS}")
        if self.task not in TASKS:
            raise InputError(f"task must be one of {TASKS}")
        if self.iterations is not None and self.iterations < 1:
            raise InputError("at least one message-passing iteration is required")
        if not 0.0 <= self.dropout < 1.0:
            raise InputError("dropout must lie in [0, 1)")

    @property
    def out_dim(self) -> int:
        return self.num_classes if self.task == "classification" else 1

    @property
    def units(self) -> int:
        return self.shallow_units or self.hidden_dim


@dataclass
class ModelParams:
    config: ModelConfig
    in_dim: int
    arrays: dict[str, np.ndarray] = field(default_factory=dict)

    def copy(self) -> "ModelParams":
        return ModelParams(self.config, self.in_dim,
                           {k: v.copy() for k, v in self.arrays.items()})

    def sq_norm(self) -> float:
        return float(sum(np.sum(v * v) for v in self.arrays.values()))

    def to_dict(self) -> dict:
        return {
            "format": CHECKPOINT_FORMAT,
            "config": asdict(self.config),
            "in_dim": self.in_dim,
            "params": {k: {"shape": list(v.shape), "data": [float(x) for x in v.ravel()]}
                       for k, v in sorted(self.arrays.items())},
        }

    @classmethod
    def from_dict(cls, obj) -> "ModelParams":
        if obj.get("format") != CHECKPOINT_FORMAT:
            raise InputError(f"unsupported checkpoint format {obj.get('format')!r}")
        arrays = {k: np.array(v["data"], dtype=float).reshape(v["shape"])
                  for k, v in obj["params"].items()}
        return cls(ModelConfig(**obj["config"]), int(obj["in_dim"]), arrays)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def _glorot(rng, fan_in, fan_out, shape=None):
    lim = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-lim, lim, size=shape or (fan_in, fan_out))


def init_params(config: ModelConfig, in_dim: int, n_edge_types: int = 2) -> ModelParams:
    if config.iterations is None:
        raise InputError("iterations must be resolved before initialising parameters")
    rng = np.random.default_rng(config.seed)
    H = config.hidden_dim
    arrays: dict[str, np.ndarray] = {}
    for t in range(config.iterations):
        d = in_dim if t == 0 else H
        if config.aggregator == "gcn_mean":
            arrays[f"W{t}"] = _glorot(rng, d, H)
            arrays[f"b{t}"] = np.zeros(H)
        else:
            K = config.units
            arrays[f"W{t}"] = _glorot(rng, 2 * d, K)
            arrays[f"b{t}"] = np.zeros(K)
            arrays[f"A{t}"] = _glorot(rng, K, H)
    out = config.out_dim
    arrays["head_W"] = _glorot(rng, H, out, (config.num_node_types, H, out))
    arrays["head_b"] = np.zeros((config.num_node_types, out))
    if config.edge_types:
        arrays["edge_scale"] = np.zeros(n_edge_types)
    return ModelParams(config, in_dim, arrays)


# -- structures ------------------------------------------------------------

@dataclass
class Structure:
    """Message-passing layout for one graph or a disjoint batch of graphs."""

    adj_parts: list[sp.csr_matrix]   # symmetric adjacency per edge type
    init: sp.csr_matrix              # (nodes, inputs): seeds node states from features
    pool: sp.csr_matrix              # (outputs, nodes): per-vertex readout pooling
    output_types: np.ndarray         # node type per output row

    @property
    def n_nodes(self) -> int:
        return self.init.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.pool.shape[0]

    def degree(self) -> np.ndarray:
        return self._cache()["deg"]

    def merged(self) -> sp.csr_matrix:
        """All edge types in one matrix (used when edge-type scalars are off)."""
        return self._cache()["merged"]

    def _cache(self) -> dict:
        c = self.__dict__.get("_derived")
        if c is None:
            merged = sum(self.adj_parts[1:], self.adj_parts[0]).tocsr()
            c = {"merged": merged, "deg": np.asarray(merged.sum(axis=1)).ravel()}
            self.__dict__["_derived"] = c
        return c


def _sym(n, pairs) -> sp.csr_matrix:
    if not pairs:
        return sp.csr_matrix((n, n))
    r, c = np.array(pairs, dtype=int).T
    data = np.ones(2 * len(r))
    return sp.csr_matrix((data, (np.r_[r, c], np.r_[c, r])), shape=(n, n))


def _types_of(g: Graph) -> list[int]:
    return [int(g.node_types.get(v, 0)) for v in g.nodes]


def htree_structure(graphs: Sequence[Graph], htrees: Sequence[HTree]) -> Structure:
    """Disjoint union of neural-tree structures; outputs follow graph node order."""
    root_pairs, child_pairs = [], []
    init_r, init_c, pool_r, pool_c, pool_v, types = [], [], [], [], [], []
    node_off = src_off = 0
    for g, h in zip(graphs, htrees):
        root_pairs += [(a + node_off, b + node_off) for a, b in h.root_edges]
        child_pairs += [(c + node_off, p + node_off) for c, p in h.parent.items()]
        for leaf, v in h.leaf_map.items():
            init_r.append(leaf + node_off)
            init_c.append(src_off + g.index[v])
        groups = leaf_groups(h)
        for v in g.nodes:
            ls = groups[v]
            for leaf in ls:
                pool_r.append(src_off + g.index[v])
                pool_c.append(leaf + node_off)
                pool_v.append(1.0 / len(ls))
        types += _types_of(g)
        node_off += len(h.nodes)
        src_off += g.n
    init = sp.csr_matrix((np.ones(len(init_r)), (init_r, init_c)), shape=(node_off, src_off))
    pool = sp.csr_matrix((pool_v, (pool_r, pool_c)), shape=(src_off, node_off))
    return Structure([_sym(node_off, root_pairs), _sym(node_off, child_pairs)],
                     init, pool, np.array(types, dtype=int))


def graph_structure(graphs: Sequence[Graph]) -> Structure:
    """Disjoint union of input graphs for the baseline GNN."""
    pairs, types = [], []
    off = 0
    for g in graphs:
        pairs += [(g.index[u] + off, g.index[v] + off) for u, v in g.sorted_edges()]
        types += _types_of(g)
        off += g.n
    eye = sp.identity(off, format="csr")
    return Structure([_sym(off, pairs)], eye, eye, np.array(types, dtype=int))


# -- forward / backward ------------------------------------------------------

def _edge_coeffs(params: ModelParams, n_parts: int) -> np.ndarray:
    if "edge_scale" in params.arrays:
        s = params.arrays["edge_scale"]
        if len(s) < n_parts:
            raise InputError("checkpoint has fewer edge-type scalars than the structure")
        return 1.0 + s[:n_parts]
    return np.ones(n_parts)


def dropout_masks(config: ModelConfig, n_nodes: int, rng: np.random.Generator) -> list:
    p = config.dropout
    return [(rng.random((n_nodes, config.hidden_dim)) >= p) / (1.0 - p)
            for _ in range(config.iterations)]


def forward(params: ModelParams, s: Structure, x: np.ndarray,
            masks: Sequence[np.ndarray] | None = None):
    """Raw head outputs (logits or regression values) plus a cache for :func:`backward`.

    ``masks`` are per-iteration dropout multipliers; ``None`` means evaluation mode.
    """
    cfg = params.config
    P = params.arrays
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] != s.init.shape[1] or x.shape[1] != params.in_dim:
        raise InputError(f"features of shape {x.shape} do not match the model "
                         f"(expected ({s.init.shape[1]}, {params.in_dim}))")
    coef = _edge_coeffs(params, len(s.adj_parts))
    typed = "edge_scale" in P
    deg = s.degree()
    inv_self = 1.0 / (1.0 + deg)
    inv_nbr = np.where(deg > 0, 1.0 / np.maximum(deg, 1.0), 0.0)
    h = s.init @ x
    layers = []
    for t in range(cfg.iterations):
        if typed:
            ah = [a @ h for a in s.adj_parts]
            agg = sum(c * m for c, m in zip(coef, ah))
        else:
            ah = None
            agg = s.merged() @ h
        if cfg.aggregator == "gcn_mean":
            z = inv_self[:, None] * (h + agg)
            pre = z @ P[f"W{t}"] + P[f"b{t}"]
            act = np.maximum(pre, 0.0)
            r = None
        else:
            z = np.hstack([h, inv_nbr[:, None] * agg])
            pre = z @ P[f"W{t}"] + P[f"b{t}"]
            r = np.maximum(pre, 0.0)
            act = r @ P[f"A{t}"]
        mask = None if masks is None else masks[t]
        out = act if mask is None else act * mask
        layers.append({"h": h, "ah": ah, "z": z, "pre": pre, "r": r, "mask": mask})
        h = out
    pooled = s.pool @ h
    raw = np.zeros((s.n_outputs, cfg.out_dim))
    for ty in range(cfg.num_node_types):
        sel = s.output_types == ty
        if np.any(sel):
            raw[sel] = pooled[sel] @ P["head_W"][ty] + P["head_b"][ty]
    if np.any(s.output_types >= cfg.num_node_types):
        raise InputError("structure has node types without a head")
    cache = {"layers": layers, "h_final": h, "pooled": pooled, "coef": coef,
             "inv_self": inv_self, "inv_nbr": inv_nbr}
    return raw, cache


def backward(params: ModelParams, s: Structure, cache, d_raw: np.ndarray) -> dict:
    cfg = params.config
    P = params.arrays
    grads = {k: np.zeros_like(v) for k, v in P.items()}
    pooled = cache["pooled"]
    d_pooled = np.zeros_like(pooled)
    for ty in range(cfg.num_node_types):
        sel = s.output_types == ty
        if np.any(sel):
            grads["head_W"][ty] = pooled[sel].T @ d_raw[sel]
            grads["head_b"][ty] = d_raw[sel].sum(axis=0)
            d_pooled[sel] = d_raw[sel] @ P["head_W"][ty].T
    dh = s.pool.T @ d_pooled
    coef = cache["coef"]
    d_coef = np.zeros(len(coef))
    for t in reversed(range(cfg.iterations)):
        L = cache["layers"][t]
        d_act = dh if L["mask"] is None else dh * L["mask"]
        if cfg.aggregator == "gcn_mean":
            d_pre = d_act * (L["pre"] > 0)
            grads[f"W{t}"] = L["z"].T @ d_pre
            grads[f"b{t}"] = d_pre.sum(axis=0)
            dz = d_pre @ P[f"W{t}"].T
            d_agg = cache["inv_self"][:, None] * dz
            dh = d_agg.copy()
        else:
            grads[f"A{t}"] = L["r"].T @ d_act
            d_pre = (d_act @ P[f"A{t}"].T) * (L["pre"] > 0)
            grads[f"W{t}"] = L["z"].T @ d_pre
            grads[f"b{t}"] = d_pre.sum(axis=0)
            dz = d_pre @ P[f"W{t}"].T
            d = L["h"].shape[1]
            dh = dz[:, :d].copy()
            d_agg = cache["inv_nbr"][:, None] * dz[:, d:]
        if L["ah"] is None:
            dh += s.merged().T @ d_agg
            continue
        for e, a in enumerate(s.adj_parts):
            dh += coef[e] * (a.T @ d_agg)
            d_coef[e] += float(np.sum(d_agg * L["ah"][e]))
    if "edge_scale" in grads:
        grads["edge_scale"][: len(coef)] = d_coef
    return grads


# -- losses ------------------------------------------------------------------

def log_softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def softmax(z: np.ndarray) -> np.ndarray:
    return np.exp(log_softmax(z))


def loss(raw: np.ndarray, targets: np.ndarray, idx: np.ndarray | None = None, *,
         task: str = "classification", l2: float = 0.0,
         params: ModelParams | None = None):
    """Mean cross-entropy (or squared error) over rows ``idx`` plus ``l2 * ||params||^2``.

    Returns ``(value, d_raw)``.
    """
    raw = np.asarray(raw, dtype=float)
    idx = np.arange(raw.shape[0]) if idx is None else np.asarray(idx, dtype=int)
    if len(idx) == 0:
        raise InputError("loss needs at least one supervised row")
    d_raw = np.zeros_like(raw)
    if task == "classification":
        y = np.asarray(targets)[idx].astype(int)
        if np.any(y < 0) or np.any(y >= raw.shape[1]):
            raise InputError("label out of range")
        lp = log_softmax(raw[idx])
        value = -float(np.mean(lp[np.arange(len(idx)), y]))
        g = np.exp(lp)
        g[np.arange(len(idx)), y] -= 1.0
        np.add.at(d_raw, idx, g / len(idx))
    elif task == "regression":
        y = np.asarray(targets, dtype=float)[idx]
        diff = raw[idx, 0] - y
        value = float(np.mean(diff ** 2))
        np.add.at(d_raw[:, 0], idx, 2.0 * diff / len(idx))
    else:
        raise InputError(f"unknown task {task!r}")
    if l2 and params is not None:
        value += l2 * params.sq_norm()
    return value, d_raw


def loss_and_grad(params: ModelParams, s: Structure, x: np.ndarray, targets: np.ndarray,
                  idx: np.ndarray, l2: float = 0.0, masks=None):
    raw, cache = forward(params, s, x, masks)
    value, d_raw = loss(raw, targets, idx, task=params.config.task, l2=l2, params=params)
    grads = backward(params, s, cache, d_raw)
    if l2:
        for k, v in params.arrays.items():
            grads[k] += 2.0 * l2 * v
    return value, grads


def gradients(params: ModelParams, s: Structure, x, targets, idx, l2=0.0, masks=None) -> dict:
    """Exact parameter gradients of the training loss."""
    return loss_and_grad(params, s, x, targets, idx, l2, masks)[1]


def _head_output(raw: np.ndarray, task: str) -> np.ndarray:
    return softmax(raw) if task == "classification" else raw[:, 0]


def nt_forward(h: HTree, params: ModelParams, x: np.ndarray,
               node_types: Mapping[int, int] | None = None) -> np.ndarray:
    """Per-vertex outputs of a neural tree; rows follow ascending vertex id.

    Class probabilities for classification, scalar predictions for regression.
    """
    groups = leaf_groups(h)
    verts = tuple(groups)
    g = Graph(verts, frozenset(), np.asarray(x, dtype=float), node_types=node_types or {})
    raw, _ = forward(params, htree_structure([g], [h]), g.features)
    return _head_output(raw, params.config.task)


def baseline_gnn_forward(g: Graph, params: ModelParams, x: np.ndarray | None = None) -> np.ndarray:
    """Per-node outputs of the baseline GNN run directly on ``g``."""
    x = g.features if x is None else x
    if x is None:
        raise InputError("baseline GNN needs node features")
    raw, _ = forward(params, graph_structure([g]), x)
    return _head_output(raw, params.config.task)


# -- shallow aggregation with per-node weights --------------------------------

def shallow_agg(inputs: np.ndarray, w: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``ReLU(sum_k a_k * <w_k, inputs> + b_k)`` per output unit.

    ``w`` is ``(K, len(inputs))`` and ``b`` is ``(K,)``; ``a`` is ``(K,)`` for a
    scalar output or ``(out, K)`` for a vector. The trainable ``shallow_relu``
    layer instead applies the ReLU per unit before mixing; the two coincide
    when ``K == 1``.
    """
    proj = np.asarray(w, dtype=float) @ np.asarray(inputs, dtype=float)
    return np.maximum(np.asarray(a, dtype=float) @ proj + np.sum(b), 0.0)


@dataclass
class NodeWeights:
    """Per-node shallow aggregator over ``[h_u, h_nbr1, h_nbr2, ...]`` (ascending ids)."""

    w: np.ndarray
    a: np.ndarray
    b: np.ndarray


def run_per_node_program(adj: Mapping[int, Sequence[int]], h0: Mapping[int, float],
                         program: Sequence[Mapping[int, NodeWeights]]) -> dict[int, float]:
    """Synchronous scalar message passing with a distinct aggregator per node and step.

    Nodes without an entry at a step keep their value through the copy
    aggregator ``ReLU(h_u)``, so state values must stay non-negative.
    """
    h = {u: float(h0[u]) for u in adj}
    for step in program:
        new = {}
        for u, nbrs in adj.items():
            inputs = np.array([h[u], *(h[w] for w in nbrs)])
            nw = step.get(u)
            if nw is None:
                w = np.zeros((1, len(inputs)))
                w[0, 0] = 1.0
                nw = NodeWeights(w, np.ones(1), np.zeros(1))
            new[u] = float(shallow_agg(inputs, nw.w, nw.a, nw.b))
        h = new
    return h


def _selector(adj, u, picks) -> NodeWeights:
    order = [u, *adj[u]]
    w = np.zeros((1, len(order)))
    for p in picks:
        w[0, order.index(p)] = 1.0
    return NodeWeights(w, np.ones(1), np.zeros(1))


def aggregation_program(h: HTree, r0: int | None = None) -> list[dict[int, NodeWeights]]:
    """Weights that sum the root states into ``r0`` and then copy the sum to every node.

    Phase one treats the root tree as rooted at ``r0`` and, deepest level
    first, lets each root add its children's values to its own. Phase two
    floods ``r0``'s value outward along a BFS tree of the whole H-tree by
    copying from the BFS parent. Valid whenever every root state and their
    total lie in ``[0, 1]``; the weights do not depend on those states.
    """
    roots = list(h.roots)
    r0 = roots[0] if r0 is None else r0
    radj: dict[int, list[int]] = {r: [] for r in roots}
    for a, b in h.root_edges:
        radj[a].append(b)
        radj[b].append(a)
    depth = {r0: 0}
    rparent: dict[int, int] = {}
    frontier = [r0]
    while frontier:
        nxt = []
        for u in frontier:
            for w in sorted(radj[u]):
                if w not in depth:
                    depth[w] = depth[u] + 1
                    rparent[w] = u
                    nxt.append(w)
        frontier = nxt
    if len(depth) != len(roots):
        raise InputError("root layer is disconnected; the sum cannot reach a single root")
    height = max(depth.values())
    program: list[dict[int, NodeWeights]] = []
    for level in range(height - 1, -1, -1):
        step = {}
        for u in roots:
            if depth[u] == level:
                kids = [c for c in roots if rparent.get(c) == u]
                if kids:
                    step[u] = _selector(h.adj, u, [u, *kids])
        program.append(step)
    dist = {r0: 0}
    bparent: dict[int, int] = {}
    frontier = [r0]
    while frontier:
        nxt = []
        for u in frontier:
            for w in h.adj[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    bparent[w] = u
                    nxt.append(w)
        frontier = nxt
    for level in range(1, max(dist.values()) + 1):
        program.append({u: _selector(h.adj, u, [bparent[u]])
                        for u in dist if dist[u] == level})
    return program


def comb_mean(h: HTree, state: Mapping[int, float]) -> dict[int, float]:
    """Mean of the leaf states of each vertex."""
    return {v: float(sum(state[l] for l in ls) / len(ls)) for v, ls in leaf_groups(h).items()}
