"""Synthetic datasets, node-level splits, training, and experiment sweeps."""

from __future__ import annotations

import csv
import io
import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from . import nn
from .errors import CapacityError, InputError
from .graph import Graph, from_edges, maximal_cliques
from .htree import HTree, build_htree, htree_stats, param_bound_corollary, param_bound_theorem
from .pgm import CompatibleFunction, LabelModel, map_labels, sample_random_compatible
from .subsample import sample_bounded_treewidth
from .treedecomp import junction_tree, width

KINDS = ("pgm_labels", "scene_like", "regression_theorem2")
AXES = ("train_fraction", "iterations", "treewidth_bound")
ARCHITECTURES = ("neural_tree", "gnn")
CSV_COLUMNS = ("axis_value", "architecture", "mean_acc", "std_acc", "n_repeats")


@dataclass
class Dataset:
    graphs: list[Graph]
    task: str = "classification"
    num_classes: int = 2
    num_node_types: int = 1
    kind: str = "custom"
    seed: int | None = None

    def __post_init__(self):
        if not self.graphs:
            raise InputError("a dataset needs at least one graph")
        dims = {g.feature_dim for g in self.graphs}
        if len(dims) != 1 or None in dims:
            raise InputError("all graphs need features of one common dimension")

    @property
    def feature_dim(self) -> int:
        return self.graphs[0].feature_dim

    @property
    def num_outputs(self) -> int:
        return sum(g.n for g in self.graphs)

    def features(self) -> np.ndarray:
        return np.vstack([g.features for g in self.graphs])

    def targets(self) -> np.ndarray:
        """Per-output targets; NaN (regression) or -1 (classification) when absent."""
        out = []
        for g in self.graphs:
            for v in g.nodes:
                if self.task == "classification":
                    out.append(g.labels.get(v, -1))
                else:
                    out.append(g.targets.get(v, np.nan))
        return np.array(out, dtype=int if self.task == "classification" else float)

    def supervised(self) -> np.ndarray:
        t = self.targets()
        mask = t >= 0 if self.task == "classification" else ~np.isnan(t)
        return np.flatnonzero(mask)

    def node_types(self) -> np.ndarray:
        return np.array([g.node_types.get(v, 0) for g in self.graphs for v in g.nodes])


def dataset_from_graphs(graphs: Sequence[Graph], kind: str = "custom") -> Dataset:
    """Infer task, class count and node-type count from the graphs."""
    graphs = list(graphs)
    has_labels = any(g.labels for g in graphs)
    has_targets = any(g.targets for g in graphs)
    if has_labels == has_targets:
        raise InputError("dataset needs either labels or targets (not both)")
    types = [t for g in graphs for t in g.node_types.values()]
    n_types = max(types, default=0) + 1
    if has_labels:
        n_cls = max(int(y) for g in graphs for y in g.labels.values()) + 1
        return Dataset(graphs, "classification", max(n_cls, 2), n_types, kind)
    return Dataset(graphs, "regression", 1, n_types, kind)


# -- generators -------------------------------------------------------------

def _random_graph(rng, n, p) -> Graph:
    edges = [(u, v) for u, v in itertools.combinations(range(n), 2) if rng.random() < p]
    return from_edges(edges, nodes=range(n))


def _pgm_labels(params: dict, rng) -> Dataset:
    num_graphs = int(params.get("num_graphs", 50))
    n = int(params.get("num_nodes", 10))
    p = float(params.get("edge_prob", 0.3))
    k = int(params.get("treewidth", 2))
    D = int(params.get("domain", 3))
    L = int(params.get("num_labels", 2))
    unary_only = bool(params.get("unary_only", False))
    coupling = float(params.get("coupling", 1.0))
    unary_scale = float(params.get("unary", 2.0))
    if D < 1 or L < 2 or n < 1 or num_graphs < 1:
        raise InputError("pgm_labels needs num_graphs, num_nodes >= 1, domain >= 1, num_labels >= 2")
    if L ** n > 2 ** 20:
        raise CapacityError(f"label space {L}^{n} is too large for exact MAP labelling")
    unary = unary_scale * rng.normal(size=(D, L))
    pair = np.zeros((L, L)) if unary_only else coupling * rng.normal(size=(L, L))
    pair = (pair + pair.T) / 2
    graphs = []
    for _ in range(num_graphs):
        g = _random_graph(rng, n, p)
        g = sample_bounded_treewidth(g, k, int(rng.integers(2 ** 31))).subgraph
        cliques = maximal_cliques(g)
        owner_v = {v: next(i for i, c in enumerate(cliques) if v in c) for v in g.nodes}
        owner_e = {e: next(i for i, c in enumerate(cliques) if set(e) <= set(c))
                   for e in g.sorted_edges()}
        tables = []
        for i, c in enumerate(cliques):
            m = len(c)
            t = np.zeros((D,) * m + (L,) * m)
            for j, v in enumerate(c):
                if owner_v[v] == i:
                    shape = [1] * (2 * m)
                    shape[j], shape[m + j] = D, L
                    t = t + unary.reshape(shape)
            for a, b in itertools.combinations(range(m), 2):
                if owner_e.get((c[a], c[b])) == i:
                    shape = [1] * (2 * m)
                    shape[m + a], shape[m + b] = L, L
                    t = t + pair.reshape(shape)
            tables.append(t)
        model = LabelModel(g, cliques, tables, D, L)
        x = {v: int(rng.integers(D)) for v in g.nodes}
        labels = map_labels(model, x)
        feats = np.eye(D)[[x[v] for v in g.nodes]]
        graphs.append(Graph(g.nodes, g.edges, feats, labels=labels))
    return Dataset(graphs, "classification", L, 1, "pgm_labels")


def _scene_like(params: dict, rng) -> Dataset:
    """Rooms linked in a chain; each room hosts a path of objects all joined to it.

    Labels are the room category (rooms) and the object class (objects).
    Object classes are drawn from a category-specific pool, and all
    features are noisy one-hot codes, so context from the room and its
    other objects helps.
    """
    num_graphs = int(params.get("num_graphs", 200))
    rooms_lo, rooms_hi = params.get("rooms", (1, 2))
    objs_lo, objs_hi = params.get("objects", (3, 5))
    R = int(params.get("room_types", 3))
    O = int(params.get("object_types", 6))
    room_noise = float(params.get("room_noise", 1.5))
    obj_noise = float(params.get("object_noise", 1.0))
    pool_size = int(params.get("pool_size", 2))
    if min(rooms_lo, objs_lo) < 1 or rooms_hi < rooms_lo or objs_hi < objs_lo:
        raise InputError("scene_like needs 1 <= min <= max for rooms and objects")
    if R < 2 or O < pool_size or pool_size < 1:
        raise InputError("scene_like needs room_types >= 2 and object_types >= pool_size >= 1")
    pools = [rng.choice(O, size=pool_size, replace=False) for _ in range(R)]
    dim = 2 + R + O
    graphs = []
    for _ in range(num_graphs):
        edges, feats, labels, types = [], [], {}, {}
        nid = 0
        prev_room = None
        for _r in range(int(rng.integers(rooms_lo, rooms_hi + 1))):
            room = nid
            nid += 1
            cat = int(rng.integers(R))
            f = np.zeros(dim)
            f[0] = 1.0
            f[2 + cat] = 1.0
            f[2:2 + R] += room_noise * rng.normal(size=R)
            feats.append(f)
            labels[room], types[room] = cat, 0
            if prev_room is not None:
                edges.append((prev_room, room))
            prev_room = room
            prev_obj = None
            for _o in range(int(rng.integers(objs_lo, objs_hi + 1))):
                obj = nid
                nid += 1
                cls = int(rng.choice(pools[cat]))
                f = np.zeros(dim)
                f[1] = 1.0
                f[2 + R + cls] = 1.0
                f[2 + R:] += obj_noise * rng.normal(size=O)
                feats.append(f)
                labels[obj], types[obj] = R + cls, 1
                edges.append((room, obj))
                if prev_obj is not None:
                    edges.append((prev_obj, obj))
                prev_obj = obj
        graphs.append(Graph(range(nid), edges, np.array(feats), labels=labels, node_types=types))
    return Dataset(graphs, "classification", R + O, 2, "scene_like")


def regression_samples(g: Graph, f: CompatibleFunction, num: int, rng) -> list[Graph]:
    """Copies of ``g`` with uniform ``[0, 1]`` scalar features; the lowest node
    carries the target ``f(x)``."""
    xs = rng.uniform(0.0, 1.0, size=(num, g.n))
    ys = f.evaluate_batch(xs)
    v0 = g.nodes[0]
    return [Graph(g.nodes, g.edges, x[:, None], targets={v0: float(y)}) for x, y in zip(xs, ys)]


def _regression(params: dict, rng) -> Dataset:
    n = int(params.get("num_nodes", 5))
    p = float(params.get("edge_prob", 0.5))
    k = int(params.get("treewidth", 2))
    num = int(params.get("num_graphs", 200))
    lip = float(params.get("lipschitz", 1.0))
    if n < 1 or num < 1 or lip <= 0:
        raise InputError("regression_theorem2 needs num_nodes >= 1, num_graphs >= 1, lipschitz > 0")
    g = sample_bounded_treewidth(_random_graph(rng, n, p), k, int(rng.integers(2 ** 31))).subgraph
    f = sample_random_compatible(g, "continuous", int(rng.integers(2 ** 31)), lipschitz=lip)
    return Dataset(regression_samples(g, f, num, rng), "regression", 1, 1, "regression_theorem2")


def generate_synthetic(kind: str, params: dict | None = None, seed: int = 0) -> Dataset:
    """Generate a seeded synthetic dataset of the given kind."""
    rng = np.random.default_rng(seed)
    params = dict(params or {})
    if kind == "pgm_labels":
        ds = _pgm_labels(params, rng)
    elif kind == "scene_like":
        ds = _scene_like(params, rng)
    elif kind == "regression_theorem2":
        ds = _regression(params, rng)
    else:
        raise InputError(f"unknown dataset kind {kind!r}; expected one of {KINDS}")
    ds.seed = seed
    return ds


# -- splits -----------------------------------------------------------------

@dataclass(frozen=True)
class Split:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray


def split_nodes(ds: Dataset, seed: int, val_fraction: float = 0.1,
                test_fraction: float = 0.2) -> Split:
    """Random node-level split of the supervised outputs; all parts nonempty."""
    if val_fraction <= 0 or test_fraction <= 0 or val_fraction + test_fraction >= 1:
        raise InputError("need positive val/test fractions summing to less than 1")
    sup = ds.supervised()
    if len(sup) < 3:
        raise InputError("need at least three supervised nodes to split")
    perm = sup[np.random.default_rng(seed).permutation(len(sup))]
    n_val = max(1, round(val_fraction * len(sup)))
    n_test = max(1, round(test_fraction * len(sup)))
    if n_val + n_test >= len(sup):
        n_val, n_test = 1, 1
    return Split(np.sort(perm[n_val + n_test:]), np.sort(perm[:n_val]),
                 np.sort(perm[n_val:n_val + n_test]))


# -- training ---------------------------------------------------------------

class Adam:
    def __init__(self, params: nn.ModelParams, b1: float = 0.9, b2: float = 0.999,
                 eps: float = 1e-8):
        self.m = {k: np.zeros_like(v) for k, v in params.arrays.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.arrays.items()}
        self.b1, self.b2, self.eps, self.t = b1, b2, eps, 0

    def step(self, params: nn.ModelParams, grads: dict, lr: float):
        self.t += 1
        for k, g in grads.items():
            self.m[k] = self.b1 * self.m[k] + (1 - self.b1) * g
            self.v[k] = self.b2 * self.v[k] + (1 - self.b2) * g * g
            mh = self.m[k] / (1 - self.b1 ** self.t)
            vh = self.v[k] / (1 - self.b2 ** self.t)
            params.arrays[k] = params.arrays[k] - lr * mh / (np.sqrt(vh) + self.eps)


@dataclass
class TrainConfig:
    model: nn.ModelConfig = field(default_factory=nn.ModelConfig)
    architecture: str = "neural_tree"
    lr: float = 0.01
    epochs: int = 1000
    patience: int = 100
    l2: float = 0.0
    val_fraction: float = 0.1
    test_fraction: float = 0.2
    train_fraction: float = 1.0
    treewidth_bound: int | None = None
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.model, dict):
            self.model = nn.ModelConfig(**self.model)
        if self.architecture not in ARCHITECTURES:
            raise InputError(f"architecture must be one of {ARCHITECTURES}")
        if self.lr < 0 or self.epochs < 1 or self.patience < 1 or self.l2 < 0:
            raise InputError("need lr >= 0, epochs >= 1, patience >= 1, l2 >= 0")
        if not 0 < self.train_fraction <= 1:
            raise InputError("train_fraction must lie in (0, 1]")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> "TrainConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(obj) - known
        if unknown:
            raise InputError(f"unknown train config field(s): {sorted(unknown)}")
        obj = dict(obj)
        if "model" in obj:
            mk = set(obj["model"]) - set(nn.ModelConfig.__dataclass_fields__)
            if mk:
                raise InputError(f"unknown model config field(s): {sorted(mk)}")
        return cls(**obj)


@dataclass
class TrainReport:
    config: dict
    seed: int
    epochs: list[dict]
    best_epoch: int
    test_metric: float
    test_loss: float
    iterations: int
    metric: str = "accuracy"
    wall_clock: list[float] = field(default_factory=list, compare=False)
    params: nn.ModelParams | None = field(default=None, compare=False, repr=False)

    def to_dict(self, include_timing: bool = False) -> dict:
        out = {
            "config": self.config, "seed": self.seed, "epochs": self.epochs,
            "best_epoch": self.best_epoch, "metric": self.metric,
            "test_metric": self.test_metric, "test_loss": self.test_loss,
            "iterations": self.iterations,
        }
        if include_timing:
            out["wall_clock"] = self.wall_clock
        return out


def htrees_for(ds: Dataset, treewidth_bound: int | None = None, seed: int = 0) -> list[HTree]:
    graphs = ds.graphs
    if treewidth_bound is not None:
        rng = np.random.default_rng(seed)
        graphs = [sample_bounded_treewidth(g, treewidth_bound, int(rng.integers(2 ** 31))).subgraph
                  for g in graphs]
    return [build_htree(g) for g in graphs]


def mean_htree_diameter(htrees: Sequence[HTree]) -> float:
    return float(np.mean([htree_stats(h)["diameter"] for h in htrees]))


def _structure(ds: Dataset, cfg: TrainConfig):
    htrees = htrees_for(ds, cfg.treewidth_bound, cfg.seed)
    if cfg.architecture == "neural_tree":
        s = nn.htree_structure(ds.graphs, htrees)
    else:
        s = nn.graph_structure(ds.graphs)
    return s, htrees


def _metrics(raw, y, idx, task):
    value, _ = nn.loss(raw, y, idx, task=task)
    if task == "classification":
        return value, float(np.mean(np.argmax(raw[idx], axis=1) == y[idx]))
    return value, -value


def train(ds: Dataset, cfg: TrainConfig, structure=None) -> TrainReport:
    """Full-batch Adam with early stopping on the validation metric.

    The metric is accuracy for classification and negative mean squared
    error for regression. Parameters of the best validation epoch are kept.
    """
    mcfg = cfg.model
    if mcfg.task != ds.task:
        mcfg = replace(mcfg, task=ds.task)
    if ds.task == "classification" and mcfg.num_classes < ds.num_classes:
        mcfg = replace(mcfg, num_classes=ds.num_classes)
    if mcfg.num_node_types < ds.num_node_types:
        mcfg = replace(mcfg, num_node_types=ds.num_node_types)
    s, htrees = structure if structure is not None else _structure(ds, cfg)
    if mcfg.iterations is None:
        mcfg = replace(mcfg, iterations=max(1, round(mean_htree_diameter(htrees))))
    n_parts = len(s.adj_parts)
    params = nn.init_params(mcfg, ds.feature_dim, n_edge_types=n_parts)
    x = ds.features()
    y = ds.targets()
    split = split_nodes(ds, cfg.seed, cfg.val_fraction, cfg.test_fraction)
    tr = split.train[: max(1, math.ceil(cfg.train_fraction * len(split.train)))]
    rng = np.random.default_rng(cfg.seed + 1)
    opt = Adam(params)
    history, clock = [], []
    best = (-np.inf, 0, params.copy())
    for epoch in range(1, cfg.epochs + 1):
        t0 = time.perf_counter()
        masks = nn.dropout_masks(mcfg, s.n_nodes, rng) if mcfg.dropout > 0 else None
        train_loss, grads = nn.loss_and_grad(params, s, x, y, tr, cfg.l2, masks)
        opt.step(params, grads, cfg.lr)
        raw, _ = nn.forward(params, s, x)
        _, train_metric = _metrics(raw, y, tr, ds.task)
        val_loss, val_metric = _metrics(raw, y, split.val, ds.task)
        history.append({"epoch": epoch, "train_loss": train_loss, "train_metric": train_metric,
                        "val_loss": val_loss, "val_metric": val_metric})
        clock.append(time.perf_counter() - t0)
        if val_metric > best[0]:
            best = (val_metric, epoch, params.copy())
        if epoch - best[1] >= cfg.patience:
            break
    _, best_epoch, best_params = best
    raw, _ = nn.forward(best_params, s, x)
    test_loss, test_metric = _metrics(raw, y, split.test, ds.task)
    echo = cfg.to_dict()
    echo["model"] = asdict(mcfg)
    return TrainReport(echo, cfg.seed, history, best_epoch, test_metric, test_loss,
                       mcfg.iterations, "accuracy" if ds.task == "classification" else "neg_mse",
                       clock, best_params)


def majority_baseline(ds: Dataset, seed: int, val_fraction: float = 0.1,
                      test_fraction: float = 0.2) -> float:
    """Test accuracy of always predicting the most frequent training label."""
    if ds.task != "classification":
        raise InputError("majority baseline needs a classification dataset")
    split = split_nodes(ds, seed, val_fraction, test_fraction)
    y = ds.targets()
    top = np.argmax(np.bincount(y[split.train], minlength=ds.num_classes))
    return float(np.mean(y[split.test] == top))


# -- sweeps -----------------------------------------------------------------

def _run_point(args):
    ds, cfg = args
    return train(ds, cfg).test_metric


def experiment_curves(ds: Dataset, axis: str, grid: Sequence, repeats: int, seed: int,
                      base: TrainConfig | None = None, jobs: int = 1) -> list[dict]:
    """Paired neural-tree / GNN sweeps; one row per (grid value, architecture).

    Repeat ``r`` uses ``seed + r`` for both the split and the initialisation
    of both architectures. On the ``treewidth_bound`` axis only the neural
    tree sees the subsampled graphs; the GNN always runs on the full graph.
    """
    if axis not in AXES:
        raise InputError(f"axis must be one of {AXES}")
    if not grid:
        raise InputError("grid must be nonempty")
    if repeats < 1:
        raise InputError("repeats must be >= 1")
    base = base or TrainConfig()
    jobs_list = []
    for value, arch, r in itertools.product(grid, ARCHITECTURES, range(repeats)):
        model = replace(base.model, seed=seed + r)
        cfg = replace(base, model=model, architecture=arch, seed=seed + r)
        if axis == "train_fraction":
            cfg = replace(cfg, train_fraction=float(value))
        elif axis == "iterations":
            cfg = replace(cfg, model=replace(model, iterations=int(value)))
        elif arch == "neural_tree":
            cfg = replace(cfg, treewidth_bound=int(value))
        jobs_list.append((ds, cfg))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            scores = list(ex.map(_run_point, jobs_list))
    else:
        scores = [_run_point(j) for j in jobs_list]
    rows = []
    it = iter(scores)
    for value in grid:
        for arch in ARCHITECTURES:
            accs = np.array([next(it) for _ in range(repeats)])
            rows.append({"axis_value": value, "architecture": arch,
                         "mean_acc": float(accs.mean()), "std_acc": float(accs.std()),
                         "n_repeats": repeats})
    return rows


def curves_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(r[k]) if isinstance(r[k], float) else r[k]) for k in CSV_COLUMNS})
    return buf.getvalue()


def _fit_adam(params: nn.ModelParams, s, x, y, idx, epochs: int, lr: float) -> nn.ModelParams:
    params = params.copy()
    opt = Adam(params)
    for step in range(epochs):
        _, grads = nn.loss_and_grad(params, s, x, y, idx)
        opt.step(params, grads, lr * 0.5 * (1 + math.cos(math.pi * step / epochs)))
    return params


def _fit_lbfgs(params: nn.ModelParams, s, x, y, idx, max_iter: int) -> nn.ModelParams:
    keys = sorted(params.arrays)
    shapes = [params.arrays[k].shape for k in keys]
    sizes = [int(np.prod(sh)) for sh in shapes]

    def unpack(theta):
        out = params.copy()
        off = 0
        for k, sh, n in zip(keys, shapes, sizes):
            out.arrays[k] = theta[off:off + n].reshape(sh).copy()
            off += n
        return out

    def objective(theta):
        value, grads = nn.loss_and_grad(unpack(theta), s, x, y, idx)
        return value, np.concatenate([grads[k].ravel() for k in keys])

    theta0 = np.concatenate([params.arrays[k].ravel() for k in keys])
    res = minimize(objective, theta0, jac=True, method="L-BFGS-B",
                   options={"maxiter": max_iter, "ftol": 1e-15, "gtol": 1e-12})
    return unpack(res.x)


def approximation_experiment(g: Graph, f: CompatibleFunction, widths: Sequence[int], seed: int,
                             *, num_train: int = 2048, warmup: int = 1000, lr: float = 0.01,
                             max_iter: int = 500, aggregator: str = "shallow_relu",
                             num_eval: int = 4096) -> list[dict]:
    """Fit regression neural trees of each hidden width to ``f`` (read at the
    lowest node) and report the max absolute error on ``num_eval`` held-out
    uniform draws, independent of the training draws.

    Fitting minimises the mean squared error with a short cosine-decayed Adam
    phase followed by L-BFGS. Large early quasi-Newton steps tend to switch
    off every ReLU unit, which the warm-up avoids.
    """
    if f.is_discrete:
        raise InputError("approximation_experiment needs a continuous compatible function")
    if g.n > 10:
        raise CapacityError(f"approximation_experiment is limited to 10 nodes, got {g.n}")
    if not widths:
        raise InputError("width grid must be nonempty")
    rng = np.random.default_rng(seed)
    ds = Dataset(regression_samples(g, f, num_train, rng), "regression", 1, 1, "approximation")
    h = build_htree(g)
    diam = htree_stats(h)["diameter"]
    tw = width(junction_tree(g))
    s_train = nn.htree_structure(ds.graphs, [h] * len(ds.graphs))
    x_train, y_train = ds.features(), ds.targets()
    idx = ds.supervised()
    grid = np.random.default_rng([seed, 1]).uniform(0.0, 1.0, size=(num_eval, g.n))
    y_grid = f.evaluate_batch(grid)
    test_graphs = [Graph(g.nodes, g.edges, x[:, None]) for x in grid]
    s_test = nn.htree_structure(test_graphs, [h] * len(test_graphs))
    x_test = grid.reshape(-1, 1)
    rows = []
    for w in widths:
        cfg = nn.ModelConfig(hidden_dim=int(w), iterations=max(1, diam), aggregator=aggregator,
                             task="regression", seed=seed)
        params = nn.init_params(cfg, 1)
        params.arrays["head_b"][:] = float(np.mean(y_train[idx]))
        params = _fit_adam(params, s_train, x_train, y_train, idx, warmup, lr)
        params = _fit_lbfgs(params, s_train, x_train, y_train, idx, max_iter)
        raw, _ = nn.forward(params, s_test, x_test)
        pred = raw[np.arange(len(grid)) * g.n, 0]
        err = float(np.max(np.abs(pred - y_grid)))
        e = min(max(err, 1e-12), 1.0)
        rows.append({"width": int(w), "seed": seed, "max_error": err,
                     "num_params": int(sum(a.size for a in params.arrays.values())),
                     "bound_theorem": param_bound_theorem(h, e),
                     "bound_corollary": param_bound_corollary(g.n, tw, e)})
    return rows
