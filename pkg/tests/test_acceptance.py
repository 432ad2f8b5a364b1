"""Acceptance suite: thirteen end-to-end criteria, one PASS/FAIL line each.

Run ``pytest tests/test_acceptance.py``; the summary lists every criterion.
The learning criteria (10-12) train many models and take several minutes.
"""

import itertools
import json
import os
import sys
import tempfile
import time

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from _support import cycle, house, path, random_connected, random_graph, random_tree  # noqa: E402
from neuraltree import nn, pipeline as pl  # noqa: E402
from neuraltree.cli import main  # noqa: E402
from neuraltree.graph import (complete_graph, connected_components, dumps_graph,  # noqa: E402
                              dumps_jsonl, from_edges)
from neuraltree.htree import build_htree, param_bound_corollary  # noqa: E402
from neuraltree.pgm import (brute_force_marginals, compatible_to_dict, factorize,  # noqa: E402
                            junction_tree_marginals, sample_random_compatible)
from neuraltree.subsample import sample_bounded_treewidth  # noqa: E402
from neuraltree.treedecomp import (exact_treewidth, junction_tree,  # noqa: E402
                                   validate_decomposition, width)

SCENE = {"num_graphs": 200, "rooms": [1, 2], "objects": [3, 5]}
SCENE_TRAIN = dict(epochs=400, patience=100, lr=0.01)
SWEEP_TRAIN = dict(epochs=300, patience=50, lr=0.01)
APPROX = dict(num_train=2048, warmup=1000, max_iter=500)
WIDTHS = [2, 6, 16]

RESULTS: dict[int, tuple[bool, str]] = {}


def report(num: int, ok: bool, detail: str):
    RESULTS[num] = (ok, detail)
    line = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line, flush=True)
    assert ok, line


def test_c01_decomposition_validity():
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    bad = 0
    for i in range(100):
        g = random_graph(rng, int(rng.integers(1, 41)), 0.1 + 0.8 * i / 99)
        bad += len(validate_decomposition(g, junction_tree(g)).violations)
    elapsed = time.perf_counter() - start
    report(1, bad == 0 and elapsed < 10, f"violations={bad} runtime={elapsed:.2f}s (<10s)")


def test_c02_treewidth_sanity():
    rng = np.random.default_rng(2)
    below = 0
    for _ in range(200):
        g = random_graph(rng, int(rng.integers(1, 11)), rng.uniform(0.1, 0.9))
        below += width(junction_tree(g)) < exact_treewidth(g)
    families = all(exact_treewidth(random_tree(rng, n)) == 1 for n in range(2, 11))
    families &= all(exact_treewidth(cycle(n)) == 2 for n in range(3, 11))
    families &= all(exact_treewidth(complete_graph(range(n))) == n - 1 for n in range(1, 11))
    report(2, below == 0 and families, f"heuristic<exact on {below}/200 graphs, families ok={families}")


def test_c03_house_golden():
    td = junction_tree(house())
    bags = sorted(td.bags.values())
    h = build_htree(house())
    again = build_htree(house())
    ok = (bags == [(1, 2, 3), (2, 3, 4), (3, 4, 5)] and width(td) == 2
          and [h.node(r).bag for r in h.roots] == [td.bags[b] for b in td.bag_ids]
          and h.to_dict() == again.to_dict()
          and (h.roots, h.root_edges) == ((0, 1, 2), ((0, 1), (1, 2)))
          and len(h.adj) == 18 and len(h.leaves) == 11)
    report(3, ok, f"bags={bags} width={width(td)} htree nodes={len(h.adj)}")


def _assignments(n):
    return np.array(list(itertools.product((0, 1), repeat=n)), dtype=float)


def test_c04_factorization_exactness():
    rng = np.random.default_rng(4)
    worst, partitions = 0.0, True
    for i in range(200):
        g = random_graph(rng, int(rng.integers(1, 11)), rng.uniform(0.2, 0.7))
        f = sample_random_compatible(g, seed=i)
        fac = factorize(f, junction_tree(g))
        ids = sorted(j for r in fac.ordered_roots for j in fac.assignment[r])
        partitions &= ids == list(range(len(f.cliques)))
        xs = _assignments(g.n)
        total = sum(fac.component_batch(r, xs) for r in fac.ordered_roots)
        worst = max(worst, float(np.max(np.abs(total - f.evaluate_batch(xs)))))
    report(4, worst <= 1e-12 and partitions, f"max|sum - f|={worst:.1e} (<=1e-12), partition={partitions}")


def test_c05_compositional_structure():
    rng = np.random.default_rng(5)
    changed = 0
    for i in range(200):
        g = random_graph(rng, int(rng.integers(2, 11)), rng.uniform(0.2, 0.7))
        f = sample_random_compatible(g, seed=i, domain=3)
        td = junction_tree(g)
        fac = factorize(f, td)
        x = {v: int(rng.integers(3)) for v in g.nodes}
        for r in fac.ordered_roots:
            y = {v: (val if v in td.bags[r] else (val + 1 + int(rng.integers(2))) % 3)
                 for v, val in x.items()}
            changed += fac.component(r, x) != fac.component(r, y)
    report(5, changed == 0, f"components changed by outside perturbations: {changed}")


def test_c06_inference_oracle():
    rng = np.random.default_rng(6)
    start = time.perf_counter()
    worst = 0.0
    for i in range(200):
        g = random_graph(rng, int(rng.integers(1, 13)), rng.uniform(0.15, 0.5))
        f = sample_random_compatible(g, seed=i, domain=int(rng.integers(2, 4)))
        bf, jt = brute_force_marginals(f), junction_tree_marginals(f)
        worst = max(worst, max(float(np.max(np.abs(bf[v] - jt[v]))) for v in g.nodes))
    elapsed = time.perf_counter() - start
    report(6, worst <= 1e-9 and elapsed < 60, f"L_inf={worst:.1e} (<=1e-9) runtime={elapsed:.1f}s (<60s)")


def test_c07_aggregation_program():
    rng = np.random.default_rng(7)
    exact = 0
    for _ in range(20):
        g = random_connected(rng, int(rng.integers(2, 14)), 0.3)
        h = build_htree(g)
        den = 2 ** 12
        nums = rng.multinomial(int(rng.integers(0, den + 1)), np.ones(len(h.roots) + 1)
                               / (len(h.roots) + 1))[:-1]
        h0 = {u: 0.0 for u in h.adj}
        h0.update({r: k / den for r, k in zip(h.roots, nums)})
        out = nn.run_per_node_program(h.adj, h0, nn.aggregation_program(h))
        exact += all(out[l] == sum(nums) / den for l in h.leaves)
    report(7, exact == 20, f"exact root sum at every leaf on {exact}/20 H-trees")


def _fd_error(arch, agg, task, seed=0):
    rng = np.random.default_rng(seed)
    g = _featured_house(rng)
    cfg = nn.ModelConfig(hidden_dim=3, iterations=2, aggregator=agg, task=task, num_classes=3,
                         num_node_types=2, edge_types=True, seed=seed)
    s = nn.htree_structure([g], [build_htree(g)]) if arch == "neural_tree" \
        else nn.graph_structure([g])
    p = nn.init_params(cfg, 3, n_edge_types=len(s.adj_parts))
    for v in p.arrays.values():
        v += 0.1 * rng.normal(size=v.shape)
    y = rng.integers(0, 3, 5) if task == "classification" else rng.normal(size=5)
    idx = np.arange(5)
    _, grads = nn.loss_and_grad(p, s, g.features, y, idx, 0.01)
    worst = 0.0
    for name, arr in p.arrays.items():
        for i in range(arr.size):
            hi, lo = p.copy(), p.copy()
            hi.arrays[name].flat[i] += 1e-5
            lo.arrays[name].flat[i] -= 1e-5
            fd = (nn.loss_and_grad(hi, s, g.features, y, idx, 0.01)[0]
                  - nn.loss_and_grad(lo, s, g.features, y, idx, 0.01)[0]) / 2e-5
            an = grads[name].flat[i]
            worst = max(worst, abs(fd - an) / max(abs(fd), abs(an), 1e-6))
    return worst


def _featured_house(rng):
    return from_edges(house().edges, features=rng.normal(size=(5, 3)), node_types={2: 1, 5: 1})


def test_c08_gradients():
    worst = max(_fd_error(a, g, t) for a in pl.ARCHITECTURES for g in nn.AGGREGATORS
                for t in nn.TASKS)
    report(8, worst <= 1e-4, f"max relative finite-difference error={worst:.1e} (<=1e-4)")


def test_c09_subsampler():
    rng = np.random.default_rng(9)
    failures = []
    for i in range(100):
        g = random_graph(rng, int(rng.integers(2, 25)), rng.uniform(0.1, 0.7))
        comps = sorted(map(sorted, connected_components(g)))
        for k in (1, 2, 3):
            res = sample_bounded_treewidth(g, k, seed=i)
            sub = res.subgraph
            checks = {
                "width": width(res.decomposition) <= k
                and validate_decomposition(sub, res.decomposition).ok,
                "subset": set(sub.edges) <= set(g.edges) and sub.nodes == g.nodes,
                "connectivity": sorted(map(sorted, connected_components(sub))) == comps,
                "identity": k < width(junction_tree(g)) or sub.edges == g.edges,
            }
            failures += [(i, k, name) for name, ok in checks.items() if not ok]
    report(9, not failures, f"failed checks: {failures[:5]} ({len(failures)} total)")


@pytest.fixture(scope="module")
def scene():
    return pl.generate_synthetic("scene_like", SCENE, seed=0)


def _scene_cfg(arch, seed, hidden, iterations=None, **train):
    return pl.TrainConfig(model=nn.ModelConfig(hidden_dim=hidden, iterations=iterations,
                                               seed=seed), architecture=arch, seed=seed, **train)


def test_c10_desk_scale_learning(scene):
    acc = {a: [pl.train(scene, _scene_cfg(a, r, 32, **SCENE_TRAIN)).test_metric
               for r in range(10)] for a in pl.ARCHITECTURES}
    nt, gnn = np.mean(acc["neural_tree"]), np.mean(acc["gnn"])
    maj = np.mean([pl.majority_baseline(scene, r) for r in range(10)])
    ok = nt >= gnn - 0.01 and min(nt, gnn) >= maj + 0.10
    direction = "NT > GNN" if nt > gnn else "NT <= GNN"
    report(10, ok, f"NT={nt:.4f} GNN={gnn:.4f} majority={maj:.4f} ({direction}, reported only)")


def test_c11_iteration_sweep(scene):
    diam = pl.mean_htree_diameter(pl.htrees_for(scene))
    means = {t: np.mean([pl.train(scene, _scene_cfg("neural_tree", r, 16, t, **SWEEP_TRAIN))
                         .test_metric for r in range(5)]) for t in range(1, 11)}
    best = max(means, key=means.get)
    curve = " ".join(f"{t}:{m:.3f}" for t, m in means.items())
    report(11, abs(best - diam) <= 2, f"best T={best} mean diameter={diam:.2f} [{curve}]")


def test_c12_approximation_study():
    rng = np.random.default_rng(12)
    errors, bounds = [], []
    for i in range(5):
        n = int(rng.integers(3, 7))
        g = sample_bounded_treewidth(random_connected(rng, n, 0.5), 2, seed=i).subgraph
        f = sample_random_compatible(g, "continuous", seed=i)
        rows = pl.approximation_experiment(g, f, WIDTHS, seed=i, **APPROX)
        errors.append([r["max_error"] for r in rows])
        bounds.append([(r["bound_theorem"], r["bound_corollary"]) for r in rows])
    med = np.median(errors, axis=0)
    closed_form = param_bound_corollary(5, 2, 0.5)
    ok = bool(np.all(np.diff(med) <= 0)) and closed_form == 87480
    report(12, ok, f"median max-error by width {WIDTHS}: {np.round(med, 4).tolist()}, "
                   f"first bounds {bounds[0][0]}, closed-form bound(5,2,0.5)={closed_form}")


def test_c13_cli_determinism():
    with tempfile.TemporaryDirectory() as tmp:
        def put(name, text):
            p = os.path.join(tmp, name)
            with open(p, "w") as fh:
                fh.write(text)
            return p

        graph = put("g.json", dumps_graph(house()))
        c6 = put("c6.json", dumps_graph(cycle(6)))
        model = put("m.json", json.dumps(compatible_to_dict(sample_random_compatible(path(4)))))
        data = put("d.jsonl", dumps_jsonl(pl.generate_synthetic("scene_like", {"num_graphs": 4},
                                                                seed=0).graphs))
        train = put("t.json", json.dumps({"epochs": 10, "model": {"hidden_dim": 4}}))
        exp = put("e.json", json.dumps({"kind": "pgm_labels", "params": {"num_graphs": 4},
                                        "axis": "train_fraction", "grid": [0.5, 1.0],
                                        "train": {"epochs": 5, "model": {"hidden_dim": 4}}}))
        commands = {
            "decompose": ["decompose", graph], "htree": ["htree", graph],
            "bound": ["bound", graph, "--eps", "0.25"],
            "sample": ["sample", c6, "--k", "1", "--seed", "5"],
            "pgm-check": ["pgm-check", model],
            "generate": ["generate", "--kind", "scene_like", "--seed", "1"],
            "train": ["train", "--config", train, "--seed", "2", data],
            "experiment": ["experiment", "--config", exp, "--seed", "3"],
        }
        differing = []
        for name, argv in commands.items():
            outs = []
            for rep in range(2):
                out = os.path.join(tmp, f"{name}{rep}")
                assert main(argv + ["-o", out]) == 0, name
                with open(out, "rb") as fh:
                    outs.append(fh.read())
            if outs[0] != outs[1]:
                differing.append(name)
    report(13, not differing, f"{len(commands)} subcommands, differing outputs: {differing}")

