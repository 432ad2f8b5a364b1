import csv
import io

import numpy as np
import pytest

from neuraltree import nn, pipeline as pl
from neuraltree.errors import InputError
from neuraltree.graph import from_edges, maximal_cliques
from neuraltree.pgm import CompatibleFunction, PiecewiseLinear

SMALL_PGM = {"num_graphs": 12, "num_nodes": 8, "edge_prob": 0.35, "treewidth": 2}


def _fast(**kw):
    base = dict(model=nn.ModelConfig(hidden_dim=8, iterations=2), epochs=60, patience=30)
    base.update(kw)
    return pl.TrainConfig(**base)


def _same_dataset(a, b):
    return len(a.graphs) == len(b.graphs) and all(g == h for g, h in zip(a.graphs, b.graphs))


class TestGenerate:
    @pytest.mark.parametrize("kind, params", [
        ("pgm_labels", SMALL_PGM),
        ("scene_like", {"num_graphs": 5}),
        ("regression_theorem2", {"num_graphs": 5, "num_nodes": 4}),
    ])
    def test_seed_determinism(self, kind, params):
        a = pl.generate_synthetic(kind, params, seed=3)
        assert _same_dataset(a, pl.generate_synthetic(kind, params, seed=3))
        assert not _same_dataset(a, pl.generate_synthetic(kind, params, seed=4))

    def test_unary_only_labels_follow_features(self):
        ds = pl.generate_synthetic("pgm_labels", {**SMALL_PGM, "unary_only": True, "domain": 4},
                                   seed=1)
        x = np.argmax(ds.features(), axis=1)
        y = ds.targets()
        rule = {s: np.bincount(y[x == s]).argmax() for s in np.unique(x)}
        assert np.mean([rule[s] == t for s, t in zip(x, y)]) == 1.0

    def test_pgm_labels_bounded_treewidth(self):
        from neuraltree.treedecomp import junction_tree, width
        ds = pl.generate_synthetic("pgm_labels", {**SMALL_PGM, "treewidth": 1}, seed=0)
        assert all(width(junction_tree(g)) <= 1 for g in ds.graphs)

    def test_regression_targets_in_range(self):
        ds = pl.generate_synthetic("regression_theorem2", {"num_graphs": 30, "num_nodes": 5},
                                   seed=2)
        g = ds.graphs[0]
        n_cliques = len(maximal_cliques(g))
        t = ds.targets()[ds.supervised()]
        assert np.all((t >= 0) & (t <= n_cliques))
        assert np.all((ds.features() >= 0) & (ds.features() <= 1))

    def test_scene_like_types_and_labels(self):
        ds = pl.generate_synthetic("scene_like", {"num_graphs": 10, "room_types": 3,
                                                  "object_types": 5}, seed=0)
        types = ds.node_types()
        y = ds.targets()
        assert set(y[types == 0]) <= {0, 1, 2} and set(y[types == 1]) <= {3, 4, 5, 6, 7}
        assert ds.num_node_types == 2 and ds.num_classes == 8

    @pytest.mark.parametrize("kind, params", [
        ("nope", {}),
        ("pgm_labels", {"num_labels": 1}),
        ("pgm_labels", {"num_nodes": 30, "num_labels": 2}),
        ("scene_like", {"rooms": [3, 1]}),
        ("regression_theorem2", {"lipschitz": 0}),
    ])
    def test_invalid_params(self, kind, params):
        with pytest.raises(Exception) as info:
            pl.generate_synthetic(kind, params, seed=0)
        assert isinstance(info.value, (InputError, pl.CapacityError))


class TestSplit:
    def test_disjoint_nonempty_cover(self):
        ds = pl.generate_synthetic("pgm_labels", SMALL_PGM, seed=0)
        sp = pl.split_nodes(ds, seed=5)
        parts = [set(sp.train), set(sp.val), set(sp.test)]
        assert all(parts)
        assert not (parts[0] & parts[1] or parts[0] & parts[2] or parts[1] & parts[2])
        assert set().union(*parts) == set(ds.supervised())
        n = len(ds.supervised())
        assert len(sp.val) == round(0.1 * n) and len(sp.test) == round(0.2 * n)

    def test_bad_fractions(self):
        ds = pl.generate_synthetic("pgm_labels", SMALL_PGM, seed=0)
        with pytest.raises(InputError):
            pl.split_nodes(ds, 0, 0.5, 0.5)


class TestTrain:
    def test_zero_learning_rate(self):
        ds = pl.generate_synthetic("pgm_labels", SMALL_PGM, seed=0)
        cfg = _fast(lr=0.0, epochs=20, patience=50)
        rep = pl.train(ds, cfg)
        init = nn.init_params(replace_iters(rep), ds.feature_dim)
        assert all(np.array_equal(init.arrays[k], rep.params.arrays[k]) for k in init.arrays)
        losses = [e["train_loss"] for e in rep.epochs]
        assert len(set(losses)) == 1

    def test_separable_task_fits(self):
        ds = pl.generate_synthetic("pgm_labels", {**SMALL_PGM, "num_graphs": 20,
                                                  "unary_only": True}, seed=0)
        cfg = _fast(model=nn.ModelConfig(hidden_dim=8, iterations=1), epochs=200, patience=200,
                    lr=0.05)
        rep = pl.train(ds, cfg)
        assert max(e["train_metric"] for e in rep.epochs) >= 0.99

    def test_reports_reproducible(self):
        ds = pl.generate_synthetic("scene_like", {"num_graphs": 6}, seed=0)
        cfg = _fast(model=nn.ModelConfig(hidden_dim=8, iterations=2, dropout=0.25))
        a, b = pl.train(ds, cfg), pl.train(ds, cfg)
        assert a == b and a.to_dict() == b.to_dict()
        assert "wall_clock" not in a.to_dict() and len(a.wall_clock) == len(a.epochs)

    def test_report_invariants(self):
        ds = pl.generate_synthetic("scene_like", {"num_graphs": 6}, seed=1)
        rep = pl.train(ds, _fast(architecture="gnn"))
        assert [e["epoch"] for e in rep.epochs] == list(range(1, len(rep.epochs) + 1))
        for e in rep.epochs:
            assert 0 <= e["train_metric"] <= 1 and 0 <= e["val_metric"] <= 1
        assert 0 <= rep.test_metric <= 1
        assert rep.config["model"]["num_node_types"] == 2

    def test_default_iterations_follow_diameter(self):
        ds = pl.generate_synthetic("scene_like", {"num_graphs": 6}, seed=2)
        expected = round(pl.mean_htree_diameter(pl.htrees_for(ds)))
        rep = pl.train(ds, _fast(model=nn.ModelConfig(hidden_dim=4, iterations=None), epochs=3))
        assert rep.iterations == expected

    def test_regression_training(self):
        ds = pl.generate_synthetic("regression_theorem2", {"num_graphs": 40, "num_nodes": 4},
                                   seed=0)
        rep = pl.train(ds, _fast(model=nn.ModelConfig(hidden_dim=8, iterations=2,
                                                      aggregator="shallow_relu")))
        assert rep.metric == "neg_mse" and rep.test_metric <= 0

    def test_unknown_config_field(self):
        with pytest.raises(InputError):
            pl.TrainConfig.from_dict({"epochs": 3, "bogus": 1})
        with pytest.raises(InputError):
            pl.TrainConfig.from_dict({"model": {"width": 3}})

    def test_majority_baseline(self):
        ds = pl.generate_synthetic("pgm_labels", SMALL_PGM, seed=0)
        acc = pl.majority_baseline(ds, seed=0)
        sp = pl.split_nodes(ds, 0)
        y = ds.targets()
        top = np.bincount(y[sp.train]).argmax()
        assert acc == np.mean(y[sp.test] == top)

    def test_bayes_optimal_is_perfect(self):
        # labels are the MAP labelling given features, so the generating model
        # reproduces every label and upper-bounds any learned model
        ds = pl.generate_synthetic("pgm_labels", SMALL_PGM, seed=4)
        rep = pl.train(ds, _fast())
        assert rep.test_metric <= 1.0 + 0.02


def replace_iters(rep):
    return nn.ModelConfig(**rep.config["model"])


class TestCurves:
    def test_single_point_is_two_train_calls(self):
        ds = pl.generate_synthetic("scene_like", {"num_graphs": 6}, seed=0)
        base = _fast()
        rows = pl.experiment_curves(ds, "iterations", [2], repeats=1, seed=7, base=base)
        direct = {}
        for arch in pl.ARCHITECTURES:
            cfg = pl.TrainConfig(**{**base.__dict__, "architecture": arch, "seed": 7,
                                    "model": nn.ModelConfig(hidden_dim=8, iterations=2, seed=7)})
            direct[arch] = pl.train(ds, cfg).test_metric
        assert [(r["architecture"], r["mean_acc"]) for r in rows] == list(direct.items())
        assert all(r["std_acc"] == 0.0 and r["n_repeats"] == 1 for r in rows)

    def test_csv_shape(self):
        ds = pl.generate_synthetic("pgm_labels", SMALL_PGM, seed=0)
        rows = pl.experiment_curves(ds, "train_fraction", [0.5, 1.0], repeats=2, seed=0,
                                    base=_fast(epochs=20))
        text = pl.curves_to_csv(rows)
        parsed = list(csv.DictReader(io.StringIO(text)))
        assert len(parsed) == 2 * 2
        assert list(parsed[0]) == list(pl.CSV_COLUMNS)
        assert all(0 <= float(r["mean_acc"]) <= 1 for r in parsed)

    def test_treewidth_axis_leaves_gnn_alone(self):
        ds = pl.generate_synthetic("pgm_labels", {**SMALL_PGM, "treewidth": 3}, seed=0)
        rows = pl.experiment_curves(ds, "treewidth_bound", [1, 3], repeats=1, seed=0,
                                    base=_fast(epochs=15))
        gnn = [r["mean_acc"] for r in rows if r["architecture"] == "gnn"]
        assert gnn[0] == gnn[1]

    def test_train_fraction_roughly_monotone(self):
        ds = pl.generate_synthetic("pgm_labels", {**SMALL_PGM, "num_graphs": 40}, seed=1)
        rows = pl.experiment_curves(ds, "train_fraction", [0.1, 0.4, 1.0], repeats=3, seed=0,
                                    base=_fast(epochs=80))
        for arch in pl.ARCHITECTURES:
            curve = [r for r in rows if r["architecture"] == arch]
            for a, b in zip(curve, curve[1:]):
                assert b["mean_acc"] + b["std_acc"] + a["std_acc"] >= a["mean_acc"]

    def test_bad_axis_and_grid(self):
        ds = pl.generate_synthetic("pgm_labels", SMALL_PGM, seed=0)
        with pytest.raises(InputError):
            pl.experiment_curves(ds, "depth", [1], 1, 0)
        with pytest.raises(InputError):
            pl.experiment_curves(ds, "iterations", [], 1, 0)


class TestApproximation:
    def test_constant_function(self):
        g = from_edges([(0, 1)])
        f = CompatibleFunction(g, [(0, 1)], fns=[PiecewiseLinear(np.full((17, 17), 0.4), 1.0)])
        rows = pl.approximation_experiment(g, f, [2], seed=0, num_train=128, warmup=100,
                                           max_iter=300)
        assert rows[0]["max_error"] <= 1e-3

    def test_identity_on_one_node(self):
        g = from_edges([], nodes=[0])
        f = CompatibleFunction(g, [(0,)], fns=[PiecewiseLinear(np.linspace(0, 1, 17), 1.0)])
        rows = pl.approximation_experiment(g, f, [2], seed=0, num_train=256)
        assert rows[0]["max_error"] <= 1e-2
        assert rows[0]["bound_corollary"] == pytest.approx(
            1 * 1 ** 3 * rows[0]["max_error"] ** -1)

    def test_guards(self):
        g = from_edges([], nodes=[0])
        discrete = CompatibleFunction(g, [(0,)], [np.zeros(2)], 2)
        with pytest.raises(InputError):
            pl.approximation_experiment(g, discrete, [2], seed=0)
        big = from_edges([], nodes=range(11))
        f = CompatibleFunction(big, [(v,) for v in big.nodes],
                               fns=[PiecewiseLinear(np.zeros(17), 1.0)] * 11)
        with pytest.raises(pl.CapacityError):
            pl.approximation_experiment(big, f, [2], seed=0)
