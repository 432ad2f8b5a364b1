import numpy as np
import pytest
from hypothesis import given, settings

from _support import house, graphs, random_graph, random_tree
from neuraltree.errors import InputError
from neuraltree.graph import complete_graph, connected_components
from neuraltree.subsample import _degeneracy, sample_bounded_treewidth
from neuraltree.treedecomp import exact_treewidth, min_fill_width, validate_decomposition, width


def _check(g, k, seed):
    res = sample_bounded_treewidth(g, k, seed)
    sub = res.subgraph
    assert sub.nodes == g.nodes
    assert set(sub.edges) <= set(g.edges)
    assert set(res.dropped_edges) == set(g.edges) - set(sub.edges)
    assert validate_decomposition(sub, res.decomposition).ok
    assert width(res.decomposition) <= k
    assert connected_components(sub) == connected_components(g)
    return res


class TestExamples:
    def test_tree_is_kept(self):
        g = random_tree(np.random.default_rng(0), 15)
        for k in (1, 2):
            res = sample_bounded_treewidth(g, k, seed=3)
            assert res.subgraph == g and res.dropped_edges == ()

    def test_k4_to_spanning_tree(self):
        res = _check(complete_graph(range(4)), 1, seed=0)
        assert len(res.subgraph.edges) == 3 and len(res.dropped_edges) == 3

    def test_house_k2_keeps_everything(self):
        res = _check(house(), 2, seed=5)
        assert res.subgraph == house()

    def test_k_must_be_positive(self):
        with pytest.raises(InputError):
            sample_bounded_treewidth(house(), 0, seed=0)

    def test_seeded(self):
        g = random_graph(np.random.default_rng(2), 20, 0.5)
        a = sample_bounded_treewidth(g, 2, 9)
        assert a == sample_bounded_treewidth(g, 2, 9)


class TestProperties:
    def test_random_graphs_all_bounds(self):
        rng = np.random.default_rng(13)
        for i in range(100):
            g = random_graph(rng, int(rng.integers(2, 25)), float(rng.uniform(0.1, 0.7)))
            for k in (1, 2, 3):
                res = _check(g, k, seed=i)
                if k >= min_fill_width(g):
                    assert res.subgraph == g

    def test_weakly_monotone_in_k(self):
        rng = np.random.default_rng(17)
        for i in range(40):
            g = random_graph(rng, 18, 0.4)
            kept = [len(sample_bounded_treewidth(g, k, seed=i).subgraph.edges) for k in (1, 2, 3, 4)]
            assert kept == sorted(kept)

    @given(graphs(max_n=9))
    @settings(max_examples=50, deadline=None)
    def test_degeneracy_lower_bounds_treewidth(self, g):
        adj = {v: set(g.neighbors(v)) for v in g.nodes}
        assert _degeneracy(adj) <= max(exact_treewidth(g), 0)
