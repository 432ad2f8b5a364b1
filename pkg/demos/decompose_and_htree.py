"""Walk through the combinatorial side: decomposition, H-tree, parameter bounds.

    python3 demos/decompose_and_htree.py
"""

from neuraltree import build_htree, from_edges, htree_stats, junction_tree, width
from neuraltree.graph import maximal_cliques
from neuraltree.htree import leaf_groups, param_bound_corollary, param_bound_theorem
from neuraltree.subsample import sample_bounded_treewidth
from neuraltree.treedecomp import exact_treewidth

# A five-node graph: a 4-cycle 1-2-4-3 with a triangle 3-4-5 hanging off it.
g = from_edges([(1, 2), (1, 3), (2, 4), (3, 4), (3, 5), (4, 5)])
print("maximal cliques:", maximal_cliques(g))

# Min-fill triangulation adds a chord to the 4-cycle, so the junction tree
# has three bags of size three.
td = junction_tree(g)
print("bags:", td.bags, "tree edges:", td.tree_edges)
print("width:", width(td), "exact treewidth:", exact_treewidth(g))

# The H-tree decomposes every bag again until only single vertices remain.
h = build_htree(g)
print("H-tree stats:", htree_stats(h))
for v, leaves in leaf_groups(h).items():
    print(f"  vertex {v} appears as {len(leaves)} leaves")

# Parameter-count bounds for reaching accuracy eps on a compatible function.
for eps in (0.5, 0.1):
    print(f"eps={eps}: H-tree bound {param_bound_theorem(h, eps):.4g},",
          f"closed form {param_bound_corollary(g.n, width(td), eps):.4g}")

# Dropping edges to reach treewidth one keeps the graph connected.
res = sample_bounded_treewidth(g, 1, seed=0)
print("treewidth-1 subgraph drops", res.dropped_edges,
      "and has width", width(res.decomposition))
