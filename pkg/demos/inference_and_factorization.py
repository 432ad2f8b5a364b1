"""Clique-sum functions: factor them over a decomposition and run exact inference.

    python3 demos/inference_and_factorization.py
"""

import itertools

import numpy as np

from neuraltree import junction_tree
from neuraltree.graph import from_edges
from neuraltree.pgm import (brute_force_marginals, factorize, junction_tree_marginals,
                            sample_random_compatible)

g = from_edges([(0, 1), (1, 2), (2, 0), (2, 3), (3, 4)])
f = sample_random_compatible(g, seed=3, domain=2)
td = junction_tree(g)
fac = factorize(f, td)

# Each clique term goes to the first bag (in BFS order) that contains it.
for r in fac.ordered_roots:
    print(f"bag {td.bags[r]} owns cliques {[f.cliques[i] for i in fac.assignment[r]]}")

xs = np.array(list(itertools.product((0, 1), repeat=g.n)), dtype=float)
parts = sum(fac.component_batch(r, xs) for r in fac.ordered_roots)
print("largest gap between sum of parts and f:", np.max(np.abs(parts - f.evaluate_batch(xs))))

# Reading the terms as log-potentials gives a Gibbs distribution whose
# marginals the junction tree computes without enumerating assignments.
jt, bf = junction_tree_marginals(f), brute_force_marginals(f)
for v in g.nodes:
    print(f"P(x_{v}) = {np.round(jt[v], 4)}  (enumeration {np.round(bf[v], 4)})")
