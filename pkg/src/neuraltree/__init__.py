"""Neural trees: message passing on hierarchical tree decompositions of graphs."""

from .errors import CapacityError, DecompositionError, InputError
from .graph import Graph, from_edges
from .htree import HTree, build_htree, htree_stats
from .treedecomp import TreeDecomposition, junction_tree, validate_decomposition, width

__all__ = [
    "CapacityError", "DecompositionError", "InputError", "Graph", "from_edges",
    "HTree", "build_htree", "htree_stats", "TreeDecomposition", "junction_tree",
    "validate_decomposition", "width",
]
__version__ = "0.1.0"
