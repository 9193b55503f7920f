"""Tree-size complexity of multiqubit pure states.

Modules: ``core`` (statevectors, bipartitions, complex rank), ``gf2``
(packed binary matrices), ``tree`` (sum/product trees), ``fewqubit``
(small-n tree sizes and fitting), ``subgroup`` (subgroup states and
witnesses), ``raz`` (rank-criterion Monte Carlo), ``states`` (state
families), ``mbqc`` (measurements on trees) and ``cli``.
"""

from .core import Bipartition, DimensionError, StateVector, schmidt_rank
from .gf2 import BitMatrix, gf2_rank
from .tree import Leaf, Prod, Sum, TreeError, evaluate, parse_tree, serialize_tree, tree_size

__version__ = "0.1.0"

__all__ = [
    "Bipartition",
    "BitMatrix",
    "DimensionError",
    "Leaf",
    "Prod",
    "StateVector",
    "Sum",
    "TreeError",
    "evaluate",
    "gf2_rank",
    "parse_tree",
    "schmidt_rank",
    "serialize_tree",
    "tree_size",
]
