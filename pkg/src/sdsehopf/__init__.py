"""Hopf subalgebras of rooted trees generated by combinatorial Dyson-Schwinger systems."""

from .classify import Classification, classify, dep_graph, vertex_levels
from .hopf import TensorPoly, TreePoly, admissible_cuts, antipode, coproduct
from .prelie import PathAlgebra, PreLieElem, UnitGroup, check_prelie_identity, prelie_product
from .sdse import (
    DegenerateSystem,
    HopfVerdict,
    LambdaTable,
    Sdse,
    Solution,
    change_vars,
    check_hopf,
    dilate,
    extend,
    path_table,
    reconstruct_series,
    solve_e1,
    solve_subst,
)
from .series import MultiIndex, ParseError, Series, f_beta, log1m, parse_expr
from .trees import Forest, Tree, enumerate_trees, parse_tree

__all__ = [
    "admissible_cuts",
    "antipode",
    "change_vars",
    "check_hopf",
    "check_prelie_identity",
    "Classification",
    "classify",
    "coproduct",
    "DegenerateSystem",
    "dep_graph",
    "dilate",
    "enumerate_trees",
    "extend",
    "f_beta",
    "Forest",
    "HopfVerdict",
    "LambdaTable",
    "log1m",
    "MultiIndex",
    "parse_expr",
    "parse_tree",
    "ParseError",
    "path_table",
    "PathAlgebra",
    "prelie_product",
    "PreLieElem",
    "reconstruct_series",
    "Sdse",
    "Series",
    "Solution",
    "solve_e1",
    "solve_subst",
    "TensorPoly",
    "Tree",
    "TreePoly",
    "UnitGroup",
    "vertex_levels",
]
