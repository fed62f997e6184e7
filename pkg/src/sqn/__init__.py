"""Toolkit for strongly nonlocal orthogonal product sets."""

from .construction import StateSet, SymbolicBlock, build_E, build_F, build_O, build_family, cardinality, check_tiling
from .relations import cyclic_permute, set_equal, strip_and_flip, strip_subsystem
from .states import DEFAULT_TOL, Kind, LocalLabel, ProductState, Tolerance, inner_product, max_overlap

__all__ = [
    "DEFAULT_TOL",
    "Kind",
    "LocalLabel",
    "ProductState",
    "StateSet",
    "SymbolicBlock",
    "Tolerance",
    "build_E",
    "build_F",
    "build_O",
    "build_family",
    "cardinality",
    "check_tiling",
    "cyclic_permute",
    "inner_product",
    "max_overlap",
    "set_equal",
    "strip_and_flip",
    "strip_subsystem",
]
