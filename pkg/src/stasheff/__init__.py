"""Associahedral sign combinatorics, trajectory algebra, and Morse assembly."""

from .trees import (
    Forest,
    RibbonTree,
    T0,
    T1,
    canonicalize,
    comb,
    compose_forests,
    enumerate_binary_trees,
    enumerate_trees,
    parse_forest,
    parse_tree,
    validate_tree,
)

__all__ = [
    "Forest",
    "RibbonTree",
    "T0",
    "T1",
    "canonicalize",
    "comb",
    "compose_forests",
    "enumerate_binary_trees",
    "enumerate_trees",
    "parse_forest",
    "parse_tree",
    "validate_tree",
]
