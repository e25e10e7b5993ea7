"""Metric ribbon trees and forests.

A ribbon tree is a rooted planar tree whose external (root and leaf) edges
have length one and whose internal edges carry exact rational lengths in
[0, 2].  Length 2 marks a broken edge; length 0 is contracted away by
``canonicalize``.  Two degenerate trees are admitted as distinguished
values: ``T0`` (a root with a single dangling edge, no leaf) and ``T1``
(the interval, one leaf, no internal vertex).

Internal representation: a node is ``("leaf",)`` or ``("node", children)``
where ``children`` is a tuple of ``(subnode, length)`` pairs in planar
order; ``length`` is ``None`` for a leaf child (external edge) and a
``Fraction`` for an internal edge.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Optional

LENGTH_MAX = Fraction(2)

STRATUM_CONTRACTED = "0"
STRATUM_INTERIOR = "int"
STRATUM_BROKEN = "2"


class TreeStructureError(ValueError):
    """Malformed tree input (not a planar tree in the expected encoding)."""


class ArityMismatchError(ValueError):
    """Forest composition applied to forests with incompatible arities."""


LEAF = ("leaf",)


def _node(children):
    return ("node", tuple(children))


def stratum(length: Fraction) -> str:
    """Three-valued stratum tag of an internal edge length."""
    if length == 0:
        return STRATUM_CONTRACTED
    if length == LENGTH_MAX:
        return STRATUM_BROKEN
    return STRATUM_INTERIOR


def _check_node(node) -> None:
    if not isinstance(node, tuple) or not node:
        raise TreeStructureError(f"not a tree node: {node!r}")
    if node[0] == "leaf":
        if len(node) != 1:
            raise TreeStructureError("malformed leaf node")
        return
    if node[0] != "node" or len(node) != 2:
        raise TreeStructureError(f"unknown node tag: {node!r}")
    children = node[1]
    if not isinstance(children, tuple) or not children:
        raise TreeStructureError("internal vertex with no children")
    for entry in children:
        if not (isinstance(entry, tuple) and len(entry) == 2):
            raise TreeStructureError(f"malformed child entry: {entry!r}")
        child, length = entry
        if child == LEAF:
            if length is not None:
                raise TreeStructureError("leaf child with an internal length")
        else:
            if not isinstance(length, Fraction):
                raise TreeStructureError("internal edge without exact length")
        _check_node(child)


def _node_leaf_count(node) -> int:
    if node == LEAF:
        return 1
    return sum(_node_leaf_count(c) for c, _ in node[1])


@dataclass(frozen=True)
class RibbonTree:
    """A metric ribbon tree; ``kind`` is ``"T0"``, ``"T1"`` or ``"node"``."""

    kind: str
    node: Optional[tuple] = None

    def __post_init__(self):
        if self.kind in ("T0", "T1"):
            if self.node is not None:
                raise TreeStructureError("degenerate trees carry no node data")
        elif self.kind == "node":
            _check_node(self.node)
            if self.node == LEAF:
                raise TreeStructureError("a bare leaf is not a tree; use T1")
        else:
            raise TreeStructureError(f"unknown tree kind: {self.kind!r}")

    @property
    def leaf_count(self) -> int:
        if self.kind == "T0":
            return 0
        if self.kind == "T1":
            return 1
        return _node_leaf_count(self.node)

    def internal_edges(self) -> list[tuple[tuple, Fraction]]:
        """All internal edges as ``(path, length)``, depth first.

        A path addresses the edge by the child indices leading from the top
        vertex to the edge's upper endpoint.
        """
        out = []

        def walk(node, path):
            if node == LEAF:
                return
            for i, (child, length) in enumerate(node[1]):
                if child != LEAF:
                    out.append((path + (i,), length))
                    walk(child, path + (i,))

        if self.kind == "node":
            walk(self.node, ())
        return out

    def encode(self) -> str:
        return format_tree(self)

    def __repr__(self):
        return f"RibbonTree({self.encode()!r})"


T0 = RibbonTree("T0")
T1 = RibbonTree("T1")


def tree_from_node(node) -> RibbonTree:
    if node == LEAF:
        return T1
    return RibbonTree("node", node)


@dataclass(frozen=True)
class Forest:
    """Ordered union of ribbon trees; leaves are numbered across the blocks.

    The empty forest is allowed: it is the forest of the identity of the
    empty particle.
    """

    trees: tuple[RibbonTree, ...]

    def __post_init__(self):
        for t in self.trees:
            if not isinstance(t, RibbonTree):
                raise TreeStructureError(f"not a ribbon tree: {t!r}")

    @property
    def leaf_count(self) -> int:
        return sum(t.leaf_count for t in self.trees)

    def encode(self) -> str:
        return " | ".join(t.encode() for t in self.trees)

    def __repr__(self):
        return f"Forest({self.encode()!r})"


# -- literal syntax ----------------------------------------------------------
#
# tree    := "T0" | "T1" | node
# node    := "(" item item* ")"
# item    := leaf | node ["@" length]
# leaf    := "v" <positive integer>      (labels must read v1..vl in order)
# length  := integer or integer "/" integer, in [0, 2]; unannotated
#            internal edges default to length 1.


def format_tree(t: RibbonTree) -> str:
    if t.kind == "T0":
        return "T0"
    if t.kind == "T1":
        return "T1"
    counter = [0]

    def fmt(node):
        if node == LEAF:
            counter[0] += 1
            return f"v{counter[0]}"
        parts = []
        for child, length in node[1]:
            if child == LEAF:
                parts.append(fmt(child))
            else:
                parts.append(f"{fmt(child)}@{length}")
        return "(" + " ".join(parts) + ")"

    return fmt(t.node)


def _tokenize(text: str) -> list[str]:
    tokens = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()@":
            tokens.append(c)
            i += 1
        else:
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] in "/-_"):
                j += 1
            if j == i:
                raise TreeStructureError(f"unexpected character {c!r} in tree literal")
            tokens.append(text[i:j])
            i = j
    return tokens


def parse_tree(text: str, raw: bool = False) -> RibbonTree:
    """Parse a tree literal such as ``(v1 (v2 v3)@2)``.

    Zero-length internal edges are rejected unless ``raw`` is set, since the
    canonical form contracts them away.
    """
    tokens = _tokenize(text)
    if tokens == ["T0"]:
        return T0
    if tokens == ["T1"]:
        return T1
    pos = [0]

    def peek():
        return tokens[pos[0]] if pos[0] < len(tokens) else None

    def take(expected=None):
        tok = peek()
        if tok is None:
            raise TreeStructureError("unexpected end of tree literal")
        if expected is not None and tok != expected:
            raise TreeStructureError(f"expected {expected!r}, found {tok!r}")
        pos[0] += 1
        return tok

    def parse_length(tok) -> Fraction:
        try:
            length = Fraction(tok)
        except (ValueError, ZeroDivisionError):
            raise TreeStructureError(f"bad edge length: {tok!r}")
        if not 0 <= length <= LENGTH_MAX:
            raise TreeStructureError(f"edge length {length} outside [0, 2]")
        if length == 0 and not raw:
            raise TreeStructureError(
                "zero-length edge in literal; canonical form contracts it (use raw=True)"
            )
        return length

    leaf_counter = [0]

    def parse_node():
        take("(")
        children = []
        while peek() != ")":
            if peek() is None:
                raise TreeStructureError("unbalanced parentheses in tree literal")
            if peek() == "(":
                sub = parse_node()
                length = Fraction(1)
                if peek() == "@":
                    take("@")
                    length = parse_length(take())
                children.append((sub, length))
            else:
                tok = take()
                leaf_counter[0] += 1
                if tok != f"v{leaf_counter[0]}":
                    raise TreeStructureError(
                        f"leaf label {tok!r} out of order; expected v{leaf_counter[0]}"
                    )
                children.append((LEAF, None))
        take(")")
        if not children:
            raise TreeStructureError("internal vertex with no children")
        return _node(children)

    node = parse_node()
    if pos[0] != len(tokens):
        raise TreeStructureError("trailing tokens after tree literal")
    return tree_from_node(node)


def parse_forest(text: str, raw: bool = False) -> Forest:
    text = text.strip()
    if not text:
        return Forest(())
    return Forest(tuple(parse_tree(part, raw=raw) for part in text.split("|")))


# -- validation and canonical form -------------------------------------------


@dataclass(frozen=True)
class TreeReport:
    ok: bool
    violations: tuple[tuple[str, str], ...]


def validate_tree(t: RibbonTree) -> TreeReport:
    """Check the structural conditions on a metric ribbon tree.

    Violations are reported as ``(code, where)`` pairs with codes
    ``"bivalent vertex"``, ``"length out of range"`` and
    ``"zero-length edge"``.  Cyclic convexity of the leaf partition induced
    by each edge holds by construction for the nested representation, so it
    can never be violated here.
    """
    if not isinstance(t, RibbonTree):
        raise TreeStructureError(f"not a ribbon tree: {t!r}")
    if t.kind in ("T0", "T1"):
        return TreeReport(True, ())
    violations = []

    def walk(node, path, at_top):
        if node == LEAF:
            return
        children = node[1]
        if len(children) < 2:
            violations.append(("bivalent vertex", f"vertex {path}"))
        for i, (child, length) in enumerate(children):
            if child != LEAF:
                if not 0 <= length <= LENGTH_MAX:
                    violations.append(("length out of range", f"edge {path + (i,)}"))
                elif length == 0:
                    violations.append(("zero-length edge", f"edge {path + (i,)}"))
                walk(child, path + (i,), False)

    walk(t.node, (), True)
    return TreeReport(not violations, tuple(violations))


def canonicalize(t: RibbonTree) -> RibbonTree:
    """Contract every zero-length internal edge.  Idempotent."""
    if t.kind in ("T0", "T1"):
        return t

    def walk(node):
        if node == LEAF:
            return node
        out = []
        for child, length in node[1]:
            if child == LEAF:
                out.append((child, None))
                continue
            child = walk(child)
            if length == 0:
                out.extend(child[1])
            else:
                out.append((child, length))
        return _node(out)

    return tree_from_node(walk(t.node))


# -- composition --------------------------------------------------------------

_CAPPED = ("capped",)


def _simplify(node):
    """Drop capped branches, then smooth what is left.

    Returns the simplified node, or None if the whole subtree vanished
    (every branch was capped by a T0 gluing).
    """
    if node == LEAF:
        return node
    kept = []
    for child, length in node[1]:
        if child == _CAPPED:
            continue
        if child == LEAF:
            kept.append((child, None))
            continue
        sub = _simplify(child)
        if sub is None:
            continue
        kept.append((sub, length))
    if not kept:
        return None
    if len(kept) == 1:
        # Bivalent vertex: merge the two incident edges.  A merge with an
        # external edge is renormalized to length one (the external edge
        # absorbs it); internal merges add, saturating at the broken length.
        child, length = kept[0]
        if child == LEAF:
            return LEAF
        return ("merge", child, length)
    return _node(kept)


def _resolve_merges(entry):
    """Flatten pending merge markers into ordinary child entries."""
    node, length = entry
    while isinstance(node, tuple) and node and node[0] == "merge":
        inner, inner_len = node[1], node[2]
        if length is None:
            length = None  # merged into an external edge, length stays one
            node = inner
        else:
            node = inner
            length = min(LENGTH_MAX, length + inner_len)
    if node == LEAF:
        return (node, None)
    children = tuple(_resolve_merges(c) for c in node[1])
    return (_node(children), length)


def _graft(node, subs):
    """Replace the leaves of ``node`` in planar order by glued trees.

    Each glued tree attaches through a new internal edge of length two
    (two unit external edges concatenated); T1 leaves the leaf untouched
    and T0 caps the branch for removal.
    """
    if node == LEAF:
        sub = subs.pop(0)
        if sub.kind == "T1":
            return (LEAF, None)
        if sub.kind == "T0":
            return (_CAPPED, None)
        return (sub.node, LENGTH_MAX)
    children = []
    for child, length in node[1]:
        new_child, new_len = _graft(child, subs)
        children.append((new_child, length if child != LEAF else new_len))
    return (_node(children), None)


def _compose_tree(t: RibbonTree, subs: list[RibbonTree]) -> RibbonTree:
    if t.kind == "T0":
        return T0
    if t.kind == "T1":
        sub = subs[0]
        if sub.kind == "T0":
            return T0
        # gluing below the root: the doubled external edge is rescaled to one
        return sub
    if all(s.kind == "T0" for s in subs):
        return T0
    grafted, _ = _graft(t.node, list(subs))
    simplified = _simplify(grafted)
    if simplified is None:
        return T0
    node, _ = _resolve_merges((simplified, None))
    if node == LEAF:
        return T1
    return tree_from_node(node)


def compose_forests(fq: Forest, fl: Forest) -> Forest:
    """Glue the leaves of ``fq`` onto the roots of the trees of ``fl``."""
    if fq.leaf_count != len(fl.trees):
        raise ArityMismatchError(
            f"forest with {fq.leaf_count} leaves composed with {len(fl.trees)} trees"
        )
    out = []
    cursor = 0
    for t in fq.trees:
        n = t.leaf_count
        out.append(_compose_tree(t, list(fl.trees[cursor : cursor + n])))
        cursor += n
    return Forest(tuple(out))


# -- enumeration ---------------------------------------------------------------


@lru_cache(maxsize=None)
def _binary_shapes(l: int) -> tuple:
    """All planar binary shapes with l leaves, as nodes with broken edges."""
    if l == 1:
        return (LEAF,)
    shapes = []
    for k in range(1, l):
        for left in _binary_shapes(k):
            for right in _binary_shapes(l - k):
                entries = []
                for sub in (left, right):
                    if sub == LEAF:
                        entries.append((sub, None))
                    else:
                        entries.append((sub, LENGTH_MAX))
                shapes.append(_node(entries))
    return tuple(shapes)


def enumerate_binary_trees(l: int) -> list[RibbonTree]:
    """All planar binary trees with ``l`` leaves and broken internal edges.

    These are the vertices of the associahedron; the order is the
    lexicographic order of the canonical literal encoding.
    """
    if l < 2:
        raise ValueError("binary trees need at least two leaves")
    trees = [tree_from_node(shape) for shape in _binary_shapes(l)]
    trees.sort(key=lambda t: t.encode())
    return trees


def enumerate_trees(l: int, internal_edges: int) -> list[RibbonTree]:
    """All planar trees with ``l`` leaves, no bivalent vertex and the given
    number of internal edges, each pinned at length two."""
    if l < 2:
        raise ValueError("need at least two leaves")

    @lru_cache(maxsize=None)
    def shapes(leaves: int, edges: int) -> tuple:
        # trees whose top vertex has >= 2 children
        out = []

        def extend(children, leaves_left, edges_left):
            if leaves_left == 0:
                if edges_left == 0 and len(children) >= 2:
                    out.append(_node(tuple(children)))
                return
            # next child is a leaf
            extend(children + [(LEAF, None)], leaves_left - 1, edges_left)
            # next child is a subtree through a pinned edge
            for sub_leaves in range(2, leaves_left + 1):
                for sub_edges in range(0, edges_left):
                    for sub in shapes(sub_leaves, sub_edges):
                        extend(
                            children + [(sub, LENGTH_MAX)],
                            leaves_left - sub_leaves,
                            edges_left - 1 - sub_edges,
                        )

        extend([], leaves, edges)
        return tuple(out)

    trees = [tree_from_node(shape) for shape in shapes(l, internal_edges)]
    trees.sort(key=lambda t: t.encode())
    return trees


def comb(l: int) -> RibbonTree:
    """The comb with ``l`` leaves fixing the reference orientation.

    Leaf 1 sits at the deepest vertex, so grafting a comb at leaf 1 of
    another comb again yields a comb.  Internal edges have length one and
    are numbered from the deepest edge outward.
    """
    if l < 2:
        raise ValueError("combs need at least two leaves")
    node = _node(((LEAF, None), (LEAF, None)))
    for _ in range(l - 2):
        node = _node(((node, Fraction(1)), (LEAF, None)))
    return tree_from_node(node)


def leaf_sets(t: RibbonTree) -> list[tuple[tuple, frozenset]]:
    """For each internal edge, the set of leaf labels above it (1-based)."""
    out = []

    def walk(node, path, offset):
        if node == LEAF:
            return 1
        used = 0
        for i, (child, _len) in enumerate(node[1]):
            n = walk(child, path + (i,), offset + used)
            if child != LEAF:
                out.append((path + (i,), frozenset(range(offset + used + 1, offset + used + n + 1))))
            used += n
        return used

    if t.kind == "node":
        walk(t.node, (), 0)
    return out
