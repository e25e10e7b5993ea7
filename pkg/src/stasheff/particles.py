"""Particles, signed trajectories, and the Koszul sign kernel.

A particle is an ordered word of elementary particles, each a labelled
base point with a non-negative index.  A primitive trajectory from P+ to
P- is a forest-shaped morphism carrying a homotopy-class trace and an
orientation sign.  The sign is stored relative to one fixed reference
order of the graded orientation line: target lines first, then dualized
source lines right to left.  Every sign conversion in this package goes
through ``reorder_graded_word``.

Trajectories form free abelian groups under formal sums; the tensor
product and composition below satisfy, as executable identities,

    (g2 (x) g2') o (g1 (x) g1') = (-1)^(mu(g1) mu(g2')) (g2 o g1) (x) (g2' o g1')

together with the unit laws for identity trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .trees import T0, T1, Forest, RibbonTree, compose_forests

Sign = int


class CompositionError(ValueError):
    """Source/target mismatch in a trajectory operation."""


# -- graded words -------------------------------------------------------------


@dataclass(frozen=True)
class GradedSymbol:
    line: object
    degree: int
    dual: bool = False


@dataclass(frozen=True)
class GradedWord:
    symbols: tuple[GradedSymbol, ...]
    sign: Sign = 1

    def degrees(self) -> tuple[int, ...]:
        return tuple(s.degree for s in self.symbols)

    def total_degree(self) -> int:
        """Signed total degree; dual symbols count negatively."""
        return sum(-s.degree if s.dual else s.degree for s in self.symbols)


def koszul_sign(degrees: Sequence[int], perm: Sequence[int]) -> Sign:
    """Sign picked up by permuting graded symbols, ``perm[new] = old``.

    Each inverted pair contributes ``(-1)^(d_i d_j)``; degree-zero symbols
    commute freely.
    """
    n = len(perm)
    if sorted(perm) != list(range(n)) or n != len(degrees):
        raise ValueError("perm must be a permutation of the word length")
    sign = 1
    for i in range(n):
        for j in range(i + 1, n):
            if perm[i] > perm[j]:
                if (degrees[perm[i]] * degrees[perm[j]]) % 2:
                    sign = -sign
    return sign


def reorder_graded_word(word: GradedWord, perm: Sequence[int]) -> GradedWord:
    """Permute the symbols of a graded word, ``perm[new] = old``."""
    degrees = [s.degree for s in word.symbols]
    sign = koszul_sign(degrees, perm)
    symbols = tuple(word.symbols[i] for i in perm)
    return GradedWord(symbols, word.sign * sign)


# -- particles ----------------------------------------------------------------


@dataclass(frozen=True)
class ElementaryParticle:
    point: str
    mu: int
    tag: Optional[tuple] = None

    def __post_init__(self):
        if self.mu < 0:
            raise ValueError("elementary index must be non-negative")


@dataclass(frozen=True)
class Particle:
    factors: tuple[ElementaryParticle, ...] = ()

    @property
    def q(self) -> int:
        return len(self.factors)

    @property
    def mu(self) -> int:
        return sum(f.mu for f in self.factors)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return Particle(self.factors[item])
        return self.factors[item]

    def __iter__(self):
        return iter(self.factors)

    def encode(self) -> str:
        return "(x)".join(f"{f.point}^{f.mu}" for f in self.factors) or "1"


EMPTY_PARTICLE = Particle(())


def tensor_particles(*parts: Particle) -> Particle:
    factors: tuple[ElementaryParticle, ...] = ()
    for p in parts:
        factors = factors + p.factors
    return Particle(factors)


def dual_coparticle(p: Particle, dim_m: int) -> Particle:
    """Order-reversing dual with complemented indices."""
    out = []
    for f in reversed(p.factors):
        if f.mu > dim_m:
            raise ValueError(f"index {f.mu} exceeds ambient dimension {dim_m}")
        out.append(ElementaryParticle(f.point, dim_m - f.mu, f.tag))
    return Particle(tuple(out))


def reference_word(source: Particle, target: Particle, sign: Sign = 1) -> GradedWord:
    """The orientation line of a trajectory in its reference order."""
    symbols = [GradedSymbol(("t", i, f.point), f.mu, False) for i, f in enumerate(target)]
    for j in range(source.q - 1, -1, -1):
        f = source.factors[j]
        symbols.append(GradedSymbol(("s", j, f.point), f.mu, True))
    return GradedWord(tuple(symbols), sign)


def tensor_orientation_sign(src1: Particle, tgt1: Particle, src2: Particle, tgt2: Particle) -> Sign:
    """Koszul sign relating juxtaposed orientation words to the tensor's.

    The dualized first source block moves past the whole second word; the
    sign is read off from ``reorder_graded_word``.
    """
    q1, l1, q2, l2 = tgt1.q, src1.q, tgt2.q, src2.q
    word = GradedWord(
        reference_word(src1, tgt1).symbols + reference_word(src2, tgt2).symbols
    )
    perm = (
        list(range(q1))
        + list(range(q1 + l1, q1 + l1 + q2 + l2))
        + list(range(q1, q1 + l1))
    )
    return reorder_graded_word(word, perm).sign


# -- traces --------------------------------------------------------------------
#
# Per-tree homotopy-class labels.  Composition substitutes the inner traces
# at the open slots of the outer one; the identity trace leaves a slot open,
# so trace substitution is strictly associative.  A trace with no open slot
# left carries no homotopy information (the domain tree is contractible and
# only the root is pinned) and normalizes to GEN_TRACE.

ID_TRACE = ("id",)
GEN_TRACE = ("gen",)
SLOT = ("slot",)


def op_trace(label: str, arity: int):
    """Opaque fixture trace with ``arity`` open inputs."""
    return ("op", label, (SLOT,) * arity)


def circle_trace(paths: Sequence[tuple[str, str, int]]):
    """Circle-valued trace: one (start, end, base-point crossings) class per leaf."""
    return ("circ", tuple(tuple(p) for p in paths))


def trace_slots(trace) -> int:
    if trace == ID_TRACE:
        return 1
    if trace == GEN_TRACE:
        return 0
    if trace == SLOT:
        return 1
    if trace[0] == "circ":
        return len(trace[1])
    if trace[0] == "op":
        return sum(trace_slots(c) for c in trace[2])
    raise ValueError(f"unknown trace: {trace!r}")


def _subst_children(children, inners):
    out = []
    for child in children:
        if child == SLOT:
            inner = inners.pop(0)
            out.append(SLOT if inner == ID_TRACE else inner)
        elif isinstance(child, tuple) and child and child[0] == "op":
            out.append(("op", child[1], _subst_children(child[2], inners)))
        elif isinstance(child, tuple) and child and child[0] == "circ":
            out.append(_subst_circle(child, inners))
        else:
            out.append(child)
    return tuple(out)


def _subst_circle(trace, inners):
    paths = []
    for path in trace[1]:
        inner = inners.pop(0)
        if inner == ID_TRACE:
            paths.append(path)
        elif inner == GEN_TRACE:
            continue
        elif isinstance(inner, tuple) and inner and inner[0] == "circ":
            for ip in inner[1]:
                if ip[0] != path[1]:
                    raise CompositionError(
                        f"circle trace mismatch: path into {path[1]} composed with path from {ip[0]}"
                    )
                paths.append((path[0], ip[1], path[2] + ip[2]))
        else:
            raise CompositionError("circle traces compose only with circle traces")
    return ("circ", tuple(paths))


def graft_trace(outer, inners: Sequence):
    """Substitute the inner traces at the open slots of the outer trace."""
    inners = list(inners)
    if len(inners) != trace_slots(outer):
        raise CompositionError("trace arity mismatch in composition")
    if outer == ID_TRACE:
        result = inners[0]
    elif outer == GEN_TRACE:
        result = GEN_TRACE
    elif outer[0] == "circ":
        result = _subst_circle(outer, inners)
    elif outer[0] == "op":
        result = ("op", outer[1], _subst_children(outer[2], inners))
    else:
        raise ValueError(f"unknown trace: {outer!r}")
    if result != ID_TRACE and trace_slots(result) == 0:
        return GEN_TRACE
    return result


# -- primitive trajectories -----------------------------------------------------


@dataclass(frozen=True)
class PrimitiveTrajectory:
    source: Particle
    target: Particle
    forest: Forest
    trace: tuple
    sign: Sign = 1

    def __post_init__(self):
        if len(self.forest.trees) != self.target.q:
            raise CompositionError("forest must have one tree per target factor")
        if self.forest.leaf_count != self.source.q:
            raise CompositionError("forest leaves must match the source factors")
        if len(self.trace) != self.target.q:
            raise CompositionError("one trace per forest tree")
        if self.target.q == 0 and self.source.q != 0:
            raise CompositionError("only the empty source maps to the empty particle")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @property
    def mu(self) -> int:
        return self.target.mu - self.source.mu

    @property
    def q(self) -> int:
        return self.source.q - self.target.q

    def key(self):
        return (self.source, self.target, self.forest.encode(), self.trace)

    def with_sign(self, sign: Sign) -> "PrimitiveTrajectory":
        return PrimitiveTrajectory(self.source, self.target, self.forest, self.trace, sign)

    def __neg__(self):
        return self.with_sign(-self.sign)

    def encode(self) -> str:
        s = "" if self.sign > 0 else "-"
        return f"{s}[{self.source.encode()} -> {self.target.encode()}; {self.forest.encode()}; {self.trace}]"


def identity_trajectory(p: Particle) -> PrimitiveTrajectory:
    return PrimitiveTrajectory(p, p, Forest((T1,) * p.q), (ID_TRACE,) * p.q, 1)


def generator_trajectory(p: Particle, sign: Sign = 1) -> PrimitiveTrajectory:
    """One of the two orientations of a particle, as a morphism out of 1."""
    return PrimitiveTrajectory(EMPTY_PARTICLE, p, Forest((T0,) * p.q), (GEN_TRACE,) * p.q, sign)


# -- formal sums -----------------------------------------------------------------


class Trajectory:
    """Finite formal Z-combination of primitive trajectories.

    Keys with equal source, target, forest and trace merge; a primitive and
    its orientation reverse cancel.  Iteration order is the lexicographic
    order of the primitive encoding, so results print reproducibly.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[dict] = None):
        clean = {}
        for prim, coeff in (terms or {}).items():
            if prim.sign < 0:
                prim, coeff = -prim, -coeff
            if coeff:
                clean[prim] = clean.get(prim, 0) + coeff
        self.terms = {p: c for p, c in clean.items() if c}

    @classmethod
    def zero(cls) -> "Trajectory":
        return cls({})

    @classmethod
    def of(cls, *prims: PrimitiveTrajectory) -> "Trajectory":
        out = cls()
        for p in prims:
            out = out + cls({p.with_sign(1): p.sign})
        return out

    def is_zero(self) -> bool:
        return not self.terms

    def items(self):
        return sorted(self.terms.items(), key=lambda kv: kv[0].encode())

    def primitives(self):
        """Signed primitives with multiplicity folded into the sign where possible."""
        for prim, coeff in self.items():
            yield prim, coeff

    def __add__(self, other: "Trajectory") -> "Trajectory":
        terms = dict(self.terms)
        for p, c in other.terms.items():
            terms[p] = terms.get(p, 0) + c
        return Trajectory(terms)

    def __sub__(self, other: "Trajectory") -> "Trajectory":
        return self + (-other)

    def __neg__(self) -> "Trajectory":
        return Trajectory({p: -c for p, c in self.terms.items()})

    def scale(self, k: int) -> "Trajectory":
        return Trajectory({p: k * c for p, c in self.terms.items()})

    def __eq__(self, other):
        return isinstance(other, Trajectory) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def sources(self):
        return {p.source for p in self.terms}

    def targets(self):
        return {p.target for p in self.terms}

    def encode(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"{c}*{p.encode()}" for p, c in self.items())

    def __repr__(self):
        return f"Trajectory({self.encode()})"


def _tensor_primitives(g1: PrimitiveTrajectory, g2: PrimitiveTrajectory) -> PrimitiveTrajectory:
    sign = g1.sign * g2.sign * tensor_orientation_sign(g1.source, g1.target, g2.source, g2.target)
    return PrimitiveTrajectory(
        tensor_particles(g1.source, g2.source),
        tensor_particles(g1.target, g2.target),
        Forest(g1.forest.trees + g2.forest.trees),
        g1.trace + g2.trace,
        sign,
    )


def _split_primitive(g: PrimitiveTrajectory, trees: int):
    """Split off the first ``trees`` target factors as a tensor factor.

    Returns (left, right) with ``left (x) right == g``; the orientation sign
    sits on the left factor and the right factor carries the correction
    forced by the tensor sign rule.
    """
    leaves = sum(t.leaf_count for t in g.forest.trees[:trees])
    left = PrimitiveTrajectory(
        g.source[:leaves], g.target[:trees],
        Forest(g.forest.trees[:trees]), g.trace[:trees], g.sign,
    )
    ts = tensor_orientation_sign(
        left.source, left.target, g.source[leaves:], g.target[trees:]
    )
    right = PrimitiveTrajectory(
        g.source[leaves:], g.target[trees:],
        Forest(g.forest.trees[trees:]), g.trace[trees:], ts,
    )
    return left, right


def _compose_primitives(g2: PrimitiveTrajectory, g1: PrimitiveTrajectory) -> PrimitiveTrajectory:
    if g1.target != g2.source:
        raise CompositionError(
            f"cannot compose: target {g1.target.encode()} != source {g2.source.encode()}"
        )
    q = g2.target.q
    if q == 0:
        # both factors are signed units on the empty particle
        return PrimitiveTrajectory(
            EMPTY_PARTICLE, EMPTY_PARTICLE, Forest(()), (), g1.sign * g2.sign
        )
    if q == 1:
        forest = compose_forests(g2.forest, g1.forest)
        trace = (graft_trace(g2.trace[0], g1.trace),)
        return PrimitiveTrajectory(g1.source, g2.target, forest, trace, g1.sign * g2.sign)
    g2a, g2b = _split_primitive(g2, 1)
    # split g1 at the trees feeding g2's first tree
    g1a, g1b = _split_primitive(g1, g2a.source.q)
    koszul = -1 if (g1a.mu * g2b.mu) % 2 else 1
    left = _compose_primitives(g2a, g1a)
    right = _compose_primitives(g2b, g1b)
    out = _tensor_primitives(left, right)
    return out.with_sign(out.sign * koszul)


def tensor_trajectories(t1: Trajectory, t2: Trajectory) -> Trajectory:
    out = {}
    for p1, c1 in t1.terms.items():
        for p2, c2 in t2.terms.items():
            prim = _tensor_primitives(p1, p2)
            key = prim.with_sign(1)
            out[key] = out.get(key, 0) + c1 * c2 * prim.sign
    return Trajectory(out)


def compose_trajectories(t2: Trajectory, t1: Trajectory) -> Trajectory:
    """Composition ``t2 after t1``, bilinear over the formal sums."""
    out = {}
    for p1, c1 in t1.terms.items():
        for p2, c2 in t2.terms.items():
            prim = _compose_primitives(p2, p1)
            key = prim.with_sign(1)
            out[key] = out.get(key, 0) + c1 * c2 * prim.sign
    return Trajectory(out)


def identity(p: Particle) -> Trajectory:
    return Trajectory.of(identity_trajectory(p))


def generator(p: Particle, sign: Sign = 1) -> Trajectory:
    return Trajectory.of(generator_trajectory(p, sign))


def coefficients_apply(gamma: Trajectory, gen: Trajectory) -> Trajectory:
    """Action of a trajectory on orientation generators, ``gamma o gen``."""
    for prim in gen.terms:
        if prim.source != EMPTY_PARTICLE:
            raise CompositionError("coefficients act on morphisms out of the unit")
    return compose_trajectories(gamma, gen)


def generator_coefficient(t: Trajectory, p: Particle) -> int:
    """Coefficient of the canonical generator of a particle in a formal sum."""
    coeff = 0
    for prim, c in t.terms.items():
        if prim == generator_trajectory(p):
            coeff += c
        elif prim.source == EMPTY_PARTICLE and prim.target == p:
            raise CompositionError("non-canonical unit-source primitive present")
    return coeff
