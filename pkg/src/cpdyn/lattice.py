"""Y-pairs: the gauge-invariant ideals of C*(A, alpha, J), read through hulls.

A Y-pair (V, V') has V positively invariant, V' ⊆ Y and V' ∪ phi(V ∩ Delta) = V.
The ideal with hull data (V, V') shrinks as the pair grows, so the
componentwise order on pairs is the reverse of inclusion of ideals.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .dynsys import (
    PartialMap,
    PointSet,
    SystemWithHull,
    bits,
    domain_chain,
    eventual_image,
    full_mask,
    popcount,
    require_valid,
    subset,
)


@dataclass(frozen=True)
class YPair:
    v: PointSet
    vprime: PointSet

    def __le__(self, other: "YPair") -> bool:
        return subset(self.v, other.v) and subset(self.vprime, other.vprime)

    def label(self, names=None) -> str:
        return f"{_fmt(self.v, names)} | {_fmt(self.vprime, names)}"


def _fmt(mask: PointSet, names=None) -> str:
    return "{" + ",".join(str(x) if names is None else names[x] for x in bits(mask)) + "}"


def _sort_key(mask: PointSet):
    return (popcount(mask), mask)


def is_ypair(sys: SystemWithHull, v: PointSet, vprime: PointSet) -> bool:
    img = sys.map.image_of(v)
    return (subset(img, v)
            and subset(vprime, sys.hull)
            and vprime | img == v)


def positively_invariant_sets(phi: PartialMap) -> list[PointSet]:
    out = [v for v in range(1 << phi.size) if subset(phi.image_of(v), v)]
    out.sort(key=_sort_key)
    return out


def _submasks_between(lo: PointSet, hi: PointSet) -> list[PointSet]:
    free = hi & ~lo
    out = []
    s = free
    while True:
        out.append(lo | s)
        if s == 0:
            break
        s = (s - 1) & free
    out.sort(key=_sort_key)
    return out


class YPairLattice:
    """All Y-pairs of a system, with order, covers and meet/join tables."""

    def __init__(self, sys: SystemWithHull, elements: Sequence[YPair]):
        self.sys = sys
        self.elements = tuple(elements)
        self.index = {p: i for i, p in enumerate(self.elements)}

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, p) -> bool:
        return p in self.index

    @cached_property
    def leq(self) -> np.ndarray:
        """leq[i, j] iff elements[i] <= elements[j]."""
        v = [p.v for p in self.elements]
        w = [p.vprime for p in self.elements]
        m = len(self.elements)
        out = np.zeros((m, m), dtype=bool)
        for i in range(m):
            for j in range(m):
                out[i, j] = v[i] & ~v[j] == 0 and w[i] & ~w[j] == 0
        return out

    @cached_property
    def hasse_edges(self) -> list[tuple[int, int]]:
        """Covering pairs (i, j): elements[j] covers elements[i]."""
        lt = self.leq & ~np.eye(len(self), dtype=bool)
        between = (lt.astype(np.int64) @ lt.astype(np.int64)) > 0
        cover = lt & ~between
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(cover))]

    @cached_property
    def join_table(self) -> np.ndarray:
        m = len(self)
        t = np.empty((m, m), dtype=np.int64)
        for i, p in enumerate(self.elements):
            for j in range(i, m):
                t[i, j] = t[j, i] = self.index[join_ypairs(p, self.elements[j])]
        return t

    @cached_property
    def meet_table(self) -> np.ndarray:
        m = len(self)
        t = np.empty((m, m), dtype=np.int64)
        for i, p in enumerate(self.elements):
            for j in range(i, m):
                t[i, j] = t[j, i] = self.index[meet_ypairs(self.sys, p, self.elements[j])]
        return t

    @property
    def bottom(self) -> YPair:
        return self.elements[0]

    @property
    def top(self) -> YPair:
        return self.elements[-1]

    def down_set(self, p: YPair) -> list[YPair]:
        return [r for r in self.elements if r <= p]


def enumerate_ypairs(sys: SystemWithHull) -> YPairLattice:
    """Every Y-pair, by intervals of admissible V' over invariant V.

    For positively invariant V the admissible V' form the interval
    [V \\ phi(V∩Delta), Y ∩ V], nonempty iff its lower end lies in Y.
    """
    require_valid(sys)
    phi = sys.map
    out = []
    for v in positively_invariant_sets(phi):
        lo = v & ~phi.image_of(v)
        if not subset(lo, sys.hull):
            continue
        out.extend(YPair(v, vp) for vp in _submasks_between(lo, sys.hull & v))
    return YPairLattice(sys, out)


def join_ypairs(p: YPair, q: YPair) -> YPair:
    return YPair(p.v | q.v, p.vprime | q.vprime)


def meet_ypairs(sys: SystemWithHull, p: YPair, q: YPair) -> YPair:
    """Greatest Y-pair below p and q.

    Starts from the componentwise intersection and discards points of W
    that are neither in W' nor hit by phi from W. Removing such points keeps
    W positively invariant, and every Y-pair below p and q survives each
    round, so the limit is the greatest lower bound.
    """
    phi = sys.map
    w = p.v & q.v
    wp = p.vprime & q.vprime
    while True:
        nw = (wp | phi.image_of(w)) & w
        nwp = wp & nw
        if nw == w and nwp == wp:
            break
        w, wp = nw, nwp
    result = YPair(w, wp)
    if not is_ypair(sys, w, wp):
        raise AssertionError(f"meet fixpoint produced a non-pair {result}")
    return result


def enumerate_hull_invariant_sets(sys: SystemWithHull) -> list[PointSet]:
    """V positively invariant with V ⊆ Y ∪ phi(V ∩ Delta)."""
    require_valid(sys)
    phi = sys.map
    return [v for v in positively_invariant_sets(phi)
            if subset(v, sys.hull | phi.image_of(v))]


@dataclass(frozen=True)
class QuotientSystem:
    """A system on a subset of the parent's points.

    ``embedding[i]`` is the parent index of the quotient's point ``i``.
    """

    system: SystemWithHull
    embedding: tuple[int, ...]

    def lift(self, mask: PointSet) -> PointSet:
        out = 0
        for i in bits(mask):
            out |= 1 << self.embedding[i]
        return out

    @property
    def support(self) -> PointSet:
        return self.lift(full_mask(len(self.embedding)))


def _restrict(phi: PartialMap, w: PointSet, hull: PointSet) -> QuotientSystem:
    sub, emb = phi.restrict(w)
    pos = {old: new for new, old in enumerate(emb)}
    h = 0
    for x in bits(hull & w):
        h |= 1 << pos[x]
    return QuotientSystem(SystemWithHull(sub, h), emb)


def quotient_system(sys: SystemWithHull, p: YPair) -> QuotientSystem:
    """The system (V, phi|, V') whose crossed product is the quotient by p's ideal."""
    if not is_ypair(sys, p.v, p.vprime):
        raise ValueError(f"{p} is not a Y-pair of this system")
    return _restrict(sys.map, p.v, p.vprime)


def interval_isomorphism_check(sys: SystemWithHull, p: YPair,
                               lattice: Optional[YPairLattice] = None) -> bool:
    """Quotient lattice at p vs. the pairs below p in the parent lattice.

    Pairs below p correspond to gauge-invariant ideals containing p's ideal.
    """
    lat = lattice if lattice is not None else enumerate_ypairs(sys)
    q = quotient_system(sys, p)
    qlat = enumerate_ypairs(q.system)
    lifted = [YPair(q.lift(r.v), q.lift(r.vprime)) for r in qlat]
    below = lat.down_set(p)
    if len(set(lifted)) != len(lifted) or set(lifted) != set(below):
        return False
    for i, a in enumerate(qlat):
        for j, b in enumerate(qlat):
            if (a <= b) != (lifted[i] <= lifted[j]):
                return False
    return True


def stacey_hull(phi: PartialMap, y: PointSet) -> PointSet:
    """Hull of the reduction ideal: the union of phi^k(Delta_k ∩ Y) over k, together
    with the eventual image. Both stabilise within n steps."""
    doms = domain_chain(phi, phi.size)
    w = 0
    for k, d in enumerate(doms):
        v = d & y
        for _ in range(k):
            v = phi.image_of(v)
        w |= v
    return w | eventual_image(phi)


def stacey_reduce(phi: PartialMap, y: PointSet) -> QuotientSystem:
    """Largest restriction on which the hull condition holds, with hull Y ∩ W."""
    return _restrict(phi, stacey_hull(phi, y), y)


def export_hasse(lat: YPairLattice, names=None) -> str:
    lines = ["digraph ypairs {", "  rankdir=BT;"]
    for i, p in enumerate(lat.elements):
        label = p.label(names).replace('"', '\\"')
        lines.append(f'  n{i} [label="{label}"];')
    for i, j in lat.hasse_edges:
        lines.append(f"  n{i} -> n{j};")
    lines.append("}")
    return "\n".join(lines) + "\n"

