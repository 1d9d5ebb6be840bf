"""The natural reversible extension of (X, phi, Y) as a space of strands.

A point of the extension is a sequence (x_0, x_1, ...) with x_k in Delta and
phi(x_k) = x_{k-1} for k >= 1 that either stops at some x_N in Y (a
:class:`Strand`) or runs forever (a :class:`PeriodicStrand`). On a finite X
every infinite backward sequence stays inside the periodic points, so the
infinite part is finite and purely periodic.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .dynsys import (
    PointSet,
    SystemWithHull,
    bits,
    domain_chain,
    eventual_image,
    mask_of,
    require_valid,
    validate_system,
)


class MalformedPointError(ValueError):
    """The given sequence is not a point of the extension of this system."""


@dataclass(frozen=True)
class Strand:
    coords: tuple[int, ...]

    @property
    def terminal(self) -> int:
        return self.coords[-1]

    @property
    def x0(self) -> int:
        return self.coords[0]

    def __len__(self) -> int:
        return len(self.coords)

    def coord(self, k: int) -> Optional[int]:
        return self.coords[k] if k < len(self.coords) else None

    def label(self, names=None) -> str:
        return ",".join(_name(names, x) for x in self.coords)


@dataclass(frozen=True)
class PeriodicStrand:
    """x_0 .. x_{p-1} = preperiod, then ``cycle`` repeated forever.

    A preperiod that is consistent with the cycle is folded into a rotation
    of the cycle, so equal sequences compare equal.
    """

    preperiod: tuple[int, ...]
    cycle: tuple[int, ...]

    def __post_init__(self):
        pre, cyc = list(self.preperiod), list(self.cycle)
        while pre and cyc and pre[-1] == cyc[-1]:
            pre.pop()
            cyc = [cyc[-1]] + cyc[:-1]
        object.__setattr__(self, "preperiod", tuple(pre))
        object.__setattr__(self, "cycle", tuple(cyc))

    @property
    def x0(self) -> int:
        return self.preperiod[0] if self.preperiod else self.cycle[0]

    def coord(self, k: int) -> int:
        p = len(self.preperiod)
        if k < p:
            return self.preperiod[k]
        return self.cycle[(k - p) % len(self.cycle)]

    def canonical(self) -> "PeriodicStrand":
        """The rotation whose cycle is lexicographically least."""
        c = self.cycle
        best = min(c[i:] + c[:i] for i in range(len(c)))
        return PeriodicStrand((), best)

    def label(self, names=None) -> str:
        pre = ",".join(_name(names, x) for x in self.preperiod)
        return pre + "|" + ",".join(_name(names, x) for x in self.cycle)


Point = Union[Strand, PeriodicStrand]


def _name(names, x: int) -> str:
    return str(x) if names is None else names[x]


def is_point(sys: SystemWithHull, p) -> bool:
    phi = sys.map
    if isinstance(p, Strand):
        c = p.coords
        if not c or any(not 0 <= x < sys.n for x in c):
            return False
        if not sys.hull >> c[-1] & 1:
            return False
        return all(phi(c[k]) == c[k - 1] for k in range(1, len(c)))
    if isinstance(p, PeriodicStrand):
        if p.preperiod or not p.cycle:
            return False
        c = p.cycle
        if any(not 0 <= x < sys.n for x in c):
            return False
        return all(phi(c[(k + 1) % len(c)]) == c[k] for k in range(len(c)))
    return False


def build_strands(sys: SystemWithHull, depth: int) -> list[Strand]:
    """All strands (x_0, ..., x_N) with N <= depth.

    A strand is fixed by its terminal point y = x_N and N, since
    x_{k-1} = phi(x_k): it is the forward orbit segment of y read backwards.
    Ordered by terminal point, then by length.
    """
    require_valid(sys)
    phi = sys.map
    out = []
    for y in bits(sys.hull):
        seg = [y]
        while True:
            out.append(Strand(tuple(reversed(seg))))
            if len(seg) > depth:
                break
            nxt = phi(seg[-1])
            if nxt is None:
                break
            seg.append(nxt)
    return out


def infinite_core(sys: SystemWithHull) -> PointSet:
    """Greatest W with W = phi(W ∩ Delta): points with an infinite backward chain."""
    return eventual_image(sys)


def _backward_cycle(sys: SystemWithHull, x: int) -> tuple[int, ...]:
    # x, then the unique periodic preimage of x, and so on.
    phi = sys.map
    fwd = [x]
    y = phi(x)
    while y != x:
        fwd.append(y)
        y = phi(y)
    return (x,) + tuple(reversed(fwd[1:]))


def infinite_strands(sys: SystemWithHull, preperiod_cap: Optional[int] = None):
    """(infinite core, one canonical periodic strand per phi-cycle).

    ``preperiod_cap`` is accepted for interface stability; on a finite space
    every eventually periodic backward strand is purely periodic, so the
    result does not depend on it.
    """
    require_valid(sys)
    core = infinite_core(sys)
    seen = 0
    out = []
    for x in bits(core):
        if seen >> x & 1:
            continue
        cyc = _backward_cycle(sys, x)
        seen |= mask_of(cyc)
        out.append(PeriodicStrand((), cyc).canonical())
    out.sort(key=lambda p: p.cycle)
    return core, out


def periodic_extension_points(sys: SystemWithHull) -> list[PeriodicStrand]:
    """Every periodic point of the extension, grouped by cycle, each group
    starting at the canonical rotation and following phi-tilde inverse."""
    _, canon = infinite_strands(sys)
    out = []
    for p in canon:
        c = p.cycle
        out.extend(PeriodicStrand((), c[i:] + c[:i]) for i in range(len(c)))
    return out


def extended_map(sys: SystemWithHull, point: Point) -> Optional[Point]:
    """phi-tilde: prepend phi(x_0). ``None`` when x_0 is outside Delta."""
    if not is_point(sys, point):
        raise MalformedPointError(f"{point!r} is not a point of the extension")
    y = sys.map(point.x0)
    if y is None:
        return None
    if isinstance(point, Strand):
        return Strand((y,) + point.coords)
    return PeriodicStrand((y,), point.cycle)


def extended_map_inverse(sys: SystemWithHull, point: Point) -> Optional[Point]:
    """Drop x_0. ``None`` on a strand of length one."""
    if not is_point(sys, point):
        raise MalformedPointError(f"{point!r} is not a point of the extension")
    if isinstance(point, Strand):
        return Strand(point.coords[1:]) if len(point) >= 2 else None
    c = point.cycle
    return PeriodicStrand((), c[1:] + c[:1])


@dataclass(frozen=True)
class ExtensionTruncation:
    finite_points: tuple[Strand, ...]
    periodic_points: tuple[PeriodicStrand, ...]
    infinite_core: PointSet
    depth: int


def default_depth(sys: SystemWithHull) -> int:
    return 2 * sys.n + 2


def truncate_extension(sys: SystemWithHull, depth: Optional[int] = None) -> ExtensionTruncation:
    if depth is None:
        depth = default_depth(sys)
    core, canon = infinite_strands(sys)
    return ExtensionTruncation(tuple(build_strands(sys, depth)), tuple(canon), core, depth)


@dataclass(frozen=True)
class ApproxSpace:
    """Level-n approximation  Y ⊔ (Y∩Delta_1) ⊔ ... ⊔ (Y∩Delta_{n-1}) ⊔ Delta_n.

    Elements are ``(tag, point)``; ``components[tag]`` is the point set of
    that summand. The last summand (tag == level) is the diagonal one.
    """

    level: int
    components: tuple[PointSet, ...]
    _phi: object = None

    def elements(self) -> list[tuple[int, int]]:
        return [(t, x) for t, comp in enumerate(self.components) for x in bits(comp)]

    def contains(self, elem: tuple[int, int]) -> bool:
        t, x = elem
        return 0 <= t <= self.level and bool(self.components[t] >> x & 1)

    def bond(self, elem: tuple[int, int]) -> tuple[int, int]:
        """Bonding map to level-1: identity on Y-copies, phi on the diagonal."""
        if self.level == 0:
            raise ValueError("level 0 has no bonding map")
        t, x = elem
        if t < self.level:
            return (t, x)
        return (self.level - 1, self._phi(x))


def approx_space(sys: SystemWithHull, level: int) -> ApproxSpace:
    require_valid(sys)
    doms = domain_chain(sys, level)
    comps = tuple(sys.hull & doms[j] for j in range(level)) + (doms[level],)
    return ApproxSpace(level, comps, sys.map)


@dataclass(frozen=True)
class ThreadCensus:
    stabilized: int
    diagonal: int
    persistent: int
    bonds_well_defined: bool
    strands_match: bool
    periodic_match: bool

    @property
    def ok(self) -> bool:
        return self.bonds_well_defined and self.strands_match and self.periodic_match


def thread_census(sys: SystemWithHull, depth: int) -> ThreadCensus:
    """Rebuild the extension as coherent threads of approximation spaces.

    Threads of levels 0..depth+1 are determined by their top element. Those
    whose top element sits in a Y-summand have slid off the diagonal and are
    compared with :func:`build_strands`; the diagonal ones whose coordinates
    all lie in the infinite core are compared with prefixes of the periodic
    strands.
    """
    top = depth + 1
    spaces = [approx_space(sys, k) for k in range(top + 1)]
    well_defined = True
    stabilized, persistent = set(), set()
    diagonal = 0
    core = infinite_core(sys)
    for elem in spaces[top].elements():
        thread = [elem]
        for k in range(top, 0, -1):
            nxt = spaces[k].bond(thread[-1])
            if not spaces[k - 1].contains(nxt):
                well_defined = False
            thread.append(nxt)
        thread.reverse()
        coords = tuple(x for lvl, (t, x) in enumerate(thread) if t == lvl)
        if elem[0] < top:
            if coords in stabilized:
                well_defined = False
            stabilized.add(coords)
        else:
            diagonal += 1
            if all(core >> x & 1 for x in coords):
                persistent.add(coords)
    strands = {s.coords for s in build_strands(sys, depth)}
    prefixes = {tuple(p.coord(k) for k in range(top + 1)) for p in periodic_extension_points(sys)}
    return ThreadCensus(
        stabilized=len(stabilized),
        diagonal=diagonal,
        persistent=len(persistent),
        bonds_well_defined=well_defined,
        strands_match=stabilized == strands,
        periodic_match=persistent == prefixes,
    )


def thread_check(sys: SystemWithHull, depth: int) -> bool:
    return thread_census(sys, depth).ok


def is_reversible(sys) -> bool:
    """phi is a partial bijection (clopen domain and range are automatic)."""
    phi = sys.map if isinstance(sys, SystemWithHull) else sys
    return phi.is_injective()


def extension_points(sys: SystemWithHull, depth: Optional[int] = None) -> list[Point]:
    t = truncate_extension(sys, depth)
    return list(t.finite_points) + periodic_extension_points(sys)


def conjugacy_to_input(sys: SystemWithHull, depth: Optional[int] = None) -> Optional[dict]:
    """Explicit conjugacy x~ -> x_0 from the extension onto (X, phi), or None.

    Succeeds exactly when the extension is (up to ``depth``) a copy of the
    input system.
    """
    if not validate_system(sys).valid:
        return None
    pts = extension_points(sys, depth)
    h = {p: p.x0 for p in pts}
    if sorted(h.values()) != list(range(sys.n)):
        return None
    known = set(pts)
    for p in pts:
        q = extended_map(sys, p)
        if (q is None) != (sys.map(p.x0) is None):
            return None
        if q is not None:
            if q not in known or h[q] != sys.map(h[p]):
                return None
    return h
