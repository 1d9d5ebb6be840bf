"""Finite partial dynamical systems (X, phi, Y).

Points are the integers ``0..n-1``. Point sets are plain ``int`` bitmasks:
bit ``x`` is set iff ``x`` belongs to the set. Every subset of a finite
discrete space is clopen, so no topology is carried around.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

PointSet = int


def mask_of(points: Iterable[int]) -> PointSet:
    m = 0
    for p in points:
        m |= 1 << p
    return m


def bits(mask: PointSet) -> tuple[int, ...]:
    """Members of ``mask`` in ascending order."""
    out = []
    x = 0
    while mask:
        if mask & 1:
            out.append(x)
        mask >>= 1
        x += 1
    return tuple(out)


def popcount(mask: PointSet) -> int:
    return bin(mask).count("1")


def full_mask(n: int) -> PointSet:
    return (1 << n) - 1


def subset(a: PointSet, b: PointSet) -> bool:
    return a & ~b == 0


class InvalidSystemError(ValueError):
    """Raised when an operation needs a system that passes validation."""


@dataclass(frozen=True)
class PartialMap:
    """phi: Delta -> X on X = {0..size-1}.

    ``images[x]`` is phi(x), or ``None`` outside the domain. ``domain`` is kept
    separately so that malformed input can be reported instead of rejected.
    """

    size: int
    domain: PointSet
    images: tuple[Optional[int], ...]
    _img_bit: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        img_bit = []
        for x in range(self.size):
            y = self.images[x] if x < len(self.images) else None
            ok = self.domain >> x & 1 and y is not None and 0 <= y < self.size
            img_bit.append(1 << y if ok else 0)
        object.__setattr__(self, "_img_bit", tuple(img_bit))

    @classmethod
    def from_mapping(cls, size: int, mapping: dict[int, int]) -> "PartialMap":
        images = tuple(mapping.get(x) for x in range(size))
        return cls(size, mask_of(mapping), images)

    @classmethod
    def empty(cls, size: int) -> "PartialMap":
        return cls(size, 0, (None,) * size)

    @property
    def full(self) -> PointSet:
        return full_mask(self.size)

    def __call__(self, x: int) -> Optional[int]:
        return self.images[x] if self.domain >> x & 1 else None

    def problems(self) -> list[str]:
        out = []
        if len(self.images) != self.size:
            out.append(f"image table has {len(self.images)} entries, expected {self.size}")
        if self.domain & ~self.full:
            out.append(f"domain contains indices outside 0..{self.size - 1}: "
                       f"{list(bits(self.domain & ~self.full))}")
        for x, y in enumerate(self.images[: self.size]):
            in_dom = bool(self.domain >> x & 1)
            if in_dom and y is None:
                out.append(f"point {x} is in the domain but has no image")
            elif not in_dom and y is not None:
                out.append(f"point {x} has an image but is outside the domain")
            elif y is not None and not 0 <= y < self.size:
                out.append(f"image of {x} is {y}, outside 0..{self.size - 1}")
        return out

    def image_of(self, v: PointSet) -> PointSet:
        """phi(V ∩ Delta)."""
        out = 0
        ib = self._img_bit
        x = 0
        while v:
            if v & 1:
                out |= ib[x]
            v >>= 1
            x += 1
        return out

    def preimage_of(self, v: PointSet) -> PointSet:
        """phi^{-1}(V), a subset of Delta."""
        out = 0
        for x, b in enumerate(self._img_bit):
            if b & v:
                out |= 1 << x
        return out

    @property
    def range(self) -> PointSet:
        return self.image_of(self.domain)

    def preimages(self, y: int) -> tuple[int, ...]:
        return bits(self.preimage_of(1 << y))

    def is_injective(self) -> bool:
        return popcount(self.range) == popcount(self.domain)

    def iterate(self, x: int, k: int) -> Optional[int]:
        """phi^k(x), or None when some iterate leaves the domain."""
        for _ in range(k):
            if x is None or not self.domain >> x & 1:
                return None
            x = self.images[x]
        return x

    def restrict(self, v: PointSet) -> tuple["PartialMap", tuple[int, ...]]:
        """Restriction to a positively invariant V, relabelled to 0..|V|-1.

        Returns the new map and the embedding ``new index -> old index``.
        """
        emb = bits(v)
        pos = {old: new for new, old in enumerate(emb)}
        mapping = {}
        for new, old in enumerate(emb):
            y = self(old)
            if y is not None:
                if y not in pos:
                    raise ValueError(f"restriction to {list(emb)} is not invariant at {old}")
                mapping[new] = pos[y]
        return PartialMap.from_mapping(len(emb), mapping), emb


@dataclass(frozen=True)
class SystemWithHull:
    """A partial map together with the hull Y of the ideal J = C_0(X \\ Y)."""

    map: PartialMap
    hull: PointSet

    @property
    def n(self) -> int:
        return self.map.size

    @property
    def domain(self) -> PointSet:
        return self.map.domain

    @property
    def full(self) -> PointSet:
        return self.map.full


@dataclass
class ValidationReport:
    violations: list[str]

    @property
    def valid(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.valid


def validate_system(sys: SystemWithHull) -> ValidationReport:
    violations = list(sys.map.problems())
    if sys.hull & ~sys.full:
        violations.append(f"hull contains indices outside 0..{sys.n - 1}: "
                          f"{list(bits(sys.hull & ~sys.full))}")
    missing = sys.full & ~(sys.hull | sys.map.range)
    if missing:
        violations.append("hull ∪ φ(Δ) ≠ X: missing points "
                          + ", ".join(str(x) for x in bits(missing)))
    return ValidationReport(violations)


def require_valid(sys: SystemWithHull) -> None:
    report = validate_system(sys)
    if not report.valid:
        raise InvalidSystemError("; ".join(report.violations))


def minimal_hull(phi: PartialMap) -> PointSet:
    """X \\ phi(Delta): the hull that gives the unrelative crossed product."""
    return phi.full & ~phi.range


def _as_map(obj) -> PartialMap:
    return obj.map if isinstance(obj, SystemWithHull) else obj


def iterate_domain(sys, k: int) -> PointSet:
    """Delta_k, the natural domain of phi^k (Delta_0 = X)."""
    phi = _as_map(sys)
    d = phi.full
    for _ in range(k):
        nd = phi.preimage_of(d) & phi.domain
        if nd == d:
            break
        d = nd
    return d


def domain_chain(sys, k: int) -> list[PointSet]:
    """[Delta_0, ..., Delta_k]."""
    phi = _as_map(sys)
    out = [phi.full]
    for _ in range(k):
        out.append(phi.preimage_of(out[-1]) & phi.domain)
    return out


def iterated_image(sys, k: int) -> PointSet:
    """phi^k(Delta_k)."""
    phi = _as_map(sys)
    v = phi.full
    for _ in range(k):
        v = phi.image_of(v)
    return v


def eventual_image(sys) -> PointSet:
    """Intersection of phi^k(Delta_k) over k; equals the set of periodic points."""
    phi = _as_map(sys)
    v = phi.full
    while True:
        nv = phi.image_of(v)
        if nv == v:
            return v
        v = nv


def periodic_points(sys) -> PointSet:
    phi = _as_map(sys)
    out = 0
    for x in range(phi.size):
        y = x
        for _ in range(phi.size):
            y = phi(y)
            if y is None:
                break
            if y == x:
                out |= 1 << x
                break
    return out


def is_positively_invariant(sys, v: PointSet) -> bool:
    return subset(_as_map(sys).image_of(v), v)


def is_pointwise_quasinilpotent(sys) -> bool:
    # Delta_k decreases, so it is empty for some k iff it is empty at k = n.
    phi = _as_map(sys)
    return iterate_domain(phi, phi.size) == 0


TERMINATING = "terminating"
TAIL_INTO_CYCLE = "tail-into-cycle"
PURE_CYCLE = "pure-cycle"


@dataclass(frozen=True)
class Orbit:
    """A forward path p_0 -> p_1 -> ... under phi.

    When the path runs into an orbit found earlier it stops there and
    ``joins`` records the point it flows into; ``kind`` and ``cycle_length``
    then describe the eventual behaviour. ``entrances`` are taken with
    respect to the periodic part (the cycle) when there is one, and with
    respect to ``points`` otherwise.
    """

    points: tuple[int, ...]
    kind: str
    cycle_length: Optional[int]
    cycle: tuple[int, ...]
    entrances: PointSet
    joins: Optional[int] = None


@dataclass(frozen=True)
class OrbitDecomposition:
    orbits: tuple[Orbit, ...]

    @property
    def covered(self) -> PointSet:
        return mask_of(p for o in self.orbits for p in o.points)


def entrances(phi: PartialMap, orbit: PointSet) -> PointSet:
    """{y in Delta : y not in O, phi(y) in O}."""
    return phi.preimage_of(orbit) & ~orbit


def _cycle_from(phi: PartialMap, x: int) -> tuple[int, ...]:
    cyc = [x]
    y = phi(x)
    while y != x:
        cyc.append(y)
        y = phi(y)
    return tuple(cyc)


def orbit_decomposition(phi: PartialMap, seeds: PointSet) -> OrbitDecomposition:
    if isinstance(phi, SystemWithHull):
        phi = phi.map
    owner: dict[int, int] = {}
    orbits: list[dict] = []
    for s in bits(seeds):
        if s in owner:
            continue
        path = [s]
        seen = {s}
        joins = None
        cycle_start = None
        x = s
        while True:
            y = phi(x)
            if y is None:
                break
            if y in seen:
                cycle_start = y
                break
            if y in owner:
                joins = y
                break
            path.append(y)
            seen.add(y)
            x = y
        if joins is not None and orbits[owner[joins]]["points"][0] == joins:
            # Seed runs into the start of an earlier orbit: prepend.
            k = owner[joins]
            orbits[k]["points"] = path + orbits[k]["points"]
            for p in path:
                owner[p] = k
            continue
        rec = {"points": path, "joins": joins, "cycle_start": cycle_start}
        for p in path:
            owner[p] = len(orbits)
        orbits.append(rec)

    out = []
    for rec in orbits:
        pts = tuple(rec["points"])
        # follow to the eventual behaviour
        x = pts[-1] if rec["joins"] is None else rec["joins"]
        cyc_start = rec["cycle_start"]
        if rec["joins"] is not None:
            walked = set()
            y = x
            cyc_start = None
            while y is not None and y not in walked:
                walked.add(y)
                y = phi(y)
            if y is not None:
                cyc_start = y
        if cyc_start is None:
            kind, clen, cyc = TERMINATING, None, ()
            ent = entrances(phi, mask_of(pts))
        else:
            cyc = _cycle_from(phi, cyc_start)
            clen = len(cyc)
            kind = PURE_CYCLE if rec["joins"] is None and set(pts) == set(cyc) else TAIL_INTO_CYCLE
            ent = entrances(phi, mask_of(cyc))
        out.append(Orbit(pts, kind, clen, cyc, ent, rec["joins"]))
    return OrbitDecomposition(tuple(out))


def iter_partial_maps(n: int) -> Iterator[PartialMap]:
    """Every partial self-map of {0..n-1}: (n+1)^n of them."""
    for choice in itertools.product(range(-1, n), repeat=n):
        mapping = {x: y for x, y in enumerate(choice) if y >= 0}
        yield PartialMap.from_mapping(n, mapping)


def iter_valid_hulls(phi: PartialMap) -> Iterator[PointSet]:
    """Every Y with Y ∪ phi(Delta) = X, ascending."""
    base = minimal_hull(phi)
    free = bits(phi.range)
    for r in range(len(free) + 1):
        for extra in itertools.combinations(free, r):
            yield base | mask_of(extra)


def iter_systems(n: int) -> Iterator[SystemWithHull]:
    for phi in iter_partial_maps(n):
        for y in iter_valid_hulls(phi):
            yield SystemWithHull(phi, y)
