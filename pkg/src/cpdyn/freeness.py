"""Topological freeness outside Y, simplicity and the quasinilpotent/monomorphism split."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .dynsys import (
    PointSet,
    SystemWithHull,
    bits,
    is_pointwise_quasinilpotent,
    minimal_hull,
    orbit_decomposition,
    periodic_points,
    require_valid,
    validate_system,
)
from .extension import PeriodicStrand, infinite_strands
from .lattice import YPair, enumerate_ypairs


def f_set(sys: SystemWithHull, k: int) -> PointSet:
    """F_k: x with phi^k(x) = x whose orbit avoids Y and has no entrances.

    Checked literally: for j = 1..k the whole preimage of phi^j(x) must be
    the single point phi^{j-1}(x), and that point must lie outside Y.
    """
    if k < 1:
        raise ValueError("period must be >= 1")
    phi = sys.map
    out = 0
    for x in range(sys.n):
        if phi.iterate(x, k) != x:
            continue
        prev = x
        ok = True
        for _ in range(k):
            cur = phi(prev)
            if phi.preimages(cur) != (prev,) or sys.hull >> prev & 1:
                ok = False
                break
            prev = cur
        if ok:
            out |= 1 << x
    return out


def _cycle_is_isolated(sys: SystemWithHull, cycle) -> bool:
    # A cylinder around the periodic strand is a single point iff no vertex
    # of the cycle is terminal (in Y) or has a second preimage to branch into.
    return all(not sys.hull >> v & 1 and len(sys.map.preimages(v)) == 1 for v in cycle)


def isolated_periodic_strands(sys: SystemWithHull, k: int) -> list[PeriodicStrand]:
    """Canonical periodic strands fixed by phi-tilde^k that are isolated points."""
    if k < 1:
        raise ValueError("period must be >= 1")
    _, canon = infinite_strands(sys)
    return [p for p in canon if k % len(p.cycle) == 0 and _cycle_is_isolated(sys, p.cycle)]


def is_isolated(sys: SystemWithHull, strand: PeriodicStrand) -> bool:
    return _cycle_is_isolated(sys, strand.cycle)


@dataclass(frozen=True)
class FreenessReport:
    f_sets: tuple[PointSet, ...]  # f_sets[k-1] = F_k
    topologically_free_outside_hull: bool
    periodic_points_exist: bool
    all_ideals_gauge_invariant: bool


def freeness_report(sys: SystemWithHull) -> FreenessReport:
    require_valid(sys)
    fs = tuple(f_set(sys, k) for k in range(1, sys.n + 1))
    periodic = periodic_points(sys) != 0
    return FreenessReport(
        f_sets=fs,
        topologically_free_outside_hull=not any(fs),
        periodic_points_exist=periodic,
        all_ideals_gauge_invariant=not periodic,
    )


YPAIR = "ypair"
PERIODIC_ORBIT = "periodic-orbit"
HULL_NOT_MINIMAL = "hull-not-minimal"
EMPTY = "empty-space"

# The other finite-free case (minimal surjection on a non-discrete space)
# cannot occur for a finite X.
NON_DISCRETE_NOTE = "the non-discrete minimal-surjection case has no finite instance"


@dataclass(frozen=True)
class SimplicityVerdict:
    simple: bool
    matrix_dimension: Optional[int] = None
    witness_kind: Optional[str] = None
    witness: Union[YPair, tuple, PointSet, None] = None
    note: str = field(default=NON_DISCRETE_NOTE)


def classify_simplicity(sys: SystemWithHull) -> SimplicityVerdict:
    """Simple iff the hull is minimal, phi is injective and X is one
    non-periodic orbit; then the algebra is the full n x n matrix algebra."""
    require_valid(sys)
    phi = sys.map
    if sys.n == 0:
        return SimplicityVerdict(False, witness_kind=EMPTY)
    dec = orbit_decomposition(phi, sys.full)
    orbits = dec.orbits
    single = len(orbits) == 1 and dec.covered == sys.full
    if (sys.hull == minimal_hull(phi) and phi.is_injective()
            and single and orbits[0].cycle_length is None):
        return SimplicityVerdict(True, matrix_dimension=sys.n)

    lat = enumerate_ypairs(sys)
    if len(lat) > 2:
        return SimplicityVerdict(False, witness_kind=YPAIR, witness=lat.elements[1])
    for o in orbits:
        if o.cycle_length is not None:
            return SimplicityVerdict(False, witness_kind=PERIODIC_ORBIT, witness=o.cycle)
    return SimplicityVerdict(False, witness_kind=HULL_NOT_MINIMAL,
                             witness=sys.hull & ~minimal_hull(phi))


QUASINILPOTENT = "quasinilpotent"
MONOMORPHISM = "monomorphism"
BOTH = "both"
NEITHER = "neither"


@dataclass(frozen=True)
class DichotomyReport:
    quasinilpotent: bool
    monomorphism: bool
    injective_map: bool
    branch: str
    simple: bool
    consistent: bool


def dichotomy_report(sys: SystemWithHull) -> DichotomyReport:
    """Which alternative of the simplicity dichotomy holds.

    alpha(a) = a∘phi on Delta is a monomorphism iff phi(Delta) = X, i.e.
    phi is onto (injectivity of phi is reported separately).
    """
    phi = sys.map
    qn = is_pointwise_quasinilpotent(phi)
    mono = phi.range == phi.full
    branch = {(True, False): QUASINILPOTENT, (False, True): MONOMORPHISM,
              (True, True): BOTH, (False, False): NEITHER}[(qn, mono)]
    simple = validate_system(sys).valid and classify_simplicity(sys).simple
    consistent = not simple or branch in (QUASINILPOTENT, MONOMORPHISM)
    return DichotomyReport(qn, mono, phi.is_injective(), branch, simple, consistent)


def periodic_orbits(sys: SystemWithHull) -> list[tuple[int, ...]]:
    """Forward cycles, each starting at its least point."""
    phi = sys.map
    seen = 0
    out = []
    for x in bits(periodic_points(sys)):
        if seen >> x & 1:
            continue
        cyc = [x]
        y = phi(x)
        while y != x:
            cyc.append(y)
            y = phi(y)
        for c in cyc:
            seen |= 1 << c
        out.append(tuple(cyc))
    return out
