"""Finite matrix models (pi, U) on the strand basis and the identities they satisfy.

The basis is the truncated extension: finite strands with at most ``depth``
steps, then every periodic strand. ``pi(e_x)`` is the diagonal projection onto
basis vectors whose x_0 is ``x``; ``U`` sends a basis vector to the one with
x_0 dropped, with weight ``z`` on the wrap-around edge of each cycle.

Operator norms are spectral norms from ``numpy.linalg.norm(., 2)`` (LAPACK
SVD); for the small 0/1/z matrices here the relative error is at machine
precision, far below the 1e-9 tolerances used.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dynsys import PointSet, SystemWithHull, domain_chain, mask_of, require_valid
from .extension import (
    PeriodicStrand,
    Strand,
    build_strands,
    default_depth,
    extended_map,
    extended_map_inverse,
    is_point,
    periodic_extension_points,
)
from .freeness import is_isolated

DEFAULT_TOL = 1e-9


class DimensionMismatchError(ValueError):
    pass


class GaugeActionUnavailable(ValueError):
    """The length grading does not implement the gauge action (periodic strands present)."""


class NotIsolatedError(ValueError):
    pass


def opnorm(m: np.ndarray) -> float:
    # Most differences here are exactly zero; skip the SVD for those.
    if m.size == 0 or not m.any():
        return 0.0
    return float(np.linalg.norm(m, 2))


def _powers(u: np.ndarray, kmax: int) -> list[np.ndarray]:
    out = [np.eye(u.shape[0], dtype=complex)]
    for _ in range(kmax):
        out.append(out[-1] @ u)
    return out


@dataclass(frozen=True, eq=False)
class Representation:
    """(pi, U) on a labelled orthonormal basis.

    ``point_of[i]`` is the point of X that basis vector ``i`` evaluates at.
    ``cut[i]`` is the first power of U* that leaves the truncated basis
    although the extended map is still defined there (``None``: never), and
    ``back[i]`` is how many times U can be applied before it gives zero
    (``None``: forever).
    """

    basis: tuple
    point_of: tuple[int, ...]
    shift: np.ndarray
    n_points: int
    z: complex = 1
    depth: Optional[int] = None
    cut: tuple[Optional[int], ...] = ()
    back: tuple[Optional[int], ...] = ()

    @property
    def dim(self) -> int:
        return len(self.basis)

    def pi(self, x: int) -> np.ndarray:
        return np.diag(np.array([1.0 if p == x else 0.0 for p in self.point_of], dtype=complex))

    def pi_function(self, values: Sequence[complex]) -> np.ndarray:
        return np.diag(np.array([values[p] for p in self.point_of], dtype=complex))

    def pi_set(self, v: PointSet) -> np.ndarray:
        return np.diag(np.array([float(v >> p & 1) for p in self.point_of], dtype=complex))

    def power(self, k: int) -> np.ndarray:
        return np.linalg.matrix_power(self.shift, k)

    @property
    def frontier(self) -> tuple[bool, ...]:
        return tuple(c == 1 for c in self.cut)


def _cut(sys: SystemWithHull, s, depth: int, doms) -> Optional[int]:
    if isinstance(s, PeriodicStrand):
        return None
    j = depth + 2 - len(s)
    if j < len(doms) and doms[j] >> s.x0 & 1:
        return j
    return None


def orbit_representation(sys: SystemWithHull, depth: Optional[int] = None,
                         z: complex = 1) -> Representation:
    require_valid(sys)
    if abs(abs(z) - 1) > 1e-12:
        raise ValueError(f"z must be unimodular, got {z}")
    if depth is None:
        depth = default_depth(sys)
    basis = list(build_strands(sys, depth)) + periodic_extension_points(sys)
    index = {s: i for i, s in enumerate(basis)}
    d = len(basis)
    u = np.zeros((d, d), dtype=complex)
    for i, s in enumerate(basis):
        t = extended_map_inverse(sys, s)
        if t is None:
            continue
        wrap = isinstance(t, PeriodicStrand) and t == t.canonical()
        u[index[t], i] = z if wrap else 1
    doms = domain_chain(sys, depth + 2)
    cut = tuple(_cut(sys, s, depth, doms) for s in basis)
    back = tuple(None if isinstance(s, PeriodicStrand) else len(s) - 1 for s in basis)
    return Representation(tuple(basis), tuple(s.x0 for s in basis), u, sys.n,
                          complex(z), depth, cut, back)


def _check_dims(rep: Representation, sys: SystemWithHull) -> None:
    d = rep.dim
    if rep.n_points != sys.n or rep.shift.shape != (d, d) or any(
            not 0 <= p < sys.n for p in rep.point_of):
        raise DimensionMismatchError(
            f"representation on {rep.n_points} points / shape {rep.shift.shape} "
            f"does not fit a system on {sys.n} points with basis size {d}")


@dataclass
class CovarianceReport:
    max_covariance_defect: float
    ppi_defect: float
    covariance_set: PointSet
    domain_projection_defects: list[float]
    range_projection_defects: list[float]
    masked_generators: PointSet
    tol: float
    per_generator: list[float] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (self.max_covariance_defect < self.tol
                and self.ppi_defect < self.tol
                and all(d < self.tol for d in self.domain_projection_defects)
                and all(d < self.tol for d in self.range_projection_defects))


def _mask_matrix(keep: Sequence[bool]) -> np.ndarray:
    return np.diag(np.array([1.0 if k else 0.0 for k in keep], dtype=complex))


def domain_projection(rep: Representation, sys: SystemWithHull, k: int,
                      uk: Optional[np.ndarray] = None) -> tuple[np.ndarray, np.ndarray]:
    """(U^k U*^k, pi(1_{Delta_k})) restricted away from the truncation frontier."""
    if uk is None:
        uk = rep.power(k)
    keep = [c is None or c > k for c in rep.cut]
    m = _mask_matrix(keep)
    dk = domain_chain(sys, k)[k]
    return m @ uk @ uk.conj().T @ m, m @ rep.pi_set(dk) @ m


def range_projection(rep: Representation, k: int,
                     uk: Optional[np.ndarray] = None) -> tuple[np.ndarray, np.ndarray]:
    """(U*^k U^k, projection onto basis vectors with at least k steps behind them)."""
    if uk is None:
        uk = rep.power(k)
    target = np.diag(np.array([1.0 if b is None or b >= k else 0.0 for b in rep.back], dtype=complex))
    return uk.conj().T @ uk, target


def verify_covariance(rep: Representation, sys: SystemWithHull, tol: float = DEFAULT_TOL,
                      mask_frontier: bool = True) -> CovarianceReport:
    _check_dims(rep, sys)
    phi = sys.map
    u = rep.shift
    us = u.conj().T
    keep = [not f for f in rep.frontier] if mask_frontier else [True] * rep.dim
    m = _mask_matrix(keep)
    per = []
    masked = 0
    for x in range(sys.n):
        lhs = u @ rep.pi(x) @ us
        rhs = rep.pi_set(phi.preimage_of(1 << x))
        per.append(opnorm(m @ (lhs - rhs) @ m))
        if any(not kp and phi(p) == x for kp, p in zip(keep, rep.point_of)):
            masked |= 1 << x

    ppi = 0.0
    dom, rng = [], []
    pows = _powers(u, rep.dim)
    for k in range(1, rep.dim + 1):
        uk = pows[k]
        p = uk.conj().T @ uk
        ppi = max(ppi, opnorm(p @ p - p))
        for x in range(sys.n):
            px = rep.pi(x)
            ppi = max(ppi, opnorm(p @ px - px @ p))
        a, b = domain_projection(rep, sys, k, uk)
        dom.append(opnorm(a - b))
        a, b = range_projection(rep, k, uk)
        rng.append(opnorm(a - b))
    return CovarianceReport(
        max_covariance_defect=max(per, default=0.0),
        ppi_defect=ppi,
        covariance_set=covariance_set(rep, sys, tol),
        domain_projection_defects=dom,
        range_projection_defects=rng,
        masked_generators=masked,
        tol=tol,
        per_generator=per,
    )


def covariance_set(rep: Representation, sys: SystemWithHull, tol: float = DEFAULT_TOL) -> PointSet:
    """{x : U*U pi(e_x) = pi(e_x)}."""
    _check_dims(rep, sys)
    u = rep.shift
    p = u.conj().T @ u
    out = 0
    for x in range(sys.n):
        px = rep.pi(x)
        if opnorm(p @ px - px) < tol:
            out |= 1 << x
    return out


@dataclass
class ExtendedRepresentation:
    system: SystemWithHull
    representation: Representation
    cylinders: dict
    cylinder_defect: float
    offending: list
    covariance: CovarianceReport

    @property
    def well_defined(self) -> bool:
        return not self.offending


def _coord(s, k: int) -> Optional[int]:
    return s.coord(k)


def extension_system(rep: Representation, sys: SystemWithHull) -> SystemWithHull:
    """The truncated extension as a finite system on the basis indices."""
    from .dynsys import PartialMap

    index = {s: i for i, s in enumerate(rep.basis)}
    mapping = {}
    for i, s in enumerate(rep.basis):
        t = extended_map(sys, s)
        if t is not None and t in index:
            mapping[i] = index[t]
    hull = mask_of(i for i, s in enumerate(rep.basis) if isinstance(s, Strand) and len(s) == 1)
    return SystemWithHull(PartialMap.from_mapping(rep.dim, mapping), hull)


def extend_representation(rep: Representation, sys: SystemWithHull,
                          tol: float = DEFAULT_TOL) -> ExtendedRepresentation:
    """pi~(beta_*^k(e_x)) = U*^k pi(e_x) U^k on the cylinder functions [x_k = x].

    Cylinders that are the same function on the basis must get the same
    matrix; each must be the diagonal of its function; and the resulting
    representation of the truncated extension must be covariant.
    """
    _check_dims(rep, sys)
    if any(not is_point(sys, s) for s in rep.basis):
        raise ValueError("representation basis is not made of extension points")
    u = rep.shift
    top = rep.depth if rep.depth is not None else rep.dim
    cylinders = {}
    groups: dict[tuple, list] = {}
    defect = 0.0
    pows = _powers(u, top)
    for k in range(top + 1):
        uk = pows[k]
        uks = uk.conj().T
        for x in range(sys.n):
            mat = uks @ rep.pi(x) @ uk
            pattern = tuple(1 if _coord(s, k) == x else 0 for s in rep.basis)
            cylinders[(k, x)] = mat
            groups.setdefault(pattern, []).append((k, x))
            defect = max(defect, opnorm(mat - np.diag(np.array(pattern, dtype=complex))))
    offending = []
    for keys in groups.values():
        first = keys[0]
        for other in keys[1:]:
            if opnorm(cylinders[first] - cylinders[other]) >= tol:
                offending.append((first, other))
    ext_sys = extension_system(rep, sys)
    ext_rep = Representation(rep.basis, tuple(range(rep.dim)), u, rep.dim, rep.z,
                             rep.depth, (None,) * rep.dim, rep.back)
    cov = verify_covariance(ext_rep, ext_sys, tol, mask_frontier=False)
    return ExtendedRepresentation(ext_sys, ext_rep, cylinders, defect, offending, cov)


def product_formula_defect(rep: Representation, sys: SystemWithHull,
                           max_power: Optional[int] = None) -> float:
    """Largest ||U*^k pi(a) U^k U*^l pi(b) U^l - U*^k pi(a 1_{Delta_k} alpha^{k-l}(b)) U^k||
    over indicator generators a, b and l <= k <= max_power."""
    _check_dims(rep, sys)
    if sys.n == 0 or rep.dim == 0:
        return 0.0
    phi = sys.map
    top = max_power if max_power is not None else (rep.depth if rep.depth is not None else rep.dim)
    doms = domain_chain(sys, top)
    pows = _powers(rep.shift, top)
    conj = [p.conj().T for p in pows]
    words = np.array([[conj[k] @ rep.pi(x) @ pows[k] for x in range(sys.n)]
                      for k in range(top + 1)])
    worst = 0.0
    for k in range(top + 1):
        for l in range(k + 1):
            # lhs[a, b] = word(k, a) word(l, b)
            lhs = words[k][:, None] @ words[l][None, :]
            ok = np.array([[bool(doms[k] >> a & 1) and phi.iterate(a, k - l) == b
                            for b in range(sys.n)] for a in range(sys.n)])
            rhs = np.where(ok[:, :, None, None], words[k][:, None], 0)
            diff = lhs - rhs
            for a, b in zip(*np.nonzero(diff.any(axis=(2, 3)))):
                worst = max(worst, opnorm(diff[a, b]))
    return worst


def product_formula_check(rep: Representation, sys: SystemWithHull, tol: float = DEFAULT_TOL,
                          max_power: Optional[int] = None) -> bool:
    return product_formula_defect(rep, sys, max_power) < tol


def _orth_rows(mat: np.ndarray, tol: float) -> np.ndarray:
    if mat.shape[0] == 0:
        return mat
    _, s, vh = np.linalg.svd(mat, full_matrices=False)
    if s.size == 0 or s[0] <= tol:
        return np.zeros((0, mat.shape[1]), dtype=complex)
    return vh[s > tol * max(1.0, s[0])]


def generated_algebra_dimension(rep: Representation, sys: SystemWithHull,
                                tol: float = DEFAULT_TOL, max_power: Optional[int] = None) -> int:
    """Dimension of the algebra spanned by U*^n pi(e_x) U^m, grown under products until stable."""
    _check_dims(rep, sys)
    d = rep.dim
    if d == 0 or sys.n == 0:
        return 0
    top = max_power if max_power is not None else d
    pows = _powers(rep.shift, top)
    gens = [pows[n].conj().T @ rep.pi(x) @ pows[m]
            for n in range(top + 1) for m in range(top + 1) for x in range(sys.n)]
    q = _orth_rows(np.array([g.reshape(-1) for g in gens]), tol)
    while True:
        mats = q.reshape(-1, d, d)
        grown = False
        for a in mats:
            prods = np.einsum("ij,kjl->kil", a, mats).reshape(len(mats), -1)
            resid = prods - (prods @ q.conj().T) @ q
            if np.abs(resid).max(initial=0.0) > tol:
                q = _orth_rows(np.vstack([q, resid]), tol)
                grown = True
        if not grown:
            return int(q.shape[0])


def _grades(rep: Representation) -> list[int]:
    out = []
    for s in rep.basis:
        if not isinstance(s, Strand):
            raise GaugeActionUnavailable(
                "periodic strands present: the wrap-around edge breaks the length grading, "
                "so the gauge action is not implemented spatially")
        out.append(len(s))
    return out


def gauge_expectation(rep: Representation, t: np.ndarray) -> np.ndarray:
    """Average of W_z T W_z* over the (dim+1)-th roots of unity, W_z = diag(z^length)."""
    g = np.array(_grades(rep))
    n = rep.dim + 1
    acc = np.zeros_like(t, dtype=complex)
    for j in range(n):
        w = np.exp(2j * np.pi * j * g / n)
        acc += (w[:, None] * t) * w.conj()[None, :]
    return acc / n


def gauge_expectation_check(rep: Representation, sys: SystemWithHull,
                            tol: float = DEFAULT_TOL) -> bool:
    """E kills U*^n pi(e_x) U^m for n != m and fixes it for n = m."""
    _check_dims(rep, sys)
    _grades(rep)
    d = rep.dim
    pows = _powers(rep.shift, d)
    for n in range(d + 1):
        for m in range(d + 1):
            for x in range(sys.n):
                t = pows[n].conj().T @ rep.pi(x) @ pows[m]
                target = t if n == m else np.zeros_like(t)
                if opnorm(gauge_expectation(rep, t) - target) >= tol:
                    return False
    return True


@dataclass
class KernelWitness:
    period: int
    pi_b: np.ndarray
    pi_b_un: np.ndarray
    defect: float
    expectation_norm: float


def kernel_witness_for_periodic(sys: SystemWithHull, cycle: PeriodicStrand,
                                depth: Optional[int] = None) -> KernelWitness:
    """Images of b and b u^n for b the indicator of an isolated n-cycle.

    At z = 1, pi(b) U^n = pi(b), so b - b u^n lies in the kernel, while its
    gauge expectation (the degree-0 part, b itself) does not vanish.
    """
    require_valid(sys)
    if not is_point(sys, PeriodicStrand((), cycle.cycle)):
        raise ValueError(f"{cycle!r} is not a periodic strand of this system")
    if not is_isolated(sys, cycle):
        raise NotIsolatedError(
            f"cycle {list(cycle.cycle)} is not isolated: its indicator is not continuous "
            "on the extension, so no kernel witness is guaranteed")
    rep = orbit_representation(sys, depth, z=1)
    canon = cycle.canonical()
    b = [isinstance(s, PeriodicStrand) and s.canonical() == canon for s in rep.basis]
    pb = _mask_matrix(b)
    n = len(cycle.cycle)
    pbu = pb @ rep.power(n)
    # b - b u^n splits by gauge degree as {0: b, n: -b}; E keeps degree 0.
    graded = {0: pb, n: -pb}
    return KernelWitness(n, pb, pbu, opnorm(pb - pbu), opnorm(graded[0]))


def unit_root(k: int, n: int) -> complex:
    return cmath.exp(2j * cmath.pi * k / n)
