"""Acceptance criteria. Each test logs one PASS/FAIL line (shown in the summary)."""
import numpy as np

from cpdyn.dynsys import (
    SystemWithHull,
    iter_partial_maps,
    iter_systems,
    minimal_hull,
    periodic_points,
    validate_system,
)
from cpdyn.extension import PeriodicStrand, conjugacy_to_input, thread_check
from cpdyn.freeness import (
    MONOMORPHISM,
    QUASINILPOTENT,
    classify_simplicity,
    dichotomy_report,
    f_set,
    isolated_periodic_strands,
)
from cpdyn.lattice import (
    enumerate_ypairs,
    interval_isomorphism_check,
    stacey_hull,
    stacey_reduce,
)
from cpdyn.matrep import (
    GaugeActionUnavailable,
    domain_projection,
    gauge_expectation_check,
    generated_algebra_dimension,
    kernel_witness_for_periodic,
    orbit_representation,
    product_formula_check,
    range_projection,
    verify_covariance,
)
import pytest

from fixtures import chain, cycle3, loop
from oracles import as_set, blind_ypairs, stacey_oracle, to_mask


def test_1_fixture_lattice_counts(record):
    counts = (len(enumerate_ypairs(loop((2,)))), len(enumerate_ypairs(loop((0, 1, 2)))),
              len(enumerate_ypairs(chain(3))))
    blind = (len(blind_ypairs(loop((2,)))), len(blind_ypairs(loop((0, 1, 2)))),
             len(blind_ypairs(chain(3))))
    ok = counts == (3, 9, 2) and blind == counts
    assert record(1, "fixture lattice counts", ok, f"loop Y={{2}}, loop Y=X, chain -> {counts}")


def _lattice_axioms(m, meet, join) -> bool:
    idx = np.arange(m)
    i, j, k = np.meshgrid(idx, idx, idx, indexing="ij")
    return bool(
        (meet == meet.T).all() and (join == join.T).all()
        and (meet[idx, idx] == idx).all() and (join[idx, idx] == idx).all()
        and (meet[meet[i, j], k] == meet[i, meet[j, k]]).all()
        and (join[join[i, j], k] == join[i, join[j, k]]).all()
        and (meet[idx[:, None], join] == idx[:, None]).all()
        and (join[idx[:, None], meet] == idx[:, None]).all()
    )


def _bounds_ok(elements, meet, join) -> bool:
    # leq from the raw masks; glb(i, j) is the lower bound that every lower bound lies below.
    v = np.array([e.v for e in elements])
    w = np.array([e.vprime for e in elements])
    leq = ((v[:, None] & ~v[None, :]) == 0) & ((w[:, None] & ~w[None, :]) == 0)
    lower = leq.T[:, None, :] & leq.T[None, :, :]      # lower[i, j, r]: r <= i and r <= j
    n_lower = lower.sum(axis=2)
    below_r = np.einsum("ijs,sr->ijr", lower.astype(np.int64), leq.astype(np.int64))
    glb = lower & (below_r == n_lower[:, :, None])
    upper = leq[:, None, :] & leq[None, :, :]          # upper[i, j, r]: i <= r and j <= r
    n_upper = upper.sum(axis=2)
    above_r = np.einsum("ijs,rs->ijr", upper.astype(np.int64), leq.astype(np.int64))
    lub = upper & (above_r == n_upper[:, :, None])
    m = len(elements)
    ii, jj = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    return bool((glb.sum(axis=2) == 1).all() and glb[ii, jj, meet].all()
                and (lub.sum(axis=2) == 1).all() and lub[ii, jj, join].all())


def test_2_oracle_sweep(record):
    systems = enum_bad = axiom_bad = iso_bad = 0
    for sys in (s for n in range(5) for s in iter_systems(n)):
        systems += 1
        lat = enumerate_ypairs(sys)
        got = [(as_set(p.v), as_set(p.vprime)) for p in lat]
        if len(got) != len(set(got)) or set(got) != blind_ypairs(sys):
            enum_bad += 1
        meet, join = lat.meet_table, lat.join_table
        if not (_lattice_axioms(len(lat), meet, join) and _bounds_ok(lat.elements, meet, join)):
            axiom_bad += 1
        iso_bad += sum(not interval_isomorphism_check(sys, p, lat) for p in lat)
    ok = enum_bad == axiom_bad == iso_bad == 0
    assert record(2, "oracle sweep n<=4", ok,
                  f"{systems} systems; enumeration {enum_bad}, axioms/meet {axiom_bad}, "
                  f"interval {iso_bad} discrepancies")


def test_3_freeness_equivalence(record):
    systems = bad = 0
    for n in range(6):
        for sys in iter_systems(n):
            systems += 1
            for k in range(1, n + 1):
                if bool(f_set(sys, k)) != bool(isolated_periodic_strands(sys, k)):
                    bad += 1
    assert record(3, "F_k nonempty <=> isolated periodic strand, n<=5", bad == 0,
                  f"{systems} systems, {bad} discrepancies")


def test_4_simplicity_coherence(record):
    systems = bad = simple = 0
    for sys in (s for n in range(5) for s in iter_systems(n)):
        systems += 1
        v = classify_simplicity(sys)
        expected = (len(enumerate_ypairs(sys)) == 2 and periodic_points(sys) == 0
                    and sys.hull == minimal_hull(sys.map))
        if v.simple != expected:
            bad += 1
        if v.simple:
            simple += 1
            if dichotomy_report(sys).branch not in (QUASINILPOTENT, MONOMORPHISM):
                bad += 1
    assert record(4, "simplicity coherence and dichotomy, n<=4", bad == 0,
                  f"{systems} systems, {simple} simple, {bad} discrepancies")


def test_5_extension_fixed_point(record):
    reversible = conj_bad = thread_bad = systems = 0
    for sys in (s for n in range(5) for s in iter_systems(n)):
        systems += 1
        if not thread_check(sys, 6):
            thread_bad += 1
        if sys.map.is_injective() and sys.hull == minimal_hull(sys.map):
            reversible += 1
            h = conjugacy_to_input(sys)
            if h is None:
                conj_bad += 1
    ok = conj_bad == thread_bad == 0
    assert record(5, "extension of a reversible system is conjugate to it; thread check depth 6",
                  ok, f"{reversible} reversible, {conj_bad} not conjugate; "
                      f"{systems} systems, {thread_bad} thread failures")


def test_6_matrix_suite(record):
    # The projection identity is checked as U^k U*^k = pi(1_{Delta_k}); U*^k U^k is
    # checked against the projection onto strands with more than k steps.
    tested = bad = 0
    for sys in (s for n in range(5) for s in iter_systems(n)):
        if periodic_points(sys):
            continue
        tested += 1
        rep = orbit_representation(sys)
        cov = verify_covariance(rep, sys, tol=1e-9)
        exact = True
        for k in range(rep.depth + 1):
            for a, b in (domain_projection(rep, sys, k), range_projection(rep, k)):
                if np.abs(a - b).max(initial=0.0) > 1e-12:
                    exact = False
        if not (cov.passed and exact and cov.masked_generators == 0
                and all(c is None for c in rep.cut)
                and cov.covariance_set == sys.full & ~sys.hull
                and product_formula_check(rep, sys, tol=1e-9)):
            bad += 1
    assert record(6, "matrix suite on acyclic-backward systems, n<=4", bad == 0,
                  f"{tested} systems, {bad} failures")


def test_7_simple_gives_full_matrix_algebra(record):
    dims = {n: generated_algebra_dimension(orbit_representation(chain(n)), chain(n))
            for n in range(2, 7)}
    ok = all(classify_simplicity(chain(n)).simple and d == n * n for n, d in dims.items())
    assert record(7, "generated algebra of chain of length n is n^2-dimensional", ok, str(dims))


def test_8_periodic_kernel_witness(record):
    sys = cycle3()
    (strand,) = isolated_periodic_strands(sys, 3)
    w = kernel_witness_for_periodic(sys, strand)
    try:
        gauge_expectation_check(orbit_representation(sys), sys)
        refused = False
    except GaugeActionUnavailable:
        refused = True
    ok = w.defect < 1e-12 and w.expectation_norm > 0.5 and refused
    assert record(8, "3-cycle kernel witness", ok,
                  f"defect {w.defect:.1e}, expectation norm {w.expectation_norm:.3f}")


def _same_system(a: SystemWithHull, b: SystemWithHull) -> bool:
    return a.map.images == b.map.images and a.map.domain == b.map.domain and a.hull == b.hull


def test_9_stacey_reduction(record):
    inputs = bad = 0
    for n in range(5):
        for phi in iter_partial_maps(n):
            for y in range(1 << n):
                inputs += 1
                sys = SystemWithHull(phi, y)
                q = stacey_reduce(phi, y)
                again = stacey_reduce(q.system.map, q.system.hull)
                idempotent = again.support == q.system.full and _same_system(again.system, q.system)
                valid = validate_system(q.system).valid
                full_if_valid = not validate_system(sys).valid or q.support == phi.full
                oracle = stacey_hull(phi, y) == q.support == to_mask(stacey_oracle(sys))
                if not (idempotent and valid and full_if_valid and oracle):
                    bad += 1
    assert record(9, "Stacey reduction idempotent, valid, full on valid hulls, matches oracle",
                  bad == 0, f"{inputs} inputs, {bad} failures")


@pytest.mark.parametrize("z", [1, np.exp(0.7j)])
def test_corrupted_shift_is_detected(z):
    sys = chain(3)
    rep = orbit_representation(sys, z=z)
    rep.shift[2, 0] = 1
    assert verify_covariance(rep, sys).max_covariance_defect >= 1 - 1e-12


def test_literal_star_first_projection_differs_on_chain():
    # U*U is not pi(1_Delta) on the chain: U*U fixes the strands starting at 0 and 1.
    sys = chain(3)
    rep = orbit_representation(sys)
    u = rep.shift
    assert not np.allclose(u.conj().T @ u, rep.pi_set(sys.domain))
    assert np.allclose(u @ u.conj().T, rep.pi_set(sys.domain))


def test_periodic_strand_input_is_backward():
    with pytest.raises(ValueError):
        kernel_witness_for_periodic(cycle3(), PeriodicStrand((), (0, 1, 2)))
