"""Command line interface: ``cpdyn <command> [options] FILE``.

Exit status 0 means the command ran, 1 means the input (file or options) was
rejected, 2 means an internal consistency check failed.
"""
from __future__ import annotations

import argparse
import json
import sys as _sys
from typing import Callable, Optional

import numpy as np

from .dynsys import (
    InvalidSystemError,
    SystemWithHull,
    bits,
    minimal_hull,
    periodic_points,
    validate_system,
)
from .extension import (
    PeriodicStrand,
    Strand,
    build_strands,
    default_depth,
    infinite_strands,
    thread_census,
)
from .freeness import (
    DichotomyReport,
    FreenessReport,
    SimplicityVerdict,
    classify_simplicity,
    dichotomy_report,
    freeness_report,
    isolated_periodic_strands,
)
from .lattice import (
    YPair,
    YPairLattice,
    enumerate_hull_invariant_sets,
    enumerate_ypairs,
    export_hasse,
    interval_isomorphism_check,
    positively_invariant_sets,
    quotient_system,
    stacey_hull,
    stacey_reduce,
)
from .matrep import (
    CovarianceReport,
    extend_representation,
    gauge_expectation_check,
    generated_algebra_dimension,
    kernel_witness_for_periodic,
    orbit_representation,
    product_formula_defect,
    verify_covariance,
)
from .sysfile import ParsedSystem, SystemFileError, parse_system, system_document

EXIT_OK, EXIT_INPUT, EXIT_VERIFY = 0, 1, 2

# Span iteration is quadratic in dim^2; beyond this it is reported as skipped.
MAX_SPAN_DIM = 24


class InputError(Exception):
    pass


class VerificationError(Exception):
    pass


# ---------------------------------------------------------------- documents

def _names(mask: int, labels) -> list[str]:
    return [labels[x] for x in bits(mask)]


def to_document(obj, labels=None):
    """Plain-data form of a report, with point sets as label arrays in index order."""
    if isinstance(obj, ParsedSystem):
        return system_document(obj.system, obj.labels)
    if labels is None:
        raise TypeError("labels are required for reports")
    if isinstance(obj, SystemWithHull):
        return system_document(obj, labels)
    if isinstance(obj, YPair):
        return {"v": _names(obj.v, labels), "vprime": _names(obj.vprime, labels)}
    if isinstance(obj, YPairLattice):
        return {
            "count": len(obj),
            "elements": [dict(index=i, **to_document(p, labels)) for i, p in enumerate(obj)],
            "hasse": [[i, j] for i, j in obj.hasse_edges],
        }
    if isinstance(obj, FreenessReport):
        return {
            "f_sets": {str(k + 1): _names(f, labels) for k, f in enumerate(obj.f_sets)},
            "topologically_free_outside_hull": obj.topologically_free_outside_hull,
            "periodic_points_exist": obj.periodic_points_exist,
            "all_ideals_gauge_invariant": obj.all_ideals_gauge_invariant,
        }
    if isinstance(obj, SimplicityVerdict):
        w = obj.witness
        if isinstance(w, YPair):
            w = to_document(w, labels)
        elif isinstance(w, tuple):
            w = [labels[x] for x in w]
        elif isinstance(w, int):
            w = _names(w, labels)
        return {
            "simple": obj.simple,
            "matrix_dimension": obj.matrix_dimension,
            "witness_kind": obj.witness_kind,
            "witness": w,
            "note": obj.note,
        }
    if isinstance(obj, DichotomyReport):
        return {
            "quasinilpotent": obj.quasinilpotent,
            "monomorphism": obj.monomorphism,
            "injective_map": obj.injective_map,
            "branch": obj.branch,
            "simple": obj.simple,
            "consistent": obj.consistent,
        }
    if isinstance(obj, CovarianceReport):
        return {
            "passed": obj.passed,
            "tol": obj.tol,
            "max_covariance_defect": obj.max_covariance_defect,
            "ppi_defect": obj.ppi_defect,
            "covariance_set": _names(obj.covariance_set, labels),
            "domain_projection_defects": obj.domain_projection_defects,
            "range_projection_defects": obj.range_projection_defects,
            "masked_generators": _names(obj.masked_generators, labels),
        }
    if isinstance(obj, (Strand, PeriodicStrand)):
        return obj.label(labels)
    raise TypeError(f"no document form for {type(obj).__name__}")


def emit_json(obj, labels=None) -> str:
    doc = obj if isinstance(obj, (dict, list)) else to_document(obj, labels)
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _fmt_set(mask: int, labels) -> str:
    return "{" + ", ".join(_names(mask, labels)) + "}"


def format_matrix(m: np.ndarray) -> str:
    """Aligned grid of real/imaginary parts."""
    cells = [[f"{v.real:+.3f}{v.imag:+.3f}i" for v in row] for row in np.asarray(m, dtype=complex)]
    width = max((len(c) for row in cells for c in row), default=0)
    return "\n".join(" ".join(c.rjust(width) for c in row) for row in cells)


# ---------------------------------------------------------------- commands

class Result:
    def __init__(self, doc: dict, text: list[str], dot: Optional[str] = None, code: int = EXIT_OK):
        self.doc = doc
        self.text = text
        self.dot = dot
        self.code = code


def cmd_validate(ps: ParsedSystem, args) -> Result:
    sys, labels = ps.system, ps.labels
    phi = sys.map
    doc = {
        "valid": True,
        "n": sys.n,
        "system": system_document(sys, labels),
        "minimal_hull": _names(minimal_hull(phi), labels),
        "warnings": list(ps.warnings),
    }
    text = [f"VALID: {sys.n} points, domain {_fmt_set(phi.domain, labels)}, "
            f"hull {_fmt_set(sys.hull, labels)}"]
    text.append(f"minimal hull: {_fmt_set(minimal_hull(phi), labels)}")
    text += [f"warning: {w}" for w in ps.warnings]
    return Result(doc, text)


def cmd_extension(ps: ParsedSystem, args) -> Result:
    sys, labels = ps.system, ps.labels
    depth = args.depth
    strands = build_strands(sys, depth)
    core, canon = infinite_strands(sys)
    census = thread_census(sys, depth)
    doc = {
        "depth": depth,
        "strands": [s.label(labels) for s in strands],
        "periodic_strands": [p.label(labels) for p in canon],
        "infinite_core": _names(core, labels),
        "thread_check": census.ok,
        "threads": {
            "stabilized": census.stabilized,
            "diagonal": census.diagonal,
            "persistent": census.persistent,
        },
    }
    text = [f"finite strands (depth {depth}): {len(strands)}"]
    text += [f"  {s.label(labels)}" for s in strands]
    text.append(f"periodic strands: {len(canon)}")
    text += [f"  {p.label(labels)}" for p in canon]
    text.append(f"infinite core: {_fmt_set(core, labels)}")
    text.append(f"thread check: {'PASS' if census.ok else 'FAIL'}")
    return Result(doc, text, code=EXIT_OK if census.ok else EXIT_VERIFY)


def cmd_lattice(ps: ParsedSystem, args) -> Result:
    lat = enumerate_ypairs(ps.system)
    labels = ps.labels
    text = [f"{len(lat)} Y-pairs"]
    text += [f"  [{i}] {p.label(labels)}" for i, p in enumerate(lat)]
    text.append("covers:")
    text += [f"  {i} -> {j}" for i, j in lat.hasse_edges]
    return Result(to_document(lat, labels), text, dot=export_hasse(lat, labels))


def cmd_invariant_sets(ps: ParsedSystem, args) -> Result:
    sys, labels = ps.system, ps.labels
    inv = positively_invariant_sets(sys.map)
    hull_inv = enumerate_hull_invariant_sets(sys)
    doc = {
        "invariant_sets": [_names(v, labels) for v in inv],
        "hull_invariant_sets": [_names(v, labels) for v in hull_inv],
    }
    text = [f"positively invariant sets: {len(inv)}"]
    text += [f"  {_fmt_set(v, labels)}" for v in inv]
    text.append(f"invariant with V ⊆ Y ∪ φ(V ∩ Δ): {len(hull_inv)}")
    text += [f"  {_fmt_set(v, labels)}" for v in hull_inv]
    return Result(doc, text)


def cmd_freeness(ps: ParsedSystem, args) -> Result:
    sys, labels = ps.system, ps.labels
    rep = freeness_report(sys)
    doc = to_document(rep, labels)
    isolated = {str(k): [p.label(labels) for p in isolated_periodic_strands(sys, k)]
                for k in range(1, sys.n + 1)}
    doc["isolated_periodic_strands"] = isolated
    text = [f"F_{k + 1} = {_fmt_set(f, labels)}" for k, f in enumerate(rep.f_sets)]
    text.append("topologically free outside Y: "
                + ("yes" if rep.topologically_free_outside_hull else "no"))
    text.append("periodic points: " + ("yes" if rep.periodic_points_exist else "no"))
    text.append("all ideals gauge-invariant: " + ("yes" if rep.all_ideals_gauge_invariant else "no"))
    # F_k is nonempty exactly when some isolated periodic strand has period dividing k.
    consistent = all(bool(rep.f_sets[k - 1]) == bool(isolated[str(k)]) for k in range(1, sys.n + 1))
    return Result(doc, text, code=EXIT_OK if consistent else EXIT_VERIFY)


def cmd_simplicity(ps: ParsedSystem, args) -> Result:
    labels = ps.labels
    v = classify_simplicity(ps.system)
    doc = to_document(v, labels)
    if v.simple:
        text = [f"SIMPLE: C*(A,α) ≅ M_{v.matrix_dimension}"]
    else:
        w = doc["witness"]
        if v.witness_kind == "ypair":
            shown = v.witness.label(labels)
        elif isinstance(w, list):
            shown = "{" + ", ".join(w) + "}"
        else:
            shown = "-"
        text = [f"NOT SIMPLE: {v.witness_kind} witness {shown}"]
    text.append(f"note: {v.note}")
    return Result(doc, text)


def cmd_dichotomy(ps: ParsedSystem, args) -> Result:
    r = dichotomy_report(ps.system)
    text = [
        f"branch: {r.branch}",
        f"pointwise quasinilpotent: {'yes' if r.quasinilpotent else 'no'}",
        f"alpha monomorphism (φ onto): {'yes' if r.monomorphism else 'no'}",
        f"φ injective: {'yes' if r.injective_map else 'no'}",
        f"simple: {'yes' if r.simple else 'no'}",
    ]
    return Result(to_document(r, ps.labels), text, code=EXIT_OK if r.consistent else EXIT_VERIFY)


def cmd_reduce(ps: ParsedSystem, args) -> Result:
    sys, labels = ps.system, ps.labels
    w = stacey_hull(sys.map, sys.hull)
    q = stacey_reduce(sys.map, sys.hull)
    sub_labels = [labels[x] for x in q.embedding]
    ok = validate_system(q.system).valid
    doc = {
        "input_valid": validate_system(sys).valid,
        "support": _names(w, labels),
        "system": system_document(q.system, sub_labels),
        "output_valid": ok,
    }
    text = [f"support: {_fmt_set(w, labels)}",
            f"reduced hull: {_fmt_set(q.lift(q.system.hull), labels)}",
            f"reduced system valid: {'yes' if ok else 'no'}"]
    return Result(doc, text, code=EXIT_OK if ok else EXIT_VERIFY)


def cmd_quotient(ps: ParsedSystem, args) -> Result:
    sys, labels = ps.system, ps.labels
    lat = enumerate_ypairs(sys)
    if args.pair is None:
        raise InputError("quotient needs --pair INDEX")
    if not 0 <= args.pair < len(lat):
        raise InputError(f"--pair {args.pair} out of range 0..{len(lat) - 1}")
    p = lat.elements[args.pair]
    q = quotient_system(sys, p)
    ok = interval_isomorphism_check(sys, p, lat)
    sub_labels = [labels[x] for x in q.embedding]
    qlat = enumerate_ypairs(q.system)
    doc = {
        "pair": dict(index=args.pair, **to_document(p, labels)),
        "system": system_document(q.system, sub_labels),
        "quotient_lattice_size": len(qlat),
        "interval_isomorphism": ok,
    }
    text = [f"pair [{args.pair}] {p.label(labels)}",
            f"quotient points: {_fmt_set(p.v, labels)}, hull {_fmt_set(p.vprime, labels)}",
            f"quotient lattice: {len(qlat)} Y-pairs",
            f"interval isomorphism: {'PASS' if ok else 'FAIL'}"]
    return Result(doc, text, code=EXIT_OK if ok else EXIT_VERIFY)


def cmd_represent(ps: ParsedSystem, args) -> Result:
    sys, labels = ps.system, ps.labels
    rep = orbit_representation(sys, args.depth, args.z)
    cov = verify_covariance(rep, sys, args.tol)
    pf = product_formula_defect(rep, sys)
    ext = extend_representation(rep, sys, args.tol)
    periodic = periodic_points(sys) != 0
    gauge = None if periodic else gauge_expectation_check(rep, sys, args.tol)
    gen = generated_algebra_dimension(rep, sys, args.tol) if rep.dim <= MAX_SPAN_DIM else None
    passed = (cov.passed and pf < args.tol and ext.well_defined
              and ext.covariance.passed and gauge is not False)
    doc = {
        "dim": rep.dim,
        "depth": rep.depth,
        "z": [rep.z.real, rep.z.imag],
        "basis": [s.label(labels) for s in rep.basis],
        "covariance": to_document(cov, labels),
        "product_formula_defect": pf,
        "extension_well_defined": ext.well_defined,
        "extension_covariant": ext.covariance.passed,
        "gauge_expectation": gauge,
        "generated_algebra_dimension": gen,
        "passed": passed,
    }
    text = [f"dim {rep.dim} (depth {rep.depth}, z = {rep.z.real:+.6f}{rep.z.imag:+.6f}i)",
            "basis: " + "  ".join(f"({s.label(labels)})" for s in rep.basis),
            "U =", format_matrix(rep.shift),
            f"covariance defect: {cov.max_covariance_defect:.3e}",
            f"power partial isometry defect: {cov.ppi_defect:.3e}",
            f"U^k U*^k vs 1_Δk: {max(cov.domain_projection_defects, default=0.0):.3e}",
            f"U*^k U^k vs strands longer than k: {max(cov.range_projection_defects, default=0.0):.3e}",
            f"covariance set: {_fmt_set(cov.covariance_set, labels)}",
            f"masked generators: {_fmt_set(cov.masked_generators, labels)}",
            f"product formula defect: {pf:.3e}",
            f"extension: {'well-defined' if ext.well_defined else 'ILL-DEFINED'}, "
            f"{'covariant' if ext.covariance.passed else 'NOT covariant'}",
            "gauge expectation: " + ("n/a (periodic points)" if gauge is None
                                     else "PASS" if gauge else "FAIL"),
            "generated algebra dimension: " + (str(gen) if gen is not None
                                               else f"skipped (dim > {MAX_SPAN_DIM})"),
            "these are necessary conditions at finite size, not a faithfulness proof",
            f"verification: {'PASS' if passed else 'FAIL'}"]
    return Result(doc, text, code=EXIT_OK if passed else EXIT_VERIFY)


def cmd_witness(ps: ParsedSystem, args) -> Result:
    sys, labels = ps.system, ps.labels
    if args.period is None or args.period < 1:
        raise InputError("witness needs --period K with K >= 1")
    cands = [p for p in isolated_periodic_strands(sys, args.period)
             if len(p.cycle) == args.period]
    if not cands:
        raise InputError(f"no isolated periodic strand of period {args.period}")
    w = kernel_witness_for_periodic(sys, cands[0], args.depth)
    ok = w.defect < args.tol and w.expectation_norm > args.tol
    doc = {
        "cycle": cands[0].label(labels),
        "period": w.period,
        "defect": w.defect,
        "expectation_norm": w.expectation_norm,
        "witness": ok,
    }
    text = [f"cycle: {cands[0].label(labels)}",
            f"||π(b) - π(b)U^{w.period}|| = {w.defect:.3e}",
            f"||E(b - b u^{w.period})|| = {w.expectation_norm:.3e}",
            "kernel witness: " + ("yes (non-gauge-invariant kernel)" if ok else "no")]
    return Result(doc, text, code=EXIT_OK if ok else EXIT_VERIFY)


COMMANDS: dict[str, Callable] = {
    "validate": cmd_validate,
    "extension": cmd_extension,
    "lattice": cmd_lattice,
    "invariant-sets": cmd_invariant_sets,
    "freeness": cmd_freeness,
    "simplicity": cmd_simplicity,
    "dichotomy": cmd_dichotomy,
    "reduce": cmd_reduce,
    "quotient": cmd_quotient,
    "represent": cmd_represent,
    "witness": cmd_witness,
}


# ---------------------------------------------------------------- driver

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(_sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _parse_z(text: str) -> complex:
    try:
        re_, im = (float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected RE,IM, got {text!r}") from None
    z = complex(re_, im)
    if abs(abs(z) - 1) > 1e-9:
        raise argparse.ArgumentTypeError(f"z must be unimodular, |z| = {abs(z)}")
    return z


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cpdyn", description="Finite partial dynamical systems and their "
                "relative crossed products.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("file", help="system file (TOML, or JSON starting with '{'); '-' for stdin")
    p.add_argument("--depth", type=_positive_int, default=None,
                   help="strand truncation depth (default 2n+2)")
    p.add_argument("--tol", type=_positive_float, default=1e-9)
    p.add_argument("--z", type=_parse_z, default=complex(1), help="unimodular weight RE,IM")
    p.add_argument("--output", choices=("text", "json", "dot"), default="text")
    p.add_argument("--pair", type=int, default=None, help="Y-pair index for quotient")
    p.add_argument("--period", type=int, default=None, help="cycle length for witness")
    return p


def run(argv: list[str], stdout=None, stderr=None) -> int:
    stdout = stdout or _sys.stdout
    stderr = stderr or _sys.stderr
    args = build_parser().parse_args(argv)
    try:
        text = _sys.stdin.read() if args.file == "-" else open(args.file, encoding="utf-8").read()
    except OSError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT
    try:
        ps = parse_system(text, validate=args.command != "reduce")
    except SystemFileError as exc:
        print(f"{args.file}: {exc}", file=stderr)
        if args.command == "validate" and args.output == "json":
            print(emit_json({"valid": False, "error": exc.message,
                             "line": exc.line, "column": exc.col}), end="", file=stdout)
        return EXIT_INPUT
    if args.depth is None:
        args.depth = default_depth(ps.system)
    if args.output == "dot" and args.command != "lattice":
        print("error: --output dot is only available for 'lattice'", file=stderr)
        return EXIT_INPUT
    try:
        res = COMMANDS[args.command](ps, args)
    except (InputError, InvalidSystemError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT
    except (VerificationError, AssertionError) as exc:
        print(f"internal verification failure: {exc}", file=stderr)
        return EXIT_VERIFY
    if args.output == "json":
        stdout.write(emit_json(res.doc))
    elif args.output == "dot":
        stdout.write(res.dot)
    else:
        stdout.write("\n".join(res.text) + "\n")
    if res.code == EXIT_VERIFY:
        print("internal verification failure", file=stderr)
    return res.code


def main(argv: Optional[list[str]] = None) -> int:
    return run(_sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    raise SystemExit(main())
