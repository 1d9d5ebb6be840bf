"""System files: labelled points, a partial map and a hull.

The format is TOML with four list-valued keys::

    points = ["a", "b", "c"]      # declaration order fixes the indices
    domain = ["b", "c"]           # optional; defaults to the keys of ``map``
    map    = [["c", "b"], ["b", "a"]]
    hull   = ["c"]

A document whose first non-blank character is ``{`` is read as JSON with the
same keys, which is also what :func:`system_document` produces.
"""
from __future__ import annotations

import json
import re
import sys as _sys
from dataclasses import dataclass, field
from typing import Optional

if _sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .dynsys import PartialMap, SystemWithHull, bits, minimal_hull, validate_system


class SystemFileError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, col: Optional[int] = None):
        self.message = message
        self.line = line
        self.col = col
        where = f"line {line}, column {col}: " if line is not None else ""
        super().__init__(where + message)


@dataclass(frozen=True)
class ParsedSystem:
    system: SystemWithHull
    labels: tuple[str, ...]
    warnings: tuple[str, ...] = field(default=())

    def names(self, mask: int) -> list[str]:
        return [self.labels[x] for x in bits(mask)]


def _locate(text: str, key: str, label: Optional[str] = None, occurrence: int = 1):
    """(line, column) of a key, or of the n-th quoted ``label`` after it; 1-based."""
    m = re.search(rf'^[ \t]*"?{re.escape(key)}"?[ \t]*[=:]', text, re.M)
    if m is None:
        return None, None
    pos = m.start()
    if label is not None:
        pat = re.compile(r'(["\'])' + re.escape(label) + r"\1")
        start = m.end()
        for _ in range(occurrence):
            hit = pat.search(text, start)
            if hit is None:
                break
            pos, start = hit.start(), hit.end()
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def _load(text: str) -> dict:
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SystemFileError(exc.msg, exc.lineno, exc.colno) from None
        if not isinstance(doc, dict):
            raise SystemFileError("top level must be an object", 1, 1)
        return doc
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"\(at line (\d+), column (\d+)\)", str(exc))
        msg = re.sub(r"\s*\(at (line|end of document).*\)$", "", str(exc))
        if m:
            raise SystemFileError(msg, int(m.group(1)), int(m.group(2))) from None
        if "end of document" in str(exc):
            lines = text.split("\n")
            raise SystemFileError(msg + " at end of document", len(lines),
                                  len(lines[-1]) + 1) from None
        raise SystemFileError(msg) from None


def _label_list(doc: dict, key: str, text: str) -> list[str]:
    val = doc[key]
    if not isinstance(val, list) or not all(isinstance(v, str) for v in val):
        raise SystemFileError(f"'{key}' must be a list of strings", *_locate(text, key))
    return val


def parse_system(text: str, validate: bool = True) -> ParsedSystem:
    """Parse a system file. With ``validate`` the hull condition is enforced."""
    doc = _load(text)
    for key in ("points", "map", "hull"):
        if key not in doc:
            raise SystemFileError(f"missing key '{key}'")
    unknown = sorted(set(doc) - {"points", "domain", "map", "hull"})
    if unknown:
        raise SystemFileError(f"unknown key '{unknown[0]}'", *_locate(text, unknown[0]))

    labels = _label_list(doc, "points", text)
    index: dict[str, int] = {}
    for lab in labels:
        if lab in index:
            raise SystemFileError(f"duplicate label '{lab}'", *_locate(text, "points", lab, 2))
        index[lab] = len(index)

    def resolve(key: str, lab: str, occurrence: int = 1) -> int:
        if lab not in index:
            raise SystemFileError(f"undeclared label '{lab}' in '{key}'",
                                  *_locate(text, key, lab, occurrence))
        return index[lab]

    pairs = doc["map"]
    if not isinstance(pairs, list):
        raise SystemFileError("'map' must be a list of [from, to] pairs", *_locate(text, "map"))
    mapping: dict[int, int] = {}
    seen_from: dict[str, int] = {}
    for pair in pairs:
        if (not isinstance(pair, list) or len(pair) != 2
                or not all(isinstance(v, str) for v in pair)):
            raise SystemFileError(f"map entry {pair!r} is not a [from, to] label pair",
                                  *_locate(text, "map"))
        a, b = pair
        seen_from[a] = seen_from.get(a, 0) + 1
        x = resolve("map", a, seen_from[a])
        if x in mapping:
            raise SystemFileError(f"point '{a}' is mapped twice", *_locate(text, "map", a, 2))
        mapping[x] = resolve("map", b)

    if "domain" in doc:
        dom_labels = _label_list(doc, "domain", text)
        domain = 0
        for lab in dom_labels:
            x = resolve("domain", lab)
            if domain >> x & 1:
                raise SystemFileError(f"duplicate label '{lab}' in 'domain'",
                                      *_locate(text, "domain", lab, 2))
            domain |= 1 << x
        for x in mapping:
            if not domain >> x & 1:
                raise SystemFileError(f"map on non-domain point '{labels[x]}'",
                                      *_locate(text, "map", labels[x]))
        for x in bits(domain):
            if x not in mapping:
                raise SystemFileError(f"domain point '{labels[x]}' has no image",
                                      *_locate(text, "domain", labels[x]))
    hull = 0
    for lab in _label_list(doc, "hull", text):
        hull |= 1 << resolve("hull", lab)

    phi = PartialMap.from_mapping(len(labels), mapping)
    sys = SystemWithHull(phi, hull)
    warnings = []
    if validate:
        report = validate_system(sys)
        if not report.valid:
            missing = phi.full & ~(hull | phi.range)
            names = ", ".join(f"'{labels[x]}'" for x in bits(missing))
            raise SystemFileError(
                f"hull ∪ φ(Δ) ≠ X: points {names} are neither in the hull nor hit by the map",
                *_locate(text, "hull"))
    extra = hull & ~minimal_hull(phi)
    if extra and not hull & ~phi.full:
        names = ", ".join(labels[x] for x in bits(extra))
        warnings.append(f"hull is larger than the minimal hull X \\ φ(Δ) (extra: {names})")
    return ParsedSystem(sys, tuple(labels), tuple(warnings))


def system_document(sys: SystemWithHull, labels) -> dict:
    """Plain-data form of a system; parses back to the same system."""
    phi = sys.map
    return {
        "points": list(labels),
        "domain": [labels[x] for x in bits(phi.domain)],
        "map": [[labels[x], labels[phi(x)]] for x in bits(phi.domain)],
        "hull": [labels[x] for x in bits(sys.hull)],
    }


def default_labels(n: int) -> tuple[str, ...]:
    return tuple(str(i) for i in range(n))

