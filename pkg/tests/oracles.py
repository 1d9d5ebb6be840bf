"""Brute-force reference implementations, written against plain Python sets.

None of these reuse the package's bitmask algorithms; they only read the
map through ``phi(x)`` and the hull through ``sys.hull``.
"""
from __future__ import annotations

from itertools import chain, combinations


def points(sys) -> list[int]:
    return list(range(sys.n))


def as_set(mask: int) -> frozenset:
    return frozenset(x for x in range(mask.bit_length()) if mask >> x & 1)


def to_mask(s) -> int:
    return sum(1 << x for x in s)


def subsets(xs):
    xs = list(xs)
    return [frozenset(c) for c in chain.from_iterable(combinations(xs, r) for r in range(len(xs) + 1))]


def image(sys, v) -> frozenset:
    phi = sys.map
    return frozenset(phi(x) for x in v if phi(x) is not None)


def blind_ypairs(sys) -> set[tuple[frozenset, frozenset]]:
    """All (V, V') out of the 4^n candidates satisfying the three conditions."""
    y = as_set(sys.hull)
    out = set()
    for v in subsets(points(sys)):
        img = image(sys, v)
        for vp in subsets(points(sys)):
            if img <= v and vp <= y and vp | img == v:
                out.add((v, vp))
    return out


def brute_glb(pairs, p, q):
    lower = [r for r in pairs if r[0] <= p[0] and r[1] <= p[1] and r[0] <= q[0] and r[1] <= q[1]]
    tops = [r for r in lower if all(s[0] <= r[0] and s[1] <= r[1] for s in lower)]
    assert len(tops) == 1
    return tops[0]


def stacey_oracle(sys) -> frozenset:
    """Union of every positively invariant W with W ⊆ Y ∪ φ(W ∩ Δ)."""
    y = as_set(sys.hull)
    w = frozenset()
    for v in subsets(points(sys)):
        img = image(sys, v)
        if img <= v and v <= y | img:
            w |= v
    return w


def delta_k(sys, k: int) -> frozenset:
    phi = sys.map
    out = set()
    for x in points(sys):
        y = x
        for _ in range(k):
            y = None if y is None else phi(y)
        if y is not None:
            out.add(x)
    return frozenset(out)


def strands_backward(sys, depth: int) -> set[tuple[int, ...]]:
    """All (x_0..x_N), N <= depth, built by extending through preimages."""
    phi = sys.map
    y = as_set(sys.hull)
    out = set()
    frontier = [(x,) for x in points(sys)]
    for _ in range(depth + 1):
        nxt = []
        for s in frontier:
            if s[-1] in y:
                out.add(s)
            nxt.extend(s + (p,) for p in points(sys) if phi(p) == s[-1])
        frontier = nxt
    return out


def periodic_set(sys) -> frozenset:
    phi = sys.map
    out = set()
    for x in points(sys):
        y = x
        for _ in range(sys.n):
            y = phi(y) if y is not None else None
            if y == x:
                out.add(x)
                break
    return frozenset(out)


def f_set_oracle(sys, k: int) -> frozenset:
    phi = sys.map
    y = as_set(sys.hull)
    out = set()
    for x in points(sys):
        orbit = [x]
        for _ in range(k):
            nxt = phi(orbit[-1]) if orbit[-1] is not None else None
            orbit.append(nxt)
        if orbit[-1] != x:
            continue
        ok = True
        for j in range(1, k + 1):
            pre = {p for p in points(sys) if phi(p) == orbit[j]}
            if pre != {orbit[j - 1]} or orbit[j - 1] in y:
                ok = False
        if ok:
            out.add(x)
    return frozenset(out)
