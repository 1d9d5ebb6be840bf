"""Small named systems shared by the tests."""
from cpdyn.dynsys import PartialMap, SystemWithHull, full_mask, mask_of


def system(n, mapping, hull):
    return SystemWithHull(PartialMap.from_mapping(n, mapping), mask_of(hull))


LOOP_MAP = {0: 0, 1: 0, 2: 1}
CHAIN_MAP = {2: 1, 1: 0}
CYCLE3_MAP = {0: 1, 1: 2, 2: 0}


def loop(hull=(2,)):
    return system(3, LOOP_MAP, hull)


def chain(n=3):
    """n-1 -> ... -> 1 -> 0 with Y = {n-1}."""
    return system(n, {x: x - 1 for x in range(1, n)}, [n - 1])


def cycle3(hull=()):
    return system(3, CYCLE3_MAP, hull)


def empty_map(n=3):
    return SystemWithHull(PartialMap.empty(n), full_mask(n))
