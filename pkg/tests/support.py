"""Shared generators for randomized tests."""

from __future__ import annotations

import random
from itertools import combinations

from graphpir.storage import StorageGraph, StoragePattern, validate


def random_pattern(
    rng: random.Random,
    max_n: int = 8,
    max_m: int = 6,
    xt_choices=((0, 1), (0, 2), (1, 1)),
    max_rho: int | None = None,
    max_count: int = 3,
) -> tuple[StoragePattern, int, int]:
    """A pattern with rho_min > X + T, within the given bounds."""
    x, t = rng.choice(list(xt_choices))
    lo = x + t + 1
    n = rng.randint(lo, max_n)
    m_count = rng.randint(1, max_m)
    hi = min(n, max_rho) if max_rho is not None else n
    sets = []
    for _ in range(m_count):
        rho = rng.randint(lo, max(lo, hi))
        servers = tuple(sorted(rng.sample(range(1, n + 1), min(rho, n))))
        sets.append((rng.randint(1, max_count), servers))
    return validate(n, sets), x, t


def random_constant_rho_pattern(
    rng: random.Random, rho: int | None = None, max_n: int = 8, max_m: int = 6
) -> StoragePattern:
    n = rng.randint(3, max_n)
    rho = rho or rng.randint(2, n)
    rho = min(rho, n)
    sets = []
    for _ in range(rng.randint(1, max_m)):
        servers = tuple(sorted(rng.sample(range(1, n + 1), rho)))
        sets.append((1, servers))
    return validate(n, sets)


def random_graph(rng: random.Random, max_vertices: int = 8, max_edges: int = 12) -> StorageGraph:
    nv = rng.randint(2, max_vertices)
    vertices = tuple(range(1, nv + 1))
    pool = list(combinations(vertices, 2))
    ne = rng.randint(1, min(max_edges, len(pool)))
    return StorageGraph(vertices, frozenset(rng.sample(pool, ne)))


def circulant_pattern(n: int, rho: int, step: int = 1) -> StoragePattern:
    """Rotationally symmetric pattern: set i covers rho consecutive servers
    (mod n). Covers every server exactly rho/gcd... exactly rho times when
    one set starts at every server."""
    sets = []
    for start in range(n):
        servers = tuple(sorted(((start + j * step) % n) + 1 for j in range(rho)))
        sets.append((1, servers))
    return validate(n, sets)
