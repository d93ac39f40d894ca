"""Exact capacity bounds: achievable rates, the download LP, matching
duals, and the tight low-replication formula.

Everything here is exact rational arithmetic (fractions.Fraction); no
floats anywhere. The upper bound minimizes total normalized download
subject to "any rho_m - X - T replicas of a set must jointly download a
full block"; by LP duality that minimum equals the fractional matching
number of the same hypergraph, and the module checks the two
independently computed optima against each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import combinations

from .errors import GraphTooLarge, PreconditionError, SearchTooLarge
from .lp import simplex_max
from .storage import (
    DownloadHypergraph,
    StoragePattern,
    StorageGraph,
    build_download_hypergraph,
    build_graph,
    find_exact_b_cover,
    servers_above_replication,
)


def direct_lower_bound(pattern: StoragePattern, x: int, t: int) -> Fraction:
    """Rate of the base scheme on the full server set."""
    return Fraction(max(0, pattern.rho_min - x - t), pattern.n_servers)


def best_elimination_lower_bound(
    pattern: StoragePattern, x: int, t: int, cap: int = 20
) -> tuple[Fraction, tuple[int, ...]]:
    """Best base-scheme rate over all server subsets keeping every set.

    Exhaustive over the 2^N - 1 nonempty subsets; ties prefer larger
    subsets, then lexicographically smaller ones.
    """
    n = pattern.n_servers
    if n > cap:
        raise SearchTooLarge(f"N={n} exceeds elimination search cap {cap}")
    replicas = [set(ms.servers) for ms in pattern.message_sets]
    best_rate = None
    best_subset = None
    for mask in range(1, 1 << n):
        subset = [i + 1 for i in range(n) if mask >> i & 1]
        inside = set(subset)
        min_kept = min(len(r & inside) for r in replicas)
        if min_kept == 0:
            continue
        rate = Fraction(max(0, min_kept - x - t), len(subset))
        key = (rate, len(subset), [-s for s in subset])
        if best_rate is None or key > (best_rate, len(best_subset), [-s for s in best_subset]):
            best_rate = rate
            best_subset = tuple(subset)
    return best_rate, best_subset


def min_total_download(
    pattern: StoragePattern, x: int, t: int
) -> tuple[Fraction, tuple[Fraction, ...]]:
    """Exact minimum of sum D_n over the download constraint polytope.

    Solved as a bounded-variable LP in P_n = 1 - D_n: clipping any
    feasible D to the unit box preserves feasibility (a clipped entry
    alone satisfies every constraint through it) and never increases the
    objective, so the optima agree and the all-slack simplex start works
    without artificial variables. Dominated (superset) hyperedges are
    pruned; the returned vector is re-verified against the full system.
    """
    hypergraph = build_download_hypergraph(pattern, x, t)
    edges = sorted(tuple(sorted(e)) for e in hypergraph.hyperedges)
    kept = _minimal_edges(edges)
    n = pattern.n_servers

    rows = []
    rhs = []
    for e in kept:
        row = [0] * n
        for v in e:
            row[v - 1] = 1
        rows.append(row)
        rhs.append(len(e) - 1)
    for v in range(n):
        row = [0] * n
        row[v] = 1
        rows.append(row)
        rhs.append(1)
    opt, p = simplex_max([1] * n, rows, rhs)
    downloads = tuple(Fraction(1) - v for v in p)
    d_star = Fraction(n) - opt

    for e in edges:
        if sum(downloads[v - 1] for v in e) < 1:
            raise AssertionError("optimizer returned an infeasible download vector")
    assert sum(downloads) == d_star
    return d_star, downloads


def _minimal_edges(edges):
    """Drop any edge that strictly contains another edge."""
    by_size = sorted(edges, key=len)
    kept: list[tuple[int, ...]] = []
    for e in by_size:
        es = set(e)
        if not any(set(k) < es or set(k) == es for k in kept):
            kept.append(e)
    return kept


def fractional_matching_number(hypergraph: DownloadHypergraph) -> Fraction:
    """Maximum total hyperedge weight with per-server load at most 1.

    This is the LP dual of min_total_download, computed by an independent
    simplex run over the full (unpruned) edge set.
    """
    edges = sorted(tuple(sorted(e)) for e in hypergraph.hyperedges)
    n = len(hypergraph.vertices)
    rows = []
    rhs = []
    for v in range(1, n + 1):
        rows.append([1 if v in e else 0 for e in edges])
        rhs.append(1)
    opt, _ = simplex_max([1] * len(edges), rows, rhs)
    return opt


def two_matching_brute_force(graph: StorageGraph) -> int:
    """Maximum size of an integer edge weighting in {0,1,2} with
    per-vertex load <= 2, by depth-first search over edges."""
    edges = sorted(graph.edges)
    if len(edges) > 12:
        raise GraphTooLarge(f"{len(edges)} edges exceeds brute-force guard 12")
    load = {v: 0 for v in graph.vertices}
    best = 0

    def dfs(idx: int, size: int):
        nonlocal best
        if size + 2 * (len(edges) - idx) <= best:
            return
        if idx == len(edges):
            best = max(best, size)
            return
        u, v = edges[idx]
        room = min(2 - load[u], 2 - load[v])
        for w in range(min(2, room), -1, -1):
            load[u] += w
            load[v] += w
            dfs(idx + 1, size + w)
            load[u] -= w
            load[v] -= w

    dfs(0, 0)
    return best


def two_matching_number(graph: StorageGraph) -> tuple[int, tuple[int, ...]]:
    """Maximum 2-matching size via the stable-set identity:

        min over stable U of |V \\ U| + |N(U)|

    returned with the lexicographically smallest minimizing U. Enumerates
    stable sets with branch-and-bound (each added vertex lowers the value
    by at most one). Self-checks against the direct edge-weight search
    whenever the graph is small enough for it.
    """
    vertices = sorted(graph.vertices)
    if len(vertices) > 24:
        raise GraphTooLarge(f"|V|={len(vertices)} exceeds enumeration guard 24")
    nbrs = {v: set(graph.neighbors(v)) & set(vertices) for v in vertices}
    total = len(vertices)

    best_value = total  # U = empty set
    best_u: tuple[int, ...] = ()

    def dfs(idx, u, boundary, blocked):
        nonlocal best_value, best_u
        value = total - len(u) + len(boundary)
        candidate = tuple(sorted(u))
        if value < best_value or (value == best_value and candidate < best_u):
            best_value = value
            best_u = candidate
        remaining = [v for v in vertices[idx:] if v not in blocked]
        if not remaining or value - len(remaining) > best_value:
            return
        for pos, v in enumerate(remaining):
            fresh = nbrs[v] - boundary
            dfs(
                vertices.index(v) + 1,
                u | {v},
                boundary | fresh,
                blocked | nbrs[v] | {v},
            )
            # Excluding v: handled by moving on to the next candidate.
        return

    dfs(0, frozenset(), frozenset(), frozenset())

    if len(graph.edges) <= 12:
        direct = two_matching_brute_force(graph)
        if direct != best_value:
            raise AssertionError(
                f"stable-set formula {best_value} != direct search {direct}"
            )
    return best_value, best_u


def low_replication_capacity(pattern: StoragePattern, t: int) -> Fraction:
    """Exact capacity when X = 0 and every set is replicated at most
    T + 2 times: 2 / (max 2-matching on the heavy-server subgraph plus
    twice the number of light servers)."""
    if t < 1:
        raise PreconditionError("privacy level T >= 1 required")
    for m in pattern.message_indices():
        if pattern.message_sets[m - 1].rho > t + 2:
            raise PreconditionError(
                f"set {m} is replicated more than T+2={t + 2} times"
            )
    if pattern.rho_min <= t:
        return Fraction(0)
    heavy = servers_above_replication(pattern, t + 1)
    light = frozenset(pattern.server_ids()) - heavy
    graph = build_graph(pattern).induced(heavy)
    nu2, _ = two_matching_number(graph)
    return Fraction(2, nu2 + 2 * len(light))


def check_download_identity(pattern: StoragePattern, t: int, stable) -> bool:
    """Both sides of the composite-scheme download count, on this pattern:

        |[N] \\ U| + |N(U) u light|  ==  |heavy \\ U| + |N(U) n heavy| + 2|light|
    """
    heavy = servers_above_replication(pattern, t + 1)
    light = frozenset(pattern.server_ids()) - heavy
    u = frozenset(stable)
    if not u <= heavy:
        raise PreconditionError("stable set must lie inside the heavy servers")
    graph = build_graph(pattern)
    for a, b in combinations(sorted(u), 2):
        if graph.has_edge(a, b):
            raise PreconditionError(f"{a} and {b} are adjacent: not a stable set")
    boundary = graph.neighborhood(u)
    lhs = (pattern.n_servers - len(u)) + len(boundary | light)
    rhs = len(heavy - u) + len(boundary & heavy) + 2 * len(light)
    return lhs == rhs


@dataclass
class CapacityReport:
    lower: Fraction
    upper: Fraction
    matched: bool
    lower_witness: tuple[int, ...]
    upper_witness: tuple[Fraction, ...]
    certificates: dict = dc_field(default_factory=dict)
    notes: list[str] = dc_field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "lower": str(self.lower),
            "upper": str(self.upper),
            "matched": self.matched,
            "lower_witness": list(self.lower_witness),
            "upper_witness": [str(v) for v in self.upper_witness],
            "certificates": self.certificates,
            "notes": self.notes,
        }


def capacity_report(
    pattern: StoragePattern, x: int, t: int, elimination_cap: int = 20
) -> CapacityReport:
    """Best constructive lower bound, exact LP upper bound, and the
    certificates that explain them."""
    notes = []
    certificates: dict = {}

    degenerate = pattern.rho_min <= x + t
    if degenerate:
        notes.append("rho_min <= X+T: capacity is exactly zero")
        return CapacityReport(
            lower=Fraction(0),
            upper=Fraction(0),
            matched=True,
            lower_witness=tuple(pattern.server_ids()),
            upper_witness=(),
            certificates=certificates,
            notes=notes,
        )

    d_star, downloads = min_total_download(pattern, x, t)
    upper = Fraction(1) / d_star

    hypergraph = build_download_hypergraph(pattern, x, t)
    matching = fractional_matching_number(hypergraph)
    if matching != d_star:
        raise AssertionError(
            f"duality gap: download LP {d_star} vs matching {matching}"
        )
    for m in pattern.message_indices():
        servers = pattern.servers_of(m)
        rho = len(servers)
        bound = Fraction(rho, rho - x - t)
        if sum(downloads[n - 1] for n in servers) < bound:
            raise AssertionError(f"averaging bound violated for set {m}")

    if pattern.n_servers <= elimination_cap:
        lower, witness = best_elimination_lower_bound(pattern, x, t, elimination_cap)
        certificates["elimination"] = {
            "rate": str(lower),
            "servers": list(witness),
        }
    else:
        lower = direct_lower_bound(pattern, x, t)
        witness = tuple(pattern.server_ids())
        notes.append(
            f"elimination search skipped: N={pattern.n_servers} exceeds cap {elimination_cap}"
        )

    composite_ok = (
        x == 0
        and t >= 1
        and all(ms.rho <= t + 2 for ms in pattern.message_sets)
        and pattern.rho_min > t
    )
    if composite_ok:
        heavy = servers_above_replication(pattern, t + 1)
        light = frozenset(pattern.server_ids()) - heavy
        nu2, stable = two_matching_number(build_graph(pattern).induced(heavy))
        composite_rate = Fraction(2, nu2 + 2 * len(light))
        certificates["composite"] = {
            "rate": str(composite_rate),
            "two_matching": nu2,
            "stable_set": list(stable),
            "light_servers": sorted(light),
        }
        if composite_rate >= lower:
            lower = composite_rate
            witness = tuple(sorted(set(pattern.server_ids()) - set(stable)))

    cover = find_exact_b_cover(pattern)
    if cover is not None:
        b, members = cover
        expect = Fraction(pattern.n_servers, pattern.rho_min - x - t)
        if d_star != expect:
            raise AssertionError(
                f"exact {b}-cover found but download LP gave {d_star}, not {expect}"
            )
        certificates["b_cover"] = {"b": b, "message_sets": list(members)}

    if lower > upper:
        raise AssertionError(f"lower bound {lower} exceeds upper bound {upper}")
    return CapacityReport(
        lower=lower,
        upper=upper,
        matched=lower == upper,
        lower_witness=witness,
        upper_witness=downloads,
        certificates=certificates,
        notes=notes,
    )
