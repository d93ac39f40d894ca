"""Storage patterns and their derived combinatorial structure.

A pattern says which of the N servers replicate each message set. From it
we derive per-server index sets, the storage graph (servers adjacent when
they share a message set), the hypergraph whose hyperedges carry the
download bounds, pattern restriction to a server subset, and exact
b-cover detection.

Server ids are 1-based everywhere, as are message-set indices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations

from .errors import (
    DegenerateCapacity,
    DuplicateServer,
    EmptyReplication,
    FormatError,
    MessageLost,
    ServerOutOfRange,
)


@dataclass(frozen=True)
class MessageSet:
    """One replicated group: ``count`` messages stored on ``servers``."""

    count: int
    servers: tuple[int, ...]

    @property
    def rho(self) -> int:
        return len(self.servers)


@dataclass(frozen=True)
class StoragePattern:
    n_servers: int
    message_sets: tuple[MessageSet, ...]

    @property
    def n_message_sets(self) -> int:
        return len(self.message_sets)

    @property
    def rho(self) -> tuple[int, ...]:
        return tuple(ms.rho for ms in self.message_sets)

    @property
    def rho_min(self) -> int:
        return min(self.rho)

    def servers_of(self, m: int) -> tuple[int, ...]:
        """Replication tuple of message set m (1-based)."""
        return self.message_sets[m - 1].servers

    def count_of(self, m: int) -> int:
        return self.message_sets[m - 1].count

    def message_indices(self) -> range:
        return range(1, self.n_message_sets + 1)

    def server_ids(self) -> range:
        return range(1, self.n_servers + 1)


def validate(n_servers: int, message_sets) -> StoragePattern:
    """Normalize and check a raw pattern.

    Replication tuples are sorted ascending; duplicates and out-of-range
    server ids are rejected. ``message_sets`` is a sequence of
    (count, servers) pairs or MessageSet instances.
    """
    if n_servers < 1:
        raise ServerOutOfRange(f"n_servers must be positive: {n_servers}")
    normalized = []
    if not message_sets:
        raise EmptyReplication("pattern has no message sets")
    for i, ms in enumerate(message_sets, start=1):
        if isinstance(ms, MessageSet):
            count, servers = ms.count, ms.servers
        else:
            count, servers = ms
        if count < 1:
            raise EmptyReplication(f"message set {i}: count must be positive")
        servers = tuple(sorted(servers))
        if not servers:
            raise EmptyReplication(f"message set {i} is stored nowhere")
        if len(set(servers)) != len(servers):
            raise DuplicateServer(f"message set {i}: {servers}")
        if servers[0] < 1 or servers[-1] > n_servers:
            raise ServerOutOfRange(
                f"message set {i}: servers {servers} not all in [1..{n_servers}]"
            )
        normalized.append(MessageSet(count, servers))
    return StoragePattern(n_servers, tuple(normalized))


def server_index(pattern: StoragePattern, n: int) -> frozenset[int]:
    """Indices of the message sets stored at server n."""
    if not 1 <= n <= pattern.n_servers:
        raise ServerOutOfRange(f"server {n} not in [1..{pattern.n_servers}]")
    return frozenset(
        m for m in pattern.message_indices() if n in pattern.servers_of(m)
    )


@dataclass(frozen=True)
class StorageGraph:
    """Simple undirected graph: servers adjacent iff they co-store a set."""

    vertices: tuple[int, ...]
    edges: frozenset[tuple[int, int]]  # each edge stored as (u, v), u < v

    def neighbors(self, v: int) -> frozenset[int]:
        out = set()
        for a, b in self.edges:
            if a == v:
                out.add(b)
            elif b == v:
                out.add(a)
        return frozenset(out)

    def neighborhood(self, subset) -> frozenset[int]:
        """Vertices outside ``subset`` adjacent to some vertex in it."""
        subset = set(subset)
        out = set()
        for v in subset:
            out |= self.neighbors(v)
        return frozenset(out - subset)

    def induced(self, keep) -> StorageGraph:
        keep = set(keep)
        return StorageGraph(
            tuple(sorted(keep)),
            frozenset(e for e in self.edges if e[0] in keep and e[1] in keep),
        )

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges


def build_graph(pattern: StoragePattern) -> StorageGraph:
    edges = set()
    for m in pattern.message_indices():
        for u, v in combinations(pattern.servers_of(m), 2):
            edges.add((u, v))
    return StorageGraph(tuple(pattern.server_ids()), frozenset(edges))


def servers_above_replication(pattern: StoragePattern, r: int) -> frozenset[int]:
    """Servers all of whose stored message sets have replication > r.

    Servers storing nothing satisfy the condition vacuously and belong to
    the result for every r.
    """
    out = []
    for n in pattern.server_ids():
        if all(pattern.message_sets[m - 1].rho > r for m in server_index(pattern, n)):
            out.append(n)
    return frozenset(out)


@dataclass(frozen=True)
class DownloadHypergraph:
    """One hyperedge per server subset that must jointly download a full
    block: the (rho_m - X - T)-subsets of each replication tuple,
    deduplicated across message sets."""

    vertices: tuple[int, ...]
    hyperedges: frozenset[frozenset[int]]


def build_download_hypergraph(
    pattern: StoragePattern, x: int, t: int
) -> DownloadHypergraph:
    if pattern.rho_min <= x + t:
        raise DegenerateCapacity(
            f"rho_min={pattern.rho_min} <= X+T={x + t}: capacity is zero"
        )
    edges = set()
    for m in pattern.message_indices():
        servers = pattern.servers_of(m)
        size = len(servers) - x - t
        for sub in combinations(servers, size):
            edges.add(frozenset(sub))
    return DownloadHypergraph(tuple(pattern.server_ids()), frozenset(edges))


def restrict(pattern: StoragePattern, keep) -> tuple[StoragePattern, dict[int, int]]:
    """Drop all servers outside ``keep`` and relabel order-preservingly.

    Returns the restricted pattern plus the old-id -> new-id map. Raises
    MessageLost if some message set loses every replica.
    """
    keep = sorted(set(keep))
    if not keep:
        raise MessageLost("cannot restrict to an empty server set")
    for n in keep:
        if not 1 <= n <= pattern.n_servers:
            raise ServerOutOfRange(f"server {n} not in [1..{pattern.n_servers}]")
    relabel = {old: new for new, old in enumerate(keep, start=1)}
    sets = []
    for m in pattern.message_indices():
        kept = tuple(relabel[n] for n in pattern.servers_of(m) if n in relabel)
        if not kept:
            raise MessageLost(f"message set {m} has no replica in {keep}")
        sets.append(MessageSet(pattern.count_of(m), kept))
    return StoragePattern(len(keep), tuple(sets)), relabel


def find_exact_b_cover(pattern: StoragePattern):
    """Search for a family of minimum-replication sets covering each server
    exactly b times, smallest feasible b first.

    Only message sets with rho_m = rho_min are candidates. Returns
    (b, message-set indices) for the lexicographically smallest witness,
    or None when no exact cover exists for any b <= number of candidates.
    """
    rho_min = pattern.rho_min
    candidates = [
        m for m in pattern.message_indices()
        if pattern.message_sets[m - 1].rho == rho_min
    ]
    n = pattern.n_servers
    member = {m: pattern.servers_of(m) for m in candidates}

    def search(b: int):
        counts = [0] * (n + 1)
        chosen: list[int] = []

        def dfs(idx: int):
            if idx == len(candidates):
                return list(chosen) if all(c == b for c in counts[1:]) else None
            # Include-first order yields the lexicographically smallest witness.
            m = candidates[idx]
            if all(counts[s] < b for s in member[m]):
                chosen.append(m)
                for s in member[m]:
                    counts[s] += 1
                found = dfs(idx + 1)
                if found is not None:
                    return found
                for s in member[m]:
                    counts[s] -= 1
                chosen.pop()
            # Feasibility: every server must still be able to reach b.
            remaining = candidates[idx + 1:]
            for s in range(1, n + 1):
                deficit = b - counts[s]
                capacity = sum(1 for mm in remaining if s in member[mm])
                if deficit > capacity:
                    return None
            return dfs(idx + 1)

        return dfs(0)

    for b in range(1, len(candidates) + 1):
        witness = search(b)
        if witness is not None:
            return b, tuple(witness)
    return None


# -- JSON pattern documents ---------------------------------------------------

def pattern_from_document(doc: dict, path: str = "$"):
    """Parse ``{"n_servers", "x", "t", "q"?, "message_sets": [...]}``.

    Returns (pattern, x, t, q_or_None). FormatError messages carry the
    JSON path of the offending field.
    """
    if not isinstance(doc, dict):
        raise FormatError(path, "expected an object")

    def grab_int(container, key, where, minimum=None, optional=False):
        if key not in container:
            if optional:
                return None
            raise FormatError(f"{where}.{key}", "missing required field")
        v = container[key]
        if not isinstance(v, int) or isinstance(v, bool):
            raise FormatError(f"{where}.{key}", f"expected an integer, got {v!r}")
        if minimum is not None and v < minimum:
            raise FormatError(f"{where}.{key}", f"must be >= {minimum}, got {v}")
        return v

    n_servers = grab_int(doc, "n_servers", path, minimum=1)
    x = grab_int(doc, "x", path, minimum=0)
    t = grab_int(doc, "t", path, minimum=0)
    q = grab_int(doc, "q", path, minimum=2, optional=True)
    raw_sets = doc.get("message_sets")
    if not isinstance(raw_sets, list) or not raw_sets:
        raise FormatError(f"{path}.message_sets", "expected a non-empty array")
    parsed = []
    for i, entry in enumerate(raw_sets):
        where = f"{path}.message_sets[{i}]"
        if not isinstance(entry, dict):
            raise FormatError(where, "expected an object")
        count = grab_int(entry, "count", where, minimum=1)
        servers = entry.get("servers")
        if not isinstance(servers, list) or not servers:
            raise FormatError(f"{where}.servers", "expected a non-empty array")
        for j, s in enumerate(servers):
            if not isinstance(s, int) or isinstance(s, bool):
                raise FormatError(f"{where}.servers[{j}]", f"expected an integer, got {s!r}")
        parsed.append((count, tuple(servers)))
    try:
        pattern = validate(n_servers, parsed)
    except (EmptyReplication, DuplicateServer, ServerOutOfRange) as exc:
        raise FormatError(f"{path}.message_sets", str(exc)) from exc
    return pattern, x, t, q


def load_pattern_file(path):
    """Read a pattern document; fixture files wrapping the pattern under
    a "pattern" key are accepted too."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(str(path), f"invalid JSON: {exc}") from exc
    if isinstance(doc, dict) and "n_servers" not in doc and "pattern" in doc:
        return pattern_from_document(doc["pattern"], "$.pattern")
    return pattern_from_document(doc)


def pattern_to_document(pattern: StoragePattern, x: int, t: int, q=None) -> dict:
    doc = {
        "n_servers": pattern.n_servers,
        "x": x,
        "t": t,
        "message_sets": [
            {"count": ms.count, "servers": list(ms.servers)}
            for ms in pattern.message_sets
        ],
    }
    if q is not None:
        doc["q"] = q
    return doc
