"""The retrieval protocol: storage encoding, queries, answers, decoding.

One instance fixes a field, evaluation points and dual-GRS coefficients
for a storage pattern whose replication tuples have been truncated to a
uniform rho_min. Per block, each message contributes L = rho_min - X - T
symbols; the user downloads one field symbol per server and recovers all
L symbols of the demanded message.

Interference bookkeeping: storage noise enters shares with factors
(l + beta_n)**x, query noise enters with (l + beta_n)**t, and the query
carries an overall v_{m,n} / (l + beta_n). Every cross term then lands on
a power beta_n**j with j <= rho_min - 2, which the dual-GRS coefficients
annihilate when answers are combined along the Vandermonde rows.

Demands are either a (message set, index) retrieval or, when X = 0 and
rho_min = T + 1, an arbitrary hidden linear combination of all messages.
The composite retrieval for mixed (T+1)/(T+2) replication runs the base
scheme over the surviving servers plus one virtual server whose answer is
itself fetched through the linear-combination mode.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field as dc_field

from .errors import (
    ComputeModeUnavailable,
    DegenerateCapacity,
    PreconditionError,
    Singular,
    SingularDecode,
    ZeroNormalizer,
)
from .field import FieldElement, FieldMatrix, PrimeField, mat_invert, next_prime
from .grs import (
    EvaluationPoints,
    GrsCoefficients,
    admissible_points,
    annihilator_check,
    choose_field,
    choose_points,
    dual_grs_coeffs,
)
from .storage import (
    MessageSet,
    StoragePattern,
    build_graph,
    restrict,
    server_index,
    servers_above_replication,
    validate,
)


# -- deterministic randomness -------------------------------------------------

class SeededTape:
    """Uniform field symbols derived from a 64-bit seed.

    Streams are domain-separated by (label, role, m, j, l, k); each value
    comes from SHA-256 output with rejection sampling, so it is exactly
    uniform on [0, q) and reproducible across platforms and refactors.
    Roles in use: "storage" for share noise, "query" for query noise,
    "message" for message content.
    """

    def __init__(self, q: int, seed: int, label: str = ""):
        self.q = q
        self.seed = seed & 0xFFFFFFFFFFFFFFFF
        self.label = label

    def _draw(self, role: str, m: int, j: int, ell: int, k: int) -> int:
        prefix = struct.pack(">Q", self.seed) + self.label.encode() + b"|" + role.encode()
        body = struct.pack(">iiii", m, j, ell, k)
        limit = (1 << 64) - ((1 << 64) % self.q)
        counter = 0
        while True:
            digest = hashlib.sha256(prefix + body + struct.pack(">I", counter)).digest()
            u = int.from_bytes(digest[:8], "big")
            if u < limit:
                return u % self.q
            counter += 1

    def storage_noise(self, m: int, x_idx: int, ell: int, size: int) -> tuple[int, ...]:
        return tuple(self._draw("storage", m, x_idx, ell, k) for k in range(size))

    def query_noise(self, m: int, t_idx: int, ell: int, size: int) -> tuple[int, ...]:
        return tuple(self._draw("query", m, t_idx, ell, k) for k in range(size))

    def message_value(self, m: int, k: int, ell: int) -> int:
        return self._draw("message", m, 0, ell, k)


class TableTape:
    """Noise spelled out explicitly; absent entries are zero.

    Used by the exhaustive verifiers, which enumerate every assignment of
    the noise space, and by fault-injection tests.
    """

    def __init__(self, q: int, storage: dict | None = None, query: dict | None = None):
        self.q = q
        self.storage = dict(storage or {})
        self.query = dict(query or {})

    def storage_noise(self, m, x_idx, ell, size):
        vec = self.storage.get((m, x_idx, ell))
        if vec is None:
            return (0,) * size
        if len(vec) != size:
            raise ValueError(f"storage noise ({m},{x_idx},{ell}) has wrong length")
        return tuple(v % self.q for v in vec)

    def query_noise(self, m, t_idx, ell, size):
        vec = self.query.get((m, t_idx, ell))
        if vec is None:
            return (0,) * size
        if len(vec) != size:
            raise ValueError(f"query noise ({m},{t_idx},{ell}) has wrong length")
        return tuple(v % self.q for v in vec)


# -- instances ----------------------------------------------------------------

@dataclass(frozen=True)
class SchemeInstance:
    field: PrimeField
    pattern: StoragePattern           # truncated: every rho_m == rho_min
    full_pattern: StoragePattern      # as given, before truncation
    x: int
    t: int
    block_length: int
    points: EvaluationPoints
    coeffs: GrsCoefficients

    @property
    def n_servers(self) -> int:
        return self.pattern.n_servers

    def stored_sets(self, n: int) -> frozenset[int]:
        return server_index(self.pattern, n)

    def beta(self, n: int) -> FieldElement:
        return self.points.beta_of(n)

    def gamma(self, n: int, ell: int) -> FieldElement:
        """l + beta_n, nonzero by point admissibility."""
        return self.field.element(ell) + self.beta(n)


def truncate_pattern(pattern: StoragePattern) -> StoragePattern:
    """Keep the first rho_min servers of each replication tuple."""
    rho_min = pattern.rho_min
    return StoragePattern(
        pattern.n_servers,
        tuple(
            MessageSet(ms.count, ms.servers[:rho_min])
            for ms in pattern.message_sets
        ),
    )


def compute_normalizers(instance: SchemeInstance) -> dict[int, FieldElement]:
    """Per message set: sum over its servers of v_{m,n} / (1 + beta_n)."""
    out = {}
    for m in instance.pattern.message_indices():
        total = instance.field.zero()
        for n in instance.pattern.servers_of(m):
            total = total + instance.coeffs.of(m, n) * instance.gamma(n, 1).inv()
        out[m] = total
    return out


def _instance_with_points(field, truncated, full, x, t, block_length, points):
    coeffs = dual_grs_coeffs(points, truncated)
    inst = SchemeInstance(field, truncated, full, x, t, block_length, points, coeffs)
    for m in truncated.message_indices():
        if not annihilator_check(points, coeffs, m):
            raise AssertionError(f"annihilation identity failed for set {m}")
    return inst


def build_instance(
    pattern: StoragePattern,
    x: int,
    t: int,
    q: int | None = None,
    compute_ready: bool = False,
) -> SchemeInstance:
    """Fix field, points and coefficients for a pattern.

    ``compute_ready`` additionally guarantees every per-set normalizer is
    nonzero (needed by linear-combination demands): the point scan advances
    through admissible assignments, moving to the next prime field if the
    current one is exhausted.
    """
    if x < 0 or t < 0:
        raise PreconditionError("x and t must be non-negative")
    block_length = pattern.rho_min - x - t
    if block_length < 1:
        raise DegenerateCapacity(
            f"rho_min={pattern.rho_min} <= X+T={x + t}: nothing retrievable"
        )
    truncated = truncate_pattern(pattern)
    fld = choose_field(pattern.n_servers, block_length, q)
    if not compute_ready:
        points = choose_points(fld, pattern.n_servers, block_length)
        return _instance_with_points(fld, truncated, pattern, x, t, block_length, points)

    while True:
        pool = admissible_points(fld, block_length)
        n = pattern.n_servers
        # Slide a window over the admissible pool: deterministic, and in
        # practice the first window already has nonzero normalizers.
        for start in range(len(pool) - n + 1):
            points = EvaluationPoints(fld, tuple(pool[start:start + n]), block_length)
            inst = _instance_with_points(
                fld, truncated, pattern, x, t, block_length, points
            )
            if all(not v.is_zero() for v in compute_normalizers(inst).values()):
                return inst
        if q is not None:
            raise ZeroNormalizer(
                f"no admissible point assignment in F_{fld.q} has nonzero normalizers"
            )
        fld = PrimeField(next_prime(fld.q))


# -- messages, storage, queries -------------------------------------------------

@dataclass
class MessageStore:
    """Plaintext symbols W_{m,k}(l), all in one field."""

    field: PrimeField
    values: dict[int, list[list[FieldElement]]]  # m -> [k][l]

    @classmethod
    def random(cls, instance: SchemeInstance, tape) -> MessageStore:
        values = {}
        for m in instance.pattern.message_indices():
            k_m = instance.pattern.count_of(m)
            values[m] = [
                [
                    instance.field.element(tape.message_value(m, k, ell))
                    for ell in range(1, instance.block_length + 1)
                ]
                for k in range(k_m)
            ]
        return cls(instance.field, values)

    @classmethod
    def from_ints(cls, instance: SchemeInstance, raw: dict) -> MessageStore:
        values = {}
        for m in instance.pattern.message_indices():
            k_m = instance.pattern.count_of(m)
            rows = raw[m]
            if len(rows) != k_m:
                raise ValueError(f"set {m}: expected {k_m} messages")
            values[m] = []
            for row in rows:
                if len(row) != instance.block_length:
                    raise ValueError(f"set {m}: expected {instance.block_length} symbols")
                values[m].append([instance.field.element(v) for v in row])
        return cls(instance.field, values)

    def symbol(self, m: int, k: int, ell: int) -> FieldElement:
        return self.values[m][k - 1][ell - 1]

    def row(self, m: int, ell: int) -> list[FieldElement]:
        """The l-th symbol of every message in set m, as a vector over k."""
        return [per_k[ell - 1] for per_k in self.values[m]]


@dataclass(frozen=True)
class ServerStorage:
    server: int
    field: PrimeField
    shares: dict  # (m, l) -> tuple[FieldElement, ...] of length K_m


@dataclass(frozen=True)
class Query:
    server: int
    field: PrimeField
    vectors: dict  # (m, l) -> tuple[FieldElement, ...] of length K_m


@dataclass(frozen=True)
class Demand:
    kind: str  # "retrieve" | "compute"
    mu: int | None = None
    kappa: int | None = None
    lambdas: tuple[tuple[int, ...], ...] | None = None

    @staticmethod
    def retrieve(mu: int, kappa: int) -> Demand:
        return Demand(kind="retrieve", mu=mu, kappa=kappa)

    @staticmethod
    def compute(lambdas) -> Demand:
        return Demand(kind="compute", lambdas=tuple(tuple(v) for v in lambdas))


def encode_storage(
    instance: SchemeInstance, store: MessageStore, tape, only_servers=None
) -> list[ServerStorage]:
    """Shares for every server: the plaintext row plus X noise layers,
    the x-th scaled by (l + beta_n)**x. One noise vector per (m, x, l),
    shared by all servers replicating the set. X = 0 stores plaintext.

    ``only_servers`` restricts encoding as in gen_queries."""
    fld = instance.field
    wanted = None if only_servers is None else set(only_servers)
    noise_cache: dict[tuple[int, int, int], list[FieldElement]] = {}

    def noise(m, x_idx, ell, size):
        key = (m, x_idx, ell)
        if key not in noise_cache:
            noise_cache[key] = [
                fld.element(v) for v in tape.storage_noise(m, x_idx, ell, size)
            ]
        return noise_cache[key]

    out = []
    for n in instance.pattern.server_ids():
        if wanted is not None and n not in wanted:
            out.append(None)
            continue
        shares = {}
        for m in sorted(instance.stored_sets(n)):
            k_m = instance.pattern.count_of(m)
            for ell in range(1, instance.block_length + 1):
                row = store.row(m, ell)
                if len(row) != k_m:
                    raise ValueError(f"set {m}: message row has wrong length")
                vec = list(row)
                for x_idx in range(1, instance.x + 1):
                    coeff = instance.gamma(n, ell) ** x_idx
                    z = noise(m, x_idx, ell, k_m)
                    vec = [w + coeff * zz for w, zz in zip(vec, z)]
                shares[(m, ell)] = tuple(vec)
        out.append(ServerStorage(server=n, field=fld, shares=shares))
    return out


def _demand_vectors(instance: SchemeInstance, demand: Demand) -> dict[int, list[FieldElement]]:
    fld = instance.field
    pattern = instance.pattern
    if demand.kind == "retrieve":
        if not (demand.mu is not None and 1 <= demand.mu <= pattern.n_message_sets):
            raise PreconditionError(f"no message set {demand.mu}")
        if not (demand.kappa is not None and 1 <= demand.kappa <= pattern.count_of(demand.mu)):
            raise PreconditionError(f"no message {demand.kappa} in set {demand.mu}")
        vectors = {}
        for m in pattern.message_indices():
            k_m = pattern.count_of(m)
            if m == demand.mu:
                vectors[m] = [
                    fld.one() if k == demand.kappa else fld.zero()
                    for k in range(1, k_m + 1)
                ]
            else:
                vectors[m] = [fld.zero()] * k_m
        return vectors
    if demand.kind == "compute":
        if instance.x != 0 or pattern.rho_min != instance.t + 1:
            raise ComputeModeUnavailable(
                "linear-combination demands need X = 0 and rho_min = T + 1"
            )
        if demand.lambdas is None or len(demand.lambdas) != pattern.n_message_sets:
            raise PreconditionError("one coefficient vector per message set required")
        normalizers = compute_normalizers(instance)
        vectors = {}
        for m in pattern.message_indices():
            lam = demand.lambdas[m - 1]
            k_m = pattern.count_of(m)
            if len(lam) != k_m:
                raise PreconditionError(f"set {m}: expected {k_m} coefficients")
            lam_elems = [fld.element(v) for v in lam]
            if all(e.is_zero() for e in lam_elems):
                vectors[m] = lam_elems
                continue
            if normalizers[m].is_zero():
                raise ZeroNormalizer(f"normalizer vanished for set {m}")
            scale = normalizers[m].inv()
            vectors[m] = [scale * e for e in lam_elems]
        return vectors
    raise PreconditionError(f"unknown demand kind {demand.kind!r}")


def gen_queries(
    instance: SchemeInstance, demand: Demand, tape, only_servers=None
) -> list[Query]:
    """Queries for all servers: the hidden demand vector plus T noise
    layers, scaled by v_{m,n} / (l + beta_n). One noise vector per
    (m, t, l), shared across the queries of all servers replicating m.

    ``only_servers`` restricts generation to those servers (the exhaustive
    verifiers enumerate large noise spaces and only need the colluders'
    queries); entries for other servers are None.
    """
    fld = instance.field
    demand_vecs = _demand_vectors(instance, demand)
    wanted = None if only_servers is None else set(only_servers)
    noise_cache: dict[tuple[int, int, int], list[FieldElement]] = {}

    def noise(m, t_idx, ell, size):
        key = (m, t_idx, ell)
        if key not in noise_cache:
            noise_cache[key] = [
                fld.element(v) for v in tape.query_noise(m, t_idx, ell, size)
            ]
        return noise_cache[key]

    out = []
    for n in instance.pattern.server_ids():
        if wanted is not None and n not in wanted:
            out.append(None)
            continue
        vectors = {}
        for m in sorted(instance.stored_sets(n)):
            k_m = instance.pattern.count_of(m)
            v_mn = instance.coeffs.of(m, n)
            for ell in range(1, instance.block_length + 1):
                gamma = instance.gamma(n, ell)
                base = list(demand_vecs[m])
                for t_idx in range(1, instance.t + 1):
                    coeff = gamma ** t_idx
                    z = noise(m, t_idx, ell, k_m)
                    base = [b + coeff * zz for b, zz in zip(base, z)]
                scale = v_mn * gamma.inv()
                vectors[(m, ell)] = tuple(scale * b for b in base)
        out.append(Query(server=n, field=fld, vectors=vectors))
    return out


def answer(storage: ServerStorage, query: Query) -> FieldElement:
    """The single downloaded symbol: sum of inner products of each stored
    share vector with the matching query vector. Depends on nothing but
    the server's own storage and query."""
    if storage.server != query.server:
        raise PreconditionError(
            f"query for server {query.server} sent to server {storage.server}"
        )
    if set(storage.shares) != set(query.vectors):
        raise ValueError("query blocks do not match stored blocks")
    total = storage.field.zero()
    for key, qvec in query.vectors.items():
        svec = storage.shares[key]
        if len(svec) != len(qvec):
            raise ValueError(f"block {key}: share/query length mismatch")
        for s, qq in zip(svec, qvec):
            total = total + s * qq
    return total


def combine_answers(instance: SchemeInstance, answers) -> list[FieldElement]:
    """Y_i = sum_n beta_n**(i-1) A_n for i in 1..L."""
    if len(answers) != instance.n_servers:
        raise PreconditionError(
            f"expected {instance.n_servers} answers, got {len(answers)}"
        )
    out = []
    for i in range(1, instance.block_length + 1):
        total = instance.field.zero()
        for n, a_n in enumerate(answers, start=1):
            total = total + (instance.beta(n) ** (i - 1)) * a_n
        out.append(total)
    return out


def decode(instance: SchemeInstance, answers, demand: Demand) -> tuple[FieldElement, ...]:
    """Recover the L symbols of the demanded message from the N answers.

    Combines answers along Vandermonde rows, then inverts the L x L
    product of the Vandermonde block on the demanded set's points with
    the per-symbol kernel v_{m,n} / (l + beta_n). The product is provably
    invertible for well-formed instances; a singularity here means the
    instance parameters are corrupt.
    """
    if demand.kind != "retrieve":
        raise PreconditionError("decode() handles retrieval demands only")
    y = combine_answers(instance, answers)
    mu = demand.mu
    servers = instance.pattern.servers_of(mu)
    ell_count = instance.block_length
    a_mat = FieldMatrix(
        instance.field,
        [[instance.beta(n) ** i for n in servers] for i in range(ell_count)],
    )
    b_mat = FieldMatrix(
        instance.field,
        [
            [
                instance.coeffs.of(mu, n) * instance.gamma(n, ell).inv()
                for ell in range(1, ell_count + 1)
            ]
            for n in servers
        ],
    )
    try:
        inverse = mat_invert(a_mat.mul(b_mat))
    except Singular as exc:
        raise SingularDecode("decode system singular: corrupted instance") from exc
    return tuple(inverse.mul_vector(y))


def decode_compute(instance: SchemeInstance, answers) -> FieldElement:
    """The hidden linear combination: plain sum of all answers."""
    if len(answers) != instance.n_servers:
        raise PreconditionError(
            f"expected {instance.n_servers} answers, got {len(answers)}"
        )
    total = instance.field.zero()
    for a_n in answers:
        total = total + a_n
    return total


def evaluate_plaintext(store: MessageStore, demand: Demand, pattern: StoragePattern):
    """Reference evaluation straight off the plaintext, used as the
    correctness oracle: the demanded symbols, or the linear combination."""
    if demand.kind == "retrieve":
        length = len(store.values[demand.mu][demand.kappa - 1])
        return tuple(
            store.symbol(demand.mu, demand.kappa, ell) for ell in range(1, length + 1)
        )
    total = store.field.zero()
    for m in pattern.message_indices():
        lam = demand.lambdas[m - 1]
        for k, coeff in enumerate(lam, start=1):
            total = total + store.field.element(coeff) * store.symbol(m, k, 1)
    return total


# -- composite retrieval for mixed (T+1)/(T+2) replication ---------------------

@dataclass
class CompositeTranscript:
    decoded: tuple
    expected: tuple
    downloads: dict[int, int]        # original server id -> symbols downloaded
    total_download: int
    stable_set: tuple[int, ...]
    outer_servers: tuple[int, ...]   # original ids answering the outer scheme
    inner_servers: tuple[int, ...]   # original ids answering the inner scheme
    q: int
    answers: dict = dc_field(default_factory=dict)  # original id -> list of values


def composite_retrieve(
    pattern: StoragePattern,
    t: int,
    demand: Demand,
    seed: int,
    q: int | None = None,
    store_ints: dict | None = None,
) -> CompositeTranscript:
    """Two-symbol retrieval when every set is (T+1)- or (T+2)-replicated.

    Drops an optimal stable set U of servers whose sets are all
    (T+2)-replicated, adds a virtual server replicating everything that is
    now (T+1)-replicated, and runs the base scheme with block length 2
    over the survivors plus the virtual server. The virtual server's
    answer is a known linear combination of its symbols, so it is fetched
    for real with a linear-combination demand against the neighbor
    servers, where those symbols are (T+1)-replicated.
    """
    from .capacity import two_matching_number  # local import: no cycle

    if demand.kind != "retrieve":
        raise PreconditionError("composite retrieval serves retrieval demands only")
    if t < 1:
        raise PreconditionError("composite retrieval requires T >= 1")
    for m in pattern.message_indices():
        rho = pattern.message_sets[m - 1].rho
        if rho not in (t + 1, t + 2):
            raise PreconditionError(
                f"set {m} is {rho}-replicated; composite mode needs T+1 or T+2"
            )

    graph = build_graph(pattern)
    heavy = servers_above_replication(pattern, t + 1)   # only (T+2)-replicated sets
    light = frozenset(pattern.server_ids()) - heavy
    _, stable = two_matching_number(graph.induced(heavy))
    stable_set = frozenset(stable)

    touched = {
        m for m in pattern.message_indices()
        if stable_set & set(pattern.servers_of(m))
    }
    light_sets = {
        m for m in pattern.message_indices()
        if pattern.message_sets[m - 1].rho == t + 1
    }
    virtual_sets = sorted(touched | light_sets)

    if not virtual_sets:
        # Nothing for a virtual server to hold: the dropped servers (if
        # any) stored nothing, so the base scheme over the survivors
        # already delivers both symbols.
        return _composite_degenerate(pattern, t, demand, seed, q, stable_set)

    survivors = sorted(set(pattern.server_ids()) - stable_set)
    outer_local = {old: new for new, old in enumerate(survivors, start=1)}
    virtual_id = len(survivors) + 1
    outer_sets = []
    for m in pattern.message_indices():
        locs = [outer_local[n] for n in pattern.servers_of(m) if n not in stable_set]
        if m in virtual_sets:
            locs.append(virtual_id)
        outer_sets.append((pattern.count_of(m), tuple(sorted(locs))))
    outer_pattern = validate(virtual_id, outer_sets)
    if outer_pattern.rho_min != t + 2 or max(outer_pattern.rho) != t + 2:
        raise AssertionError("outer pattern is not uniformly (T+2)-replicated")

    inner_ids = sorted(graph.neighborhood(stable_set) | light)
    inner_local = {old: new for new, old in enumerate(inner_ids, start=1)}
    inner_sets = []
    for m in virtual_sets:
        residual = [n for n in pattern.servers_of(m) if n not in stable_set]
        if any(n not in inner_local for n in residual):
            raise AssertionError("virtual-set replica outside the inner server set")
        inner_sets.append(
            (pattern.count_of(m) * 2, tuple(sorted(inner_local[n] for n in residual)))
        )
    inner_pattern = validate(len(inner_ids), inner_sets)

    # One field hosts both stages: the inner coefficients come from the
    # outer queries, so the symbols must live in the same F_q.
    floor = max(outer_pattern.n_servers + 2, inner_pattern.n_servers + 1)
    field_q = q if q is not None else next_prime(floor)
    outer_instance = build_instance(outer_pattern, 0, t, q=field_q)
    inner_instance = build_instance(inner_pattern, 0, t, q=field_q, compute_ready=True)

    outer_tape = SeededTape(field_q, seed, label="outer")
    if store_ints is None:
        store = MessageStore.random(outer_instance, outer_tape)
    else:
        store = MessageStore.from_ints(outer_instance, store_ints)

    storages = encode_storage(outer_instance, store, outer_tape)
    queries = gen_queries(outer_instance, demand, outer_tape)
    outer_answers: list = [None] * outer_pattern.n_servers
    for old in survivors:
        loc = outer_local[old]
        outer_answers[loc - 1] = answer(storages[loc - 1], queries[loc - 1])

    # The virtual server's would-be answer is sum over its sets, blocks and
    # entries of W_{m,k}(l) * Q[(m,l)][k]; those query entries become the
    # hidden combination coefficients of the inner stage.
    virtual_query = queries[virtual_id - 1]
    lambdas = []
    inner_store_ints: dict[int, list[list[int]]] = {}
    for idx, m in enumerate(virtual_sets, start=1):
        k_m = pattern.count_of(m)
        lam = []
        rows = []
        for k in range(1, k_m + 1):
            for ell in (1, 2):
                lam.append(virtual_query.vectors[(m, ell)][k - 1].value)
                rows.append([store.symbol(m, k, ell).value])
        lambdas.append(tuple(lam))
        inner_store_ints[idx] = rows

    inner_store = MessageStore.from_ints(inner_instance, inner_store_ints)
    inner_tape = SeededTape(field_q, seed, label="inner")
    inner_storages = encode_storage(inner_instance, inner_store, inner_tape)
    inner_queries = gen_queries(inner_instance, Demand.compute(lambdas), inner_tape)
    inner_answers = [
        answer(s, qq) for s, qq in zip(inner_storages, inner_queries)
    ]
    outer_answers[virtual_id - 1] = decode_compute(inner_instance, inner_answers)

    decoded = decode(outer_instance, outer_answers, demand)
    expected = evaluate_plaintext(store, demand, outer_pattern)

    downloads = {n: 0 for n in pattern.server_ids()}
    per_server_answers: dict[int, list[int]] = {}
    for old in survivors:
        downloads[old] += 1
        per_server_answers.setdefault(old, []).append(
            outer_answers[outer_local[old] - 1].value
        )
    for old in inner_ids:
        downloads[old] += 1
        per_server_answers.setdefault(old, []).append(
            inner_answers[inner_local[old] - 1].value
        )
    return CompositeTranscript(
        decoded=decoded,
        expected=expected,
        downloads=downloads,
        total_download=len(survivors) + len(inner_ids),
        stable_set=tuple(sorted(stable_set)),
        outer_servers=tuple(survivors),
        inner_servers=tuple(inner_ids),
        q=field_q,
        answers=per_server_answers,
    )


def _composite_degenerate(pattern, t, demand, seed, q, stable_set=frozenset()):
    """No virtual server needed: every dropped server stored nothing and
    all sets are (T+2)-replicated among the survivors, so the base scheme
    over the survivors already delivers two symbols per block."""
    survivors = sorted(set(pattern.server_ids()) - set(stable_set))
    working, _relabel = restrict(pattern, survivors)
    instance = build_instance(working, 0, t, q=q)
    if instance.block_length != 2:
        raise AssertionError("degenerate composite expects block length 2")
    tape = SeededTape(instance.field.q, seed, label="outer")
    store = MessageStore.random(instance, tape)
    storages = encode_storage(instance, store, tape)
    queries = gen_queries(instance, demand, tape)
    answers = [answer(s, qq) for s, qq in zip(storages, queries)]
    decoded = decode(instance, answers, demand)
    expected = evaluate_plaintext(store, demand, instance.pattern)
    downloads = {n: 0 for n in pattern.server_ids()}
    per_server = {}
    for local, old in enumerate(survivors, start=1):
        downloads[old] = 1
        per_server[old] = [answers[local - 1].value]
    return CompositeTranscript(
        decoded=decoded,
        expected=expected,
        downloads=downloads,
        total_download=len(survivors),
        stable_set=tuple(sorted(stable_set)),
        outer_servers=tuple(survivors),
        inner_servers=(),
        q=instance.field.q,
        answers=per_server,
    )
