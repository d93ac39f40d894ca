"""Verifiers for the three protocol guarantees.

Correctness is checked by randomized end-to-end runs against the
plaintext. Privacy and security are checked two ways: exhaustively, by
enumerating the entire noise space and comparing exact view-count tables
across demands (or message realizations), and structurally, by checking
invertibility of the noise-mixing matrices, which implies the colluders'
view is an invertible affine image of uniform noise.

The exhaustive paths never sample: if the state space exceeds the budget
they refuse, because sampling would weaken an information-theoretic
guarantee to a statistical one.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field
from itertools import combinations, product

from .errors import BudgetExceeded, PreconditionError
from .field import FieldMatrix, PrimeField, mat_rank, next_prime
from .grs import dual_grs_coeffs
from .scheme import (
    Demand,
    MessageStore,
    SchemeInstance,
    SeededTape,
    TableTape,
    answer,
    decode,
    decode_compute,
    encode_storage,
    evaluate_plaintext,
    gen_queries,
)
from .storage import StoragePattern


@dataclass(frozen=True)
class EnumerationBudget:
    max_states: int = 10_000_000

    def __post_init__(self):
        if self.max_states < 1:
            raise ValueError("budget must be positive")


@dataclass
class DistributionTable:
    """Exact occurrence counts of observed view tuples over an enumerated
    randomness space."""

    counts: dict = dc_field(default_factory=dict)

    def record(self, view: tuple):
        self.counts[view] = self.counts.get(view, 0) + 1

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def __eq__(self, other):
        return isinstance(other, DistributionTable) and self.counts == other.counts


@dataclass
class CorrectnessReport:
    trials: int
    failures: list = dc_field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def verify_correctness(
    instance: SchemeInstance,
    trials: int,
    seed: int,
    include_compute: bool = False,
) -> CorrectnessReport:
    """Random (messages, demand, noise) draws, decoded output compared to
    the plaintext. Failures carry the offending transcript."""
    rng = random.Random(seed)
    pattern = instance.pattern
    compute_capable = instance.x == 0 and pattern.rho_min == instance.t + 1
    report = CorrectnessReport(trials=trials)
    for trial in range(trials):
        tape = SeededTape(instance.field.q, rng.getrandbits(64), label=f"trial{trial}")
        store = MessageStore.random(instance, tape)
        use_compute = include_compute and compute_capable and trial % 2 == 1
        if use_compute:
            lambdas = [
                [rng.randrange(instance.field.q) for _ in range(pattern.count_of(m))]
                for m in pattern.message_indices()
            ]
            demand = Demand.compute(lambdas)
        else:
            mu = rng.randrange(1, pattern.n_message_sets + 1)
            kappa = rng.randrange(1, pattern.count_of(mu) + 1)
            demand = Demand.retrieve(mu, kappa)
        storages = encode_storage(instance, store, tape)
        queries = gen_queries(instance, demand, tape)
        answers = [answer(s, q) for s, q in zip(storages, queries)]
        if use_compute:
            got = decode_compute(instance, answers)
        else:
            got = decode(instance, answers, demand)
        expected = evaluate_plaintext(store, demand, pattern)
        if got != expected:
            report.failures.append(
                {
                    "trial": trial,
                    "demand": demand,
                    "decoded": _values(got),
                    "expected": _values(expected),
                    "answers": [a.value for a in answers],
                }
            )
    return report


def _values(symbols):
    if isinstance(symbols, tuple):
        return [s.value for s in symbols]
    return symbols.value


def _touched_sets(instance, colluders):
    sets = set()
    for n in colluders:
        sets |= instance.stored_sets(n)
    return sorted(sets)


def _query_view(queries, colluders):
    """Canonical colluder view: query entries sorted by (server, m, l, k)."""
    view = []
    for n in sorted(colluders):
        q = queries[n - 1]
        for (m, ell) in sorted(q.vectors):
            view.extend((n, m, ell, k, e.value) for k, e in enumerate(q.vectors[(m, ell)]))
    return tuple(view)


def verify_privacy_exhaustive(
    instance: SchemeInstance,
    colluders,
    budget: EnumerationBudget = EnumerationBudget(),
    query_fn=gen_queries,
    return_tables: bool = False,
):
    """Enumerate every query-noise tape and compare the colluders' exact
    view distribution across all demands. True iff all tables agree.

    ``query_fn`` exists for fault injection in tests; the default is the
    production query generator.
    """
    colluders = sorted(set(colluders))
    if not colluders:
        return (True, {}) if return_tables else True
    q = instance.field.q
    pattern = instance.pattern
    touched = _touched_sets(instance, colluders)
    layout = []  # (m, t_idx, ell, size) per noise vector
    for m in touched:
        k_m = pattern.count_of(m)
        for t_idx in range(1, instance.t + 1):
            for ell in range(1, instance.block_length + 1):
                layout.append((m, t_idx, ell, k_m))
    dims = sum(size for *_rest, size in layout)
    states = q ** dims
    if states > budget.max_states:
        raise BudgetExceeded(states, budget.max_states)

    demands = [
        Demand.retrieve(m, k)
        for m in pattern.message_indices()
        for k in range(1, pattern.count_of(m) + 1)
    ]
    tables = {}
    for demand in demands:
        table = DistributionTable()
        for assignment in product(range(q), repeat=dims):
            noise = {}
            pos = 0
            for m, t_idx, ell, size in layout:
                noise[(m, t_idx, ell)] = assignment[pos:pos + size]
                pos += size
            tape = TableTape(q, query=noise)
            queries = query_fn(instance, demand, tape, only_servers=colluders)
            table.record(_query_view(queries, colluders))
        if table.total != states:
            raise AssertionError("dropped states during enumeration")
        tables[(demand.mu, demand.kappa)] = table
    reference = next(iter(tables.values()))
    private = all(t == reference for t in tables.values())
    if return_tables:
        return private, tables
    return private


def verify_privacy_structural(instance: SchemeInstance) -> bool:
    """Sufficient condition for T-privacy: for every set, block index and
    T-subset of its replicas, the T x T noise-mixing matrix with entries
    v_{m,n} (l + beta_n)**(t-1) is invertible, making the joint view an
    invertible affine image of uniform noise (hence demand-independent)."""
    if instance.t < 1:
        raise PreconditionError("structural privacy check needs T >= 1")
    pattern = instance.pattern
    for m in pattern.message_indices():
        servers = pattern.servers_of(m)
        for ell in range(1, instance.block_length + 1):
            for subset in combinations(servers, min(instance.t, len(servers))):
                rows = []
                for n in subset:
                    gamma = instance.gamma(n, ell)
                    v = instance.coeffs.of(m, n)
                    rows.append([v * gamma ** (t - 1) for t in range(1, instance.t + 1)])
                matrix = FieldMatrix(instance.field, rows)
                if mat_rank(matrix) != len(subset):
                    return False
    return True


@dataclass
class SecurityCheck:
    ok: bool
    partial: bool
    states: int

    def __bool__(self):
        return self.ok


def _share_view(storages, colluders):
    view = []
    for n in sorted(colluders):
        s = storages[n - 1]
        for (m, ell) in sorted(s.shares):
            view.extend((n, m, ell, k, e.value) for k, e in enumerate(s.shares[(m, ell)]))
    return tuple(view)


def verify_security_exhaustive(
    instance: SchemeInstance,
    colluders,
    budget: EnumerationBudget = EnumerationBudget(),
    grid_seed: int = 0,
) -> SecurityCheck:
    """Enumerate every storage-noise tape for each message realization in
    a grid and compare the colluders' exact share-view distributions.

    The grid is the full message space when that fits the budget,
    otherwise all-zeros, all-ones and eight seeded random realizations
    (reported as partial).
    """
    if instance.x < 1:
        raise PreconditionError("X = 0 stores plaintext: no security to verify")
    colluders = sorted(set(colluders))
    if not colluders:
        raise PreconditionError("need at least one colluding server")
    q = instance.field.q
    pattern = instance.pattern
    touched = _touched_sets(instance, colluders)
    layout = []
    for m in touched:
        k_m = pattern.count_of(m)
        for x_idx in range(1, instance.x + 1):
            for ell in range(1, instance.block_length + 1):
                layout.append((m, x_idx, ell, k_m))
    dims = sum(size for *_rest, size in layout)
    states = q ** dims
    if states > budget.max_states:
        raise BudgetExceeded(states, budget.max_states)

    msg_dims = [
        (m, pattern.count_of(m), instance.block_length)
        for m in pattern.message_indices()
    ]
    total_symbols = sum(k * l for _, k, l in msg_dims)
    full_grid = q ** total_symbols * states <= budget.max_states
    realizations = []
    if full_grid:
        for flat in product(range(q), repeat=total_symbols):
            realizations.append(_unflatten_messages(flat, msg_dims))
        partial = False
    else:
        zeros = _unflatten_messages((0,) * total_symbols, msg_dims)
        ones = _unflatten_messages((1,) * total_symbols, msg_dims)
        realizations = [zeros, ones]
        rng = random.Random(grid_seed)
        for _ in range(8):
            flat = tuple(rng.randrange(q) for _ in range(total_symbols))
            realizations.append(_unflatten_messages(flat, msg_dims))
        partial = True

    tables = []
    for raw in realizations:
        store = MessageStore.from_ints(instance, raw)
        table = DistributionTable()
        for assignment in product(range(q), repeat=dims):
            noise = {}
            pos = 0
            for m, x_idx, ell, size in layout:
                noise[(m, x_idx, ell)] = assignment[pos:pos + size]
                pos += size
            tape = TableTape(q, storage=noise)
            storages = encode_storage(instance, store, tape, only_servers=colluders)
            table.record(_share_view(storages, colluders))
        if table.total != states:
            raise AssertionError("dropped states during enumeration")
        tables.append(table)
    ok = all(t == tables[0] for t in tables)
    return SecurityCheck(ok=ok, partial=partial, states=states)


def _unflatten_messages(flat, msg_dims):
    raw = {}
    pos = 0
    for m, k_m, length in msg_dims:
        rows = []
        for _ in range(k_m):
            rows.append(list(flat[pos:pos + length]))
            pos += length
        raw[m] = rows
    return raw


def share_determination_rank(instance: SchemeInstance, servers, ell: int = 1):
    """Rank data for reconstructing one symbol from the given servers'
    shares: returns (rank of the coefficient rows, rank with the
    plaintext selector appended). The symbol is determined exactly when
    the two ranks are equal, i.e. the selector already lies in the row
    space of the share coefficients."""
    rows = []
    for n in servers:
        gamma = instance.gamma(n, ell)
        rows.append([gamma ** x for x in range(instance.x + 1)])
    base = FieldMatrix(instance.field, rows)
    selector_row = [instance.field.one()] + [instance.field.zero()] * instance.x
    extended = FieldMatrix(instance.field, rows + [selector_row])
    return mat_rank(base), mat_rank(extended)


def shares_determine_symbol(instance: SchemeInstance, servers, ell: int = 1) -> bool:
    base, extended = share_determination_rank(instance, servers, ell)
    return base == extended


def verify_rank_intuition(pattern: StoragePattern, q: int | None = None) -> bool:
    """The interference matrix (dual-GRS coefficients placed on each
    set's replicas, zeros elsewhere) is annihilated by the rho_min - 1
    Vandermonde rows, so its rank is at most N - (rho_min - 1).

    Applies to constant-replication patterns with X = 0, T = 1.
    """
    rho = pattern.rho_min
    if any(ms.rho != rho for ms in pattern.message_sets):
        raise PreconditionError("rank check needs constant replication")
    n = pattern.n_servers
    fld = PrimeField(q) if q is not None else PrimeField(next_prime(n))
    if fld.q <= n:
        raise PreconditionError(f"need q > N for {n} distinct nonzero points")
    beta = tuple(fld.element(v) for v in range(1, n + 1))
    coeffs = dual_grs_coeffs(beta, pattern)
    columns = []
    for m in pattern.message_indices():
        col = [fld.zero()] * n
        for srv in pattern.servers_of(m):
            col[srv - 1] = coeffs.of(m, srv)
        columns.append(col)
    v_matrix = FieldMatrix(fld, [list(row) for row in zip(*columns)])
    if rho >= 2:
        vand = FieldMatrix(fld, [[b ** j for b in beta] for j in range(rho - 1)])
        product_matrix = vand.mul(v_matrix)
        if any(
            not product_matrix[(i, j)].is_zero()
            for i in range(product_matrix.rows)
            for j in range(product_matrix.cols)
        ):
            return False
        if mat_rank(v_matrix) > n - (rho - 1):
            return False
    return True
