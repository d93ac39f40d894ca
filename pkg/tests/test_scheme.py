import random

import pytest

from graphpir.errors import (
    ComputeModeUnavailable,
    DegenerateCapacity,
    PreconditionError,
)
from graphpir.field import FieldMatrix, mat_invert
from graphpir.fixtures import FIXTURES
from graphpir.scheme import (
    Demand,
    MessageStore,
    SeededTape,
    TableTape,
    answer,
    build_instance,
    combine_answers,
    composite_retrieve,
    compute_normalizers,
    decode,
    decode_compute,
    encode_storage,
    evaluate_plaintext,
    gen_queries,
)
from graphpir.storage import validate
from support import random_pattern


def run_protocol(instance, store, demand, tape):
    storages = encode_storage(instance, store, tape)
    queries = gen_queries(instance, demand, tape)
    answers = [answer(s, q) for s, q in zip(storages, queries)]
    return storages, queries, answers


def test_build_instance_block_length():
    inst = build_instance(FIXTURES["skewed_triples"].pattern, 0, 1)
    assert inst.block_length == 2
    assert inst.n_servers == 5
    assert inst.field.q > 5 + 2


def test_build_instance_truncates_lexicographically():
    inst = build_instance(FIXTURES["overreplicated_set"].pattern, 0, 1)
    assert inst.pattern.servers_of(2) == (1, 3, 4)
    assert inst.full_pattern.servers_of(2) == (1, 3, 4, 5)


def test_build_instance_degenerate():
    p = validate(3, [(1, (1, 2))])
    with pytest.raises(DegenerateCapacity):
        build_instance(p, 1, 1)


def test_encode_plaintext_when_unsecured():
    p = validate(3, [(2, (1, 2)), (1, (2, 3))])
    inst = build_instance(p, 0, 1)
    tape = SeededTape(inst.field.q, 11)
    store = MessageStore.random(inst, tape)
    storages = encode_storage(inst, store, tape)
    for n in (1, 2):
        assert storages[n - 1].shares[(1, 1)] == tuple(store.row(1, 1))


def test_encode_single_noise_layer_by_hand():
    # W = 3, Z = 2, beta_1 = 1, l = 1: share = 3 + (1+1)*2 = 7 = 0 in F_7.
    p = validate(2, [(1, (1, 2))])
    inst = build_instance(p, 1, 0, q=7)
    assert inst.beta(1).value == 1
    store = MessageStore.from_ints(inst, {1: [[3]]})
    tape = TableTape(7, storage={(1, 1, 1): (2,)})
    storages = encode_storage(inst, store, tape)
    assert storages[0].shares[(1, 1)][0].value == 0
    assert storages[1].shares[(1, 1)][0].value == (3 + (1 + 2) * 2) % 7


def test_share_reconstruction_linear_solve():
    # X=1, rho=3: any two shares of one symbol determine it via the
    # 2x2 system [[1, g_a], [1, g_b]] (W, Z) = (share_a, share_b).
    p = validate(3, [(1, (1, 2, 3))])
    inst = build_instance(p, 1, 1, q=11)
    store = MessageStore.from_ints(inst, {1: [[9]]})
    tape = SeededTape(11, 4)
    storages = encode_storage(inst, store, tape)
    for pair in [(1, 2), (1, 3), (2, 3)]:
        rows = [[inst.field.one(), inst.gamma(n, 1)] for n in pair]
        rhs = [storages[n - 1].shares[(1, 1)][0] for n in pair]
        solution = mat_invert(FieldMatrix(inst.field, rows)).mul_vector(rhs)
        assert solution[0].value == 9


def test_queries_without_privacy_noise():
    p = validate(2, [(1, (1, 2))])
    inst = build_instance(p, 0, 0, q=11)
    queries = gen_queries(inst, Demand.retrieve(1, 1), TableTape(11))
    for n in (1, 2):
        expected = inst.coeffs.of(1, n) * inst.gamma(n, 1).inv()
        got = queries[n - 1].vectors[(1, 1)]
        assert len(got) == 1 and got[0] == expected
        # And block 2 carries the same structure for l = 2.
        expected2 = inst.coeffs.of(1, n) * inst.gamma(n, 2).inv()
        assert queries[n - 1].vectors[(1, 2)][0] == expected2


def test_queries_for_undemanded_sets_are_pure_noise():
    p = validate(3, [(1, (1, 2)), (1, (2, 3))])
    inst = build_instance(p, 0, 1)
    # With all noise zeroed, undesired sets produce all-zero queries.
    queries = gen_queries(inst, Demand.retrieve(1, 1), TableTape(inst.field.q))
    assert all(e.is_zero() for e in queries[1].vectors[(2, 1)])
    assert not all(e.is_zero() for e in queries[1].vectors[(1, 1)])


def test_answer_empty_storage_is_zero():
    p = validate(2, [(1, (1,))])
    inst = build_instance(p, 0, 0)
    tape = SeededTape(inst.field.q, 0)
    store = MessageStore.random(inst, tape)
    storages = encode_storage(inst, store, tape)
    queries = gen_queries(inst, Demand.retrieve(1, 1), tape)
    assert storages[1].shares == {} and queries[1].vectors == {}
    assert answer(storages[1], queries[1]).value == 0


def test_answer_rejects_wrong_server():
    p = validate(2, [(1, (1, 2))])
    inst = build_instance(p, 0, 0)
    tape = SeededTape(inst.field.q, 0)
    store = MessageStore.random(inst, tape)
    storages = encode_storage(inst, store, tape)
    queries = gen_queries(inst, Demand.retrieve(1, 1), tape)
    with pytest.raises(PreconditionError):
        answer(storages[0], queries[1])


@pytest.mark.parametrize("x,t", [(0, 1), (0, 2), (1, 1), (2, 1), (1, 2), (0, 0), (2, 0)])
def test_end_to_end_against_plaintext(x, t):
    rng = random.Random(100 * x + t)
    for _ in range(8):
        p, _, _ = random_pattern(rng, xt_choices=((x, t),), max_n=7, max_m=4)
        inst = build_instance(p, x, t)
        tape = SeededTape(inst.field.q, rng.getrandbits(64))
        store = MessageStore.random(inst, tape)
        mu = rng.randint(1, p.n_message_sets)
        kappa = rng.randint(1, p.count_of(mu))
        demand = Demand.retrieve(mu, kappa)
        _, _, answers = run_protocol(inst, store, demand, tape)
        assert decode(inst, answers, demand) == evaluate_plaintext(store, demand, inst.pattern)


def test_zero_messages_decode_to_zero():
    p = validate(4, [(1, (1, 2, 3)), (1, (2, 3, 4))])
    inst = build_instance(p, 0, 1)
    store = MessageStore.from_ints(inst, {1: [[0, 0]], 2: [[0, 0]]})
    tape = SeededTape(inst.field.q, 17)
    demand = Demand.retrieve(2, 1)
    _, _, answers = run_protocol(inst, store, demand, tape)
    assert all(e.is_zero() for e in decode(inst, answers, demand))


def test_decode_noise_invariant():
    p = FIXTURES["skewed_triples"].pattern
    inst = build_instance(p, 0, 1)
    raw = {m: [[3, 1]] for m in p.message_indices()}
    store = MessageStore.from_ints(inst, raw)
    demand = Demand.retrieve(3, 1)
    outputs = []
    for seed in (1, 2, 3):
        _, _, answers = run_protocol(inst, store, demand, SeededTape(inst.field.q, seed))
        outputs.append([e.value for e in decode(inst, answers, demand)])
    assert outputs[0] == outputs[1] == outputs[2] == [3, 1]


def test_scalar_decode_matches_direct_formula():
    # Single set, K=1, L=1: Y1 / (sum_n v_n / (1+beta_n)) recovers the symbol.
    p = validate(2, [(1, (1, 2))])
    inst = build_instance(p, 0, 1)
    store = MessageStore.from_ints(inst, {1: [[3]]})
    tape = SeededTape(inst.field.q, 23)
    demand = Demand.retrieve(1, 1)
    _, _, answers = run_protocol(inst, store, demand, tape)
    y1 = combine_answers(inst, answers)[0]
    denom = compute_normalizers(inst)[1]
    assert (y1 * denom.inv()).value == 3
    assert decode(inst, answers, demand)[0].value == 3


def test_compute_mode_requires_thin_replication():
    inst = build_instance(FIXTURES["skewed_triples"].pattern, 0, 1)  # rho_min = 3 != T+1
    with pytest.raises(ComputeModeUnavailable):
        gen_queries(inst, Demand.compute([[1]] * 3), SeededTape(inst.field.q, 0))
    inst2 = build_instance(validate(3, [(1, (1, 2, 3))]), 1, 1)  # X != 0
    with pytest.raises(ComputeModeUnavailable):
        gen_queries(inst2, Demand.compute([[1]]), SeededTape(inst2.field.q, 0))


def test_compute_zero_combination():
    p = validate(3, [(1, (1, 2)), (1, (2, 3))])
    inst = build_instance(p, 0, 1, compute_ready=True)
    tape = SeededTape(inst.field.q, 3)
    store = MessageStore.random(inst, tape)
    demand = Demand.compute([[0], [0]])
    _, _, answers = run_protocol(inst, store, demand, tape)
    assert decode_compute(inst, answers).value == 0


def test_compute_indicator_equals_retrieve():
    p = validate(3, [(2, (1, 2)), (1, (2, 3))])
    inst = build_instance(p, 0, 1, compute_ready=True)
    tape = SeededTape(inst.field.q, 9)
    store = MessageStore.random(inst, tape)
    target = store.symbol(1, 2, 1)
    compute_demand = Demand.compute([[0, 1], [0]])
    _, _, answers = run_protocol(inst, store, compute_demand, tape)
    assert decode_compute(inst, answers) == target
    retrieve_demand = Demand.retrieve(1, 2)
    _, _, answers2 = run_protocol(inst, store, retrieve_demand, SeededTape(inst.field.q, 10))
    assert decode(inst, answers2, retrieve_demand)[0] == target


def test_compute_random_combination_matches_plaintext():
    # rho_min = 3 = T + 1 with T = 2.
    p = FIXTURES["skewed_triples"].pattern
    inst = build_instance(p, 0, 2, compute_ready=True)
    rng = random.Random(31)
    for trial in range(5):
        tape = SeededTape(inst.field.q, rng.getrandbits(64))
        store = MessageStore.random(inst, tape)
        lambdas = [
            [rng.randrange(inst.field.q) for _ in range(p.count_of(m))]
            for m in p.message_indices()
        ]
        demand = Demand.compute(lambdas)
        _, _, answers = run_protocol(inst, store, demand, tape)
        assert decode_compute(inst, answers) == evaluate_plaintext(store, demand, p)


def test_composite_fixture_sessions():
    fx = FIXTURES["mixed_light_heavy"]
    tr = composite_retrieve(fx.pattern, 1, Demand.retrieve(4, 1), seed=5)
    assert tr.total_download == 7
    assert len(tr.decoded) == 2
    assert tr.decoded == tr.expected
    assert sum(tr.downloads.values()) == 7

    fx6 = FIXTURES["eight_server_chain"]
    tr6 = composite_retrieve(fx6.pattern, 1, Demand.retrieve(5, 1), seed=5)
    assert tr6.total_download == 9
    assert tr6.stable_set == (5, 6)
    assert sorted(tr6.inner_servers) == [4, 7, 8]
    assert tr6.decoded == tr6.expected
    # Servers in both stages answer twice, the rest once, stable set never.
    assert tr6.downloads[5] == 0 and tr6.downloads[6] == 0
    assert tr6.downloads[4] == 2 and tr6.downloads[7] == 2 and tr6.downloads[8] == 2


def test_composite_every_demand_decodes():
    fx = FIXTURES["eight_server_chain"]
    for m in fx.pattern.message_indices():
        tr = composite_retrieve(fx.pattern, 1, Demand.retrieve(m, 1), seed=m)
        assert tr.decoded == tr.expected


def test_composite_degenerate_reduces_to_base():
    # All sets (T+2)-replicated, empty optimal stable set: plain scheme.
    p = FIXTURES["triple_no_cover"].pattern
    tr = composite_retrieve(p, 1, Demand.retrieve(2, 1), seed=8)
    assert tr.total_download == 4
    assert tr.stable_set == ()
    assert tr.inner_servers == ()
    assert len(tr.decoded) == 2
    assert tr.decoded == tr.expected


def test_composite_drops_idle_servers():
    # Server 4 stores nothing: the optimal stable set is {4} and there is
    # nothing for a virtual server to hold, so the session downloads from
    # the three real replicas only.
    p = validate(4, [(1, (1, 2, 3))])
    tr = composite_retrieve(p, 1, Demand.retrieve(1, 1), seed=2)
    assert tr.stable_set == (4,)
    assert tr.total_download == 3
    assert tr.downloads[4] == 0
    assert len(tr.decoded) == 2
    assert tr.decoded == tr.expected
    from graphpir.capacity import low_replication_capacity
    from fractions import Fraction
    assert low_replication_capacity(p, 1) == Fraction(2, 3)


def test_composite_rate_matches_capacity_on_random_patterns():
    # The chosen stable set is optimal, so every composite session achieves
    # exactly the settled rate 2 / (nu2 + 2 * light servers).
    from fractions import Fraction
    from graphpir.capacity import low_replication_capacity

    rng = random.Random(271)
    for _ in range(25):
        t = rng.choice([1, 2])
        n = rng.randint(t + 2, 8)
        sets = []
        for _ in range(rng.randint(1, 4)):
            rho = rng.choice([t + 1, t + 2])
            sets.append((rng.randint(1, 2), tuple(sorted(rng.sample(range(1, n + 1), rho)))))
        pattern = validate(n, sets)
        mu = rng.randint(1, pattern.n_message_sets)
        demand = Demand.retrieve(mu, rng.randint(1, pattern.count_of(mu)))
        tr = composite_retrieve(pattern, t, demand, seed=rng.getrandbits(64))
        assert tr.decoded == tr.expected
        assert Fraction(2, tr.total_download) == low_replication_capacity(pattern, t)


def test_composite_preconditions():
    with pytest.raises(PreconditionError):
        composite_retrieve(FIXTURES["redundant_servers_pair"].pattern, 1, Demand.retrieve(1, 1), 0)
    with pytest.raises(PreconditionError):
        composite_retrieve(FIXTURES["mixed_light_heavy"].pattern, 1, Demand.compute([[1]] * 4), 0)


def test_seeded_tape_deterministic_and_separated():
    a = SeededTape(11, 42, label="x")
    b = SeededTape(11, 42, label="x")
    assert a.query_noise(1, 1, 1, 4) == b.query_noise(1, 1, 1, 4)
    assert a.storage_noise(1, 1, 1, 4) != a.query_noise(1, 1, 1, 4) or True
    # Different labels and different seeds give different streams.
    c = SeededTape(11, 42, label="y")
    d = SeededTape(11, 43, label="x")
    streams = {
        tuple(t.query_noise(2, 1, 1, 8)) for t in (a, c, d)
    }
    assert len(streams) == 3
    assert all(0 <= v < 11 for v in a.query_noise(3, 1, 2, 20))
