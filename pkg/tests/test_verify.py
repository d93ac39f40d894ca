import random

import pytest

from graphpir.errors import BudgetExceeded, PreconditionError
from graphpir.fixtures import FIXTURES
from graphpir.grs import EvaluationPoints
from graphpir.scheme import (
    Demand,
    MessageStore,
    SeededTape,
    answer,
    build_instance,
    decode,
    encode_storage,
    evaluate_plaintext,
    gen_queries,
)
from graphpir.storage import validate
from graphpir.verify import (
    EnumerationBudget,
    shares_determine_symbol,
    verify_correctness,
    verify_privacy_exhaustive,
    verify_privacy_structural,
    verify_rank_intuition,
    verify_security_exhaustive,
)
from support import random_constant_rho_pattern

TINY = validate(3, [(1, (1, 2)), (1, (2, 3))])  # M=2, K=1, N=3, rho=2


def tiny_instance(q=5):
    return build_instance(TINY, 0, 1, q=q)


def test_correctness_clean_runs():
    inst = build_instance(FIXTURES["skewed_triples"].pattern, 0, 1)
    report = verify_correctness(inst, trials=100, seed=1)
    assert report.ok and report.trials == 100


def test_correctness_detects_corrupted_answer():
    inst = build_instance(FIXTURES["skewed_triples"].pattern, 0, 1)
    tape = SeededTape(inst.field.q, 2)
    store = MessageStore.random(inst, tape)
    demand = Demand.retrieve(1, 1)
    storages = encode_storage(inst, store, tape)
    queries = gen_queries(inst, demand, tape)
    answers = [answer(s, q) for s, q in zip(storages, queries)]
    answers[2] = answers[2] + inst.field.one()  # corrupt one download
    assert decode(inst, answers, demand) != evaluate_plaintext(store, demand, inst.pattern)


def test_privacy_exhaustive_tiny_instance():
    inst = tiny_instance()
    for colluder in (1, 2, 3):
        assert verify_privacy_exhaustive(inst, (colluder,))


def test_privacy_tables_counts():
    inst = tiny_instance()
    ok, tables = verify_privacy_exhaustive(inst, (2,), return_tables=True)
    assert ok
    # Server 2 stores both sets: the noise space is q^2 states per demand.
    for table in tables.values():
        assert table.total == 25
    # Both demands present.
    assert set(tables) == {(1, 1), (2, 1)}


def test_privacy_empty_colluders_trivially_private():
    assert verify_privacy_exhaustive(tiny_instance(), ())


def test_privacy_budget_guard():
    inst = tiny_instance()
    with pytest.raises(BudgetExceeded):
        verify_privacy_exhaustive(inst, (2,), EnumerationBudget(10))


def test_privacy_catches_noiseless_scheme():
    inst = tiny_instance()

    def broken_queries(instance, demand, tape, only_servers=None):
        # Drops the privacy noise entirely: the demand leaks.
        from graphpir.scheme import TableTape
        return gen_queries(instance, demand, TableTape(instance.field.q),
                           only_servers=only_servers)

    assert not verify_privacy_exhaustive(inst, (1,), query_fn=broken_queries)


def test_privacy_structural():
    assert verify_privacy_structural(tiny_instance())
    inst2 = build_instance(validate(4, [(1, (1, 2, 3, 4))]), 1, 2)
    assert verify_privacy_structural(inst2)
    with pytest.raises(PreconditionError):
        verify_privacy_structural(build_instance(validate(2, [(1, (1, 2))]), 0, 0))


def test_privacy_structural_rejects_duplicate_points():
    inst = tiny_instance(q=7)
    # Fault injection: force duplicate evaluation points past validation.
    bad_points = object.__new__(EvaluationPoints)
    object.__setattr__(bad_points, "field", inst.field)
    object.__setattr__(bad_points, "beta", (inst.beta(1), inst.beta(1), inst.beta(3)))
    object.__setattr__(bad_points, "block_length", inst.block_length)
    from graphpir.grs import dual_grs_coeffs
    import dataclasses
    # Coefficients stay nonzero, but two servers now share a point, so the
    # 1x1 mixing blocks stay invertible while a 2x2 block would not; use
    # T = 2 replication of one set across the duplicated servers.
    p = validate(3, [(1, (1, 2, 3))])
    inst3 = build_instance(p, 0, 2)
    dup = object.__new__(EvaluationPoints)
    object.__setattr__(dup, "field", inst3.field)
    object.__setattr__(dup, "beta", (inst3.beta(1), inst3.beta(1), inst3.beta(3)))
    object.__setattr__(dup, "block_length", inst3.block_length)
    same_v = inst3.coeffs.by_set[1][3]
    forged = {1: {1: same_v, 2: same_v, 3: same_v}}
    broken = dataclasses.replace(
        inst3,
        points=dup,
        coeffs=type(inst3.coeffs)(forged),
    )
    assert not verify_privacy_structural(broken)


def test_structural_implies_exhaustive_on_tiny_fixtures():
    for q in (5, 7):
        inst = tiny_instance(q=q)
        assert verify_privacy_structural(inst)
        for colluder in (1, 2, 3):
            assert verify_privacy_exhaustive(inst, (colluder,))


def test_privacy_exhaustive_two_colluders():
    # T = 2: any pair of servers sees demand-independent joint queries.
    p = validate(3, [(1, (1, 2, 3))])
    inst = build_instance(p, 0, 2, q=5)
    for pair in [(1, 2), (1, 3), (2, 3)]:
        assert verify_privacy_exhaustive(inst, pair)


def test_security_exhaustive_two_colluders_x2():
    # X = 2: any pair of shares is still message-independent; any triple
    # is not.
    p = validate(4, [(1, (1, 2, 3, 4))])
    inst = build_instance(p, 2, 1, q=7)
    assert verify_security_exhaustive(inst, (1, 3)).ok
    assert verify_security_exhaustive(inst, (2, 4)).ok
    assert not verify_security_exhaustive(inst, (1, 2, 3)).ok


def test_security_exhaustive_single_server():
    p = validate(3, [(1, (1, 2, 3))])
    inst = build_instance(p, 1, 1, q=5)
    for colluder in (1, 2, 3):
        res = verify_security_exhaustive(inst, (colluder,))
        assert res.ok and not res.partial and res.states == 5


def test_security_view_is_uniform():
    p = validate(3, [(1, (1, 2, 3))])
    inst = build_instance(p, 1, 1, q=5)
    # Message-independence plus per-realization uniformity: enumerate one
    # realization's table directly through the public API.
    from graphpir.scheme import TableTape
    counts = {}
    store = MessageStore.from_ints(inst, {1: [[3]]})
    for z in range(5):
        storages = encode_storage(inst, store, TableTape(5, storage={(1, 1, 1): (z,)}))
        counts[storages[0].shares[(1, 1)][0].value] = (
            counts.get(storages[0].shares[(1, 1)][0].value, 0) + 1
        )
    assert counts == {v: 1 for v in range(5)}


def test_security_rejects_unsecured_instance():
    with pytest.raises(PreconditionError):
        verify_security_exhaustive(tiny_instance(), (1,))


def test_security_overfull_collusion_fails():
    p = validate(3, [(1, (1, 2, 3))])
    inst = build_instance(p, 1, 1, q=5)
    res = verify_security_exhaustive(inst, (1, 2))
    assert not res.ok


def test_share_determination_ranks():
    p = validate(4, [(1, (1, 2, 3, 4))])
    inst = build_instance(p, 2, 1, q=11)  # X = 2
    assert not shares_determine_symbol(inst, (1,))
    assert not shares_determine_symbol(inst, (1, 2))
    assert shares_determine_symbol(inst, (1, 2, 3))
    assert shares_determine_symbol(inst, (1, 2, 3, 4))


def test_security_partial_grid():
    # Noise space fits the budget but grid x noise does not, forcing the
    # two-point-plus-random message grid.
    p = validate(3, [(4, (1, 2, 3))])
    inst = build_instance(p, 1, 1, q=5)
    res = verify_security_exhaustive(inst, (2,), EnumerationBudget(10_000))
    assert res.ok and res.partial and res.states == 625


def test_rank_intuition_fixture():
    p = validate(4, [(1, (2, 3, 4)), (1, (1, 3, 4)), (1, (1, 2, 4)), (1, (1, 2, 3))])
    assert verify_rank_intuition(p, q=5)


def test_rank_intuition_random_patterns():
    rng = random.Random(12)
    for _ in range(20):
        p = random_constant_rho_pattern(rng)
        assert verify_rank_intuition(p)


def test_rank_intuition_needs_constant_replication():
    with pytest.raises(PreconditionError):
        verify_rank_intuition(FIXTURES["redundant_server"].pattern)


def test_rank_intuition_trivial_replication():
    p = validate(3, [(1, (1,)), (1, (2,))])
    assert verify_rank_intuition(p)  # rho_min = 1: nothing to annihilate
