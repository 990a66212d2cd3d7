import random
from fractions import Fraction
from itertools import product

import pytest

from saltlab.composition import (
    FairExecutor,
    MemorylessAlgorithm,
    ProgramNode,
    distinct_salt_product_bound,
    exact_win_probability,
    max_fair_value,
    multi_salt_value,
    program_depth,
    random_program,
    run_memoryless,
    sdpt_product_bound,
)
from saltlab.games import OracleTable, collision_game, preimage_game, salt


def out(a):
    return ProgramNode(answer=a)


def q(j, x, *children):
    return ProgramNode(oracle=j, position=x, children=tuple(children))


def test_budget_enforced():
    with pytest.raises(ValueError):
        MemorylessAlgorithm([q(0, 0, out(0), out(0))], [0])


def test_sequential_run_counts_queries():
    alg = MemorylessAlgorithm(
        [q(1, 0, out(0), out(0)), q(0, 0, out(0), out(0))], [1, 1]
    )
    outputs, counts = run_memoryless(
        alg, [OracleTable(1, 2, (0,)), OracleTable(1, 2, (1,))]
    )
    assert outputs == [0, 0]
    assert counts == [1, 1]  # each oracle hit once, but by the wrong owner


def test_crossing_pair_is_a_cycle():
    # A_0 wants f_1 and A_1 wants f_0: the executor advances both at once
    games = [preimage_game(1, 2), preimage_game(1, 2)]
    alg = MemorylessAlgorithm(
        [q(1, 0, out(0), out(0)), q(0, 0, out(0), out(0))], [1, 1]
    )
    ex = FairExecutor(alg, games)
    trace = ex.run([OracleTable(1, 2, (0,)), OracleTable(1, 2, (1,))])
    trace.assert_fair([1, 1])
    assert {(s.algo, s.oracle) for s in trace.steps} == {(0, 1), (1, 0)}
    assert not any(s.simulated for s in trace.steps)


def test_self_query_advances_alone():
    # regression: A_0 querying f_0 is a length-1 cycle; advancing it together
    # with a waiting A_1 would double-hit f_0
    games = [preimage_game(2, 2), preimage_game(2, 2)]
    alg = MemorylessAlgorithm(
        [q(0, 0, out(0), out(0)), q(0, 1, out(0), out(1))], [1, 1]
    )
    ex = FairExecutor(alg, games)
    for combo in product(*(g.oracle_dist for g in games)):
        trace = ex.run([f for f, _ in combo])
        trace.assert_fair([1, 1])


def test_terminated_target_is_simulated():
    # A_0 finishes first; A_1 then asks f_0 and must get the substitute
    games = [preimage_game(1, 2), preimage_game(1, 2)]
    alg = MemorylessAlgorithm(
        [out(0), q(0, 0, out(0), out(0))], [0, 1]
    )
    ex = FairExecutor(alg, games)
    trace = ex.run([OracleTable(1, 2, (1,)), OracleTable(1, 2, (0,))])
    assert [s.simulated for s in trace.steps] == [True]
    assert trace.real_counts(2) == [0, 0]


def test_out_of_order_without_simulation_preserves_outputs():
    rng = random.Random(5)
    games = [preimage_game(2, 2), collision_game(2, 2)]
    for _ in range(25):
        budgets = [rng.randint(1, 2), rng.randint(1, 2)]
        progs = [random_program(rng, 2, games, budgets[i], i) for i in range(2)]
        alg = MemorylessAlgorithm(progs, budgets)
        plain = FairExecutor(alg, games, simulate=False)
        for combo in product(*(g.oracle_dist for g in games)):
            oracles = [f for f, _ in combo]
            assert plain.run(oracles).outputs == run_memoryless(alg, oracles)[0]


def test_reduction_never_loses_value():
    rng = random.Random(6)
    games = [preimage_game(2, 2), preimage_game(2, 2)]
    for _ in range(15):
        budgets = [rng.randint(1, 2), rng.randint(1, 2)]
        progs = [random_program(rng, 2, games, budgets[i], i) for i in range(2)]
        alg = MemorylessAlgorithm(progs, budgets)
        fair = FairExecutor(alg, games)
        assert exact_win_probability(fair, games) >= \
            exact_win_probability(alg, games)
        assert exact_win_probability(fair, games) <= \
            sdpt_product_bound(games, budgets)


def test_substitute_choice_actually_helps():
    # A_0 learns nothing and outputs 0; A_1 copies f_0(0) as its answer
    # position.  Sequentially A_1 wins iff f_1(f_0(0)) = 0; fairly, f_0 is
    # replaced by the best consistent table, which can only help.
    games = [preimage_game(1, 2), preimage_game(2, 2)]
    alg = MemorylessAlgorithm(
        [out(0), q(0, 0, out(0), out(1))], [1, 1]
    )
    fair = FairExecutor(alg, games)
    p_seq = exact_win_probability(alg, games)
    p_fair = exact_win_probability(fair, games)
    assert p_fair >= p_seq


def test_max_fair_value_tight_product():
    games = [preimage_game(1, 2), preimage_game(1, 2)]
    assert max_fair_value(games, [1, 1]) == Fraction(1, 4)
    assert sdpt_product_bound(games, [1, 1]) == Fraction(1, 4)


def test_max_fair_value_monotone_in_budget():
    games = [preimage_game(2, 2), preimage_game(1, 2)]
    v00 = max_fair_value(games, [0, 0])
    v10 = max_fair_value(games, [1, 0])
    v11 = max_fair_value(games, [1, 1])
    assert v00 <= v10 <= v11


def test_multi_salt_value_and_claim_bound():
    base = preimage_game(1, 2)
    salted = salt(base, 2)

    def adversary(ch):
        k, _ = ch
        return q(0, k, out(0), out(0))

    v1 = multi_salt_value(base, 2, adversary, 1, salted=salted)
    v2 = multi_salt_value(base, 2, adversary, 2, salted=salted)
    assert v1 == Fraction(1, 2)
    assert v2 == Fraction(3, 8)
    assert v2 >= v1 ** 2  # E[p^2] >= (E p)^2
    claim = distinct_salt_product_bound(base, 2, 2, 1)
    assert claim == Fraction(3, 8)
    assert v2 <= claim


def test_random_program_respects_budget():
    rng = random.Random(1)
    games = [preimage_game(2, 2), collision_game(2, 2)]
    for _ in range(50):
        prog = random_program(rng, 2, games, 2, 1)
        assert 1 <= program_depth(prog) <= 2
