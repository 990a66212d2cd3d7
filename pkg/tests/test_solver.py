from fractions import Fraction

import pytest

from saltlab.games import (
    BudgetExceededError,
    collision_game,
    condition_on_challenge,
    challenge_marginal,
    inversion_game,
    multi_challenge,
    preimage_game,
    salt,
)
from saltlab.solver import (
    ValueCache,
    multi_challenge_value,
    optimal_nonuniform_value,
    optimal_strategy,
    optimal_value,
    strategy_depth,
    strategy_value,
)


def test_preimage_closed_form():
    game = preimage_game(4, 4)
    for T in range(4):
        assert optimal_value(game, T) == 1 - Fraction(3, 4) ** (T + 1)


def test_collision_small():
    game = collision_game(2, 2)
    assert optimal_value(game, 2) == Fraction(1, 2)
    # with no queries the best fixed pair still wins on half the tables
    assert optimal_value(game, 0) == Fraction(1, 2)


def test_value_monotone_in_T():
    game = inversion_game(3, 2)
    vals = [optimal_value(game, T) for T in range(4)]
    assert vals == sorted(vals)


def test_queries_beyond_domain_are_idle():
    game = preimage_game(2, 3)
    assert optimal_value(game, 2) == optimal_value(game, 10)


def test_cache_coherence():
    game = inversion_game(2, 3)
    cache = ValueCache()
    first = optimal_value(game, 2, cache)
    assert cache.misses > 0
    cache.clear()
    assert optimal_value(game, 2, cache) == first
    assert optimal_value(game, 2) == first


def test_conditioning_identity_small():
    game = inversion_game(2, 3)
    split = sum(
        p * optimal_value(condition_on_challenge(game, ch), 1)
        for ch, p in challenge_marginal(game).items()
    )
    assert split == optimal_value(game, 1)


def test_strategy_matches_value():
    for game, T in ((preimage_game(3, 2), 2), (collision_game(3, 2), 2)):
        tree = optimal_strategy(game, T)
        assert strategy_depth(tree) <= T
        assert strategy_value(tree, game) == optimal_value(game, T)


def test_strategy_for_challenge_games_needs_challenge():
    game = inversion_game(2, 2)
    with pytest.raises(ValueError):
        optimal_strategy(game, 1)
    tree = optimal_strategy(game, 1, challenge=0)
    assert strategy_value(tree, condition_on_challenge(game, 0)) == \
        optimal_value(condition_on_challenge(game, 0), 1)


def test_trivial_game_outputs_immediately():
    g0 = multi_challenge(preimage_game(2, 2), 0)
    tree = optimal_strategy(g0, 2)
    assert tree.is_output and tree.answer == ()


def test_strategy_deterministic():
    game = preimage_game(3, 2)
    t1 = optimal_strategy(game, 2)
    t2 = optimal_strategy(game, 2)
    assert t1 == t2


# frozen by direct advice-map enumeration on the 4 joint oracles of the
# 2-salted single-cell game: the answer is forced (one position), so advice
# cannot beat the uniform value anywhere on this grid
NONUNIFORM_TABLE = {
    (0, 0): Fraction(1, 2),
    (1, 0): Fraction(1, 2),
    (0, 1): Fraction(1, 2),
    (1, 1): Fraction(1, 2),
}


def test_nonuniform_frozen_values():
    salted = salt(preimage_game(1, 2), 2)
    for (S, T), want in NONUNIFORM_TABLE.items():
        assert optimal_nonuniform_value(salted, S, T) == want


def test_nonuniform_dominates_uniform_and_monotone_in_S():
    salted = salt(preimage_game(1, 2), 2)
    for T in (0, 1):
        uni = optimal_value(salted, T)
        v0 = optimal_nonuniform_value(salted, 0, T)
        v1 = optimal_nonuniform_value(salted, 1, T)
        v2 = optimal_nonuniform_value(salted, 2, T)
        assert uni == v0 <= v1 <= v2


def test_nonuniform_advice_separates_when_it_can():
    # two cells per salt: advice can point at the zero, queries cannot reach
    # both cells with T=1, so one advice bit is worth something
    salted = salt(preimage_game(2, 2), 1)
    assert optimal_nonuniform_value(salted, 1, 0) > optimal_value(salted, 0)


def test_nonuniform_budget_guard():
    salted = salt(preimage_game(1, 2), 2)
    with pytest.raises(BudgetExceededError):
        optimal_nonuniform_value(salted, 8, 0, budget=100)


def test_multi_challenge_value():
    game = preimage_game(2, 2)
    assert multi_challenge_value(game, 0, 3) == 1
    # both challenges of the trivial challenge space coincide: value is the
    # probability a zero exists at all
    assert multi_challenge_value(game, 2, 1) == Fraction(3, 4)
    inv = inversion_game(1, 2)
    # both i.i.d. challenges must hit f(0): (1/2)^2 for every table
    assert multi_challenge_value(inv, 2, 1) == Fraction(1, 4)
