"""Exact optimal-adversary values for the games in `saltlab.games`.

The core recursion works on "mass" rather than probability: W(u, t) is the
maximum, over adaptive T-query strategies, of the total (unnormalized) weight
of oracles consistent with the partial view u on which the strategy wins.
Summing W over challenges with joint weights mu(f) * pi_f(ch) gives the
optimal winning probability directly, with no normalization anywhere.

All arithmetic is `fractions.Fraction`; ties break toward the smallest index
(answers before queries, both scanned in ascending order).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .games import (
    BudgetExceededError,
    Game,
    NO_CHALLENGE,
    OracleTable,
    condition_on_challenge,
    multi_challenge,
)

#: default cap on the number of enumerated advice maps
DEFAULT_ADVICE_BUDGET = 1 << 20


@dataclass
class ValueCache:
    """Memo table for the value recursion; safe to clear between calls."""

    table: dict = field(default_factory=dict)
    hits: int = 0
    misses: int = 0

    def clear(self) -> None:
        self.table.clear()
        self.hits = self.misses = 0


def _consistent(f: OracleTable, view: tuple) -> bool:
    return all(v is None or f.values[x] == v for x, v in enumerate(view))


def _mass_value(masses, game: Game, challenge, view, t, cache: ValueCache) -> Fraction:
    """Max winning mass from partial view `view` with `t` queries left."""
    key = (challenge, view, t)
    if key in cache.table:
        cache.hits += 1
        return cache.table[key]
    cache.misses += 1
    cons = [(f, m) for f, m in masses if _consistent(f, view)]
    pred = game.predicate
    best = Fraction(0)
    if cons:
        for ans in game.answer_space:
            mass = sum((m for f, m in cons if pred(f, challenge, ans)), Fraction(0))
            if mass > best:
                best = mass
        if t > 0:
            for x, v in enumerate(view):
                if v is not None:
                    continue  # re-querying a known cell never helps
                total = Fraction(0)
                for val in range(game.range_size):
                    child = view[:x] + (val,) + view[x + 1 :]
                    total += _mass_value(masses, game, challenge, child, t - 1, cache)
                if total > best:
                    best = total
    cache.table[key] = best
    return best


def _joint_masses(game: Game, challenge):
    """(f, mu(f) * pi_f(challenge)) for every oracle, dropping zero mass."""
    out = []
    for f, w in game.oracle_dist:
        p = Fraction(0)
        for ch, q in game.challenge_dist(f):
            if ch == challenge:
                p += q
        if w * p:
            out.append((f, w * p))
    return out


def optimal_value(game: Game, T: int, cache: ValueCache | None = None) -> Fraction:
    """Exact optimal winning probability with T adaptive queries."""
    if T < 0:
        raise ValueError("T must be >= 0")
    T = min(T, game.domain_size)  # extra queries past the full table are idle
    empty = (None,) * game.domain_size
    total = Fraction(0)
    for challenge in game.challenge_space:
        masses = _joint_masses(game, challenge)
        if not masses:
            continue
        total += _mass_value(masses, game, challenge, empty, T,
                             cache if cache is not None else ValueCache())
    return total


@dataclass(frozen=True)
class StrategyTree:
    """A deterministic strategy: either output `answer` now, or query
    `position` and continue in `children[value]`."""

    answer: object = None
    position: int | None = None
    children: tuple = ()

    @property
    def is_output(self) -> bool:
        return self.position is None


def optimal_strategy(game: Game, T: int, challenge=NO_CHALLENGE) -> StrategyTree:
    """An optimal strategy tree for the game conditioned on `challenge`.

    For plain games pass the default challenge.  Ties prefer outputting
    (then the smallest answer / position index), so a game that is already
    won collapses to an immediate output node.
    """
    if challenge is NO_CHALLENGE and not game.is_plain:
        if len(game.challenge_space) == 1:
            challenge = game.challenge_space[0]
        else:
            raise ValueError("game has challenges; pass one explicitly")
    plain = game if (game.is_plain and challenge is NO_CHALLENGE) else \
        condition_on_challenge(game, challenge)
    cache = ValueCache()
    masses = list(plain.oracle_dist)
    T = min(max(T, 0), plain.domain_size)
    empty = (None,) * plain.domain_size

    def build(view, t) -> StrategyTree:
        cons = [(f, m) for f, m in masses if _consistent(f, view)]
        best_ans, best_mass = plain.answer_space[0], Fraction(-1)
        for ans in plain.answer_space:
            mass = sum(
                (m for f, m in cons if plain.predicate(f, NO_CHALLENGE, ans)),
                Fraction(0),
            )
            if mass > best_mass:
                best_ans, best_mass = ans, mass
        if t > 0 and cons:
            for x, v in enumerate(view):
                if v is not None:
                    continue
                total = Fraction(0)
                for val in range(plain.range_size):
                    child = view[:x] + (val,) + view[x + 1 :]
                    total += _mass_value(masses, plain, NO_CHALLENGE, child,
                                         t - 1, cache)
                if total > best_mass:
                    kids = tuple(
                        build(view[:x] + (val,) + view[x + 1 :], t - 1)
                        for val in range(plain.range_size)
                    )
                    return StrategyTree(position=x, children=kids)
        return StrategyTree(answer=best_ans)

    return build(empty, T)


def strategy_value(tree: StrategyTree, plain_game: Game) -> Fraction:
    """Exact winning probability of a fixed strategy on a plain game."""
    total = Fraction(0)
    for f, w in plain_game.oracle_dist:
        node = tree
        while not node.is_output:
            node = node.children[f.values[node.position]]
        if plain_game.predicate(f, NO_CHALLENGE, node.answer):
            total += w
    return total


def strategy_depth(tree: StrategyTree) -> int:
    if tree.is_output:
        return 0
    return 1 + max(strategy_depth(c) for c in tree.children)


def optimal_nonuniform_value(
    game: Game, S: int, T: int, budget: int = DEFAULT_ADVICE_BUDGET
) -> Fraction:
    """Optimal value with S bits of oracle-dependent advice and T queries.

    Enumerates every advice map sigma: oracle -> {0, ..., 2^S - 1}; the
    online phase plays optimally given the advice value and the challenge.
    Exponential in S * #oracles, guarded by `budget`.
    """
    if S < 0:
        raise ValueError("S must be >= 0")
    oracles = [f for f, _ in game.oracle_dist]
    n_adv = 1 << S
    n_maps = n_adv ** len(oracles)
    if n_maps > budget:
        raise BudgetExceededError(f"{n_maps} advice maps exceed budget {budget}")
    weights = {f.values: w for f, w in game.oracle_dist}
    T = min(T, game.domain_size)
    empty = (None,) * game.domain_size

    best = Fraction(0)
    for sigma in product(range(n_adv), repeat=len(oracles)):
        total = Fraction(0)
        for a in set(sigma):
            subset = [f for f, s in zip(oracles, sigma) if s == a]
            cache = ValueCache()
            for challenge in game.challenge_space:
                masses = []
                for f in subset:
                    p = Fraction(0)
                    for ch, q in game.challenge_dist(f):
                        if ch == challenge:
                            p += q
                    if weights[f.values] * p:
                        masses.append((f, weights[f.values] * p))
                if masses:
                    total += _mass_value(masses, game, challenge, empty, T, cache)
        if total > best:
            best = total
    return best


def multi_challenge_value(game: Game, n: int, T_per: int) -> Fraction:
    """Optimal value of the n-fold challenge game with a budget of n * T_per."""
    if n == 0:
        return Fraction(1)
    return optimal_value(multi_challenge(game, n), n * T_per)
