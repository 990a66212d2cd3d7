"""Database properties and their classical/quantum transition quantities.

A property P is a monotone set of partial databases D: [M] -> [N] (monotone:
adding entries never destroys membership).  The central quantity is the
transition probability

    p_nu = max over D not in P with |D| <= nu, and x outside D, of
           Pr over uniform y of D + {x: y} in P,

computed exactly by enumeration.  `extend_polynomial` interpolates the exact
sequence p_0, p_1, ... with the lowest-degree polynomial through it so the
bound evaluators can use fractional indices like B/kappa.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Callable


@dataclass(frozen=True)
class PropertySpec:
    """A named monotone property of partial databases over [M] -> [N]."""

    name: str
    predicate: Callable[[dict], bool]

    def holds(self, db: dict) -> bool:
        return bool(self.predicate(db))


def preimage_property() -> PropertySpec:
    return PropertySpec("preimage_zero", lambda db: any(v == 0 for v in db.values()))


def collision_property() -> PropertySpec:
    def pred(db: dict) -> bool:
        vals = list(db.values())
        return len(set(vals)) < len(vals)

    return PropertySpec("collision", pred)


def ksum_property(k: int, N: int) -> PropertySpec:
    def pred(db: dict) -> bool:
        xs = list(db)
        return any(
            sum(db[x] for x in combo) % N == 0
            for combo in combinations(xs, k)
        )

    return PropertySpec(f"ksum{k}", pred)


def check_monotone(prop: PropertySpec, M: int, N: int) -> bool:
    """Exhaustively verify monotonicity on all partial databases over [M]x[N]."""
    for size in range(M):
        for xs in combinations(range(M), size):
            for vals in product(range(N), repeat=size):
                db = dict(zip(xs, vals))
                if not prop.holds(db):
                    continue
                for x in range(M):
                    if x in db:
                        continue
                    for y in range(N):
                        if not prop.holds(db | {x: y}):
                            return False
    return True


def transition_probability(prop: PropertySpec, M: int, N: int,
                           nu: int) -> Fraction:
    """Exact p_nu for databases over [M] -> [N] (0 if nothing can transition)."""
    if nu < 0:
        return Fraction(0)
    best = Fraction(0)
    for size in range(min(nu, M) + 1):
        for xs in combinations(range(M), size):
            for vals in product(range(N), repeat=size):
                db = dict(zip(xs, vals))
                if prop.holds(db):
                    continue
                for x in range(M):
                    if x in db:
                        continue
                    hits = sum(1 for y in range(N) if prop.holds(db | {x: y}))
                    cand = Fraction(hits, N)
                    if cand > best:
                        best = cand
    return best


def transition_sequence(prop: PropertySpec, M: int, N: int) -> list[Fraction]:
    """p_0, ..., p_{M-1} (beyond M-1 there is no room for a fresh x)."""
    return [transition_probability(prop, M, N, nu) for nu in range(M)]


def extend_polynomial(points: list[Fraction]) -> Callable[[Fraction], Fraction]:
    """The unique lowest-degree polynomial through (i, points[i]).

    Uses Newton forward differences; evaluation at any rational t is exact:
    p(t) = sum_j delta^j p_0 * C(t, j).
    """
    if not points:
        raise ValueError("need at least one point")
    diffs = [Fraction(p) for p in points]
    deltas = [diffs[0]]
    while len(diffs) > 1 and any(diffs):
        diffs = [b - a for a, b in zip(diffs, diffs[1:])]
        deltas.append(diffs[0])
    while len(deltas) > 1 and deltas[-1] == 0:
        deltas.pop()

    def poly(t) -> Fraction:
        t = Fraction(t)
        total = Fraction(0)
        for j, d in enumerate(deltas):
            binom = Fraction(1)
            for i in range(j):
                binom *= (t - i) / (j - i)
            total += d * binom
        return total

    return poly


def gamma_extended(prop: PropertySpec, M: int, N: int) -> Callable[[Fraction], Fraction]:
    """gamma(t) = t^2 * p(t) with p the polynomial extension of the exact
    transition sequence."""
    poly = extend_polynomial(transition_sequence(prop, M, N))

    def gamma(t) -> Fraction:
        t = Fraction(t)
        return t * t * poly(t)

    return gamma


def classical_property_value(prop: PropertySpec, M: int, N: int,
                             T: int) -> Fraction:
    """Optimal probability that T adaptive classical queries to a uniform
    table leave a learned database satisfying the property."""
    memo: dict = {}

    def value(db_items: tuple, t: int) -> Fraction:
        db = dict(db_items)
        if prop.holds(db):
            return Fraction(1)
        if t == 0 or len(db) == M:
            return Fraction(0)
        key = (db_items, t)
        if key in memo:
            return memo[key]
        best = Fraction(0)
        for x in range(M):
            if x in db:
                continue
            total = Fraction(0)
            for y in range(N):
                child = tuple(sorted((db | {x: y}).items()))
                total += value(child, t - 1)
            cand = total / N
            if cand > best:
                best = cand
        memo[key] = best
        return best

    return value((), T)


def classical_transition_bound(prop: PropertySpec, M: int, N: int,
                               T: int) -> Fraction:
    """sum_{i < T} p_i: the classical ceiling for property finding."""
    return sum(
        (transition_probability(prop, M, N, i) for i in range(T)), Fraction(0)
    )
