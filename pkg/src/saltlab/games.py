"""Finite query games over explicitly enumerated oracle distributions.

A game is described by a distribution over oracle tables f: [M] -> [N], a
(possibly oracle-dependent) challenge distribution, a finite answer space and
a winning predicate R(f, challenge, answer).  Everything is exact: weights
are `fractions.Fraction` and oracle spaces are enumerated, so the module is
meant for small parameters (the solvers downstream are exponential anyway).

Conventions: positions, values, salts and challenges are all 0-indexed.
A "plain" game has the single challenge `None`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations, product
from typing import Callable, Iterable, Sequence

NO_CHALLENGE = None

#: default cap on the number of oracle tables any constructor may enumerate
DEFAULT_ORACLE_BUDGET = 1 << 16


class BudgetExceededError(RuntimeError):
    """An enumeration would exceed the configured oracle/challenge budget."""


class GameSpecError(ValueError):
    """A game description is malformed or references an unknown family."""


@dataclass(frozen=True)
class OracleTable:
    """An explicit function table ``values[x] = f(x)`` with range [0, range_size)."""

    domain_size: int
    range_size: int
    values: tuple[int, ...]

    def __post_init__(self):
        if len(self.values) != self.domain_size:
            raise GameSpecError(
                f"table has {len(self.values)} entries, expected {self.domain_size}"
            )
        if any(not (0 <= v < self.range_size) for v in self.values):
            raise GameSpecError("table value out of range")

    def __getitem__(self, x: int) -> int:
        return self.values[x]

    def component(self, k: int, block: int) -> "OracleTable":
        """The k-th length-`block` slice of a flat salted table."""
        lo = k * block
        return OracleTable(block, self.range_size, self.values[lo : lo + block])


ChallengeDist = Callable[[OracleTable], tuple[tuple[object, Fraction], ...]]
Predicate = Callable[[OracleTable, object, object], bool]


@dataclass(frozen=True)
class Game:
    """A finite oracle game.

    oracle_dist     pairs (table, weight); weights sum to 1
    challenge_space all challenges that can occur (for any oracle)
    challenge_dist  per-oracle challenge distribution
    answer_space    all legal answers
    predicate       predicate(f, challenge, answer) -> bool
    """

    domain_size: int
    range_size: int
    oracle_dist: tuple[tuple[OracleTable, Fraction], ...]
    challenge_space: tuple
    challenge_dist: ChallengeDist
    answer_space: tuple
    predicate: Predicate

    @property
    def is_plain(self) -> bool:
        return self.challenge_space == (NO_CHALLENGE,)

    def check_distributions(self) -> None:
        """Raise if oracle weights or any challenge distribution is not normalized."""
        if sum(w for _, w in self.oracle_dist) != 1:
            raise GameSpecError("oracle weights do not sum to 1")
        for f, _ in self.oracle_dist:
            pairs = self.challenge_dist(f)
            if sum(w for _, w in pairs) != 1:
                raise GameSpecError("challenge weights do not sum to 1")
            for ch, _ in pairs:
                if ch not in self.challenge_space:
                    raise GameSpecError(f"challenge {ch!r} outside challenge space")


def evaluate_predicate(game: Game, oracle: OracleTable, challenge, answer) -> bool:
    """Evaluate the winning predicate (thin wrapper kept for symmetry)."""
    return bool(game.predicate(oracle, challenge, answer))


def challenge_marginal(game: Game) -> dict:
    """Marginal challenge distribution Pr[ch] = sum_f mu(f) pi_f(ch)."""
    marg: dict = {}
    for f, w in game.oracle_dist:
        for ch, p in game.challenge_dist(f):
            marg[ch] = marg.get(ch, Fraction(0)) + w * p
    return marg


def _plain_dist(f: OracleTable):
    return ((NO_CHALLENGE, Fraction(1)),)


def _uniform_tables(M: int, N: int, budget: int) -> tuple:
    count = N**M
    if count > budget:
        raise BudgetExceededError(f"{count} oracle tables exceed budget {budget}")
    w = Fraction(1, count)
    return tuple(
        (OracleTable(M, N, vals), w) for vals in product(range(N), repeat=M)
    )


def preimage_game(M: int, N: int, budget: int = DEFAULT_ORACLE_BUDGET) -> Game:
    """Find x with f(x) = 0."""
    return Game(
        domain_size=M,
        range_size=N,
        oracle_dist=_uniform_tables(M, N, budget),
        challenge_space=(NO_CHALLENGE,),
        challenge_dist=_plain_dist,
        answer_space=tuple(range(M)),
        predicate=lambda f, ch, x: f[x] == 0,
    )


def collision_game(M: int, N: int, budget: int = DEFAULT_ORACLE_BUDGET) -> Game:
    """Find an ordered pair (x, x') with x != x' and f(x) = f(x')."""
    answers = tuple((x, y) for x, y in permutations(range(M), 2))
    return Game(
        domain_size=M,
        range_size=N,
        oracle_dist=_uniform_tables(M, N, budget),
        challenge_space=(NO_CHALLENGE,),
        challenge_dist=_plain_dist,
        answer_space=answers,
        predicate=lambda f, ch, a: a[0] != a[1] and f[a[0]] == f[a[1]],
    )


def ksum_game(M: int, N: int, k: int, budget: int = DEFAULT_ORACLE_BUDGET) -> Game:
    """Find k distinct positions whose values sum to 0 mod N."""
    if not 1 <= k <= M:
        raise GameSpecError("need 1 <= k <= M for ksum")
    answers = tuple(combinations(range(M), k))
    return Game(
        domain_size=M,
        range_size=N,
        oracle_dist=_uniform_tables(M, N, budget),
        challenge_space=(NO_CHALLENGE,),
        challenge_dist=_plain_dist,
        answer_space=answers,
        predicate=lambda f, ch, xs: sum(f[x] for x in xs) % N == 0,
    )


def inversion_game(M: int, N: int, budget: int = DEFAULT_ORACLE_BUDGET) -> Game:
    """Given a uniform challenge y, find x with f(x) = y."""
    w = Fraction(1, N)
    return Game(
        domain_size=M,
        range_size=N,
        oracle_dist=_uniform_tables(M, N, budget),
        challenge_space=tuple(range(N)),
        challenge_dist=lambda f: tuple((y, w) for y in range(N)),
        answer_space=tuple(range(M)),
        predicate=lambda f, y, x: f[x] == y,
    )


def custom_table_game(M: int, N: int, tables: Sequence[Sequence[int]]) -> Game:
    """Uniform distribution over explicitly given tables; win iff f(answer) = 0."""
    if not tables:
        raise GameSpecError("custom_table requires at least one table")
    dist = tuple(
        (OracleTable(M, N, tuple(t)), Fraction(1, len(tables))) for t in tables
    )
    return Game(
        domain_size=M,
        range_size=N,
        oracle_dist=dist,
        challenge_space=(NO_CHALLENGE,),
        challenge_dist=_plain_dist,
        answer_space=tuple(range(M)),
        predicate=lambda f, ch, x: f[x] == 0,
    )


def salt(game: Game, K: int, budget: int = DEFAULT_ORACLE_BUDGET) -> Game:
    """The K-salted version of `game`.

    The oracle is a flat table over K * M cells (cell k*M + x holds f_k(x)),
    drawn as K independent copies of the base oracle.  The challenge is a
    uniformly random salt k together with a base challenge for f_k; answers
    and the predicate are those of the base game applied to the k-th slice.
    """
    if K < 1:
        raise GameSpecError("K must be >= 1")
    n_base = len(game.oracle_dist)
    if n_base**K > budget:
        raise BudgetExceededError(
            f"{n_base}^{K} joint oracles exceed budget {budget}"
        )
    M = game.domain_size
    joint = []
    for combo in product(game.oracle_dist, repeat=K):
        vals: tuple[int, ...] = ()
        w = Fraction(1)
        for f, wf in combo:
            vals += f.values
            w *= wf
        joint.append((OracleTable(K * M, game.range_size, vals), w))

    base_dist = game.challenge_dist
    salt_w = Fraction(1, K)

    def challenge_dist(g: OracleTable):
        out = []
        for k in range(K):
            fk = g.component(k, M)
            for ch, p in base_dist(fk):
                out.append(((k, ch), salt_w * p))
        return tuple(out)

    ch_space = tuple((k, ch) for k in range(K) for ch in game.challenge_space)
    base_pred = game.predicate

    def predicate(g: OracleTable, ch, ans):
        k, base_ch = ch
        return base_pred(g.component(k, M), base_ch, ans)

    return Game(
        domain_size=K * M,
        range_size=game.range_size,
        oracle_dist=tuple(joint),
        challenge_space=ch_space,
        challenge_dist=challenge_dist,
        answer_space=game.answer_space,
        predicate=predicate,
    )


def condition_on_challenge(game: Game, challenge) -> Game:
    """The plain game obtained by fixing a challenge and Bayes-updating the oracle.

    mu_ch(f) = mu(f) * pi_f(ch) / Pr[ch].  Raises GameSpecError if the
    challenge has zero marginal probability.
    """
    masses = []
    total = Fraction(0)
    for f, w in game.oracle_dist:
        p = Fraction(0)
        for ch, q in game.challenge_dist(f):
            if ch == challenge:
                p += q
        m = w * p
        if m:
            masses.append((f, m))
        total += m
    if total == 0:
        raise GameSpecError(f"challenge {challenge!r} has probability zero")
    dist = tuple((f, m / total) for f, m in masses)
    pred = game.predicate
    return Game(
        domain_size=game.domain_size,
        range_size=game.range_size,
        oracle_dist=dist,
        challenge_space=(NO_CHALLENGE,),
        challenge_dist=_plain_dist,
        answer_space=game.answer_space,
        predicate=lambda f, ch, a, _c=challenge: pred(f, _c, a),
    )


def multi_challenge(game: Game, n: int, budget: int = DEFAULT_ORACLE_BUDGET) -> Game:
    """The n-fold challenge game: one oracle, n i.i.d. challenges, win on all.

    n = 0 yields the trivial always-won game (empty challenge, empty answer).
    """
    if n < 0:
        raise GameSpecError("n must be >= 0")
    if len(game.challenge_space) ** n > budget or len(game.answer_space) ** max(n, 1) > budget:
        raise BudgetExceededError("multi-challenge spaces exceed budget")
    ch_space = tuple(product(game.challenge_space, repeat=n))
    ans_space = tuple(product(game.answer_space, repeat=n))
    base_dist = game.challenge_dist
    base_pred = game.predicate

    def challenge_dist(f: OracleTable):
        pairs = base_dist(f)
        out = []
        for combo in product(pairs, repeat=n):
            w = Fraction(1)
            for _, p in combo:
                w *= p
            out.append((tuple(ch for ch, _ in combo), w))
        return tuple(out)

    def predicate(f: OracleTable, chs, answers):
        return all(base_pred(f, ch, a) for ch, a in zip(chs, answers))

    return Game(
        domain_size=game.domain_size,
        range_size=game.range_size,
        oracle_dist=game.oracle_dist,
        challenge_space=ch_space,
        challenge_dist=challenge_dist,
        answer_space=ans_space,
        predicate=predicate,
    )


FAMILIES = ("preimage_zero", "collision", "ksum", "inversion", "custom_table")

_SPEC_KEYS = {"family", "M", "N", "K", "k", "tables"}


@dataclass(frozen=True)
class GameSpec:
    """A JSON-friendly description of a (possibly salted) family game."""

    family: str
    M: int
    N: int
    K: int = 1
    k: int | None = None
    tables: tuple[tuple[int, ...], ...] | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "GameSpec":
        unknown = set(d) - _SPEC_KEYS
        if unknown:
            raise GameSpecError(f"unknown keys in game spec: {sorted(unknown)}")
        if "family" not in d or "M" not in d or "N" not in d:
            raise GameSpecError("game spec needs at least family, M and N")
        family = d["family"]
        if family not in FAMILIES:
            raise GameSpecError(f"unknown family {family!r}")
        M, N, K = int(d["M"]), int(d["N"]), int(d.get("K", 1))
        if M < 1 or N < 1 or K < 1:
            raise GameSpecError("M, N, K must be positive")
        k = d.get("k")
        if family == "ksum" and k is None:
            raise GameSpecError("ksum requires k")
        tables = None
        if family == "custom_table":
            if "tables" not in d:
                raise GameSpecError("custom_table requires tables")
            tables = tuple(tuple(int(v) for v in t) for t in d["tables"])
        elif "tables" in d:
            raise GameSpecError("tables only allowed for custom_table")
        return cls(family=family, M=M, N=N, K=K,
                   k=None if k is None else int(k), tables=tables)

    @classmethod
    def from_json(cls, text: str) -> "GameSpec":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        d = {"family": self.family, "M": self.M, "N": self.N, "K": self.K}
        if self.k is not None:
            d["k"] = self.k
        if self.tables is not None:
            d["tables"] = [list(t) for t in self.tables]
        return d


def build_game(spec: GameSpec, budget: int = DEFAULT_ORACLE_BUDGET) -> Game:
    """Materialize a GameSpec into an explicit Game (salted if K > 1)."""
    if spec.family == "preimage_zero":
        base = preimage_game(spec.M, spec.N, budget)
    elif spec.family == "collision":
        base = collision_game(spec.M, spec.N, budget)
    elif spec.family == "ksum":
        base = ksum_game(spec.M, spec.N, spec.k, budget)
    elif spec.family == "inversion":
        base = inversion_game(spec.M, spec.N, budget)
    elif spec.family == "custom_table":
        base = custom_table_game(spec.M, spec.N, spec.tables)
    else:  # pragma: no cover - from_dict already validates
        raise GameSpecError(f"unknown family {spec.family!r}")
    if spec.K == 1:
        return base
    return salt(base, spec.K, budget)
