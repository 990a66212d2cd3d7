"""Memoryless multi-oracle adversaries and the out-of-order fair reduction.

A memoryless adversary for k plain games is a sequence of sub-algorithms
A_1, ..., A_k run one after the other with no shared memory; A_i outputs the
answer for game i but may query any of the oracles f_1, ..., f_k, so a
sequential run can be wildly unfair to later oracles.

`reduce_to_fair` executes the same sub-algorithms out of order so that oracle
f_j is only ever queried while A_j is still running (hence at most T_j real
queries land on f_j).  Pending queries form a functional digraph: each live
sub-algorithm points at the owner of the oracle it wants next.  A directed
cycle is advanced one query per member; otherwise a maximal path ending at a
terminated owner is advanced, with the terminal hop answered by a simulated
table f'_j chosen to maximize the continuation winning probability among
tables consistent with everything learned about f_j so far (lexicographically
smallest argmax).  Outputs are unchanged in distribution and the win
probability never drops.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .games import Game, NO_CHALLENGE, OracleTable
from .solver import _consistent, optimal_value


@dataclass(frozen=True)
class ProgramNode:
    """A node of a deterministic query program.

    Either an output node (`answer` set) or a query node: ask oracle
    `oracle` at `position` and continue in `children[value]`.
    """

    answer: object = None
    oracle: int | None = None
    position: int | None = None
    children: tuple = ()

    @property
    def is_output(self) -> bool:
        return self.oracle is None


def program_depth(node: ProgramNode) -> int:
    if node.is_output:
        return 0
    return 1 + max(program_depth(c) for c in node.children)


def random_program(rng: random.Random, k: int, games: list[Game], budget: int,
                   out_index: int) -> ProgramNode:
    """A random decision program of depth <= budget outputting an answer for
    game `out_index`; may query any of the k oracles anywhere."""

    def build(depth: int) -> ProgramNode:
        if depth == 0 or rng.random() < 0.25:
            return ProgramNode(answer=rng.choice(games[out_index].answer_space))
        j = rng.randrange(k)
        x = rng.randrange(games[j].domain_size)
        kids = tuple(build(depth - 1) for _ in range(games[j].range_size))
        return ProgramNode(oracle=j, position=x, children=kids)

    node = build(budget)
    if node.is_output:  # ensure at least the shape of a query algorithm
        j = rng.randrange(k)
        x = rng.randrange(games[j].domain_size)
        kids = tuple(
            ProgramNode(answer=rng.choice(games[out_index].answer_space))
            for _ in range(games[j].range_size)
        )
        node = ProgramNode(oracle=j, position=x, children=kids)
    return node


@dataclass
class MemorylessAlgorithm:
    """Sub-algorithms programs[i] (answering game i), with query budgets."""

    programs: list[ProgramNode]
    budgets: list[int]

    def __post_init__(self):
        for i, prog in enumerate(self.programs):
            if program_depth(prog) > self.budgets[i]:
                raise ValueError(f"program {i} exceeds its budget")


def run_memoryless(alg: MemorylessAlgorithm, oracles: list[OracleTable]):
    """Sequential (unfair) execution; returns (outputs, per-oracle query counts)."""
    outputs = []
    counts = [0] * len(oracles)
    for prog in alg.programs:
        node = prog
        while not node.is_output:
            counts[node.oracle] += 1
            node = node.children[oracles[node.oracle][node.position]]
        outputs.append(node.answer)
    return outputs, counts


@dataclass(frozen=True)
class TraceStep:
    algo: int            # which sub-algorithm issued the query
    oracle: int          # which oracle it addressed
    position: int
    value: int
    simulated: bool      # answered by a substitute table, not the real oracle


@dataclass
class FairTrace:
    """Per-run log of the out-of-order executor."""

    steps: list[TraceStep] = field(default_factory=list)
    outputs: list = field(default_factory=list)

    def real_counts(self, k: int) -> list[int]:
        counts = [0] * k
        for s in self.steps:
            if not s.simulated:
                counts[s.oracle] += 1
        return counts

    def assert_fair(self, budgets: list[int]) -> None:
        """Every prefix respects the per-oracle budgets (real queries only)."""
        counts = [0] * len(budgets)
        for s in self.steps:
            if not s.simulated:
                counts[s.oracle] += 1
                if counts[s.oracle] > budgets[s.oracle]:
                    raise AssertionError(
                        f"oracle {s.oracle} got {counts[s.oracle]} real queries"
                    )


class _ExecState:
    __slots__ = ("nodes", "done", "outputs", "learned", "substitutes", "trace")

    def __init__(self, k: int, programs):
        self.nodes = list(programs)
        self.done = [False] * k
        self.outputs = [None] * k
        self.learned = [dict() for _ in range(k)]   # real answers seen from f_j
        self.substitutes = [None] * k               # f'_j once A_j terminated
        self.trace = FairTrace()

    def clone(self) -> "_ExecState":
        c = _ExecState.__new__(_ExecState)
        c.nodes = list(self.nodes)
        c.done = list(self.done)
        c.outputs = list(self.outputs)
        c.learned = [dict(d) for d in self.learned]
        c.substitutes = list(self.substitutes)
        c.trace = FairTrace(list(self.trace.steps), list(self.trace.outputs))
        return c


class FairExecutor:
    """Out-of-order execution of a MemorylessAlgorithm against plain games."""

    def __init__(self, alg: MemorylessAlgorithm, games: list[Game],
                 simulate: bool = True):
        if len(alg.programs) != len(games):
            raise ValueError("need one sub-algorithm per game")
        self.alg = alg
        self.games = games
        self.simulate = simulate

    # -- public API ---------------------------------------------------------

    def run(self, oracles: list[OracleTable]) -> FairTrace:
        state = _ExecState(len(self.games), self.alg.programs)
        self._run_from(state, oracles)
        state.trace.outputs = list(state.outputs)
        return state.trace

    # -- scheduling ---------------------------------------------------------

    def _run_from(self, state: _ExecState, oracles: list[OracleTable]) -> None:
        k = len(self.games)
        while True:
            for i in range(k):
                if not state.done[i] and state.nodes[i].is_output:
                    self._finalize(state, i, oracles)
            active = [i for i in range(k) if not state.done[i]]
            if not active:
                return
            batch = self._select_batch(state, active)
            for i in batch:
                self._advance(state, i, oracles)

    def _select_batch(self, state: _ExecState, active: list[int]) -> list[int]:
        # functional digraph on live vertices: i -> owner of its next oracle
        # (a self-query is a length-1 cycle: the owner advances alone)
        succ = {}
        for i in active:
            j = state.nodes[i].oracle
            succ[i] = j if j in active else None

        # directed cycles first; pick the one containing the smallest vertex
        seen_cycles = []
        for start in sorted(active):
            path, cur = [], start
            index = {}
            while cur is not None and cur not in index:
                index[cur] = len(path)
                path.append(cur)
                cur = succ[cur]
            if cur is not None:
                cycle = path[index[cur]:]
                if not any(set(cycle) == set(c) for c in seen_cycles):
                    seen_cycles.append(cycle)
        if seen_cycles:
            return min(seen_cycles, key=min)

        # otherwise a maximal path; roots are vertices nothing points at
        pointed = {j for j in succ.values() if j is not None}
        roots = sorted(i for i in active if i not in pointed)
        paths = []
        for r in roots:
            path, cur = [], r
            while cur is not None:
                path.append(cur)
                cur = succ[cur]
            paths.append(path)
        return min(paths, key=min)

    def _advance(self, state: _ExecState, i: int, oracles) -> None:
        node = state.nodes[i]
        j, x = node.oracle, node.position
        if self.simulate and state.substitutes[j] is not None:
            val = state.substitutes[j][x]
            simulated = True
        else:
            val = oracles[j][x]
            state.learned[j][x] = val
            simulated = False
        state.trace.steps.append(TraceStep(i, j, x, val, simulated))
        state.nodes[i] = node.children[val]

    def _finalize(self, state: _ExecState, i: int, oracles) -> None:
        state.outputs[i] = state.nodes[i].answer
        state.done[i] = True
        if self.simulate:
            state.substitutes[i] = self._pick_substitute(state, i)

    # -- substitute oracle choice -------------------------------------------

    def _pick_substitute(self, state: _ExecState, j: int) -> OracleTable:
        """argmax over tables consistent with what was learned about f_j of the
        probability that the continuation wins every other game."""
        view = state.learned[j]
        candidates = [
            f for f, _ in self.games[j].oracle_dist
            if all(f[x] == v for x, v in view.items())
        ]
        best, best_p = None, Fraction(-1)
        for cand in sorted(candidates, key=lambda f: f.values):
            p = self._continuation_prob(state, j, cand)
            if p > best_p:
                best, best_p = cand, p
        return best

    def _continuation_prob(self, state: _ExecState, j: int,
                           cand: OracleTable) -> Fraction:
        """Unnormalized Pr[all games except j are won | f'_j = cand], over the
        posterior of the other (not yet substituted for querying, but still
        real for judging) oracles."""
        k = len(self.games)
        others = [m for m in range(k) if m != j]
        posts = []
        for m in others:
            view = state.learned[m]
            posts.append([
                (f, w) for f, w in self.games[m].oracle_dist
                if all(f[x] == v for x, v in view.items())
            ])
        total = Fraction(0)
        for combo in product(*posts):
            w = Fraction(1)
            reals = [None] * k
            for m, (f, wf) in zip(others, combo):
                reals[m] = f
                w *= wf
            branch = state.clone()
            branch.substitutes[j] = cand
            reals[j] = cand  # only ever consulted through the substitute
            self._run_from(branch, reals)
            if all(
                self.games[m].predicate(reals[m], NO_CHALLENGE, branch.outputs[m])
                for m in others
            ):
                total += w
        return total


def exact_win_probability(runner, games: list[Game]) -> Fraction:
    """Pr over all oracle tuples that every game is won.

    `runner` is either a MemorylessAlgorithm (sequential run) or a
    FairExecutor; predicates are always judged against the real oracles.
    """
    total = Fraction(0)
    for combo in product(*(g.oracle_dist for g in games)):
        oracles = [f for f, _ in combo]
        w = Fraction(1)
        for _, wf in combo:
            w *= wf
        if isinstance(runner, FairExecutor):
            outputs = runner.run(oracles).outputs
        else:
            outputs, _ = run_memoryless(runner, oracles)
        if all(
            g.predicate(f, NO_CHALLENGE, out)
            for g, f, out in zip(games, oracles, outputs)
        ):
            total += w
    return total


def max_fair_value(games: list[Game], budgets: list[int]) -> Fraction:
    """Exact optimum over all deterministic fair algorithms (at most
    budgets[j] queries to oracle f_j, outputs chosen at the end)."""
    k = len(games)
    memo: dict = {}

    def consistent_tuples(views):
        posts = []
        for g, view in zip(games, views):
            posts.append([
                (f, w) for f, w in g.oracle_dist if _consistent(f, view)
            ])
        return posts

    def value(views, budgets_left) -> Fraction:
        key = (views, budgets_left)
        if key in memo:
            return memo[key]
        posts = consistent_tuples(views)
        # best final outputs given current knowledge
        best = Fraction(0)
        for answers in product(*(g.answer_space for g in games)):
            mass = Fraction(0)
            for combo in product(*posts):
                w = Fraction(1)
                ok = True
                for g, (f, wf), a in zip(games, combo, answers):
                    w *= wf
                    if not g.predicate(f, NO_CHALLENGE, a):
                        ok = False
                        break
                if ok:
                    mass += w
            if mass > best:
                best = mass
        # or query some oracle j we still have budget for
        for j in range(k):
            if budgets_left[j] == 0:
                continue
            for x, v in enumerate(views[j]):
                if v is not None:
                    continue
                nb = budgets_left[:j] + (budgets_left[j] - 1,) + budgets_left[j + 1:]
                total = Fraction(0)
                for val in range(games[j].range_size):
                    nview = views[j][:x] + (val,) + views[j][x + 1:]
                    total += value(views[:j] + (nview,) + views[j + 1:], nb)
                if total > best:
                    best = total
        memo[key] = best
        return best

    start = tuple((None,) * g.domain_size for g in games)
    return value(start, tuple(budgets))


def sdpt_product_bound(games: list[Game], budgets: list[int]) -> Fraction:
    """Product of the single-game optima: the direct-product ceiling for any
    fair (and hence any memoryless) adversary."""
    out = Fraction(1)
    for g, T in zip(games, budgets):
        out *= optimal_value(g, T)
    return out


def multi_salt_value(game: Game, K: int, adversary, L: int,
                     salted: Game | None = None) -> Fraction:
    """Exact Pr that a fixed adversary wins L i.i.d. challenges of the
    K-salted `game`.

    `adversary` maps a challenge (k, ch) to a ProgramNode querying the flat
    salted table (oracle index 0).  Challenges are independent given the
    oracle and the adversary is deterministic, so Pr[win all L | g] is just
    the L-th power of the single-challenge win probability given g.
    """
    from .games import salt as _salt

    sg = salted if salted is not None else _salt(game, K)
    total = Fraction(0)
    for g, w in sg.oracle_dist:
        p = Fraction(0)
        for ch, q in sg.challenge_dist(g):
            node = adversary(ch)
            while not node.is_output:
                node = node.children[g[node.position]]
            if sg.predicate(g, ch, node.answer):
                p += q
        total += w * p**L
    return total


def distinct_salt_product_bound(game: Game, K: int, L: int, T: int) -> Fraction:
    """E over L i.i.d. challenges of prod over distinct salts of the optimal
    single-challenge value: the ceiling for any fixed L-challenge adversary."""
    from .games import condition_on_challenge, salt as _salt

    sg = _salt(game, K)
    # marginal challenge distribution of the salted game
    marg: dict = {}
    for g, w in sg.oracle_dist:
        for ch, q in sg.challenge_dist(g):
            marg[ch] = marg.get(ch, Fraction(0)) + w * q
    eps: dict = {}
    for ch in marg:
        eps[ch] = optimal_value(condition_on_challenge(sg, ch), T)
    total = Fraction(0)
    for combo in product(sorted(marg), repeat=L):
        w = Fraction(1)
        for ch in combo:
            w *= marg[ch]
        seen_salts = set()
        prodval = Fraction(1)
        for ch in combo:
            if ch[0] not in seen_salts:
                seen_salts.add(ch[0])
                prodval *= eps[ch]
        total += w * prodval
    return total
