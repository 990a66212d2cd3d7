"""The end-to-end acceptance battery.

Each criterion is a function returning a CriterionResult; `run_suite` runs
them all.  The same battery backs `saltlab suite` and the acceptance test
module, so a green CLI run and a green pytest run mean the same thing.

Tolerances are fixed here once: exact checks compare Fractions, numerical
quantum checks use the module constants below.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from . import bounds as B
from . import composition as comp
from . import games as G
from . import solver as sol
from .attacks import CombinedAttack, entry_bits, monte_carlo_advantage
from .qprops import collision_property, preimage_property, transition_probability
from .qchecks import (
    g_h_transition_check,
    lemma5_check,
    path_decomposition,
    threshold_experiment,
    transition_capacity_check,
)
from .qsim import (
    Circuit,
    Dims,
    QState,
    apply_algorithm_unitary,
    apply_cphso,
    compare_with_standard_oracle,
    database_support_sizes,
    random_circuit,
)

TOL_TV = 1e-9
TOL_SUPPORT = 1e-12
TOL_CAPACITY = 1e-9
TOL_PATH = 1e-8
TOL_LEMMA5 = 1e-9


@dataclass
class CriterionResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def _result(name: str, passed: bool, detail: str, t0: float) -> CriterionResult:
    return CriterionResult(name, passed, detail, time.time() - t0)


# --- 1 -----------------------------------------------------------------------


def check_preimage_closed_form() -> CriterionResult:
    t0 = time.time()
    game = G.preimage_game(4, 4)
    bad = []
    for T in range(4):
        got = sol.optimal_value(game, T)
        want = 1 - Fraction(3, 4) ** (T + 1)
        if got != want:
            bad.append((T, got, want))
    return _result(
        "preimage_closed_form",
        not bad,
        "optimal_value(preimage 4x4, T) == 1-(3/4)^(T+1) for T in 0..3"
        + (f"; mismatches {bad}" if bad else ""),
        t0,
    )


# --- 2 -----------------------------------------------------------------------


def _random_challenge_game(rng: random.Random) -> G.Game:
    M = rng.choice((1, 2))
    N = rng.choice((2, 3))
    C = rng.choice((2, 3))
    tables = G._uniform_tables(M, N, 1 << 12)
    weights = {}
    for f, _ in tables:
        raw = [rng.randint(1, 4) for _ in range(C)]
        s = sum(raw)
        weights[f.values] = tuple(
            (c, Fraction(a, s)) for c, a in enumerate(raw)
        )
    wins = {
        (f.values, c, a): rng.random() < 0.4
        for f, _ in tables
        for c in range(C)
        for a in range(M)
    }
    return G.Game(
        domain_size=M,
        range_size=N,
        oracle_dist=tables,
        challenge_space=tuple(range(C)),
        challenge_dist=lambda f: weights[f.values],
        answer_space=tuple(range(M)),
        predicate=lambda f, c, a: wins[(f.values, c, a)],
    )


def check_conditioning_identity() -> CriterionResult:
    t0 = time.time()
    rng = random.Random(20240)
    games = [
        G.inversion_game(M, N)
        for M in (1, 2, 3)
        for N in (2, 3)
    ]
    while len(games) < 20:
        games.append(_random_challenge_game(rng))
    bad = 0
    for i, game in enumerate(games):
        T = 1 + (i % 2)
        direct = sol.optimal_value(game, T)
        split = sum(
            (
                p * sol.optimal_value(G.condition_on_challenge(game, ch), T)
                for ch, p in G.challenge_marginal(game).items()
                if p
            ),
            Fraction(0),
        )
        if direct != split:
            bad += 1
    return _result(
        "challenge_conditioning_identity",
        bad == 0,
        f"value == sum_ch Pr[ch] * conditioned value on {len(games)} games "
        f"({bad} mismatches)",
        t0,
    )


# --- 3 -----------------------------------------------------------------------


def check_nonuniform_vs_bound() -> CriterionResult:
    t0 = time.time()
    base = G.preimage_game(1, 2)
    salted = G.salt(base, 2)
    bad = []
    for S in (0, 1):
        for T in (0, 1):
            val = sol.optimal_nonuniform_value(salted, S, T)
            eps = sol.optimal_value(base, T)
            rep = B.salting_bound(eps, S, K=2)
            if val > rep.value_fraction():
                bad.append((S, T, val, rep.value))
    return _result(
        "nonuniform_below_salting_bound",
        not bad,
        "exact advice-enumeration value <= reported bound for "
        "S,T in {0,1}^2, K=2" + (f"; violations {bad}" if bad else ""),
        t0,
    )


# --- 4 -----------------------------------------------------------------------


def check_moment_grid() -> CriterionResult:
    t0 = time.time()
    bad = 0
    for K in range(1, 9):
        for L in range(1, 9):
            for c in (Fraction(0), Fraction(1, 4), Fraction(1, 2),
                      Fraction(3, 4), Fraction(1)):
                rep = B.distinct_count_moment(K, L, c)
                if rep.value > rep.extras["bound"]:
                    bad += 1
    return _result(
        "distinct_count_moment_grid",
        bad == 0,
        f"exact E[c^ell] <= (c+L/K)^L on the 320-point grid ({bad} violations)",
        t0,
    )


# --- 5 -----------------------------------------------------------------------


def check_reduction_battery(n_adversaries: int = 100) -> CriterionResult:
    t0 = time.time()
    rng = random.Random(777)
    pool = [G.preimage_game(2, 2), G.collision_game(2, 2)]
    failures = []
    for trial in range(n_adversaries):
        games = [rng.choice(pool), rng.choice(pool)]
        budgets = [rng.randint(1, 2), rng.randint(1, 2)]
        progs = [
            comp.random_program(rng, 2, games, budgets[i], i) for i in range(2)
        ]
        alg = comp.MemorylessAlgorithm(progs, budgets)
        fair = comp.FairExecutor(alg, games)
        plain = comp.FairExecutor(alg, games, simulate=False)
        try:
            for combo in product(*(g.oracle_dist for g in games)):
                oracles = [f for f, _ in combo]
                fair.run(oracles).assert_fair(budgets)
                seq_out, _ = comp.run_memoryless(alg, oracles)
                if plain.run(oracles).outputs != seq_out:
                    raise AssertionError("out-of-order run changed outputs")
            p_seq = comp.exact_win_probability(alg, games)
            p_fair = comp.exact_win_probability(fair, games)
            if p_fair < p_seq:
                raise AssertionError(f"value dropped {p_seq} -> {p_fair}")
            if p_fair > comp.sdpt_product_bound(games, budgets):
                raise AssertionError("fair value above the product ceiling")
        except AssertionError as exc:
            failures.append((trial, str(exc)))
    return _result(
        "memoryless_to_fair_reduction",
        not failures,
        f"{n_adversaries} seeded adversaries: prefix-fair, outputs preserved, "
        f"value never drops ({len(failures)} failures"
        + (f": {failures[:3]}" if failures else "") + ")",
        t0,
    )


# --- 6 -----------------------------------------------------------------------


def check_fair_sdpt_tightness() -> CriterionResult:
    t0 = time.time()
    games = [G.preimage_game(1, 2), G.preimage_game(1, 2)]
    best = comp.max_fair_value(games, [1, 1])
    ceiling = comp.sdpt_product_bound(games, [1, 1])
    ok = best == Fraction(1, 4) and ceiling == Fraction(1, 4)
    return _result(
        "fair_direct_product_tight",
        ok,
        f"exhaustive fair optimum {best} == product ceiling {ceiling} == 1/4",
        t0,
    )


# --- 7 -----------------------------------------------------------------------


def check_tv_equivalence() -> CriterionResult:
    t0 = time.time()
    layouts = [Dims(1, 2, 2, 1), Dims(1, 3, 2, 1), Dims(3, 1, 2, 1),
               Dims(1, 2, 2, 2), Dims(2, 1, 2, 2)]
    worst = 0.0
    n = 0
    for i in range(25):
        dims = layouts[i % len(layouts)]
        T = 1 + (i % 3)
        oracle = "phase" if i % 2 == 0 else "standard"
        circ = random_circuit(dims, T, seed=1000 + i, oracle=oracle)
        worst = max(worst, compare_with_standard_oracle(circ))
        n += 1
    return _result(
        "compressed_standard_tv",
        worst <= TOL_TV,
        f"max TV over {n} circuits = {worst:.3e} <= {TOL_TV}",
        t0,
    )


# --- 8 -----------------------------------------------------------------------


def check_support_bound() -> CriterionResult:
    t0 = time.time()
    worst_excess = 0.0
    for seed in range(5):
        dims = Dims(1, 3, 2, 1)
        circ = random_circuit(dims, 3, seed=2000 + seed)
        st = QState.initial(dims)
        for t, U in enumerate(circ.unitaries, 1):
            st = apply_cphso(apply_algorithm_unitary(st, U))
            sizes = database_support_sizes(st, tol=TOL_SUPPORT)
            if sizes and max(sizes) > t:
                worst_excess = max(worst_excess, 1.0)
    return _result(
        "bounded_database_support",
        worst_excess == 0.0,
        f"no amplitude above {TOL_SUPPORT} on databases larger than the "
        "query count (5 circuits, T=3)",
        t0,
    )


# --- 9 -----------------------------------------------------------------------


def check_transition_capacity() -> CriterionResult:
    t0 = time.time()
    dims = Dims(1, 3, 4, 1)
    worst_rel = -1.0
    ok = True
    for prop in (preimage_property(), collision_property()):
        for t in (0, 1, 2):
            r = transition_capacity_check(prop, dims, 0, t, trials=200,
                                          seed=3000 + t)
            if not r["ok"]:
                ok = False
            worst_rel = max(worst_rel, r["max_ratio"] - r["ceiling"])
    return _result(
        "transition_capacity",
        ok,
        f"ratio <= sqrt(8 p_t) + {TOL_CAPACITY} for t in 0..2, N=4, "
        f"200 random states each (max excess {worst_rel:.3e})",
        t0,
    )


# --- 10 ----------------------------------------------------------------------


def check_path_decomposition() -> CriterionResult:
    t0 = time.time()
    worst = 0.0
    for kappa, T, seed in ((1, 1, 0), (1, 2, 1), (2, 2, 2)):
        dims = Dims(kappa, 1, 2, 1)
        circ = random_circuit(dims, kappa * T, seed=4000 + seed)
        r = path_decomposition(circ, preimage_property(), kappa)
        worst = max(worst, r["residual"])
    return _result(
        "path_decomposition_residual",
        worst <= TOL_PATH,
        f"max residual over (kappa,T) in {{(1,1),(1,2),(2,2)}} = "
        f"{worst:.3e} <= {TOL_PATH}",
        t0,
    )


# --- 11 ----------------------------------------------------------------------


def check_lemma5() -> CriterionResult:
    t0 = time.time()
    import math

    ok = True
    worst = -1.0
    # preimage claims: z encodes the claimed zero-preimage position
    dims1 = Dims(1, 2, 2, 2)
    dec1 = lambda x, u, z: ((z, 0),)
    # collision claims: z encodes (x1, x2, y); invalid when x1 == x2
    dims2 = Dims(1, 2, 2, 8)

    def dec2(x, u, z):
        x1, rest = divmod(z, 4)
        x2, y = divmod(rest, 2)
        if x1 == x2:
            return None
        return ((x1, y), (x2, y))

    for i in range(5):
        r = lemma5_check(random_circuit(dims1, 2, seed=5000 + i), dec1, 1)
        worst = max(worst, math.sqrt(r["p"]) - r["bound"])
        ok = ok and r["ok"]
    for i in range(5):
        r = lemma5_check(random_circuit(dims2, 2, seed=5100 + i), dec2, 2)
        worst = max(worst, math.sqrt(r["p"]) - r["bound"])
        ok = ok and r["ok"]
    return _result(
        "database_measurement_bound",
        ok,
        f"sqrt(p) <= sqrt(p') + sqrt(c/N) + {TOL_LEMMA5} on 10 circuits "
        f"(max excess {worst:.3e})",
        t0,
    )


# --- 12 ----------------------------------------------------------------------


def check_attack_bound_sandwich(trials: int = 100_000) -> CriterionResult:
    t0 = time.time()
    K = M = N = 64
    T = 8
    S = 16 * entry_bits("collision", K, M)
    attack = CombinedAttack("collision", K, M, N, S, T)
    mc = monte_carlo_advantage(attack, trials, seed=2026)
    eps_online = attack.online_win_probability()
    rep = B.salting_bound(eps_online, S, K)
    upper = float(rep.value_fraction())
    floor = float(attack.lookup_floor())
    lo = mc.estimate - 3 * mc.stderr
    hi = mc.estimate + 3 * mc.stderr
    ok = lo <= upper and hi >= floor
    return _result(
        "attack_bound_sandwich",
        ok,
        f"MC advantage {mc.estimate:.4f} +/- {mc.stderr:.4f} "
        f"({trials} trials): floor {floor:.4f} <= est+3s and "
        f"est-3s <= bound {upper:.4f}",
        t0,
    )


ALL_CRITERIA = (
    check_preimage_closed_form,
    check_conditioning_identity,
    check_nonuniform_vs_bound,
    check_moment_grid,
    check_reduction_battery,
    check_fair_sdpt_tightness,
    check_tv_equivalence,
    check_support_bound,
    check_transition_capacity,
    check_path_decomposition,
    check_lemma5,
    check_attack_bound_sandwich,
)


def run_suite(fast: bool = False) -> list[CriterionResult]:
    """Run the whole battery; `fast` trims the two slow Monte Carlo items."""
    results = []
    for fn in ALL_CRITERIA:
        if fast and fn is check_attack_bound_sandwich:
            results.append(fn(trials=5000))
        elif fast and fn is check_reduction_battery:
            results.append(fn(n_adversaries=15))
        else:
            results.append(fn())
    return results
