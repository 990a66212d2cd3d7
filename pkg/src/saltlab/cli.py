"""Command-line front end.

Subcommands: eps, eps-multi, eps-nonuniform, bound, attack, reduce, qsim,
suite.  Every command prints a single JSON report envelope on stdout;
rationals are emitted as {"num": .., "den": ..} and high-precision decimals
as {"digits": ".."}.

Exit codes: 0 success, 1 a requested check failed, 2 bad arguments.
Stochastic subcommands (attack, qsim) require an explicit --seed.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from decimal import Decimal
from fractions import Fraction

from . import __version__
from . import bounds as B
from . import composition as comp
from . import games as G
from . import solver as sol
from .attacks import CombinedAttack, entry_bits, monte_carlo_advantage
from .qprops import (
    collision_property,
    ksum_property,
    preimage_property,
    transition_probability,
)
from .qchecks import (
    g_h_transition_check,
    lemma5_check,
    path_decomposition,
    threshold_experiment,
    transition_capacity_check,
)
from .qsim import Dims, compare_with_standard_oracle, random_circuit
from .suite import run_suite

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_BAD_ARGS = 2


def _encode(value):
    if isinstance(value, Fraction):
        return {"num": value.numerator, "den": value.denominator}
    if isinstance(value, Decimal):
        return {"digits": str(value)}
    if isinstance(value, dict):
        return {str(k): _encode(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_encode(v) for v in value]
    if isinstance(value, (bool, int, float, str)) or value is None:
        return value
    return str(value)


def _emit(command: str, params: dict, result, t0: float,
          seed: int | None = None, out: str | None = None) -> None:
    report = {
        "tool": "saltlab",
        "version": __version__,
        "command": command,
        "params": _encode(params),
        "seed": seed,
        "elapsed_s": round(time.time() - t0, 6),
        "result": _encode(result),
    }
    text = json.dumps(report, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _parse_rational(text: str) -> Fraction:
    return Fraction(text)


def _load_game_spec(text: str) -> G.GameSpec:
    """Inline JSON or @path/to/file.json."""
    if text.startswith("@"):
        with open(text[1:]) as fh:
            text = fh.read()
    return G.GameSpec.from_json(text)


def _property_by_name(name: str, N: int):
    if name == "preimage_zero":
        return preimage_property()
    if name == "collision":
        return collision_property()
    if name.startswith("ksum"):
        return ksum_property(int(name[4:] or 2), N)
    raise SystemExit2(f"unknown property {name!r}")


class SystemExit2(SystemExit):
    def __init__(self, msg: str):
        print(f"error: {msg}", file=sys.stderr)
        super().__init__(EXIT_BAD_ARGS)


# --- subcommand handlers -----------------------------------------------------


def cmd_eps(args) -> int:
    t0 = time.time()
    game = G.build_game(_load_game_spec(args.game))
    value = sol.optimal_value(game, args.T)
    _emit("eps", {"game": args.game, "T": args.T}, {"value": value}, t0,
          out=args.out)
    return EXIT_OK


def cmd_eps_multi(args) -> int:
    t0 = time.time()
    game = G.build_game(_load_game_spec(args.game))
    value = sol.multi_challenge_value(game, args.n, args.T)
    _emit("eps-multi", {"game": args.game, "n": args.n, "T": args.T},
          {"value": value}, t0, out=args.out)
    return EXIT_OK


def cmd_eps_nonuniform(args) -> int:
    t0 = time.time()
    game = G.build_game(_load_game_spec(args.game))
    value = sol.optimal_nonuniform_value(game, args.S, args.T)
    uniform = sol.optimal_value(game, args.T)
    ok = value >= uniform
    _emit("eps-nonuniform",
          {"game": args.game, "S": args.S, "T": args.T},
          {"value": value, "uniform_value": uniform,
           "dominates_uniform": ok},
          t0, out=args.out)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_bound(args) -> int:
    t0 = time.time()
    name = args.name
    if name == "salting":
        rep = B.salting_bound(_parse_rational(args.eps), args.S, args.K,
                              args.L_max)
    elif name == "moment":
        rep = B.distinct_count_moment(args.K, args.L, _parse_rational(args.c))
    elif name == "compositions":
        rep = B.composition_count(args.K, args.L)
    elif name == "salting-mult":
        spec = _load_game_spec(args.game)
        base = G.build_game(spec)
        eps_multi = lambda n: sol.multi_challenge_value(base, n, args.T)
        rep = B.salting_bound_mult(eps_multi, args.S, args.K, args.T,
                                   args.L_max)
    elif name == "large-advice":
        spec = _load_game_spec(args.game)
        base = G.build_game(spec)
        eps_multi = lambda n: sol.multi_challenge_value(base, n, args.T)
        rep = B.salting_bound_large_advice(eps_multi, args.S, args.K, args.T,
                                           args.L)
    elif name == "inversion":
        rep = B.inversion_bound(args.S, args.T, args.K, args.N,
                                _parse_rational(args.c))
    else:  # pragma: no cover - argparse restricts choices
        raise SystemExit2(f"unknown bound {name!r}")
    _emit("bound", {k: v for k, v in vars(args).items()
                    if k not in ("func", "out") and v is not None},
          rep.to_dict(), t0, out=args.out)
    return EXIT_OK


def cmd_attack(args) -> int:
    t0 = time.time()
    attack = CombinedAttack(args.family, args.K, args.M, args.N, args.S,
                            args.T)
    mc = monte_carlo_advantage(attack, args.trials, args.seed)
    result = {
        "monte_carlo": mc.to_dict(),
        "entry_bits": entry_bits(args.family, args.K, args.M),
        "capacity": attack.capacity,
        "lookup_floor": attack.lookup_floor(),
        "online_win_probability": attack.online_win_probability(),
    }
    _emit("attack", {k: v for k, v in vars(args).items()
                     if k not in ("func", "out")},
          result, t0, seed=args.seed, out=args.out)
    return EXIT_OK


def cmd_reduce(args) -> int:
    t0 = time.time()
    with open(args.adversary) as fh:
        desc = json.load(fh)
    games = [G.build_game(G.GameSpec.from_dict(d)) for d in desc["games"]]
    if any(not g.is_plain for g in games):
        raise SystemExit2("reduce only handles plain (challenge-free) games")

    def node_from(d) -> comp.ProgramNode:
        if "answer" in d:
            ans = d["answer"]
            return comp.ProgramNode(
                answer=tuple(ans) if isinstance(ans, list) else ans
            )
        return comp.ProgramNode(
            oracle=d["oracle"], position=d["position"],
            children=tuple(node_from(c) for c in d["children"]),
        )

    programs = [node_from(p) for p in desc["programs"]]
    budgets = list(desc["budgets"])
    alg = comp.MemorylessAlgorithm(programs, budgets)
    fair = comp.FairExecutor(alg, games)
    p_seq = comp.exact_win_probability(alg, games)
    p_fair = comp.exact_win_probability(fair, games)
    traces = []
    fair_ok = True
    for combo in __import__("itertools").product(
            *(g.oracle_dist for g in games)):
        oracles = [f for f, _ in combo]
        trace = fair.run(oracles)
        try:
            trace.assert_fair(budgets)
        except AssertionError:
            fair_ok = False
        traces.append({
            "oracles": [list(f.values) for f in oracles],
            "outputs": trace.outputs,
            "steps": [
                {"algo": s.algo, "oracle": s.oracle, "position": s.position,
                 "value": s.value, "simulated": s.simulated}
                for s in trace.steps
            ],
        })
    ok = fair_ok and p_fair >= p_seq
    _emit("reduce", {"adversary": args.adversary},
          {"sequential_value": p_seq, "fair_value": p_fair,
           "fair": fair_ok, "value_preserved": p_fair >= p_seq,
           "traces": traces if args.trace else None},
          t0, out=args.out)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_qsim(args) -> int:
    t0 = time.time()
    dims = Dims(args.K, args.M, args.N, args.Z)
    prop = _property_by_name(args.property, args.N)
    if args.check == "tv":
        circ = random_circuit(dims, args.T, seed=args.seed)
        tv = compare_with_standard_oracle(circ)
        result = {"tv": tv, "ok": tv <= 1e-9}
    elif args.check == "capacity":
        result = transition_capacity_check(prop, dims, args.salt, args.t,
                                           args.trials, args.seed)
    elif args.check == "path":
        circ = random_circuit(dims, args.kappa * args.T, seed=args.seed)
        result = path_decomposition(circ, prop, args.kappa)
    elif args.check == "threshold":
        circ = random_circuit(dims, args.T, seed=args.seed)
        result = threshold_experiment(circ, prop, args.kappa, args.C)
    elif args.check == "gh":
        result = g_h_transition_check(prop, dims, args.salt, set(),
                                      args.t, args.T, args.trials, args.seed)
    else:  # pragma: no cover
        raise SystemExit2(f"unknown check {args.check!r}")
    _emit("qsim", {k: v for k, v in vars(args).items()
                   if k not in ("func", "out")},
          result, t0, seed=args.seed, out=args.out)
    return EXIT_OK if result.get("ok", True) else EXIT_CHECK_FAILED


def cmd_suite(args) -> int:
    t0 = time.time()
    results = run_suite(fast=args.fast)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status}  {r.name:36s} {r.seconds:7.2f}s  {r.detail}",
              file=sys.stderr)
    result = [
        {"name": r.name, "passed": r.passed, "detail": r.detail,
         "seconds": round(r.seconds, 3)}
        for r in results
    ]
    _emit("suite", {"fast": args.fast}, result, t0, out=args.out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK_FAILED


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="saltlab",
        description="exact solvers, bounds and simulators for salted games",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def add_out(sp):
        sp.add_argument("--out", help="write the JSON report here instead of stdout")

    sp = sub.add_parser("eps", help="exact optimal value of a game")
    sp.add_argument("--game", required=True,
                    help="inline game spec JSON, or @file.json")
    sp.add_argument("--T", type=int, required=True)
    add_out(sp)
    sp.set_defaults(func=cmd_eps)

    sp = sub.add_parser("eps-multi", help="n-fold challenge value")
    sp.add_argument("--game", required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--T", type=int, required=True,
                    help="per-challenge budget (total is n*T)")
    add_out(sp)
    sp.set_defaults(func=cmd_eps_multi)

    sp = sub.add_parser("eps-nonuniform", help="value with S advice bits")
    sp.add_argument("--game", required=True)
    sp.add_argument("--S", type=int, required=True)
    sp.add_argument("--T", type=int, required=True)
    add_out(sp)
    sp.set_defaults(func=cmd_eps_nonuniform)

    sp = sub.add_parser("bound", help="evaluate a closed-form bound")
    sp.add_argument("--name", required=True,
                    choices=["salting", "salting-mult", "large-advice",
                             "inversion", "moment", "compositions"])
    sp.add_argument("--eps", help="rational like 1/10")
    sp.add_argument("--S", type=int, default=0)
    sp.add_argument("--T", type=int, default=0)
    sp.add_argument("--K", type=int, default=1)
    sp.add_argument("--N", type=int, default=2)
    sp.add_argument("--L", type=int, default=1)
    sp.add_argument("--L-max", type=int, default=None, dest="L_max")
    sp.add_argument("--c", default="1", help="rational constant")
    sp.add_argument("--game", help="base game spec for the mult forms")
    add_out(sp)
    sp.set_defaults(func=cmd_bound)

    sp = sub.add_parser("attack", help="Monte Carlo combined attack")
    sp.add_argument("--family", required=True,
                    choices=["collision", "preimage_zero", "inversion"])
    sp.add_argument("--K", type=int, required=True)
    sp.add_argument("--M", type=int, required=True)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--S", type=int, required=True)
    sp.add_argument("--T", type=int, required=True)
    sp.add_argument("--trials", type=int, default=10000)
    sp.add_argument("--seed", type=int, required=True)
    add_out(sp)
    sp.set_defaults(func=cmd_attack)

    sp = sub.add_parser("reduce", help="memoryless -> fair reduction")
    sp.add_argument("--adversary", required=True,
                    help="JSON file with games, programs and budgets")
    sp.add_argument("--trace", action="store_true",
                    help="include per-oracle execution traces")
    add_out(sp)
    sp.set_defaults(func=cmd_reduce)

    sp = sub.add_parser("qsim", help="compressed-oracle checks")
    sp.add_argument("--check", required=True,
                    choices=["tv", "capacity", "path", "threshold", "gh"])
    sp.add_argument("--K", type=int, default=1)
    sp.add_argument("--M", type=int, default=2)
    sp.add_argument("--N", type=int, default=2)
    sp.add_argument("--Z", type=int, default=1)
    sp.add_argument("--T", type=int, default=2)
    sp.add_argument("--t", type=int, default=1,
                    help="database-size / time parameter where applicable")
    sp.add_argument("--salt", type=int, default=0)
    sp.add_argument("--kappa", type=int, default=1)
    sp.add_argument("--C", type=float, default=1.0)
    sp.add_argument("--trials", type=int, default=50)
    sp.add_argument("--property", default="preimage_zero")
    sp.add_argument("--seed", type=int, required=True)
    add_out(sp)
    sp.set_defaults(func=cmd_qsim)

    sp = sub.add_parser("suite", help="run the acceptance battery")
    sp.add_argument("--fast", action="store_true",
                    help="trim the Monte Carlo sample sizes")
    add_out(sp)
    sp.set_defaults(func=cmd_suite)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit2:
        raise
    except (G.GameSpecError, G.BudgetExceededError, ValueError,
            FileNotFoundError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_ARGS


if __name__ == "__main__":
    sys.exit(main())
