"""Closed-form upper bounds for salted games with preprocessing advice.

Every evaluator returns a BoundReport.  Exact quantities stay `Fraction`;
irrational pieces (1/L-th roots, square roots, powers of two) are evaluated
as `Decimal` with 50 significant digits under directed upward rounding, so a
reported bound is never smaller than the ideal one and remains a sound upper
bound on the adversary's advantage.

The L-scan picks the best integer L in [1, L_max]; nothing is claimed about
real-valued L.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext, ROUND_CEILING
from fractions import Fraction
from typing import Callable

#: digits of precision carried by directed-rounded irrational arithmetic
DIGITS = 50

#: rational upper bound on Euler's number (used in Stirling-type estimates)
E_UPPER = Fraction(27182818284590452354, 10**19) + Fraction(1, 10**19)

#: default cap on enumerated compositions before the heuristic kicks in
DEFAULT_COMPOSITION_BUDGET = 200_000


def _dec(x) -> Decimal:
    """Exact Decimal image of a Fraction/int (division rounds up)."""
    if isinstance(x, Decimal):
        return x
    if isinstance(x, int):
        return Decimal(x)
    frac = Fraction(x)
    with localcontext() as ctx:
        ctx.prec = DIGITS
        ctx.rounding = ROUND_CEILING
        return Decimal(frac.numerator) / Decimal(frac.denominator)


def power_upper(base, exponent: Fraction) -> Decimal:
    """base ** exponent rounded upward; base > 0."""
    b = Fraction(base) if not isinstance(base, Decimal) else base
    if isinstance(b, Fraction) and b <= 0:
        if b == 0:
            return Decimal(0)
        raise ValueError("base must be positive")
    e = Fraction(exponent)
    if e.denominator == 1 and not isinstance(base, Decimal):
        # exact rational power
        return _dec(Fraction(base) ** e.numerator)
    with localcontext() as ctx:
        # ln and exp always round half-even regardless of context, so work
        # with guard digits and push the result up by more than the
        # accumulated error before rounding to the reported precision
        ctx.prec = DIGITS + 10
        bd = base if isinstance(base, Decimal) else _dec(base)
        r = (bd.ln() * Decimal(e.numerator) / Decimal(e.denominator)).exp()
        r = r + r.copy_abs().scaleb(-(DIGITS + 5))
    with localcontext() as ctx:
        ctx.prec = DIGITS
        ctx.rounding = ROUND_CEILING
        return +r


def root_upper(x, L: int) -> Decimal:
    """x ** (1/L) rounded upward (x >= 0)."""
    if Fraction(x) == 0:
        return Decimal(0)
    return power_upper(x, Fraction(1, L))


def sqrt_upper(x) -> Decimal:
    return root_upper(x, 2)


def pow2_upper(exponent: Fraction) -> Decimal:
    return power_upper(2, exponent)


@dataclass
class BoundReport:
    """One evaluated bound: name, inputs, the value and how it was obtained."""

    name: str
    params: dict
    value: object                  # Fraction when exact, Decimal otherwise
    argmin_L: int | None = None
    exact: bool = False
    extras: dict = field(default_factory=dict)

    def value_fraction(self) -> Fraction:
        """The reported value as an exact Fraction (Decimals are exact too)."""
        if isinstance(self.value, Decimal):
            return Fraction(self.value)
        return Fraction(self.value)

    def to_dict(self) -> dict:
        def enc(v):
            if isinstance(v, Fraction):
                return {"num": v.numerator, "den": v.denominator}
            if isinstance(v, Decimal):
                return {"digits": str(v)}
            if isinstance(v, dict):
                return {k: enc(x) for k, x in v.items()}
            if isinstance(v, (list, tuple)):
                return [enc(x) for x in v]
            return v
        return {
            "name": self.name,
            "params": enc(self.params),
            "value": enc(self.value),
            "argmin_L": self.argmin_L,
            "exact": self.exact,
            "extras": enc(self.extras),
        }


def distinct_count_moment(K: int, L: int, c: Fraction) -> BoundReport:
    """E[c^ell] for ell = #distinct values in L uniform draws from [K],
    computed exactly by DP, together with the closed form (c + L/K)^L.

    The DP follows ell_i = ell_{i-1} + Bernoulli(1 - ell_{i-1}/K).
    """
    if K < 1 or L < 0:
        raise ValueError("need K >= 1 and L >= 0")
    c = Fraction(c)
    if not 0 <= c <= 1:
        raise ValueError("c must lie in [0, 1]")
    dist = {0: Fraction(1)}
    for _ in range(L):
        nxt: dict[int, Fraction] = {}
        for j, p in dist.items():
            stay = Fraction(j, K)
            if stay:
                nxt[j] = nxt.get(j, Fraction(0)) + p * stay
            nxt[j + 1] = nxt.get(j + 1, Fraction(0)) + p * (1 - stay)
        dist = nxt
    exact = sum((p * c**j for j, p in dist.items()), Fraction(0))
    bound = (c + Fraction(L, K)) ** L
    return BoundReport(
        name="distinct_count_moment",
        params={"K": K, "L": L, "c": c},
        value=exact,
        exact=True,
        extras={"bound": bound, "distribution": dict(sorted(dist.items()))},
    )


def composition_count(K: int, L: int) -> BoundReport:
    """#(weak compositions of L into K parts) = C(K+L-1, K-1), plus the
    Stirling-type estimate (2eK/L)^L for L <= K, (2eL/K)^K otherwise.

    The estimate uses a rational upper approximation of e, so it can only
    overshoot the ideal right-hand side (the checked inequality is sound).
    """
    if K < 1 or L < 1:
        raise ValueError("need K >= 1 and L >= 1")
    exact = math.comb(K + L - 1, K - 1)
    if L <= K:
        est = (2 * E_UPPER * Fraction(K, L)) ** L
    else:
        est = (2 * E_UPPER * Fraction(L, K)) ** K
    return BoundReport(
        name="composition_count",
        params={"K": K, "L": L},
        value=Fraction(exact),
        exact=True,
        extras={"stirling_bound": est},
    )


def salting_bound(eps: Fraction, S: int, K: int,
                  L_max: int | None = None) -> BoundReport:
    """min over L in [1, L_max] of 2^(S/L) * (eps + L/K), the generic
    advice-vs-salt tradeoff for a base game with optimal value eps.

    Also reports the two informal corollary forms 2*eps + 2S/K and
    eps + 4*sqrt(S/K).
    """
    eps = Fraction(eps)
    if not 0 <= eps <= 1:
        raise ValueError("eps must lie in [0, 1]")
    if S < 0 or K < 1:
        raise ValueError("need S >= 0 and K >= 1")
    if L_max is None:
        L_max = max(4 * K, 4 * S, 8)
    best_val = None
    best_key: Fraction | None = None
    best_L = None
    for L in range(1, L_max + 1):
        linear = eps + Fraction(L, K)
        if S % L == 0:
            val = 2 ** (S // L) * linear  # exact Fraction
        else:
            with localcontext() as ctx:
                ctx.prec = DIGITS
                ctx.rounding = ROUND_CEILING
                val = pow2_upper(Fraction(S, L)) * _dec(linear)
        key = Fraction(val)
        if best_key is None or key < best_key:
            best_val, best_key, best_L = val, key, L
    mult_form = 2 * eps + Fraction(2 * S, K)
    add_form = _dec(eps) + 4 * sqrt_upper(Fraction(S, K))
    return BoundReport(
        name="salting_bound",
        params={"eps": eps, "S": S, "K": K, "L_max": L_max},
        value=best_val,
        argmin_L=best_L,
        exact=isinstance(best_val, Fraction),
        extras={"multiplicative_form": mult_form, "additive_form": add_form},
    )


def _compositions(total: int, parts: int):
    """Weak compositions of `total` into `parts` nonnegative parts."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def salting_bound_mult(eps_multi: Callable[[int], Fraction], S: int, K: int,
                       T: int, L_max: int,
                       budget: int = DEFAULT_COMPOSITION_BUDGET) -> BoundReport:
    """min over L of 2^(S/L) * ( L!/K^L * sum over compositions
    (n_1..n_K) of L of prod_k eps_multi(n_k)/n_k! )^(1/L).

    eps_multi(n) must be the optimal value of the n-fold challenge game with
    n*T queries (eps_multi(0) = 1).  Exponential in the composition count;
    guarded by `budget`.
    """
    if S < 0 or K < 1 or L_max < 1:
        raise ValueError("bad parameters")
    best_val: Decimal | None = None
    best_L = None
    inner_by_L = {}
    for L in range(1, L_max + 1):
        n_comp = math.comb(K + L - 1, K - 1)
        if n_comp > budget:
            break
        cache = {n: Fraction(eps_multi(n)) for n in range(L + 1)}
        total = Fraction(0)
        for comp in _compositions(L, K):
            term = Fraction(1)
            for n in comp:
                term *= cache[n] / math.factorial(n)
            total += term
        inner = Fraction(math.factorial(L), K**L) * total
        inner_by_L[L] = inner
        with localcontext() as ctx:
            ctx.prec = DIGITS
            ctx.rounding = ROUND_CEILING
            val = pow2_upper(Fraction(S, L)) * root_upper(inner, L)
        if best_val is None or val < best_val:
            best_val, best_L = val, L
    if best_val is None:
        raise ValueError("no feasible L under the composition budget")
    return BoundReport(
        name="salting_bound_mult",
        params={"S": S, "K": K, "T": T, "L_max": L_max},
        value=best_val,
        argmin_L=best_L,
        extras={"inner_by_L": inner_by_L},
    )


def salting_bound_large_advice(eps_multi: Callable[[int], Fraction], S: int,
                               K: int, T: int, L: int,
                               budget: int = DEFAULT_COMPOSITION_BUDGET
                               ) -> BoundReport:
    """2e^2 * 2^(S/L) * max over compositions (n_1..n_K) of L of
    sum_k eps_multi(n_k)^(1/n_k) / min(K, L), with the n_k = 0 terms
    contributing 1 each.

    When the composition space exceeds `budget` the maximum is replaced by a
    heuristic scan over balanced and single-spike compositions (flagged in
    extras; the result is then only an estimate of the corollary value).
    """
    if S < 0 or K < 1 or L < 1:
        raise ValueError("bad parameters")
    denom = min(K, L)

    def comp_sum(comp) -> Decimal:
        with localcontext() as ctx:
            ctx.prec = DIGITS
            ctx.rounding = ROUND_CEILING
            s = Decimal(0)
            for n in comp:
                if n == 0:
                    s += Decimal(1)
                else:
                    s += root_upper(Fraction(eps_multi(n)), n)
        return s

    heuristic = math.comb(K + L - 1, K - 1) > budget
    if not heuristic:
        best = max(comp_sum(c) for c in _compositions(L, K))
    else:
        candidates = []
        # balanced: spread L as evenly as possible over the K parts
        q, r = divmod(L, K)
        candidates.append(tuple([q + 1] * r + [q] * (K - r)))
        # single spike: all of L on one part
        candidates.append(tuple([L] + [0] * (K - 1)))
        best = max(comp_sum(c) for c in candidates)
    with localcontext() as ctx:
        ctx.prec = DIGITS
        ctx.rounding = ROUND_CEILING
        value = 2 * _dec(E_UPPER * E_UPPER) * pow2_upper(Fraction(S, L)) \
            * best / denom
    return BoundReport(
        name="salting_bound_large_advice",
        params={"S": S, "K": K, "T": T, "L": L},
        value=value,
        argmin_L=L,
        extras={"heuristic": heuristic, "max_composition_sum": best},
    )


def inversion_eps_multi(N: int, T: int, C: Fraction = Fraction(1)):
    """eps_multi(n) = min(1, (C * n * T / N)^n) for the inversion game over
    range [N]; the constant C is configurable and reported by callers."""
    C = Fraction(C)

    def eps(n: int) -> Fraction:
        if n == 0:
            return Fraction(1)
        v = (C * Fraction(n * T, N)) ** n
        return min(Fraction(1), v)

    return eps


def inversion_bound(S: int, T: int, K: int, N: int,
                    C: Fraction = Fraction(1)) -> BoundReport:
    """Advice-vs-salt bound for salted inversion: the large-advice corollary
    evaluated at L = S, of shape C' * S * T / (N * min(S, K)).

    For S = 0 the bound degenerates to the single-challenge value C*T/N.
    """
    if S == 0:
        val = min(Fraction(1), Fraction(C) * Fraction(T, N))
        return BoundReport(
            name="inversion_bound",
            params={"S": S, "T": T, "K": K, "N": N, "C": Fraction(C)},
            value=val,
            exact=True,
            extras={"degenerate": True},
        )
    inner = salting_bound_large_advice(
        inversion_eps_multi(N, T, C), S, K, T, L=S
    )
    shape = Fraction(S * T, N * min(S, K))
    cprime = None
    if shape:
        with localcontext() as ctx:
            ctx.prec = DIGITS
            ctx.rounding = ROUND_CEILING
            cprime = inner.value / _dec(shape)
    return BoundReport(
        name="inversion_bound",
        params={"S": S, "T": T, "K": K, "N": N, "C": Fraction(C)},
        value=inner.value,
        argmin_L=S,
        extras={"shape": shape, "C_prime": cprime,
                "heuristic": inner.extras["heuristic"]},
    )
