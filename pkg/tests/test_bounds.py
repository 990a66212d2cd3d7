import math
from decimal import Decimal
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from saltlab.bounds import (
    E_UPPER,
    composition_count,
    distinct_count_moment,
    inversion_bound,
    inversion_eps_multi,
    pow2_upper,
    root_upper,
    salting_bound,
    salting_bound_large_advice,
    salting_bound_mult,
    sqrt_upper,
)
from saltlab.games import preimage_game
from saltlab.solver import multi_challenge_value, optimal_value


def test_e_upper_really_upper():
    assert float(E_UPPER) >= math.e


@given(num=st.integers(1, 10**6), den=st.integers(1, 10**6),
       L=st.integers(1, 12))
@settings(max_examples=80, deadline=None)
def test_root_upper_is_an_upper_bound(num, den, L):
    x = Fraction(num, den)
    r = Fraction(root_upper(x, L))
    assert r ** L >= x
    # and not absurdly loose: 60 significant digits of slack at most
    assert (r * (1 - Fraction(1, 10**40))) ** L <= x


def test_pow2_exact_on_integers():
    assert pow2_upper(Fraction(10)) == Decimal(1024)
    assert Fraction(pow2_upper(Fraction(1, 2))) ** 2 >= 2


def test_moment_frozen_example():
    rep = distinct_count_moment(2, 2, Fraction(1, 2))
    assert rep.value == Fraction(3, 8)
    assert rep.extras["bound"] == Fraction(9, 4)
    assert rep.extras["distribution"] == {1: Fraction(1, 2), 2: Fraction(1, 2)}


def test_moment_edge_cases():
    # c = 1: the moment is exactly 1, bound (1 + L/K)^L
    rep = distinct_count_moment(3, 4, Fraction(1))
    assert rep.value == 1
    # L = 0: empty draw, ell = 0, c^0 = 1
    rep = distinct_count_moment(5, 0, Fraction(1, 3))
    assert rep.value == 1


@given(K=st.integers(1, 8), L=st.integers(1, 8),
       c=st.sampled_from([Fraction(0), Fraction(1, 4), Fraction(1, 2),
                          Fraction(3, 4), Fraction(1)]))
@settings(max_examples=60, deadline=None)
def test_moment_bound_property(K, L, c):
    rep = distinct_count_moment(K, L, c)
    assert rep.value <= rep.extras["bound"]


def test_composition_count_frozen():
    rep = composition_count(3, 5)
    assert rep.value == 21
    assert rep.value <= rep.extras["stirling_bound"]


@given(K=st.integers(1, 10), L=st.integers(1, 10))
@settings(max_examples=60, deadline=None)
def test_composition_count_bound(K, L):
    rep = composition_count(K, L)
    assert rep.value <= rep.extras["stirling_bound"]


def test_salting_bound_frozen():
    rep = salting_bound(Fraction(1, 10), 4, 16, L_max=64)
    assert rep.argmin_L == 4
    assert rep.value == Fraction(7, 10)  # 2^(4/4) * (1/10 + 4/16), exact
    assert rep.exact
    assert rep.extras["multiplicative_form"] == Fraction(7, 10)


def test_salting_bound_scan_is_a_minimum():
    from decimal import ROUND_CEILING, localcontext

    from saltlab.bounds import DIGITS, _dec

    rep = salting_bound(Fraction(1, 8), 6, 32, L_max=48)
    for L in range(1, 49):
        linear = Fraction(1, 8) + Fraction(L, 32)
        if 6 % L == 0:
            brute = Fraction(2 ** (6 // L)) * linear
        else:
            with localcontext() as ctx:
                ctx.prec = DIGITS
                ctx.rounding = ROUND_CEILING
                brute = pow2_upper(Fraction(6, L)) * _dec(linear)
        assert Fraction(rep.value) <= Fraction(brute)


def test_salting_bound_zero_advice():
    rep = salting_bound(Fraction(1, 3), 0, 9)
    # S = 0: 2^0 (eps + 1/K) at L = 1 is optimal
    assert rep.argmin_L == 1
    assert rep.value_fraction() == Fraction(1, 3) + Fraction(1, 9)


def test_salting_bound_mult_dominates_single_value():
    base = preimage_game(1, 2)
    eps_multi = lambda n: multi_challenge_value(base, n, 1)
    rep = salting_bound_mult(eps_multi, S=1, K=2, T=1, L_max=4)
    # sanity: a genuine upper bound on the S-bit nonuniform value
    from saltlab.games import salt
    from saltlab.solver import optimal_nonuniform_value
    val = optimal_nonuniform_value(salt(base, 2), 1, 1)
    assert Fraction(rep.value) >= val


def test_large_advice_heuristic_flag():
    eps_multi = inversion_eps_multi(64, 8)
    small = salting_bound_large_advice(eps_multi, S=4, K=3, T=8, L=4)
    assert small.extras["heuristic"] is False
    big = salting_bound_large_advice(eps_multi, S=288, K=64, T=8, L=288)
    assert big.extras["heuristic"] is True


def test_inversion_bound_shape():
    rep = inversion_bound(S=16, T=2, K=8, N=64)
    assert rep.extras["shape"] == Fraction(16 * 2, 64 * 8)
    assert rep.extras["C_prime"] is not None
    # S = 0 degenerates to the single-challenge value
    rep0 = inversion_bound(S=0, T=2, K=8, N=64)
    assert rep0.value == Fraction(2, 64)


def test_report_serialization():
    rep = salting_bound(Fraction(1, 10), 4, 16, L_max=8)
    d = rep.to_dict()
    assert d["name"] == "salting_bound"
    assert d["params"]["eps"] == {"num": 1, "den": 10}
    assert d["value"] == {"num": 7, "den": 10}  # the minimum lands on L | S
    irr = salting_bound(Fraction(1, 10), 7, 100, L_max=20)
    assert irr.argmin_L == 10 and 7 % 10 != 0
    assert isinstance(irr.to_dict()["value"]["digits"], str)


def test_bad_parameters_rejected():
    with pytest.raises(ValueError):
        distinct_count_moment(0, 1, Fraction(1, 2))
    with pytest.raises(ValueError):
        distinct_count_moment(2, 2, Fraction(3, 2))
    with pytest.raises(ValueError):
        salting_bound(Fraction(2), 1, 1)
