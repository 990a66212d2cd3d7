from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from saltlab.attacks import (
    AdviceTable,
    CombinedAttack,
    birthday_win_probability,
    build_lookup_advice,
    entry_bits,
    monte_carlo_advantage,
    probe_win_probability,
)


def test_entry_bits():
    assert entry_bits("collision", 64, 64) == 6 + 12
    assert entry_bits("preimage_zero", 64, 64) == 6 + 6
    assert entry_bits("inversion", 16, 8) == 4 + 3


@given(
    entries=st.lists(
        st.tuples(st.integers(0, 63),
                  st.tuples(st.integers(0, 31), st.integers(0, 31))),
        max_size=8,
    )
)
@settings(max_examples=60, deadline=None)
def test_collision_codec_roundtrip(entries):
    adv = AdviceTable("collision", 64, 32, list(entries))
    packed, nbits = adv.encode()
    assert nbits == len(entries) * adv.record_bits
    back = AdviceTable.decode("collision", 64, 32, packed, nbits)
    assert back.entries == [(s, tuple(a)) for s, a in entries]


def test_preimage_codec_roundtrip():
    adv = AdviceTable("preimage_zero", 8, 16, [(7, (15,)), (0, (3,))])
    packed, nbits = adv.encode()
    assert AdviceTable.decode("preimage_zero", 8, 16, packed, nbits).entries \
        == adv.entries


def test_build_lookup_advice_scans_in_order():
    oracle = np.array([
        [1, 2, 3],   # no collision, no zero
        [1, 1, 2],   # collision at (0, 1)
        [2, 3, 2],   # collision at (0, 2)
        [3, 3, 3],
    ])
    eb = entry_bits("collision", 4, 3)
    adv = build_lookup_advice("collision", oracle, S=2 * eb)
    assert adv.entries == [(1, (0, 1)), (2, (0, 2))]
    adv1 = build_lookup_advice("collision", oracle, S=eb)
    assert adv1.entries == [(1, (0, 1))]
    zero = build_lookup_advice("preimage_zero", oracle, S=4 * eb)
    assert zero.entries == []  # no zeros anywhere


def test_birthday_formula():
    assert birthday_win_probability(2, 4) == Fraction(1, 4)
    assert birthday_win_probability(1, 4) == 0
    assert birthday_win_probability(5, 4) == 1
    # 1 - prod (1 - i/N)
    want = 1 - Fraction(3, 4) * Fraction(2, 4)
    assert birthday_win_probability(3, 4) == want


def test_probe_formula():
    assert probe_win_probability(1, 4) == Fraction(1, 4)
    assert probe_win_probability(2, 2) == Fraction(3, 4)


def test_monte_carlo_is_seed_deterministic():
    atk = CombinedAttack("collision", 8, 8, 8, S=2 * entry_bits("collision", 8, 8), T=2)
    a = monte_carlo_advantage(atk, 500, seed=42)
    b = monte_carlo_advantage(atk, 500, seed=42)
    assert a.estimate == b.estimate and a.wins == b.wins
    c = monte_carlo_advantage(atk, 500, seed=43)
    assert (a.estimate, a.wins) != (c.estimate, c.wins) or a.seed != c.seed


def test_monte_carlo_tracks_closed_form():
    # small enough to compare against floor + (1 - floor) * online
    atk = CombinedAttack("preimage_zero", 4, 16, 2, S=4 * entry_bits("preimage_zero", 4, 16), T=0)
    # every salt table over N=2 with 16 cells has a zero almost surely;
    # capacity covers all 4 salts, so the advantage is essentially 1
    mc = monte_carlo_advantage(atk, 2000, seed=1)
    assert mc.estimate > 0.99
    atk2 = CombinedAttack("collision", 16, 8, 64, S=0, T=4)
    mc2 = monte_carlo_advantage(atk2, 4000, seed=2)
    online = float(atk2.online_win_probability())
    assert abs(mc2.estimate - online) < 5 * mc2.stderr + 0.02


def test_inversion_lookup_only_covers_target_zero():
    atk = CombinedAttack("inversion", 4, 4, 4,
                         S=4 * entry_bits("inversion", 4, 4), T=0)
    assert atk.lookup_floor() == Fraction(1, 4)  # capacity/K scaled by 1/N
    mc = monte_carlo_advantage(atk, 4000, seed=3)
    # lookup hits only when the challenge is 0 and the salt stores a preimage
    assert mc.estimate < 0.6


def test_rejects_unknown_family():
    with pytest.raises(ValueError):
        CombinedAttack("ksum", 4, 4, 4, 8, 1)
    with pytest.raises(ValueError):
        build_lookup_advice("ksum", np.zeros((2, 2), dtype=int), 8)
