"""Canonical lookup + online attacks against salted games, at sampling scale.

These attackers work directly from a (family, K, M, N) description with
numpy-sampled oracles, so they scale far beyond the exact enumeration in
`saltlab.games`.  The advice is a fixed-width table of (salt, answer) records
packed into a single bit string; the online phase falls back to a standard
birthday / exhaustive-probe attack when the challenge salt is not stored.

Supported families: "collision", "preimage_zero", "inversion".  For
inversion the stored answer is a preimage of the fixed target value 0, so a
lookup hit only wins when the challenge happens to equal 0 (advice that
covers every challenge would not fit the fixed-width format).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

_FAMILIES = ("collision", "preimage_zero", "inversion")


def _bits_for(n: int) -> int:
    return max(1, (n - 1).bit_length())


def answer_bits(family: str, M: int) -> int:
    if family == "collision":
        return 2 * _bits_for(M)
    return _bits_for(M)


def entry_bits(family: str, K: int, M: int) -> int:
    """Width of one advice record: salt index plus a family-shaped answer."""
    return _bits_for(K) + answer_bits(family, M)


@dataclass
class AdviceTable:
    """Fixed-width advice: records (salt, answer) packed MSB-first."""

    family: str
    K: int
    M: int
    entries: list[tuple[int, tuple[int, ...]]] = field(default_factory=list)

    @property
    def record_bits(self) -> int:
        return entry_bits(self.family, self.K, self.M)

    def encode(self) -> tuple[int, int]:
        """(packed integer, bit length)."""
        sb = _bits_for(self.K)
        ab = _bits_for(self.M)
        packed = 0
        for salt, ans in self.entries:
            packed = (packed << sb) | salt
            if self.family == "collision":
                packed = (packed << ab) | ans[0]
                packed = (packed << ab) | ans[1]
            else:
                packed = (packed << ab) | ans[0]
        return packed, len(self.entries) * self.record_bits

    @classmethod
    def decode(cls, family: str, K: int, M: int, packed: int,
               nbits: int) -> "AdviceTable":
        sb = _bits_for(K)
        ab = _bits_for(M)
        rb = entry_bits(family, K, M)
        if nbits % rb:
            raise ValueError("bit length is not a whole number of records")
        entries: list[tuple[int, tuple[int, ...]]] = []
        for i in range(nbits // rb - 1, -1, -1):
            rec = (packed >> (i * rb)) & ((1 << rb) - 1)
            if family == "collision":
                x2 = rec & ((1 << ab) - 1)
                x1 = (rec >> ab) & ((1 << ab) - 1)
                salt = rec >> (2 * ab)
                entries.append((salt, (x1, x2)))
            else:
                x = rec & ((1 << ab) - 1)
                salt = rec >> ab
                entries.append((salt, (x,)))
        return cls(family=family, K=K, M=M, entries=entries)

    def lookup(self, salt: int) -> tuple[int, ...] | None:
        for s, ans in self.entries:
            if s == salt:
                return ans
        return None


def _winning_answer(family: str, table: np.ndarray) -> tuple[int, ...] | None:
    """First winning answer for one salt table, or None.

    collision: lexicographically first pair (i, j), i < j, with equal values;
    preimage_zero / inversion: first position mapping to 0.
    """
    if family == "collision":
        seen: dict[int, int] = {}
        for j, v in enumerate(table.tolist()):
            if v in seen:
                return (seen[v], j)
            seen[v] = j
        return None
    hits = np.flatnonzero(table == 0)
    if hits.size:
        return (int(hits[0]),)
    return None


def build_lookup_advice(family: str, oracle: np.ndarray, S: int) -> AdviceTable:
    """Scan salts in order, storing a winning answer for each salt that has
    one, until the floor(S / entry_bits) record capacity is exhausted."""
    if family not in _FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    K, M = oracle.shape
    capacity = S // entry_bits(family, K, M)
    adv = AdviceTable(family=family, K=K, M=M)
    for k in range(K):
        if len(adv.entries) >= capacity:
            break
        ans = _winning_answer(family, oracle[k])
        if ans is not None:
            adv.entries.append((k, ans))
    return adv


def birthday_win_probability(T: int, N: int) -> Fraction:
    """Pr that T values drawn uniformly from [N] contain a repeat."""
    if T > N:
        return Fraction(1)
    p = Fraction(1)
    for i in range(1, T):
        p *= Fraction(N - i, N)
    return 1 - p


def probe_win_probability(T: int, N: int) -> Fraction:
    """Pr that T independent probes hit a specific value in [N]."""
    return 1 - (1 - Fraction(1, N)) ** min(T, N * T)


@dataclass
class CombinedAttack:
    """Lookup-else-online attacker for the K-salted family game."""

    family: str
    K: int
    M: int
    N: int
    S: int
    T: int

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")

    @property
    def capacity(self) -> int:
        return min(self.K, self.S // entry_bits(self.family, self.K, self.M))

    def online_win(self, rng: np.random.Generator, table: np.ndarray,
                   challenge: int | None) -> bool:
        """T queries at distinct uniformly chosen positions of one salt table."""
        T = min(self.T, self.M)
        probes = rng.choice(self.M, size=T, replace=False)
        vals = table[probes]
        if self.family == "collision":
            return len(np.unique(vals)) < len(vals)
        target = 0 if self.family == "preimage_zero" else challenge
        return bool(np.any(vals == target))

    def trial(self, rng: np.random.Generator) -> tuple[bool, int]:
        """One Monte Carlo trial: sample the oracle lazily (only the salts the
        advice scan and the challenge actually touch), play, report
        (win, stored_records)."""
        eb = entry_bits(self.family, self.K, self.M)
        capacity = self.S // eb
        tables: dict[int, np.ndarray] = {}

        adv = AdviceTable(family=self.family, K=self.K, M=self.M)
        scanned = 0
        while len(adv.entries) < capacity and scanned < self.K:
            t = rng.integers(0, self.N, size=self.M)
            tables[scanned] = t
            ans = _winning_answer(self.family, t)
            if ans is not None:
                adv.entries.append((scanned, ans))
            scanned += 1

        k = int(rng.integers(0, self.K))
        challenge = int(rng.integers(0, self.N)) if self.family == "inversion" else None
        table = tables.get(k)
        if table is None:
            table = rng.integers(0, self.N, size=self.M)

        hit = adv.lookup(k)
        if hit is not None:
            if self.family == "collision":
                x1, x2 = hit
                return bool(x1 != x2 and table[x1] == table[x2]), len(adv.entries)
            (x,) = hit
            target = 0 if self.family == "preimage_zero" else challenge
            return bool(table[x] == target), len(adv.entries)
        return self.online_win(rng, table, challenge), len(adv.entries)

    def online_win_probability(self) -> Fraction:
        """Closed-form online success probability (no advice hit)."""
        T = min(self.T, self.M)
        if self.family == "collision":
            return birthday_win_probability(T, self.N)
        return probe_win_probability(T, self.N)

    def lookup_floor(self) -> Fraction:
        """capacity / K: the advantage from stored salts alone, assuming every
        scanned salt has a winning answer (exact for collision-dense regimes)."""
        frac = Fraction(self.capacity, self.K)
        if self.family == "inversion":
            frac /= self.N  # a stored preimage of 0 only wins on challenge 0
        return frac


@dataclass
class MonteCarloResult:
    estimate: float
    stderr: float
    trials: int
    wins: int
    mean_stored: float
    seed: int

    def to_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "stderr": self.stderr,
            "trials": self.trials,
            "wins": self.wins,
            "mean_stored": self.mean_stored,
            "seed": self.seed,
        }


def monte_carlo_advantage(attack: CombinedAttack, trials: int,
                          seed: int) -> MonteCarloResult:
    """Seed-deterministic Monte Carlo estimate with binomial standard error."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    wins = 0
    stored = 0
    for _ in range(trials):
        w, s = attack.trial(rng)
        wins += int(w)
        stored += s
    p = wins / trials
    stderr = math.sqrt(max(p * (1 - p), 1e-12) / trials)
    return MonteCarloResult(
        estimate=p,
        stderr=stderr,
        trials=trials,
        wins=wins,
        mean_stored=stored / trials,
        seed=seed,
    )
