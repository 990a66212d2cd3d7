"""Projections over compressed-oracle states and numerical lemma checks.

All the projections used here are diagonal in the computational basis of the
query register and the database cells, so they are implemented as boolean
masks multiplied into the dense state:

    lambda_k      database restricted to salt k satisfies the property
    lambda_S      every salt in S satisfies it
    lambda_eq/ge  exactly / at least r salts satisfy it
    tau_k         the query register addresses salt k
    q_used        "used elements" count t - |D| + sum_{k in S} |D_k| equals j
    q_size        |D restricted to salt k| equals nu

`used_elements` raises ScheduleViolationError when asked about a state that
cannot occur at query time t (|D| > t), which is the usual symptom of a
mis-indexed projector schedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations, product

import numpy as np

from .qprops import (
    PropertySpec,
    gamma_extended,
    transition_probability,
)
from .qsim import (
    Circuit,
    Dims,
    QState,
    apply_algorithm_unitary,
    apply_cphso,
    apply_csto,
    random_state,
    run_circuit,
    run_standard,
)


class ScheduleViolationError(ValueError):
    """A projector schedule asked about an impossible (t, |D|) combination."""


# --- database bookkeeping -------------------------------------------------


def _db_tuples(dims: Dims):
    return product(range(dims.cell_dim), repeat=dims.cells)


def _restriction(dims: Dims, db: tuple[int, ...], k: int) -> dict:
    """Database restricted to salt k, keyed by local position."""
    lo = k * dims.M
    return {
        i: db[lo + i] for i in range(dims.M) if db[lo + i] != dims.N
    }


def db_size(dims: Dims, db: tuple[int, ...]) -> int:
    return sum(1 for v in db if v != dims.N)


def used_elements(dims: Dims, db: tuple[int, ...], t: int,
                  S: frozenset[int] | set[int]) -> int:
    """t - |D| + sum_{k in S} |D_k|; raises if |D| > t."""
    size = db_size(dims, db)
    if size > t:
        raise ScheduleViolationError(
            f"database of size {size} cannot exist after {t} queries"
        )
    return t - size + sum(
        len(_restriction(dims, db, k)) for k in S
    )


def _db_mask(dims: Dims, accept) -> np.ndarray:
    """Boolean mask over the database axes from a per-tuple predicate."""
    mask = np.empty((dims.cell_dim,) * dims.cells, dtype=bool)
    for db in _db_tuples(dims):
        mask[db] = accept(db)
    return mask


def _apply_db_mask(state: QState, mask: np.ndarray) -> QState:
    dims = state.dims
    return QState(state.dims, state.vec * mask[None, None, None, ...])


def salt_success(dims: Dims, prop: PropertySpec, db: tuple[int, ...],
                 k: int) -> bool:
    return prop.holds(_restriction(dims, db, k))


def success_count(dims: Dims, prop: PropertySpec, db: tuple[int, ...]) -> int:
    return sum(salt_success(dims, prop, db, k) for k in range(dims.K))


# --- projections -----------------------------------------------------------


def project_salt(state: QState, prop: PropertySpec, k: int,
                 negate: bool = False) -> QState:
    dims = state.dims
    mask = _db_mask(dims, lambda db: salt_success(dims, prop, db, k) != negate)
    return _apply_db_mask(state, mask)


def project_salts_all(state: QState, prop: PropertySpec, S) -> QState:
    dims = state.dims
    S = set(S)
    mask = _db_mask(
        dims, lambda db: all(salt_success(dims, prop, db, k) for k in S)
    )
    return _apply_db_mask(state, mask)


def project_count_eq(state: QState, prop: PropertySpec, r: int) -> QState:
    dims = state.dims
    mask = _db_mask(dims, lambda db: success_count(dims, prop, db) == r)
    return _apply_db_mask(state, mask)


def project_count_ge(state: QState, prop: PropertySpec, r: int) -> QState:
    dims = state.dims
    mask = _db_mask(dims, lambda db: success_count(dims, prop, db) >= r)
    return _apply_db_mask(state, mask)


def project_property(state: QState, prop: PropertySpec,
                     salt: int | None = None) -> tuple[QState, float]:
    """Project onto the property (on one salt, or on the full flat database
    when salt is None); returns the projected state and its squared norm."""
    dims = state.dims
    if salt is None:
        mask = _db_mask(
            dims,
            lambda db: prop.holds(
                {c: v for c, v in enumerate(db) if v != dims.N}
            ),
        )
        out = _apply_db_mask(state, mask)
    else:
        out = project_salt(state, prop, salt)
    return out, out.norm2()


def project_salt_counts(state: QState, prop: PropertySpec,
                        counts) -> tuple[QState, float]:
    """Keep components whose per-salt success count lies in `counts`."""
    dims = state.dims
    counts = set(counts)
    mask = _db_mask(dims, lambda db: success_count(dims, prop, db) in counts)
    out = _apply_db_mask(state, mask)
    return out, out.norm2()


def project_query_salt(state: QState, k: int) -> QState:
    """tau_k: keep components whose query register addresses salt k."""
    dims = state.dims
    out = state.vec.copy()
    for x in range(dims.cells):
        if dims.salt_of_query(x) != k:
            out[x] = 0
    return QState(dims, out)


def project_db_size_le(state: QState, k: int, t: int) -> QState:
    dims = state.dims
    mask = _db_mask(dims, lambda db: len(_restriction(dims, db, k)) <= t)
    return _apply_db_mask(state, mask)


def project_used_eq(state: QState, prop_S, t: int, j: int) -> QState:
    """Q_j at time t with respect to salt set prop_S (diagonal in db)."""
    dims = state.dims
    S = set(prop_S)

    def accept(db):
        size = db_size(dims, db)
        if size > t:
            return False  # impossible at time t; carries no amplitude anyway
        return t - size + sum(len(_restriction(dims, db, k)) for k in S) == j

    return _apply_db_mask(state, _db_mask(dims, accept))


def project_used_le(state: QState, prop_S, t: int, j: int) -> QState:
    dims = state.dims
    S = set(prop_S)

    def accept(db):
        size = db_size(dims, db)
        if size > t:
            return False
        return t - size + sum(len(_restriction(dims, db, k)) for k in S) <= j

    return _apply_db_mask(state, _db_mask(dims, accept))


# --- Lemma 5: measuring the database instead of the oracle ------------------


def lemma5_check(circ: Circuit, decoder, c: int) -> dict:
    """Compare Pr[output relation holds on the real oracle] against
    Pr[the compressed database agrees with the c claimed input/output pairs].

    `decoder(x, u, z)` returns a tuple of (x_i, y_i) claims (length c) or
    None when the measured registers encode no valid output.  Returns the
    two probabilities and the bound sqrt(p) <= sqrt(p') + sqrt(c/N).
    """
    dims = circ.dims

    # p: standard oracle, averaged exactly over tables
    p = 0.0
    n_tables = dims.N**dims.cells
    for table in product(range(dims.N), repeat=dims.cells):
        vec = run_standard(circ, table)
        probs = np.abs(vec) ** 2
        for x in range(dims.cells):
            for u in range(dims.N):
                for z in range(dims.Z):
                    claims = decoder(x, u, z)
                    if claims is None:
                        continue
                    if all(table[xi] == yi for xi, yi in claims):
                        p += probs[x, u, z] / n_tables

    # p': compressed run, database must contain every claimed pair
    st = run_circuit(circ)
    probs = np.abs(st.vec) ** 2
    p_prime = 0.0
    for x in range(dims.cells):
        for u in range(dims.N):
            for z in range(dims.Z):
                claims = decoder(x, u, z)
                if claims is None:
                    continue
                block = probs[x, u, z]
                mask = np.ones(block.shape, dtype=bool)
                for xi, yi in claims:
                    idx = [slice(None)] * dims.cells
                    idx[xi] = yi
                    sel = np.zeros(block.shape, dtype=bool)
                    sel[tuple(idx)] = True
                    mask &= sel
                p_prime += float(block[mask].sum())

    bound = math.sqrt(p_prime) + math.sqrt(c / dims.N)
    return {
        "p": p,
        "p_prime": p_prime,
        "c": c,
        "bound": bound,
        "ok": math.sqrt(p) <= bound + 1e-9,
    }


# --- transition capacity -----------------------------------------------------


def transition_capacity_check(prop: PropertySpec, dims: Dims, k: int, t: int,
                              trials: int, seed: int,
                              oracle: str = "phase") -> dict:
    """Worst observed amplification ratio
        || Lambda_k . cO . v || / || v ||,
    v ranging over (I - Lambda_k) (|D_k| <= t) tau_k applied to random
    states, against the ceiling sqrt(8 p_t)."""
    rng = np.random.default_rng(seed)
    step = apply_cphso if oracle == "phase" else apply_csto
    p_t = transition_probability(prop, dims.M, dims.N, t)
    ceiling = math.sqrt(8 * float(p_t))
    worst = 0.0
    for _ in range(trials):
        psi = random_state(dims, rng)
        v = project_query_salt(psi, k)
        v = project_salt(v, prop, k, negate=True)
        v = project_db_size_le(v, k, t)
        nv = v.norm()
        if nv < 1e-12:
            continue
        w = project_salt(step(v), prop, k)
        ratio = w.norm() / nv
        worst = max(worst, ratio)
    return {"max_ratio": worst, "ceiling": ceiling, "p_t": p_t,
            "ok": worst <= ceiling + 1e-9}


# --- path decomposition ------------------------------------------------------


def path_decomposition(circ: Circuit, prop: PropertySpec, kappa: int) -> dict:
    """Split the all-salts-succeed component of the final state into the sum
    over transition-time tuples z and salt orderings pi of scheduled-projector
    runs; reports the norm of the residual (ideally zero).

    Implemented for kappa == K (every salt must succeed)."""
    dims = circ.dims
    if kappa != dims.K:
        raise ValueError("path decomposition implemented for kappa == K")
    B = circ.T
    if B < kappa:
        raise ValueError("need at least one query per salt")
    step = apply_cphso if circ.oracle == "phase" else apply_csto

    psi_win = project_salts_all(run_circuit(circ), prop, range(dims.K))

    total = np.zeros(dims.shape, dtype=np.complex128)
    n_terms = 0
    for z in combinations(range(1, B + 1), kappa):
        for pi in permutations(range(dims.K)):
            st = QState.initial(dims)
            for t in range(1, B + 1):
                st = apply_algorithm_unitary(st, circ.unitaries[t - 1])
                st = step(st)
                for r, k in enumerate(pi):
                    if t >= z[r]:
                        st = project_salt(st, prop, k)
                    elif t == z[r] - 1:
                        st = project_salt(st, prop, k, negate=True)
            total += st.vec
            n_terms += 1
    residual = float(np.linalg.norm((psi_win.vec - total).ravel()))
    return {
        "residual": residual,
        "terms": n_terms,
        "win_norm": psi_win.norm(),
        "ok": residual <= 1e-8,
    }


# --- threshold direct product ------------------------------------------------


def threshold_experiment(circ: Circuit, prop: PropertySpec, kappa: int,
                         C: float = 1.0) -> dict:
    """Success probability of reaching >= kappa satisfied salts after B
    queries, next to the closed-form ceiling C^kappa * gamma(B/kappa)^kappa
    with gamma(t) = t^2 p(t) polynomially extended to fractional t."""
    dims = circ.dims
    B = circ.T
    final = run_circuit(circ)
    projected = project_count_ge(final, prop, kappa)
    probability = projected.norm2()
    gamma = gamma_extended(prop, dims.M, dims.N)
    g = gamma(Fraction(B, kappa))
    bound = (C ** kappa) * float(g) ** kappa
    return {
        "probability": probability,
        "gamma": g,
        "bound": bound,
        "ok": probability <= bound + 1e-9,
    }


# --- g/h transition bookkeeping ----------------------------------------------


def _project_pending_transition(state: QState, prop: PropertySpec, k: int,
                                S_prime, t_pre: int, j: int,
                                nu: int) -> QState:
    """The pre-query classifier: keep components that would, after one more
    query at the addressed cell, land at restriction size nu and used count
    j + nu.  Two branches: the queried cell is fresh (size nu - 1, used j)
    or already present (size nu, used j - 1)."""
    dims = state.dims
    S = set(S_prime)
    out = state.vec.copy()
    for x in range(dims.cells):
        if dims.salt_of_query(x) != k:
            out[x] = 0
            continue
        def accept(db, _x=x):
            size = db_size(dims, db)
            if size > t_pre:
                return False
            used = t_pre - size + sum(
                len(_restriction(dims, db, kk)) for kk in S
            )
            size_k = len(_restriction(dims, db, k))
            if db[_x] == dims.N:
                return size_k == nu - 1 and used == j
            return size_k == nu and used == j - 1
        mask = _db_mask(dims, accept)
        out[x] = out[x] * mask
    return QState(dims, out)


def g_h_transition_check(prop: PropertySpec, dims: Dims, k: int, S_prime,
                         t_pre: int, B: int, trials: int, seed: int) -> dict:
    """Validate the per-query transition accounting on random states.

    For each (j, nu): h is the weight of the components of
    Lambda_{S'} (I - Lambda_k) tau_k psi about to transition with size nu
    and used count j + nu; g is the weight that actually lands in
    Lambda_{S union k} with those counts after one oracle call.  Checks
    g <= 8 p_{nu-1} h for every class, and that the h classes sum to at most
    the Q_{<=B} weight of psi.
    """
    rng = np.random.default_rng(seed)
    S_prime = set(S_prime)
    S = S_prime | {k}
    worst = 0.0
    sum_ok = True
    for _ in range(trials):
        psi = random_state(dims, rng)
        base = project_query_salt(psi, k)
        base = project_salt(base, prop, k, negate=True)
        base = project_salts_all(base, prop, S_prime)
        h_total = 0.0
        for nu in range(1, dims.M + 1):
            p_prev = float(transition_probability(prop, dims.M, dims.N, nu - 1))
            for j in range(0, B + 1):
                phi = _project_pending_transition(
                    base, prop, k, S_prime, t_pre, j, nu
                )
                h = phi.norm2()
                h_total += h
                if h < 1e-12:
                    continue
                post = apply_cphso(phi)
                post = project_salts_all(post, prop, S)
                post = _apply_db_mask(
                    post,
                    _db_mask(
                        dims,
                        lambda db: len(_restriction(dims, db, k)) == nu,
                    ),
                )
                post = project_used_eq(post, S, t_pre + 1, j + nu)
                g = post.norm2()
                if p_prev == 0.0:
                    if g > 1e-12:
                        worst = float("inf")
                    continue
                worst = max(worst, g / (8 * p_prev * h))
        cap = project_used_le(psi, S_prime, t_pre, B).norm2()
        if h_total > cap + 1e-9:
            sum_ok = False
    return {
        "max_ratio_vs_8p": worst,
        "ratio_ok": worst <= 1.0 + 1e-6,
        "h_sum_ok": sum_ok,
        "ok": worst <= 1.0 + 1e-6 and sum_ok,
    }
