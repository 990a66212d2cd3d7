"""Dense compressed-oracle simulator for salted random oracles.

State layout: a complex128 array indexed by
    (x, u, z, d_0, ..., d_{KM-1})
where x in [K*M] is the query-input register (cell k*M + i addresses
position i of salt k), u in [N] the response/phase register, z in [Z] a free
workspace register, and each database cell d_c has dimension N+1 with index
N standing for the uninitialized symbol (bottom).

The compressed phase oracle is StdDecomp . phase . StdDecomp, where
StdDecomp acts on the cell addressed by the query register: it swaps bottom
with the uniform superposition and is the identity on the nonzero Fourier
modes, making it a self-inverse local unitary.  The raw phase multiplies by
omega_N^(u * D(x)) on initialized cells and leaves bottom components alone.

Everything is held in memory; `Dims.check_budget` enforces the
SALTLAB_MEM_CAP_MB environment cap before any allocation.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from itertools import product

import numpy as np

BOTTOM = -1  # conceptual marker; concretely the cell index N

DEFAULT_MEM_CAP_MB = 512


def memory_cap_mb() -> int:
    return int(os.environ.get("SALTLAB_MEM_CAP_MB", DEFAULT_MEM_CAP_MB))


class MemoryCapError(MemoryError):
    """The requested state would exceed SALTLAB_MEM_CAP_MB."""


@dataclass(frozen=True)
class Dims:
    """Register dimensions of a salted-oracle simulation."""

    K: int
    M: int
    N: int
    Z: int = 1

    @property
    def cells(self) -> int:
        return self.K * self.M

    @property
    def cell_dim(self) -> int:
        return self.N + 1

    @property
    def db_dim(self) -> int:
        return self.cell_dim**self.cells

    @property
    def alg_dim(self) -> int:
        return self.cells * self.N * self.Z

    @property
    def total_dim(self) -> int:
        return self.alg_dim * self.db_dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.cells, self.N, self.Z) + (self.cell_dim,) * self.cells

    def check_budget(self) -> None:
        bytes_needed = 16 * self.total_dim
        cap = memory_cap_mb() * (1 << 20)
        if bytes_needed > cap:
            raise MemoryCapError(
                f"state needs {bytes_needed} bytes, cap is {cap}"
            )

    def salt_of_query(self, x: int) -> int:
        return x // self.M


@dataclass
class QState:
    dims: Dims
    vec: np.ndarray

    @classmethod
    def initial(cls, dims: Dims) -> "QState":
        dims.check_budget()
        vec = np.zeros(dims.shape, dtype=np.complex128)
        start = (0, 0, 0) + (dims.N,) * dims.cells  # all cells at bottom
        vec[start] = 1.0
        return cls(dims, vec)

    def copy(self) -> "QState":
        return QState(self.dims, self.vec.copy())

    def norm2(self) -> float:
        return float(np.vdot(self.vec, self.vec).real)

    def norm(self) -> float:
        return float(np.linalg.norm(self.vec.ravel()))


def std_decomp_matrix(N: int) -> np.ndarray:
    """The (N+1)x(N+1) local StdDecomp unitary.

    Hermitian and self-inverse: identity on the Fourier modes u != 0, swaps
    bottom with the uniform superposition (the u = 0 mode).
    """
    d = N + 1
    S = np.zeros((d, d), dtype=np.complex128)
    omega = np.exp(2j * np.pi / N)
    for u in range(1, N):
        e_u = np.zeros(d, dtype=np.complex128)
        e_u[:N] = omega ** (u * np.arange(N)) / np.sqrt(N)
        S += np.outer(e_u, e_u.conj())
    e_0 = np.zeros(d, dtype=np.complex128)
    e_0[:N] = 1 / np.sqrt(N)
    bot = np.zeros(d, dtype=np.complex128)
    bot[N] = 1.0
    S += np.outer(bot, e_0.conj()) + np.outer(e_0, bot.conj())
    return S


def _apply_cell_matrix(block: np.ndarray, mat: np.ndarray, axis: int) -> np.ndarray:
    """Apply `mat` to one tensor axis of `block`."""
    moved = np.moveaxis(block, axis, -1)
    out = moved @ mat.T
    return np.moveaxis(out, -1, axis)


def std_decomp(state: QState, x: int) -> QState:
    """StdDecomp on cell x, unconditioned on the query register."""
    mat = std_decomp_matrix(state.dims.N)
    return QState(state.dims, _apply_cell_matrix(state.vec, mat, 3 + x))


def _phase_table(N: int) -> np.ndarray:
    """ph[u, v] = omega^(u v) for v < N, 1 on the bottom index."""
    omega = np.exp(2j * np.pi / N)
    ph = np.ones((N, N + 1), dtype=np.complex128)
    ph[:, :N] = omega ** np.outer(np.arange(N), np.arange(N))
    return ph


def apply_cphso(state: QState) -> QState:
    """Compressed phase oracle: StdDecomp_x . phase(u, D(x)) . StdDecomp_x,
    each conjugation acting on the cell the query register addresses."""
    dims = state.dims
    S = std_decomp_matrix(dims.N)
    ph = _phase_table(dims.N)
    out = np.empty_like(state.vec)
    for x in range(dims.cells):
        block = state.vec[x]  # axes: u, z, d_0 ... d_{cells-1}
        cell_axis = 2 + x
        block = _apply_cell_matrix(block, S, cell_axis)
        shape = [1] * block.ndim
        shape[0] = dims.N
        shape[cell_axis] = dims.cell_dim
        block = block * ph.reshape(shape)
        block = _apply_cell_matrix(block, S, cell_axis)
        out[x] = block
    return QState(dims, out)


def apply_csto(state: QState) -> QState:
    """Compressed standard oracle: like apply_cphso but the middle step adds
    D(x) into the response register instead of phasing."""
    dims = state.dims
    S = std_decomp_matrix(dims.N)
    out = np.empty_like(state.vec)
    for x in range(dims.cells):
        block = _apply_cell_matrix(state.vec[x], S, 2 + x)
        added = np.empty_like(block)
        cell_axis = 2 + x
        for v in range(dims.cell_dim):
            sub = np.take(block, v, axis=cell_axis)
            if v < dims.N:
                sub = np.roll(sub, v, axis=0)  # u -> u + D(x) mod N
            idx = [slice(None)] * block.ndim
            idx[cell_axis] = v
            added[tuple(idx)] = sub
        block = _apply_cell_matrix(added, S, cell_axis)
        out[x] = block
    return QState(dims, out)


@dataclass
class Circuit:
    """T algorithm unitaries interleaved with oracle calls.

    Each unitary is an (alg_dim x alg_dim) matrix acting on the flattened
    (x, u, z) registers; the database is untouched by algorithm steps.
    """

    dims: Dims
    unitaries: list = field(default_factory=list)
    oracle: str = "phase"  # "phase" (CPhsO) or "standard" (CStO)

    @property
    def T(self) -> int:
        return len(self.unitaries)


def apply_algorithm_unitary(state: QState, U: np.ndarray) -> QState:
    dims = state.dims
    mat = state.vec.reshape(dims.alg_dim, dims.db_dim)
    return QState(dims, (U @ mat).reshape(dims.shape))


def run_circuit(circ: Circuit, state: QState | None = None) -> QState:
    """Run the full circuit against the compressed oracle."""
    st = QState.initial(circ.dims) if state is None else state
    step = apply_cphso if circ.oracle == "phase" else apply_csto
    for U in circ.unitaries:
        st = apply_algorithm_unitary(st, U)
        st = step(st)
    return st


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_circuit(dims: Dims, T: int, seed: int, oracle: str = "phase") -> Circuit:
    rng = np.random.default_rng(seed)
    return Circuit(
        dims=dims,
        unitaries=[haar_unitary(dims.alg_dim, rng) for _ in range(T)],
        oracle=oracle,
    )


def random_state(dims: Dims, rng: np.random.Generator) -> QState:
    dims.check_budget()
    vec = rng.standard_normal(dims.shape) + 1j * rng.standard_normal(dims.shape)
    vec /= np.linalg.norm(vec.ravel())
    return QState(dims, vec.astype(np.complex128))


# --- the uncompressed reference ------------------------------------------


def run_standard(circ: Circuit, table: tuple[int, ...]) -> np.ndarray:
    """Run against a fixed classical table with a plain (phase) oracle;
    returns the algorithm-register statevector of shape (cells, N, Z)."""
    dims = circ.dims
    vec = np.zeros((dims.cells, dims.N, dims.Z), dtype=np.complex128)
    vec[0, 0, 0] = 1.0
    omega = np.exp(2j * np.pi / dims.N)
    phase = omega ** np.outer(np.asarray(table), np.arange(dims.N))
    for U in circ.unitaries:
        vec = (U @ vec.reshape(dims.alg_dim)).reshape(vec.shape)
        if circ.oracle == "phase":
            vec = vec * phase[:, :, None]
        else:
            for x in range(dims.cells):
                vec[x] = np.roll(vec[x], table[x], axis=0)
    return vec


def algorithm_distribution(state: QState) -> np.ndarray:
    """Measurement distribution of the (x, u, z) registers, database traced out."""
    dims = state.dims
    mat = state.vec.reshape(dims.alg_dim, dims.db_dim)
    return (np.abs(mat) ** 2).sum(axis=1)


def compare_with_standard_oracle(circ: Circuit) -> float:
    """Total-variation distance between the algorithm-register output
    distribution under the compressed oracle and under a uniformly random
    classical table (averaged exactly over all tables)."""
    dims = circ.dims
    comp = algorithm_distribution(run_circuit(circ))
    std = np.zeros_like(comp)
    n_tables = dims.N**dims.cells
    for table in product(range(dims.N), repeat=dims.cells):
        vec = run_standard(circ, table)
        std += (np.abs(vec.reshape(dims.alg_dim)) ** 2) / n_tables
    return 0.5 * float(np.abs(comp - std).sum())


def database_support_sizes(state: QState, tol: float = 0.0) -> list[int]:
    """Database sizes |D| that carry amplitude above `tol` in absolute value."""
    dims = state.dims
    flat = state.vec.reshape(dims.alg_dim, *(dims.cell_dim,) * dims.cells)
    sizes = set()
    for idx in product(range(dims.cell_dim), repeat=dims.cells):
        size = sum(1 for v in idx if v != dims.N)
        if size in sizes:
            continue
        sl = flat[(slice(None),) + idx]
        if np.abs(sl).max() > tol:
            sizes.add(size)
    return sorted(sizes)
