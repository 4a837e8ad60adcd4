"""Many-fermion occupation basis and normal-ordered two-body operators.

States are integers whose set bits are the occupied orbitals; orbital 0 is
the least-significant bit. Fermionic phases count the occupied orbitals
strictly below the orbital being acted on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np

MAX_ORBITALS = 63


class CapacityError(ValueError):
    """Raised when a space does not fit one machine word of occupation bits."""


@dataclass(frozen=True)
class SpaceSpec:
    """``n_fermions`` fermions distributed over ``n_sp`` single-particle levels."""

    n_sp: int
    n_fermions: int

    def __post_init__(self):
        if self.n_sp < 1:
            raise ValueError(f"n_sp must be >= 1, got {self.n_sp}")
        if self.n_sp > MAX_ORBITALS:
            raise CapacityError(
                f"n_sp={self.n_sp} exceeds the {MAX_ORBITALS}-orbital word capacity"
            )
        if not 0 <= self.n_fermions <= self.n_sp:
            raise ValueError(
                f"need 0 <= n_fermions <= n_sp, got m={self.n_fermions}, N={self.n_sp}"
            )

    @property
    def dim(self) -> int:
        return comb(self.n_sp, self.n_fermions)

    @property
    def n_pairs(self) -> int:
        return comb(self.n_sp, 2)


def popcount(x: int) -> int:
    return bin(x).count("1")


def occupied(state: int) -> tuple[int, ...]:
    """Orbital indices set in ``state``, ascending."""
    out = []
    i = 0
    while state:
        if state & 1:
            out.append(i)
        state >>= 1
        i += 1
    return tuple(out)


def state_from_orbitals(orbitals) -> int:
    s = 0
    for i in orbitals:
        s |= 1 << int(i)
    return s


@dataclass(frozen=True)
class FockBasis:
    """Sorted m-fermion occupation states with an inverse index."""

    spec: SpaceSpec
    states: np.ndarray
    _index: dict = field(repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.states)

    def index(self, state: int) -> int:
        return self._index[int(state)]

    def occupations(self) -> np.ndarray:
        """Boolean (dim, n_sp) occupation table."""
        bits = np.arange(self.spec.n_sp, dtype=np.uint64)
        return ((self.states[:, None] >> bits[None, :]) & np.uint64(1)).astype(bool)


def enumerate_basis(spec: SpaceSpec) -> FockBasis:
    """All ``binomial(N, m)`` occupation states in ascending integer order."""
    if spec.n_sp > MAX_ORBITALS:
        raise CapacityError(f"n_sp={spec.n_sp} exceeds {MAX_ORBITALS}")
    ints = sorted(
        state_from_orbitals(c) for c in combinations(range(spec.n_sp), spec.n_fermions)
    )
    states = np.array(ints, dtype=np.uint64)
    states.setflags(write=False)
    return FockBasis(spec, states, {s: i for i, s in enumerate(ints)})


def _annihilate(state: int, p: int):
    if not (state >> p) & 1:
        return None
    sign = -1 if popcount(state & ((1 << p) - 1)) & 1 else 1
    return sign, state & ~(1 << p)


def _create(state: int, p: int):
    if (state >> p) & 1:
        return None
    sign = -1 if popcount(state & ((1 << p) - 1)) & 1 else 1
    return sign, state | (1 << p)


def apply_pair_op(i: int, j: int, k: int, l: int, state: int, n_sp: int = MAX_ORBITALS):
    """Apply ``a†_i a†_j a_l a_k`` to an occupation state.

    Operators act right to left: ``a_k``, ``a_l``, ``a†_j``, ``a†_i``.
    Returns ``(phase, new_state)`` or ``None`` when the result vanishes.
    """
    for p in (i, j, k, l):
        if not 0 <= p < n_sp:
            raise IndexError(f"orbital index {p} outside [0, {n_sp})")
    phase = 1
    s = int(state)
    for op, p in ((_annihilate, k), (_annihilate, l), (_create, j), (_create, i)):
        r = op(s, p)
        if r is None:
            return None
        sign, s = r
        phase *= sign
    return phase, s


def pair_list(n_sp: int) -> list[tuple[int, int]]:
    """Ordered pairs ``(i, j)``, ``i < j``, in lexicographic order."""
    return list(combinations(range(n_sp), 2))


def pair_index_table(n_sp: int) -> np.ndarray:
    """``table[i, j]`` = position of pair (min, max) in :func:`pair_list`; -1 on diagonal."""
    table = -np.ones((n_sp, n_sp), dtype=np.int64)
    for a, (i, j) in enumerate(pair_list(n_sp)):
        table[i, j] = table[j, i] = a
    return table


@dataclass(frozen=True)
class TwoBodyStructure:
    """Sparse connectivity of every ``a†_i a†_j a_l a_k`` term within a basis.

    Entry ``n`` says that pair operator (``pair_out[n]`` <- ``pair_in[n]``)
    maps basis state ``src[n]`` onto ``dst[n]`` with sign ``phase[n]``. The
    table depends only on the basis, so it is built once and reused for
    every sampled interaction.
    """

    dim: int
    dst: np.ndarray
    src: np.ndarray
    pair_out: np.ndarray
    pair_in: np.ndarray
    phase: np.ndarray


def two_body_structure(basis: FockBasis) -> TwoBodyStructure:
    spec = basis.spec
    n, d = spec.n_sp, len(basis)
    pairs = np.array(pair_list(n), dtype=np.int64).reshape(-1, 2)
    states = basis.states.astype(np.int64)
    occ = basis.occupations()
    below = np.concatenate(
        [np.zeros((d, 1), dtype=np.int64), np.cumsum(occ, axis=1)[:, :-1]], axis=1
    )
    pi, pj = pairs[:, 0], pairs[:, 1]
    chunks = []
    for b, (k, l) in enumerate(pairs):
        rows = np.flatnonzero(occ[:, k] & occ[:, l])
        if rows.size == 0:
            continue
        occ1 = occ[rows].copy()
        occ1[:, [k, l]] = False
        below1 = below[rows] - (np.arange(n) > k) - (np.arange(n) > l)
        ann = below[rows, k] + below[rows, l] - 1
        ok = ~occ1[:, pi] & ~occ1[:, pj]
        r, a = np.nonzero(ok)
        src = rows[r]
        s1 = states[src] & ~((1 << int(k)) | (1 << int(l)))
        tgt = s1 | (1 << pi[a]) | (1 << pj[a])
        expo = ann[r] + below1[r, pj[a]] + below1[r, pi[a]]
        chunks.append(
            (
                np.searchsorted(states, tgt),
                src,
                a,
                np.full(a.size, b),
                np.where(expo & 1, -1, 1),
            )
        )
    if not chunks:
        empty = np.zeros(0, dtype=np.int64)
        return TwoBodyStructure(d, empty, empty, empty, empty, empty.astype(np.int8))
    dst, src, a, b, ph = (np.concatenate(c) for c in zip(*chunks))
    return TwoBodyStructure(
        d,
        dst.astype(np.int32),
        src.astype(np.int32),
        a.astype(np.int32),
        b.astype(np.int32),
        ph.astype(np.int8),
    )
