"""EGOE(1+2) sampling: mean field plus a random two-body interaction.

The interaction is a GOE in the space of ordered pairs ``(i < j)``;
it is embedded into the m-fermion space through the normal-ordered pair
operators of :mod:`egoe.fock`. One interaction is drawn per ensemble
member and shared by every interaction strength ``lam``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .fock import FockBasis, SpaceSpec, enumerate_basis, two_body_structure

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One SplitMix64 step: advance by the golden gamma and avalanche."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


@dataclass(frozen=True)
class SeedPolicy:
    master_seed: int
    member_index: int = 0

    def __post_init__(self):
        if self.member_index < 0:
            raise ValueError("member_index must be non-negative")

    @property
    def stream_seed(self) -> int:
        return splitmix64(splitmix64(self.master_seed & MASK64) ^ self.member_index)

    def rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.stream_seed))


def polar_normal(rng: np.random.Generator, size: int) -> np.ndarray:
    """Standard normal variates by the Marsaglia polar method."""
    out = np.empty(0)
    while out.size < size:
        need = size - out.size
        u = rng.uniform(-1.0, 1.0, size=(need // 2 + 1 + need // 8 + 8, 2))
        s = np.einsum("ij,ij->i", u, u)
        keep = (s > 0.0) & (s < 1.0)
        u, s = u[keep], s[keep]
        f = np.sqrt(-2.0 * np.log(s) / s)
        out = np.concatenate([out, (u * f[:, None]).ravel()])
    return out[:size]


@dataclass(frozen=True)
class MeanField:
    sp_energies: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.sp_energies, dtype=float)
        if e.ndim != 1 or e.size == 0 or not np.all(np.isfinite(e)):
            raise ValueError("sp_energies must be a non-empty finite 1-d sequence")
        object.__setattr__(self, "sp_energies", e)

    @property
    def n_sp(self) -> int:
        return self.sp_energies.size


def default_mean_field(n_sp: int) -> MeanField:
    """``eps_i = (i + 1) + 1 / (i + 1)``."""
    if n_sp < 1:
        raise ValueError("n_sp must be >= 1")
    i = np.arange(1, n_sp + 1, dtype=float)
    return MeanField(i + 1.0 / i)


@dataclass(frozen=True)
class TwoBodyMatrix:
    """Symmetric interaction over lexicographically ordered pairs."""

    elements: np.ndarray
    variance: float = 1.0
    seed: SeedPolicy | None = None

    @property
    def n_pairs(self) -> int:
        return self.elements.shape[0]


def sample_two_body(spec: SpaceSpec, seed_policy: SeedPolicy, v: float = 1.0) -> TwoBodyMatrix:
    """GOE in pair space: off-diagonal variance ``v**2``, diagonal ``2 v**2``."""
    if v <= 0:
        raise ValueError("v must be positive")
    p = spec.n_pairs
    g = polar_normal(seed_policy.rng(), p * p).reshape(p, p)
    a = np.triu(g, 1) * v
    elements = a + a.T + np.diag(np.diag(g)) * (np.sqrt(2.0) * v)
    return TwoBodyMatrix(elements, v * v, seed_policy)


def build_h1(mean_field: MeanField, basis: FockBasis) -> np.ndarray:
    """Diagonal of the one-body Hamiltonian: sum of occupied ``eps_i``."""
    if mean_field.n_sp != basis.spec.n_sp:
        raise ValueError(
            f"mean field has {mean_field.n_sp} levels, basis has {basis.spec.n_sp}"
        )
    return basis.occupations().astype(float) @ mean_field.sp_energies


@lru_cache(maxsize=8)
def _cached_structure(spec: SpaceSpec):
    basis = enumerate_basis(spec)
    return basis, two_body_structure(basis)


def embed_two_body(V: TwoBodyMatrix, basis: FockBasis) -> np.ndarray:
    """Dense m-fermion matrix of the interaction ``sum V_(ij),(kl) a†_i a†_j a_l a_k``."""
    if V.n_pairs != basis.spec.n_pairs:
        raise ValueError("interaction and basis disagree on the number of pairs")
    cached_basis, st = _cached_structure(basis.spec)
    if not np.array_equal(cached_basis.states, basis.states):
        raise ValueError("basis is not the canonical enumeration for its space")
    d = st.dim
    w = V.elements[st.pair_out, st.pair_in] * st.phase
    flat = st.dst.astype(np.int64) * d + st.src
    out = np.bincount(flat, weights=w, minlength=d * d).reshape(d, d)
    return 0.5 * (out + out.T)


@dataclass(frozen=True)
class Hamiltonian:
    matrix: np.ndarray
    lam: float
    provenance: tuple | str = "external"

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def assemble(h1: np.ndarray, v2_embedded: np.ndarray, lam: float, provenance="external") -> Hamiltonian:
    """``H = diag(h1) + lam * V``."""
    h1 = np.asarray(h1, dtype=float)
    if v2_embedded.shape != (h1.size, h1.size):
        raise ValueError(
            f"dimension mismatch: h1 has {h1.size} entries, V is {v2_embedded.shape}"
        )
    h = lam * v2_embedded
    h[np.diag_indices_from(h)] += h1
    return Hamiltonian(h, float(lam), provenance)


@dataclass
class EnsembleMember:
    """One sampled member: fixed basis, one-body diagonal and embedded interaction."""

    spec: SpaceSpec
    seed: SeedPolicy
    h1: np.ndarray
    v_embedded: np.ndarray

    def hamiltonian(self, lam: float) -> Hamiltonian:
        return assemble(
            self.h1, self.v_embedded, lam, (self.seed.master_seed, self.seed.member_index)
        )


def make_member(
    spec: SpaceSpec,
    master_seed: int,
    member_index: int,
    mean_field: MeanField | None = None,
    v: float = 1.0,
) -> EnsembleMember:
    basis, _ = _cached_structure(spec)
    mf = mean_field if mean_field is not None else default_mean_field(spec.n_sp)
    seed = SeedPolicy(master_seed, member_index)
    V = sample_two_body(spec, seed, v)
    return EnsembleMember(spec, seed, build_h1(mf, basis), embed_two_body(V, basis))
