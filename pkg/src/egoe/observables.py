"""Strength functions and eigenvector-complexity measures.

All energies are standardized per member, ``e = (E - centroid) / sigma``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ._validation import check_1d
from .spectra import (
    MEAN_FIELD,
    V_EIGENBASIS,
    SpectralDecomposition,
    basis_energies_hat,
    diagonalize,
    standardize,
    v_eigenbasis,
)

DEFAULT_K_WINDOW = (-0.1, 0.1)
DEFAULT_BINS = 51
DEFAULT_RANGE = (-3.0, 3.0)
DEFAULT_CURVE_WINDOW = 0.2


@dataclass(frozen=True)
class StrengthHistogram:
    """Ensemble-averaged strength function on a fixed grid.

    ``density`` integrates to one over the histogram range; ``coverage`` is
    the fraction of the total strength that fell inside that range before
    renormalization. With ``center="diagonal"`` the abscissa is measured from
    each basis state's own diagonal energy.
    """

    bin_edges: np.ndarray
    density: np.ndarray
    stderr: np.ndarray
    k_window: tuple[float, float]
    n_states: int
    n_members: int
    coverage: float
    center: str = "diagonal"

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    @property
    def moments(self) -> tuple[float, float, float]:
        """Centroid, variance and excess kurtosis of the binned density."""
        p = self.density * self.widths
        p = p / p.sum()
        x = self.centers
        mu = float(p @ x)
        var = float(p @ (x - mu) ** 2)
        kurt = float(p @ (x - mu) ** 4) / var**2 - 3.0 if var > 0 else float("nan")
        return mu, var, kurt


@dataclass(frozen=True)
class ObservableCurve:
    e_hat: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    basis_tag: str = MEAN_FIELD
    ensemble_size: int = 1
    counts: np.ndarray | None = None

    def at(self, e: float = 0.0) -> float:
        """Value at the grid point nearest ``e``."""
        return float(self.values[np.argmin(np.abs(self.e_hat - e))])


def participation_ratio(decomp) -> np.ndarray:
    """``1 / sum_k C_k^4`` per eigenstate (columns of the amplitude matrix)."""
    c = decomp.amplitudes if isinstance(decomp, SpectralDecomposition) else np.asarray(decomp)
    c2 = c * c
    return 1.0 / np.einsum("ka,ka->a", c2, c2)


def info_entropy(decomp) -> np.ndarray:
    """``-sum_k C_k^2 ln C_k^2`` per eigenstate, with ``0 ln 0 = 0``."""
    c = decomp.amplitudes if isinstance(decomp, SpectralDecomposition) else np.asarray(decomp)
    c2 = c * c
    safe = np.where(c2 > 0.0, c2, 1.0)
    return -np.einsum("ka,ka->a", c2, np.log(safe))


def strength_function(
    decomps: Iterable[SpectralDecomposition],
    k_window: tuple[float, float] = DEFAULT_K_WINDOW,
    bins: int = DEFAULT_BINS,
    e_range: tuple[float, float] = DEFAULT_RANGE,
    center: str = "diagonal",
) -> StrengthHistogram:
    """Histogram of ``|C_k^a|^2`` over eigenstate energies, averaged over the
    basis states whose standardized diagonal energy lies in ``k_window`` and
    then over members.

    ``center="diagonal"`` places each basis state's own energy at zero so that
    the window width does not smear narrow profiles; ``center="none"`` keeps
    absolute standardized energies.
    """
    if bins < 20:
        raise ValueError("strength histograms need at least 20 bins")
    if center not in ("diagonal", "none"):
        raise ValueError(f"unknown center convention {center!r}")
    edges = np.linspace(e_range[0], e_range[1], bins + 1)
    per_member = []
    coverage = []
    n_states = 0
    for decomp in decomps:
        if not decomp.complete:
            raise ValueError("strength functions need complete decompositions")
        e_hat, _ = standardize(decomp)
        ek = basis_energies_hat(decomp)
        ks = np.flatnonzero((ek >= k_window[0]) & (ek <= k_window[1]))
        if ks.size == 0:
            continue
        w = decomp.amplitudes[ks] ** 2
        shift = ek[ks, None] if center == "diagonal" else np.zeros((ks.size, 1))
        x = e_hat[None, :] - shift
        h, _ = np.histogram(x.ravel(), bins=edges, weights=w.ravel())
        per_member.append(h / ks.size)
        coverage.append(h.sum() / ks.size)
        n_states += ks.size
    if not per_member:
        raise ValueError(f"no basis state has standardized energy inside {k_window}")
    masses = np.array(per_member)
    total = masses.mean(axis=0)
    norm = total.sum()
    widths = np.diff(edges)
    density = total / (norm * widths)
    if len(per_member) > 1:
        stderr = masses.std(axis=0, ddof=1) / np.sqrt(len(per_member)) / (norm * widths)
    else:
        stderr = np.zeros_like(density)
    return StrengthHistogram(
        edges, density, stderr, tuple(k_window), n_states, len(per_member),
        float(np.mean(coverage)), center,
    )


def curve_over_energy(
    values,
    e_hat,
    window: float = DEFAULT_CURVE_WINDOW,
    grid=None,
    basis_tag: str = MEAN_FIELD,
    ensemble_size: int = 1,
) -> ObservableCurve:
    """Moving-window average of per-eigenstate values against standardized
    energy. Windows with no eigenstate give NaN."""
    values = check_1d(values, "values", min_size=0)
    e_hat = check_1d(e_hat, "e_hat", min_size=0)
    if values.shape != e_hat.shape:
        raise ValueError("values and energies must have matching lengths")
    grid = np.linspace(-3.0, 3.0, 61) if grid is None else check_1d(grid, "grid")
    inside = np.abs(e_hat[None, :] - grid[:, None]) <= 0.5 * window
    counts = inside.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = (inside @ values) / counts
        sq = (inside @ values**2) / counts
        var = np.clip(sq - mean**2, 0.0, None) * counts / np.maximum(counts - 1, 1)
        err = np.where(counts > 1, np.sqrt(var / counts), np.where(counts == 1, 0.0, np.nan))
    mean = np.where(counts > 0, mean, np.nan)
    return ObservableCurve(grid, mean, err, basis_tag, ensemble_size, counts)


@dataclass(frozen=True)
class DualPair:
    """Complexity of the central eigenstates of H(lam) in both reference bases."""

    lam: float
    e_hat: np.ndarray
    xi2_weak: np.ndarray
    xi2_strong: np.ndarray
    s_weak: np.ndarray
    s_strong: np.ndarray


def dual_pair(member, lam: float, window=DEFAULT_K_WINDOW, v_decomp=None) -> DualPair:
    """Participation ratio and entropy of the eigenstates of ``member`` at
    strength ``lam``, measured in the mean-field (Fock) basis and in the
    eigenbasis of the interaction alone.

    ``window`` restricts to eigenstates with standardized energy inside it;
    ``None`` keeps all of them.
    """
    if v_decomp is None:
        v_decomp = interaction_decomposition(member)
    h = member.hamiltonian(lam).matrix
    weak = diagonalize(h, window=window, label=f"(member {member.seed.member_index}, lam={lam})")
    # diagonal of H between interaction eigenstates: <k|h1|k> + lam * e_k
    c2v = v_decomp.amplitudes**2
    energies = member.h1 @ c2v + lam * v_decomp.eigenvalues
    strong = v_eigenbasis(v_decomp, weak, basis_energies=energies)
    e_hat, _ = standardize(weak)
    return DualPair(
        float(lam),
        e_hat,
        participation_ratio(weak),
        participation_ratio(strong),
        info_entropy(weak),
        info_entropy(strong),
    )


def interaction_decomposition(member) -> SpectralDecomposition:
    d = diagonalize(member.v_embedded, label=f"(member {member.seed.member_index}, V)")
    return SpectralDecomposition(d.eigenvalues, d.amplitudes, V_EIGENBASIS, d.basis_energies)
