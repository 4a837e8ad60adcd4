"""Diagonalization, standardization, unfolding and spacing statistics."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg
from scipy import stats
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from ._validation import check_1d, check_square, check_symmetric

MEAN_FIELD = "mean-field"
V_EIGENBASIS = "V-eigenbasis"


class DiagonalizationError(RuntimeError):
    pass


@dataclass(frozen=True)
class SpectralStats:
    centroid: float
    sigma: float
    zeta_sq: float = float("nan")


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenpairs of one Hamiltonian expressed in a declared basis.

    ``amplitudes[k, a]`` is the overlap of basis state ``k`` with eigenstate
    ``a``. A decomposition may hold only a window of eigenpairs, in which case
    ``moments`` (centroid, sigma of the full spectrum) must be supplied.
    ``basis_energies`` is the diagonal of H in the basis, when known.
    """

    eigenvalues: np.ndarray
    amplitudes: np.ndarray
    basis_tag: str = MEAN_FIELD
    basis_energies: np.ndarray | None = None
    moments: tuple[float, float] | None = None

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def complete(self) -> bool:
        return self.amplitudes.shape[1] == self.amplitudes.shape[0]

    def full_moments(self) -> tuple[float, float]:
        if self.moments is not None:
            return self.moments
        if not self.complete:
            raise ValueError("partial decomposition has no spectral moments attached")
        return float(self.eigenvalues.mean()), float(self.eigenvalues.std())


def _fix_signs(c: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(c), axis=0)
    signs = np.sign(c[idx, np.arange(c.shape[1])])
    signs[signs == 0] = 1.0
    return c * signs


def matrix_moments(h: np.ndarray) -> tuple[float, float]:
    """Centroid and width of the spectrum from traces, no diagonalization."""
    d = h.shape[0]
    c = np.trace(h) / d
    var = np.einsum("ij,ij->", h, h) / d - c * c
    return float(c), float(np.sqrt(max(var, 0.0)))


def diagonalize(h, window: tuple[float, float] | None = None, label: str = "") -> SpectralDecomposition:
    """Eigen-decompose a symmetric matrix.

    With ``window=(lo, hi)`` in standardized energy only the eigenpairs with
    ``lo <= (E - centroid) / sigma <= hi`` are computed; centroid and sigma
    then come from traces.
    """
    h = check_symmetric(h, "Hamiltonian", rtol=1e-10)
    diag = np.diag(h).copy()
    try:
        if window is None:
            e, c = np.linalg.eigh(h)
            moments = None
        else:
            centroid, sigma = matrix_moments(h)
            lo, hi = window
            e, c = scipy.linalg.eigh(
                h,
                subset_by_value=(centroid + lo * sigma, centroid + hi * sigma),
                driver="evr",
            )
            moments = (centroid, sigma)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise DiagonalizationError(f"eigensolver failed {label}: {exc}") from exc
    return SpectralDecomposition(e, _fix_signs(c), MEAN_FIELD, diag, moments)


def standardize(decomp: SpectralDecomposition) -> tuple[np.ndarray, SpectralStats]:
    """Standardized energies ``(E - centroid) / sigma`` (population convention)."""
    if decomp.complete and decomp.dim < 2:
        raise ValueError("standardization needs at least two levels")
    centroid, sigma = decomp.full_moments()
    if not sigma > 0:
        raise ValueError("zero-variance spectrum cannot be standardized")
    if decomp.basis_energies is not None:
        zeta_sq = float(np.var(decomp.basis_energies) / sigma**2)
    else:
        zeta_sq = float("nan")
    e_hat = (decomp.eigenvalues - centroid) / sigma
    return e_hat, SpectralStats(centroid, sigma, zeta_sq)


def basis_energies_hat(decomp: SpectralDecomposition) -> np.ndarray:
    centroid, sigma = decomp.full_moments()
    if decomp.basis_energies is None:
        raise ValueError("decomposition carries no basis-state energies")
    return (decomp.basis_energies - centroid) / sigma


def v_eigenbasis(
    decomp_v: SpectralDecomposition,
    decomp_h: SpectralDecomposition,
    basis_energies: np.ndarray | None = None,
) -> SpectralDecomposition:
    """Re-express the eigenvectors of H in the eigenbasis of the interaction.

    ``basis_energies`` (diagonal of H between interaction eigenstates) is
    derived from ``decomp_h`` when that decomposition is complete.
    """
    if decomp_v.dim != decomp_h.dim or not decomp_v.complete:
        raise ValueError("need a complete interaction decomposition over the same basis")
    amps = decomp_v.amplitudes.T @ decomp_h.amplitudes
    if basis_energies is None and decomp_h.complete:
        basis_energies = (amps**2) @ decomp_h.eigenvalues
    moments = decomp_h.moments if not decomp_h.complete else decomp_h.full_moments()
    return SpectralDecomposition(
        decomp_h.eigenvalues, amps, V_EIGENBASIS, basis_energies, moments
    )


def retag(decomp: SpectralDecomposition, tag: str) -> SpectralDecomposition:
    return replace(decomp, basis_tag=tag)


def wigner_surmise(s):
    s = np.asarray(s, dtype=float)
    return 0.5 * np.pi * s * np.exp(-0.25 * np.pi * s * s)


def wigner_cdf(s):
    s = np.clip(np.asarray(s, dtype=float), 0.0, None)
    return -np.expm1(-0.25 * np.pi * s * s)


def poisson_cdf(s):
    s = np.clip(np.asarray(s, dtype=float), 0.0, None)
    return -np.expm1(-s)


class SpectralUnfolder(TransformerMixin, BaseEstimator):
    """Unfold a spectrum through a polynomial fit to its cumulative staircase.

    ``fit`` learns the smooth counting function from one spectrum;
    ``transform`` maps levels onto the unfolded axis. ``spacings`` returns
    nearest-neighbour spacings of the central ``1 - 2 * edge_trim`` fraction
    rescaled to unit mean.
    """

    def __init__(self, poly_degree: int = 5, edge_trim: float = 0.025):
        self.poly_degree = poly_degree
        self.edge_trim = edge_trim

    def fit(self, X, y=None):
        e = np.sort(check_1d(X, "eigenvalues", min_size=2))
        if not 0 <= self.edge_trim < 0.5:
            raise ValueError("edge_trim must lie in [0, 0.5)")
        if e.size < 2 * (self.poly_degree + 1):
            raise ValueError(
                f"ill-conditioned unfolding: degree {self.poly_degree} needs at least "
                f"{2 * (self.poly_degree + 1)} levels, got {e.size}"
            )
        if np.ptp(e) == 0:
            raise ValueError("ill-conditioned unfolding: fully degenerate spectrum")
        staircase = np.arange(1, e.size + 1, dtype=float)
        self.staircase_ = np.polynomial.Polynomial.fit(e, staircase, self.poly_degree)
        self.n_levels_ = e.size
        return self

    def transform(self, X):
        if not hasattr(self, "staircase_"):
            raise NotFittedError("SpectralUnfolder is not fitted")
        return self.staircase_(np.sort(check_1d(X, "eigenvalues")))

    def spacings(self, X) -> np.ndarray:
        u = self.transform(X)
        cut = int(np.floor(self.edge_trim * u.size))
        s = np.diff(u[cut : u.size - cut])
        if s.size == 0 or not s.mean() > 0:
            raise ValueError("no usable spacings after trimming")
        return s / s.mean()


def unfold(eigenvalues, edge_trim: float = 0.025, poly_degree: int = 5) -> np.ndarray:
    """Unit-mean nearest-neighbour spacings of the unfolded central spectrum."""
    unfolder = SpectralUnfolder(poly_degree, edge_trim).fit(eigenvalues)
    return unfolder.spacings(eigenvalues)


@dataclass(frozen=True)
class SpacingDiagnostic:
    n_spacings: int
    ks_wigner: float
    ks_poisson: float

    @property
    def closer_to_wigner(self) -> bool:
        return self.ks_wigner < self.ks_poisson


def spacing_diagnostic(spacings) -> SpacingDiagnostic:
    """Kolmogorov-Smirnov distances of pooled spacings to Wigner and Poisson."""
    s = check_1d(spacings, "spacings", min_size=2)
    return SpacingDiagnostic(
        s.size,
        float(stats.kstest(s, wigner_cdf).statistic),
        float(stats.kstest(s, poisson_cdf).statistic),
    )


def check_decomposition(decomp: SpectralDecomposition, h=None, tol: float = 1e-8) -> float:
    """Largest eigen-residual ``||H c - E c|| / ||H||`` (0 when ``h`` is omitted)
    after asserting orthonormal columns."""
    c = decomp.amplitudes
    gram = c.T @ c
    if np.abs(gram - np.eye(gram.shape[0])).max() > tol:
        raise ValueError("amplitude columns are not orthonormal")
    if h is None:
        return 0.0
    h = check_square(h)
    r = h @ c - c * decomp.eigenvalues
    return float(np.linalg.norm(r, axis=0).max() / np.linalg.norm(h, 2))
