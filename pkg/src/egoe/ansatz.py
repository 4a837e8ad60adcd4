"""Breit-Wigner, Gaussian and interpolating strength-function shapes.

The interpolating family is a Student-t profile with scale ``gamma`` and
shape ``nu``: ``nu = 1`` is exactly Breit-Wigner with ``Gamma = 2 gamma`` and
``nu -> inf`` is a Gaussian of width ``gamma``. Fitted shapes feed
Porter-Thomas quadrature predictions of the participation ratio and the
information entropy.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate, optimize, special
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from ._validation import check_1d, check_increasing, check_positive
from .observables import ObservableCurve, StrengthHistogram

SHAPE_STARTS = (1.0, 2.0, 4.0, 8.0, 16.0, 64.0)
SHAPE_MAX = 1.0e4
# <z ln z> for z ~ chi^2 with one degree of freedom
PORTER_THOMAS_ENTROPY = float(special.digamma(1.5) + np.log(2.0))
PORTER_THOMAS_FOURTH = 3.0


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class AnsatzParams:
    center: float
    scale: float
    shape: float
    residual: float = float("nan")
    chi2_dof: float = float("nan")
    converged: bool = True
    scale_err: float = float("nan")
    shape_err: float = float("nan")

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        if not self.shape >= 1.0:
            raise ValueError(f"shape must be >= 1, got {self.shape}")

    @property
    def bw_width(self) -> float:
        """Breit-Wigner FWHM equivalent, ``2 * scale``."""
        return 2.0 * self.scale


def bw_form(e, center: float, width: float):
    """Breit-Wigner density with full width at half maximum ``width``."""
    check_positive(width, "width")
    x = np.asarray(e, dtype=float) - center
    return (width / (2.0 * np.pi)) / (x * x + 0.25 * width * width)


def gauss_form(e, center: float, sigma: float):
    check_positive(sigma, "sigma")
    x = (np.asarray(e, dtype=float) - center) / sigma
    return np.exp(-0.5 * x * x) / (sigma * np.sqrt(2.0 * np.pi))


def _log_norm(nu: float) -> float:
    return special.gammaln(0.5 * (nu + 1.0)) - special.gammaln(0.5 * nu) - 0.5 * np.log(nu * np.pi)


def ansatz_form(e, params: AnsatzParams | None = None, *, center=0.0, scale=1.0, shape=1.0):
    """Student-t interpolating density between Breit-Wigner and Gaussian."""
    if params is not None:
        center, scale, shape = params.center, params.scale, params.shape
    check_positive(scale, "scale")
    if shape < 1.0:
        raise ValueError("shape must be >= 1")
    t = (np.asarray(e, dtype=float) - center) / scale
    if shape == 1.0:
        return 1.0 / (np.pi * scale * (1.0 + t * t))
    return np.exp(_log_norm(shape) - 0.5 * (shape + 1.0) * np.log1p(t * t / shape)) / scale


def ansatz_cdf(e, center=0.0, scale=1.0, shape=1.0):
    return special.stdtr(shape, (np.asarray(e, dtype=float) - center) / scale)


def ansatz_variance(params: AnsatzParams) -> float:
    if params.shape <= 2.0:
        return float("inf")
    return params.scale**2 * params.shape / (params.shape - 2.0)


def bin_average(edges, center, scale, shape) -> np.ndarray:
    """Mean of the density over each bin (exact, via the distribution function)."""
    edges = np.asarray(edges, dtype=float)
    return np.diff(ansatz_cdf(edges, center, scale, shape)) / np.diff(edges)


class StrengthFunctionFitter(RegressorMixin, BaseEstimator):
    """Least-squares fit of the interpolating shape to a binned density.

    ``X`` holds bin centers and ``y`` the density. The model is integrated
    across each bin and renormalized to the histogram range, so histograms
    that were normalized over a finite window are fitted consistently.
    ``fixed_shape`` pins ``nu`` (``1`` gives a pure Breit-Wigner fit).
    ``loss="likelihood"`` maximizes the multinomial log-likelihood of the bin
    masses instead.
    """

    def __init__(self, shape_starts=SHAPE_STARTS, fixed_shape=None, loss="lsq", shape_max=SHAPE_MAX):
        self.shape_starts = shape_starts
        self.fixed_shape = fixed_shape
        self.loss = loss
        self.shape_max = shape_max

    def _model(self, edges, center, scale, shape):
        cdf = ansatz_cdf(edges, center, scale, shape)
        inside = cdf[-1] - cdf[0]
        return np.diff(cdf) / (np.diff(edges) * inside)

    def fit(self, X, y, bin_edges=None):
        centers = check_increasing(X, "bin centers")
        y = check_1d(y, "density")
        if y.shape != centers.shape:
            raise ValueError("X and y lengths differ")
        if np.any(y < 0):
            raise ValueError("density must be non-negative")
        if bin_edges is None:
            mid = 0.5 * (centers[1:] + centers[:-1])
            bin_edges = np.concatenate(
                [[2 * centers[0] - mid[0]], mid, [2 * centers[-1] - mid[-1]]]
            )
        edges = check_increasing(bin_edges, "bin edges")
        if edges.size != centers.size + 1:
            raise ValueError("need one more bin edge than bin centers")
        if self.loss not in ("lsq", "likelihood"):
            raise ValueError(f"unknown loss {self.loss!r}")
        widths = np.diff(edges)
        nonempty = int(np.count_nonzero(y))
        if nonempty <= 1:
            raise FitError("degenerate histogram: at most one bin occupied")
        if nonempty < 20:
            raise FitError(f"need at least 20 non-empty bins, got {nonempty}")
        mass = y * widths
        y = y / mass.sum()
        mass = mass / mass.sum()
        mu = float(mass @ centers)
        spread = float(np.sqrt(max(mass @ (centers - mu) ** 2, 0.0)))
        span = edges[-1] - edges[0]
        scale_lo = 1e-4 * np.min(widths)

        log_nu_max = np.log(self.shape_max)

        def unpack(p):
            c, log_g = p[0], p[1]
            nu = self.fixed_shape if self.fixed_shape is not None else np.exp(p[2])
            return c, np.exp(log_g), nu

        def residuals(p):
            c, g, nu = unpack(p)
            model = self._model(edges, c, g, nu)
            if self.loss == "lsq":
                return model - y
            p_bins = np.clip(model * widths, 1e-300, None)
            return np.sqrt(2.0 * np.clip(mass * np.log(np.clip(mass, 1e-300, None) / p_bins), 0, None) + 1e-300)

        lo = [edges[0], np.log(scale_lo)]
        hi = [edges[-1], np.log(span)]
        if self.fixed_shape is None:
            lo.append(0.0)
            hi.append(log_nu_max)
            starts = list(self.shape_starts)
        else:
            if self.fixed_shape < 1.0:
                raise ValueError("fixed_shape must be >= 1")
            starts = [self.fixed_shape]
        best = None
        for nu0 in starts:
            g0 = spread if nu0 <= 2 else spread * np.sqrt((nu0 - 2.0) / nu0)
            g0 = float(np.clip(g0 if nu0 > 2 else 0.5 * spread, np.exp(lo[1]) * 10, span / 2))
            x0 = [mu, np.log(g0)]
            if self.fixed_shape is None:
                x0.append(float(np.clip(np.log(nu0), 1e-6, log_nu_max - 1e-6)))
            try:
                res = optimize.least_squares(residuals, x0, bounds=(lo, hi), x_scale="jac")
            except (ValueError, FloatingPointError):
                continue
            if best is None or res.cost < best.cost:
                best = res
        if best is None:
            raise FitError("every start of the strength-function fit failed")
        c, g, nu = unpack(best.x)
        r = residuals(best.x)
        n_par = len(best.x)
        dof = max(y.size - n_par, 1)
        scale_err = shape_err = float("nan")
        try:
            jac = best.jac
            cov = np.linalg.pinv(jac.T @ jac) * (2.0 * best.cost / dof)
            scale_err = float(g * np.sqrt(max(cov[1, 1], 0.0)))
            if self.fixed_shape is None:
                shape_err = float(nu * np.sqrt(max(cov[2, 2], 0.0)))
        except np.linalg.LinAlgError:
            pass
        self.params_ = AnsatzParams(
            float(c), float(g), float(nu),
            residual=float(np.linalg.norm(r)),
            chi2_dof=float(2.0 * best.cost / dof),
            converged=bool(best.success),
            scale_err=scale_err,
            shape_err=shape_err,
        )
        self.bin_edges_ = edges
        return self

    def predict(self, X):
        if not hasattr(self, "params_"):
            raise NotFittedError("StrengthFunctionFitter is not fitted")
        return ansatz_form(np.asarray(X, dtype=float), self.params_)


def fit_ansatz(hist: StrengthHistogram, init: AnsatzParams | None = None, *, fixed_shape=None, loss="lsq") -> AnsatzParams:
    """Fit the interpolating shape to a strength histogram.

    The shape is started from 1, 2, 4, 8, 16 and 64 (and from ``init`` when
    given); the lowest-cost solution is kept. An unconverged best fit is
    returned with ``converged=False`` rather than raised.
    """
    starts = list(SHAPE_STARTS)
    if init is not None:
        starts.insert(0, init.shape)
    est = StrengthFunctionFitter(tuple(starts), fixed_shape=fixed_shape, loss=loss)
    return est.fit(hist.centers, hist.density, bin_edges=hist.bin_edges).params_


# --- Porter-Thomas quadrature predictions -------------------------------


def _segments(peak: float, width: float, lo: float = -8.0, hi: float = 8.0):
    cuts = {lo, hi}
    for k in (0.0, 1.0, 10.0, 100.0):
        for sgn in (-1.0, 1.0):
            x = peak + sgn * k * width
            if lo < x < hi:
                cuts.add(x)
    return sorted(cuts)


def _quad(f, cuts, epsabs=1e-9):
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        val, _ = integrate.quad(f, a, b, epsabs=epsabs, epsrel=1e-10, limit=200)
        total += val
    return total


def _gauss(x, s):
    return np.exp(-0.5 * (x / s) ** 2) / (s * np.sqrt(2.0 * np.pi))


def _weights(params: AnsatzParams, zeta_sq: float, d: int, renormalize: bool, density):
    if not 0.0 < zeta_sq < 1.0:
        raise ValueError(f"zeta_sq must lie in (0, 1), got {zeta_sq}")
    zeta = np.sqrt(zeta_sq)

    def rho_c(eps):
        return _gauss(eps, zeta)

    def strength(e, eps):
        return ansatz_form(e - eps, params)

    def prepare(e):
        peak = e - params.center
        cuts = sorted(set(_segments(peak, params.scale)) | set(_segments(0.0, zeta)))
        if renormalize:
            norm = _quad(lambda x: rho_c(x) * strength(e, x), cuts, epsabs=1e-13)
        else:
            norm = float(density(e))
        return cuts, norm

    return rho_c, strength, prepare


def predict_xi2(params: AnsatzParams, stats, d: int, grid=None, *, renormalize=True, density=None) -> ObservableCurve:
    """Participation ratio against standardized energy from a fitted shape.

    Basis-state centroids are Gaussian with width ``zeta``; the squared
    amplitudes are the local strength times Porter-Thomas fluctuations, so
    ``xi2(e) = 1 / (3 d  int rho_c(x) w(e|x)^2 dx)``. With
    ``renormalize=False`` the eigenvalue density ``density(e)`` (standard
    Gaussian by default) is used as is instead of the self-consistent one.
    """
    grid = np.linspace(-3.0, 3.0, 61) if grid is None else check_1d(grid, "grid")
    density = density or (lambda e: _gauss(e, 1.0))
    rho_c, strength, prepare = _weights(params, _zeta_sq(stats), d, renormalize, density)
    out = np.empty(grid.size)
    for n, e in enumerate(grid):
        cuts, norm = prepare(e)
        i2 = _quad(lambda x: rho_c(x) * (strength(e, x) / (d * norm)) ** 2, cuts, epsabs=1e-15)
        out[n] = 1.0 / (PORTER_THOMAS_FOURTH * d * i2)
    return ObservableCurve(grid, out, np.zeros_like(out), "prediction", 0)


def predict_sinfo(params: AnsatzParams, stats, d: int, grid=None, *, renormalize=True, density=None) -> ObservableCurve:
    """Information entropy against standardized energy from a fitted shape,
    ``-d int rho_c w ln w dx - <z ln z>``."""
    grid = np.linspace(-3.0, 3.0, 61) if grid is None else check_1d(grid, "grid")
    density = density or (lambda e: _gauss(e, 1.0))
    rho_c, strength, prepare = _weights(params, _zeta_sq(stats), d, renormalize, density)
    out = np.empty(grid.size)
    for n, e in enumerate(grid):
        cuts, norm = prepare(e)

        def integrand(x):
            w = strength(e, x) / (d * norm)
            return -rho_c(x) * w * np.log(w) if w > 0 else 0.0

        out[n] = d * _quad(integrand, cuts) - PORTER_THOMAS_ENTROPY
    return ObservableCurve(grid, out, np.zeros_like(out), "prediction", 0)


def _zeta_sq(stats) -> float:
    return float(stats.zeta_sq if hasattr(stats, "zeta_sq") else stats)


def gaussian_xi2(e, zeta_sq: float, d: int):
    """Closed-form Gaussian-domain participation ratio,
    ``(d/3) sqrt(1 - zeta^4) exp(-zeta^2 e^2 / (1 + zeta^2))``."""
    e = np.asarray(e, dtype=float)
    return d / 3.0 * np.sqrt(1.0 - zeta_sq**2) * np.exp(-zeta_sq * e * e / (1.0 + zeta_sq))


def gaussian_sinfo(e, zeta_sq: float, d: int):
    """Closed-form Gaussian-domain entropy,
    ``ln(d) - <z ln z> + ln(1 - zeta^2)/2 + zeta^2 (1 - e^2)/2``."""
    e = np.asarray(e, dtype=float)
    return (
        np.log(d) - PORTER_THOMAS_ENTROPY
        + 0.5 * np.log1p(-zeta_sq) + 0.5 * zeta_sq * (1.0 - e * e)
    )


def with_center(params: AnsatzParams, center: float) -> AnsatzParams:
    return replace(params, center=center)


@dataclass(frozen=True)
class BWWidth:
    lam: float
    width: float
    width_err: float
    sigma: float
    shape_free: float

    @property
    def width_energy(self) -> float:
        """Width in model energy units (standardized width times sigma)."""
        return self.width * self.sigma

    @property
    def in_bw_domain(self) -> bool:
        return self.shape_free < 2.0


def bw_width_scan(lambdas, members, **hist_kwargs) -> list[BWWidth]:
    """Breit-Wigner widths from ``nu = 1`` constrained fits over a lambda grid.

    ``members`` are :class:`egoe.ensemble.EnsembleMember` objects; each is
    diagonalized at every lambda. Rows outside the Breit-Wigner domain are
    kept and flagged through ``in_bw_domain``.
    """
    from .observables import strength_function
    from .spectra import diagonalize, standardize

    table = []
    for lam in check_increasing(lambdas, "lambda grid"):
        decomps = [diagonalize(m.hamiltonian(lam).matrix) for m in members]
        hist = strength_function(decomps, **hist_kwargs)
        bw = fit_ansatz(hist, fixed_shape=1.0)
        free = fit_ansatz(hist)
        sigma = float(np.mean([standardize(d)[1].sigma for d in decomps]))
        table.append(BWWidth(float(lam), bw.bw_width, 2.0 * bw.scale_err, sigma, free.shape))
    return table
