"""Weak/strong basis duality: lambda scans, crossing detection, m-scaling."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from ._validation import check_1d, check_increasing
from .ensemble import make_member
from .fock import SpaceSpec
from .observables import DEFAULT_K_WINDOW, dual_pair, interaction_decomposition

DEFAULT_GRID = np.geomspace(0.01, 1.0, 16)
OBSERVABLES = ("xi2", "s")


class CrossingError(ValueError):
    pass


@dataclass
class DualityScan:
    """Per-lambda ensemble means of central-eigenstate complexity in both bases.

    ``means`` and ``stderr`` are dicts keyed by ``xi2_weak``, ``xi2_strong``,
    ``s_weak``, ``s_strong``; ``diff_stderr`` holds the standard error of the
    member-wise ``weak - strong`` difference for ``xi2`` and ``s``.
    """

    lambdas: np.ndarray
    means: dict
    stderr: dict
    diff_stderr: dict
    space: tuple[int, int]
    members: int
    master_seed: int | None = None
    per_member: dict = field(default_factory=dict, repr=False)

    def difference(self, observable: str = "xi2") -> np.ndarray:
        return self.means[f"{observable}_weak"] - self.means[f"{observable}_strong"]


def _scan_members(members, lambdas, window):
    keys = ("xi2_weak", "xi2_strong", "s_weak", "s_strong")
    table = {k: np.full((len(members), len(lambdas)), np.nan) for k in keys}
    for i, member in enumerate(members):
        v_decomp = interaction_decomposition(member)
        for j, lam in enumerate(lambdas):
            pair = dual_pair(member, lam, window=window, v_decomp=v_decomp)
            if pair.e_hat.size == 0:
                continue
            table["xi2_weak"][i, j] = pair.xi2_weak.mean()
            table["xi2_strong"][i, j] = pair.xi2_strong.mean()
            table["s_weak"][i, j] = pair.s_weak.mean()
            table["s_strong"][i, j] = pair.s_strong.mean()
    return table


def _sem(x: np.ndarray) -> np.ndarray:
    n = np.sum(np.isfinite(x), axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(n > 1, np.nanstd(x, axis=0, ddof=1) / np.sqrt(n), 0.0)


def summarize(table: dict, lambdas, space, master_seed=None) -> DualityScan:
    n_members = next(iter(table.values())).shape[0]
    means = {k: np.nanmean(v, axis=0) for k, v in table.items()}
    stderr = {k: _sem(v) for k, v in table.items()}
    diff_stderr = {o: _sem(table[f"{o}_weak"] - table[f"{o}_strong"]) for o in OBSERVABLES}
    return DualityScan(
        np.asarray(lambdas, dtype=float), means, stderr, diff_stderr,
        tuple(space), n_members, master_seed, table,
    )


def run_scan(
    space: SpaceSpec,
    lambdas=DEFAULT_GRID,
    members: int = 20,
    master_seed: int = 0,
    window=DEFAULT_K_WINDOW,
    mean_field=None,
    v: float = 1.0,
    member_offset: int = 0,
) -> DualityScan:
    """Scan ``lambdas`` for ``members`` sampled interactions (one per member,
    shared across the grid) and aggregate central-eigenstate xi2 and S in the
    mean-field and interaction eigenbases."""
    lambdas = check_increasing(lambdas, "lambda grid")
    if np.any(lambdas <= 0):
        raise ValueError("lambda grid must be positive (it is log-spaced)")
    if members < 1:
        raise ValueError("need at least one member")
    ens = [
        make_member(space, master_seed, member_offset + i, mean_field, v)
        for i in range(members)
    ]
    table = _scan_members(ens, lambdas, window)
    return summarize(table, lambdas, (space.n_sp, space.n_fermions), master_seed)


def merge_scans(scans) -> DualityScan:
    """Pool independent scans over the same grid (e.g. disjoint member ranges)."""
    scans = list(scans)
    lambdas = scans[0].lambdas
    for s in scans[1:]:
        if not np.array_equal(s.lambdas, lambdas) or s.space != scans[0].space:
            raise ValueError("scans differ in grid or space")
    table = {k: np.concatenate([s.per_member[k] for s in scans]) for k in scans[0].per_member}
    return summarize(table, lambdas, scans[0].space, scans[0].master_seed)


@dataclass(frozen=True)
class Crossing:
    lambda_d: float
    err: float
    observable: str
    bracket: tuple[int, int]

    def contains(self, other: "Crossing", k: float = 1.0) -> bool:
        return abs(self.lambda_d - other.lambda_d) <= k * np.hypot(self.err, other.err)


def sign_changes(diff: np.ndarray, err: np.ndarray | None = None, k: float = 1.0) -> np.ndarray:
    """Grid indices ``j`` with a sign change between ``j`` and ``j + 1``.

    Points whose magnitude is within ``k`` standard errors of zero are not
    allowed to split one crossing into several."""
    diff = np.asarray(diff, dtype=float)
    err = np.zeros_like(diff) if err is None else np.asarray(err, dtype=float)
    sig = np.sign(diff)
    decided = np.abs(diff) > k * err
    idx = np.flatnonzero(decided)
    changes = []
    for a, b in zip(idx[:-1], idx[1:]):
        if sig[a] != sig[b]:
            # locate the actual zero crossing within [a, b]
            for j in range(a, b):
                if sig[j] != sig[j + 1] or sig[j + 1] == 0:
                    changes.append(j)
                    break
    return np.array(changes, dtype=int)


def find_crossing(scan: DualityScan, observable: str = "xi2", noise_k: float = 1.0) -> Crossing:
    """Interpolate ``weak - strong`` linearly in ``ln lambda`` across its sign
    change; the uncertainty propagates the member-wise standard errors of the
    two bracketing points."""
    if observable not in OBSERVABLES:
        raise ValueError(f"observable must be one of {OBSERVABLES}")
    f = scan.difference(observable)
    e = scan.diff_stderr[observable]
    changes = sign_changes(f, e, noise_k)
    if changes.size == 0:
        raise CrossingError(
            f"no sign change of {observable} weak-strong on the grid: "
            f"endpoints {f[0]:.4g} at lambda={scan.lambdas[0]:.4g}, "
            f"{f[-1]:.4g} at lambda={scan.lambdas[-1]:.4g}"
        )
    if changes.size > 1:
        raise CrossingError(
            f"{changes.size} sign changes beyond noise at lambda indices {changes.tolist()}"
        )
    j = int(changes[0])
    x = np.log(scan.lambdas)
    return _interpolate(x[j], x[j + 1], f[j], f[j + 1], e[j], e[j + 1], observable, (j, j + 1))


def _interpolate(x0, x1, f0, f1, e0, e1, observable, bracket) -> Crossing:
    df = f1 - f0
    xs = x0 - f0 * (x1 - x0) / df
    gx0 = -(x1 - x0) * f1 / df**2
    gx1 = (x1 - x0) * f0 / df**2
    sx = float(np.hypot(gx0 * e0, gx1 * e1))
    lam = float(np.exp(xs))
    return Crossing(lam, lam * sx, observable, bracket)


def crossing_from_curves(lambdas, weak, strong, err=None, observable="custom") -> Crossing:
    """Crossing of two arbitrary curves sampled on a lambda grid."""
    lambdas = check_increasing(lambdas, "lambda grid")
    f = check_1d(weak) - check_1d(strong)
    e = np.zeros_like(f) if err is None else check_1d(err)
    changes = sign_changes(f, e)
    if changes.size != 1:
        raise CrossingError(f"expected one sign change, found {changes.size}")
    j = int(changes[0])
    x = np.log(lambdas)
    return _interpolate(x[j], x[j + 1], f[j], f[j + 1], e[j], e[j + 1], observable, (j, j + 1))


@dataclass(frozen=True)
class ScalingFit:
    m: np.ndarray
    lambda_d: np.ndarray
    err: np.ndarray
    exponent: float
    prefactor: float
    exponent_err: float


class PowerLawScaling(RegressorMixin, BaseEstimator):
    """Fit ``lambda_d = a * m**p`` by least squares on the log-log line.

    With ``sample_weight`` (inverse variances of ``ln lambda_d``) the fit is
    weighted; the exponent error is always scaled by the residual scatter
    when that exceeds the weighted expectation.
    """

    def fit(self, X, y, sample_weight=None):
        m = check_1d(X, "m")
        lam = check_1d(y, "lambda_d")
        if m.size != lam.size:
            raise ValueError("X and y lengths differ")
        if m.size < 3:
            raise ValueError("scaling fit needs at least 3 points")
        if np.any(m <= 0) or np.any(lam <= 0):
            raise ValueError("m and lambda_d must be positive")
        if np.unique(m).size < 2:
            raise ValueError("degenerate abscissae: all m equal")
        x, yl = np.log(m), np.log(lam)
        w = np.ones_like(x) if sample_weight is None else check_1d(sample_weight)
        a = np.column_stack([np.ones_like(x), x])
        aw = a * w[:, None]
        cov = np.linalg.inv(a.T @ aw)
        coef = cov @ (aw.T @ yl)
        resid = yl - a @ coef
        chi2 = float(resid @ (w * resid)) / (x.size - 2)
        scale = chi2 if sample_weight is None else max(chi2, 1.0)
        self.intercept_, self.exponent_ = float(coef[0]), float(coef[1])
        self.exponent_err_ = float(np.sqrt(cov[1, 1] * scale))
        return self

    def predict(self, X):
        if not hasattr(self, "exponent_"):
            raise NotFittedError("PowerLawScaling is not fitted")
        return np.exp(self.intercept_) * np.asarray(X, dtype=float) ** self.exponent_


def scaling_fit(m, lambda_d, err=None) -> ScalingFit:
    """``ln lambda_d = ln a + p ln m``; ``err`` are standard errors of lambda_d."""
    m = check_1d(m, "m")
    lambda_d = check_1d(lambda_d, "lambda_d")
    weights = None
    if err is not None:
        err = check_1d(err, "err")
        rel = err / lambda_d
        if np.all(rel > 0):
            weights = 1.0 / rel**2
    est = PowerLawScaling().fit(m, lambda_d, sample_weight=weights)
    return ScalingFit(
        m, lambda_d, np.zeros_like(lambda_d) if err is None else err,
        est.exponent_, float(np.exp(est.intercept_)), est.exponent_err_,
    )


def m_scan_space(m: int, mode: str = "half-filling", n_sp: int = 14) -> SpaceSpec:
    """Space for an m-scan: ``N = 2m`` or a fixed ``N``."""
    if mode == "half-filling":
        return SpaceSpec(2 * m, m)
    if mode == "fixed-N":
        return SpaceSpec(n_sp, m)
    raise ValueError(f"unknown m-scan mode {mode!r}")
