"""Ensemble-level drivers shared by the command line and the acceptance runs.

Work is split into (member, lambda) cells. Cells carry only seeds and
parameters, so results do not depend on how many workers run them; the
worker count comes from the ``EGOE_WORKERS`` environment variable.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .ansatz import AnsatzParams, fit_ansatz, predict_sinfo, predict_xi2
from .ensemble import EnsembleMember, make_member
from .fock import SpaceSpec
from .observables import (
    DEFAULT_BINS,
    DEFAULT_CURVE_WINDOW,
    DEFAULT_K_WINDOW,
    DEFAULT_RANGE,
    StrengthHistogram,
    curve_over_energy,
    info_entropy,
    interaction_decomposition,
    participation_ratio,
    strength_function,
)
from .spectra import (
    V_EIGENBASIS,
    SpectralDecomposition,
    SpectralStats,
    diagonalize,
    spacing_diagnostic,
    standardize,
    unfold,
    v_eigenbasis,
)

WORKERS_ENV = "EGOE_WORKERS"


def n_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def map_cells(fn, cells, workers: int | None = None):
    workers = n_workers() if workers is None else workers
    cells = list(cells)
    if workers <= 1 or len(cells) <= 1:
        return [fn(c) for c in cells]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, cells))


def build_members(space: SpaceSpec, members: int, master_seed: int, mean_field=None, v=1.0, offset=0):
    return [make_member(space, master_seed, offset + i, mean_field, v) for i in range(members)]


def decompose(members, lam: float) -> list[SpectralDecomposition]:
    return [
        diagonalize(m.hamiltonian(lam).matrix, label=f"(member {m.seed.member_index}, seed {m.seed.master_seed}, lam={lam})")
        for m in members
    ]


def mean_stats(decomps) -> SpectralStats:
    stats = [standardize(d)[1] for d in decomps]
    return SpectralStats(
        float(np.mean([s.centroid for s in stats])),
        float(np.mean([s.sigma for s in stats])),
        float(np.mean([s.zeta_sq for s in stats])),
    )


def pooled_values(decomps, basis_decomps=None):
    """Per-eigenstate (e_hat, xi2, S) pooled over members."""
    e_all, x_all, s_all = [], [], []
    for n, d in enumerate(decomps):
        e_hat, _ = standardize(d)
        target = d if basis_decomps is None else basis_decomps[n]
        e_all.append(e_hat)
        x_all.append(participation_ratio(target))
        s_all.append(info_entropy(target))
    return np.concatenate(e_all), np.concatenate(x_all), np.concatenate(s_all)


def central_mean(e_hat, values, window=DEFAULT_K_WINDOW) -> float:
    sel = (e_hat >= window[0]) & (e_hat <= window[1])
    return float(np.mean(values[sel])) if sel.any() else float("nan")


@dataclass
class LambdaObservation:
    lam: float
    histogram: StrengthHistogram
    stats: SpectralStats
    curves: dict
    central: dict


def observe(
    decomps,
    lam: float,
    k_window=DEFAULT_K_WINDOW,
    bins=DEFAULT_BINS,
    e_range=DEFAULT_RANGE,
    curve_window=DEFAULT_CURVE_WINDOW,
    center="diagonal",
    strong_decomps=None,
) -> LambdaObservation:
    """Strength histogram, xi2/S curves and central averages for one lambda."""
    hist = strength_function(decomps, k_window, bins, e_range, center)
    n = len(decomps)
    e_hat, xi2, s = pooled_values(decomps)
    curves = {
        "xi2": [curve_over_energy(xi2, e_hat, curve_window, ensemble_size=n)],
        "sinfo": [curve_over_energy(s, e_hat, curve_window, ensemble_size=n)],
    }
    central = {"xi2": central_mean(e_hat, xi2, k_window), "sinfo": central_mean(e_hat, s, k_window)}
    if strong_decomps is not None:
        _, xi2v, sv = pooled_values(decomps, strong_decomps)
        curves["xi2"].append(curve_over_energy(xi2v, e_hat, curve_window, basis_tag=V_EIGENBASIS, ensemble_size=n))
        curves["sinfo"].append(curve_over_energy(sv, e_hat, curve_window, basis_tag=V_EIGENBASIS, ensemble_size=n))
        central["xi2_strong"] = central_mean(e_hat, xi2v, k_window)
        central["sinfo_strong"] = central_mean(e_hat, sv, k_window)
    return LambdaObservation(float(lam), hist, mean_stats(decomps), curves, central)


def strong_basis(members, decomps):
    out = []
    for m, d in zip(members, decomps):
        out.append(v_eigenbasis(interaction_decomposition(m), d))
    return out


@dataclass
class FitResult:
    lam: float
    params: AnsatzParams
    stats: SpectralStats
    dim: int
    predicted_xi2: float
    predicted_sinfo: float
    measured_xi2: float
    measured_sinfo: float


def fit_and_predict(obs: LambdaObservation, dim: int, grid=(0.0,)) -> FitResult:
    """Fit the interpolating shape and predict central xi2 / S from it."""
    params = fit_ansatz(obs.histogram)
    g = np.asarray(grid, dtype=float)
    px = predict_xi2(params, obs.stats, dim, grid=g)
    ps = predict_sinfo(params, obs.stats, dim, grid=g)
    return FitResult(
        obs.lam, params, obs.stats, dim,
        float(np.mean(px.values)), float(np.mean(ps.values)),
        obs.central["xi2"], obs.central["sinfo"],
    )


def spacings_for(members, lam: float, edge_trim=0.025, poly_degree=5) -> np.ndarray:
    out = []
    for m in members:
        e = np.linalg.eigvalsh(m.hamiltonian(lam).matrix)
        out.append(unfold(e, edge_trim, poly_degree))
    return np.concatenate(out)


def chaos_diagnostic(members, lam: float):
    return spacing_diagnostic(spacings_for(members, lam))


def _member_cell(args):
    space, seed, idx, mf, v = args
    return make_member(space, seed, idx, mf, v)


def build_members_parallel(space, members, master_seed, mean_field=None, v=1.0, workers=None) -> list[EnsembleMember]:
    cells = [(space, master_seed, i, mean_field, v) for i in range(members)]
    return map_cells(_member_cell, cells, workers)
