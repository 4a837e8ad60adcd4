"""Command line: ``egoe <subcommand> --config run.toml [--seed S] [--members M] [--out DIR]``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 I/O or input-format error. Set ``EGOE_WORKERS`` to parallelize member
construction.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io, pipeline
from .ansatz import (
    FitError,
    StrengthFunctionFitter,
    bw_width_scan,
    fit_ansatz,
    predict_sinfo,
    predict_xi2,
)
from .config import ConfigError, RunConfig, load_config
from .duality import CrossingError, find_crossing, m_scan_space, run_scan, scaling_fit
from .io import FormatError
from .spectra import (
    DiagonalizationError,
    SpectralDecomposition,
    diagonalize,
    spacing_diagnostic,
    standardize,
    unfold,
)

COMMANDS = ("generate", "diagonalize", "observe", "fit", "duality", "ingest", "report")


class Run:
    """Bookkeeping shared by every subcommand: output paths and provenance."""

    def __init__(self, cfg: RunConfig, command: str):
        self.cfg = cfg
        self.command = command
        self.out = Path(cfg.out_dir)
        numeric = {k: v for k, v in cfg.as_dict().items() if k != "out_dir"}
        self.hash = io.config_hash(numeric)
        self.prov = io.provenance_line(self.hash, cfg.master_seed)

    def csv(self, name, header, rows):
        return io.write_csv(self.out / name, header, rows, self.prov)

    def summary(self, results: dict):
        return io.write_json(
            self.out / f"summary_{self.command}.json",
            {
                "command": self.command,
                "config": self.cfg.as_dict(),
                "config_hash": self.hash,
                "master_seed": self.cfg.master_seed,
                "results": results,
            },
        )

    def members(self, space=None, mean_field=None):
        space = space or self.cfg.space
        mf = mean_field or self.cfg.mean_field(space.n_sp)
        return pipeline.build_members_parallel(
            space, self.cfg.members, self.cfg.master_seed, mf, self.cfg.v
        )


def _lam_tag(lam: float) -> str:
    return f"lam{lam:.6g}"


def cmd_generate(run: Run) -> dict:
    members = run.members()
    folder = run.out / "hamiltonians"
    folder.mkdir(parents=True, exist_ok=True)
    written = []
    for m in members:
        stem = f"member_{m.seed.member_index:04d}"
        note = f"{run.prov[2:]} member_index={m.seed.member_index}"
        written.append(io.write_hamiltonian(folder / f"{stem}_V.egoeh", m.v_embedded, note + " part=V"))
        written.append(io.write_hamiltonian(folder / f"{stem}_h1.egoeh", np.diag(m.h1), note + " part=h1"))
        for lam in run.cfg.generate_lambdas:
            h = m.hamiltonian(lam).matrix
            written.append(io.write_hamiltonian(folder / f"{stem}_{_lam_tag(lam)}.egoeh", h, note + f" lambda={lam}"))
    return {"files": [str(p) for p in written], "dim": run.cfg.space.dim}


def cmd_diagonalize(run: Run) -> dict:
    members = run.members()
    stats_rows, spacing_rows = [], []
    for lam in run.cfg.lambdas:
        spacings = []
        for m, d in zip(members, pipeline.decompose(members, lam)):
            _, st = standardize(d)
            stats_rows.append((lam, m.seed.member_index, st.centroid, st.sigma, st.zeta_sq))
            if d.dim >= 20:
                spacings.append(unfold(d.eigenvalues))
        if spacings:
            diag = spacing_diagnostic(np.concatenate(spacings))
            spacing_rows.append((lam, diag.n_spacings, diag.ks_wigner, diag.ks_poisson, int(diag.closer_to_wigner)))
        run.csv("spectra.csv", ("lambda", "member", "centroid", "sigma", "zeta_sq"), stats_rows)
        run.csv("spacings.csv", ("lambda", "n_spacings", "ks_wigner", "ks_poisson", "closer_to_wigner"), spacing_rows)
    return {"spacings": [dict(zip(("lambda", "n", "ks_wigner", "ks_poisson", "wigner_like"), r)) for r in spacing_rows]}


def _observe_one(run: Run, members, lam):
    decomps = pipeline.decompose(members, lam)
    strong = pipeline.strong_basis(members, decomps)
    cfg = run.cfg
    obs = pipeline.observe(
        decomps, lam, cfg.k_window, cfg.bins, cfg.e_range, cfg.curve_window, cfg.center, strong
    )
    tag = _lam_tag(lam)
    run.csv(f"strength/strength_{tag}.csv", io.STRENGTH_HEADER, io.strength_rows(obs.histogram))
    run.csv(f"curves/xi2_{tag}.csv", io.CURVE_HEADER, io.curve_rows(*obs.curves["xi2"]))
    run.csv(f"curves/sinfo_{tag}.csv", io.CURVE_HEADER, io.curve_rows(*obs.curves["sinfo"]))
    return obs


OBSERVE_HEADER = (
    "lambda", "sigma", "zeta_sq", "xi2_central", "sinfo_central",
    "xi2_strong_central", "sinfo_strong_central", "f_centroid", "f_variance", "f_excess_kurtosis",
)


def _observe_row(obs):
    return (
        obs.lam, obs.stats.sigma, obs.stats.zeta_sq, obs.central["xi2"], obs.central["sinfo"],
        obs.central.get("xi2_strong", float("nan")), obs.central.get("sinfo_strong", float("nan")),
        *obs.histogram.moments,
    )


def cmd_observe(run: Run) -> dict:
    members = run.members()
    rows = []
    for lam in run.cfg.lambdas:
        rows.append(_observe_row(_observe_one(run, members, lam)))
        run.csv("observe.csv", OBSERVE_HEADER, rows)
    return {"rows": [dict(zip(OBSERVE_HEADER, r)) for r in rows]}


FIT_HEADER = (
    "lambda", "center", "scale", "shape", "residual", "chi2_dof", "converged", "zeta_sq",
    "xi2_predicted", "xi2_measured", "sinfo_predicted", "sinfo_measured",
)
BW_HEADER = ("lambda", "gamma", "gamma_err", "gamma_energy", "shape_free", "in_bw_domain")


def _fit_row(fr):
    p = fr.params
    return (
        fr.lam, p.center, p.scale, p.shape, p.residual, p.chi2_dof, int(p.converged), fr.stats.zeta_sq,
        fr.predicted_xi2, fr.measured_xi2, fr.predicted_sinfo, fr.measured_sinfo,
    )


def cmd_fit(run: Run) -> dict:
    members = run.members()
    d = run.cfg.space.dim
    rows = []
    for lam in run.cfg.lambdas:
        decomps = pipeline.decompose(members, lam)
        cfg = run.cfg
        obs = pipeline.observe(decomps, lam, cfg.k_window, cfg.bins, cfg.e_range, cfg.curve_window, cfg.center)
        fr = pipeline.fit_and_predict(obs, d)
        rows.append(_fit_row(fr))
        grid = obs.curves["xi2"][0].e_hat
        if 0.0 < fr.stats.zeta_sq < 1.0:
            px = predict_xi2(fr.params, fr.stats, d, grid=grid)
            ps = predict_sinfo(fr.params, fr.stats, d, grid=grid)
            run.csv(f"curves/xi2_predicted_{_lam_tag(lam)}.csv", io.CURVE_HEADER, io.curve_rows(px))
            run.csv(f"curves/sinfo_predicted_{_lam_tag(lam)}.csv", io.CURVE_HEADER, io.curve_rows(ps))
        run.csv("fits.csv", FIT_HEADER, rows)
    widths = bw_width_scan(
        run.cfg.lambdas, members, k_window=run.cfg.k_window, bins=run.cfg.bins,
        e_range=run.cfg.e_range, center=run.cfg.center,
    )
    bw_rows = [(w.lam, w.width, w.width_err, w.width_energy, w.shape_free, int(w.in_bw_domain)) for w in widths]
    run.csv("bw_widths.csv", BW_HEADER, bw_rows)
    return {"fits": [dict(zip(FIT_HEADER, r)) for r in rows], "bw_widths": [dict(zip(BW_HEADER, r)) for r in bw_rows]}


def cmd_duality(run: Run) -> dict:
    cfg = run.cfg
    points, crossings, failures = [], [], {}
    for m in cfg.m_values:
        space = m_scan_space(m, cfg.m_mode, cfg.fixed_n_sp)
        scan = run_scan(space, cfg.lambdas, cfg.members, cfg.master_seed, cfg.k_window, cfg.mean_field(space.n_sp), cfg.v)
        run.csv(f"duality_m{m}.csv", io.DUALITY_HEADER, io.duality_rows(scan))
        for obs_name in ("xi2", "s"):
            try:
                c = find_crossing(scan, obs_name)
            except CrossingError as exc:
                failures[f"m={m},{obs_name}"] = str(exc)
                continue
            crossings.append((m, obs_name, c.lambda_d, c.err))
            if obs_name == cfg.observable:
                points.append((m, c.lambda_d, c.err))
        run.csv("crossings.csv", ("m", "observable", "lambda_d", "err"), crossings)
        run.csv("scaling.csv", io.SCALING_HEADER, points)
    result = {"crossings": crossings, "failures": failures, "m_mode": cfg.m_mode}
    if len(points) >= 3:
        fit = scaling_fit(*(np.array(c) for c in zip(*points)))
        result.update(exponent=fit.exponent, exponent_err=fit.exponent_err, prefactor=fit.prefactor)
    else:
        result["scaling_error"] = f"only {len(points)} crossings found; scaling needs 3"
    return result


def _decomp_from_matrix(h) -> SpectralDecomposition:
    return diagonalize(h, label="(external)")


def cmd_ingest(run: Run) -> dict:
    cfg = run.cfg
    out = {"hamiltonians": [], "strengths": []}
    for path in cfg.ingest_hamiltonians:
        ham = io.load_external_hamiltonian(path)
        decomp = _decomp_from_matrix(ham.matrix)
        obs = pipeline.observe([decomp], float("nan"), cfg.k_window, cfg.bins, cfg.e_range, cfg.curve_window, cfg.center)
        stem = Path(path).stem
        run.csv(f"ingest/{stem}_strength.csv", io.STRENGTH_HEADER, io.strength_rows(obs.histogram))
        run.csv(f"ingest/{stem}_xi2.csv", io.CURVE_HEADER, io.curve_rows(*obs.curves["xi2"]))
        run.csv(f"ingest/{stem}_sinfo.csv", io.CURVE_HEADER, io.curve_rows(*obs.curves["sinfo"]))
        entry = {"source": str(path), "dim": ham.dim, "zeta_sq": obs.stats.zeta_sq,
                 "xi2_central": obs.central["xi2"], "sinfo_central": obs.central["sinfo"]}
        try:
            p = fit_ansatz(obs.histogram)
            entry.update(center=p.center, scale=p.scale, shape=p.shape, residual=p.residual)
        except FitError as exc:
            entry["fit_error"] = str(exc)
        out["hamiltonians"].append(entry)
    rows = []
    for path in cfg.ingest_strengths:
        ext = io.load_external_strength(path)
        p = StrengthFunctionFitter().fit(ext.e_hat, ext.density).params_
        rows.append((str(path), p.center, p.scale, p.shape, p.residual, ext.norm_factor))
        out["strengths"].append(dict(zip(("source", "center", "scale", "shape", "residual", "norm_factor"), rows[-1])))
    run.csv("ingest_fits.csv", ("source", "center", "scale", "shape", "residual", "norm_factor"), rows)
    return out


def cmd_report(run: Run) -> dict:
    merged = {}
    for path in sorted(run.out.glob("summary_*.json")):
        if path.name == "summary_report.json":
            continue
        payload = json.loads(path.read_text())
        merged[payload.get("command", path.stem)] = payload.get("results")
    for name, res in merged.items():
        print(f"[{name}] {_headline(name, res)}")
    return merged


def _headline(name, res) -> str:
    if not isinstance(res, dict):
        return "-"
    if name == "duality" and "exponent" in res:
        return f"lambda_d ~ m^{res['exponent']:.3f} +- {res['exponent_err']:.3f}"
    if name == "fit":
        return ", ".join(f"lam={f['lambda']:.4g}: nu={f['shape']:.3g}" for f in res.get("fits", []))
    return f"{len(res)} result groups"


HANDLERS = {
    "generate": cmd_generate,
    "diagonalize": cmd_diagonalize,
    "observe": cmd_observe,
    "fit": cmd_fit,
    "duality": cmd_duality,
    "ingest": cmd_ingest,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="egoe", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="TOML run configuration")
    parser.add_argument("--seed", type=int, help="override scan.master_seed")
    parser.add_argument("--members", type=int, help="override scan.members")
    parser.add_argument("--out", help="override output.dir")
    parser.add_argument("--mode", choices=("simulate", "ingest"), help="override output.mode")
    return parser


def _fail(kind: str, exc, code: int) -> int:
    print(f"egoe: {kind} error: {exc}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        if args.seed is not None:
            cfg.master_seed = args.seed
        if args.members is not None:
            cfg.members = args.members
        if args.out is not None:
            cfg.out_dir = args.out
        if args.mode is not None:
            cfg.mode = args.mode
        cfg.validate()
    except ConfigError as exc:
        return _fail("config", exc, 2)
    command = args.command
    if cfg.mode == "ingest" and command in ("observe", "fit"):
        command = "ingest"
    run = Run(cfg, command)
    try:
        results = HANDLERS[command](run)
        run.summary(results)
    except (FormatError, OSError) as exc:
        return _fail("I/O", exc, 4)
    except ConfigError as exc:
        return _fail("config", exc, 2)
    except (DiagonalizationError, FitError, CrossingError, np.linalg.LinAlgError, FloatingPointError, ValueError) as exc:
        return _fail("numeric", exc, 3)
    return 0


if __name__ == "__main__":
    sys.exit(main())
