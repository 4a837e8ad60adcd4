"""Run configuration: a TOML file with sections, validated before compute.

Example::

    [space]
    n_sp = 12
    n_fermions = 6

    [mean_field]          # omit for eps_i = (i+1) + 1/(i+1)
    energies = [1.0, 2.0, ...]

    [interaction]
    v = 1.0

    [scan]
    lambdas = [0.03, 0.06, 0.3]      # or lambda_min / lambda_max / lambda_points
    members = 20
    master_seed = 1

    [analysis]
    k_window = [-0.1, 0.1]
    bins = 51
    e_range = [-3.0, 3.0]
    curve_window = 0.2
    center = "diagonal"

    [duality]
    m_values = [4, 5, 6, 7]
    m_mode = "half-filling"          # or "fixed-N"
    fixed_n_sp = 14
    observable = "xi2"

    [generate]
    lambdas = []                     # assembled H(lambda) files to write

    [ingest]
    hamiltonians = []
    strengths = []

    [output]
    dir = "out"
    mode = "simulate"                # or "ingest"
"""

from __future__ import annotations

import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .ensemble import MeanField, default_mean_field
from .fock import SpaceSpec


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    n_sp: int = 12
    n_fermions: int = 6
    sp_energies: list[float] | None = None
    v: float = 1.0
    lambdas: list[float] = field(default_factory=lambda: np.geomspace(0.01, 1.0, 16).tolist())
    members: int = 20
    master_seed: int = 0
    k_window: tuple[float, float] = (-0.1, 0.1)
    bins: int = 51
    e_range: tuple[float, float] = (-3.0, 3.0)
    curve_window: float = 0.2
    center: str = "diagonal"
    m_values: list[int] = field(default_factory=lambda: [4, 5, 6, 7])
    m_mode: str = "half-filling"
    fixed_n_sp: int = 14
    observable: str = "xi2"
    generate_lambdas: list[float] = field(default_factory=list)
    ingest_hamiltonians: list[str] = field(default_factory=list)
    ingest_strengths: list[str] = field(default_factory=list)
    out_dir: str = "out"
    mode: str = "simulate"

    @property
    def space(self) -> SpaceSpec:
        return SpaceSpec(self.n_sp, self.n_fermions)

    def mean_field(self, n_sp: int | None = None) -> MeanField:
        n = self.n_sp if n_sp is None else n_sp
        if self.sp_energies is None:
            return default_mean_field(n)
        if len(self.sp_energies) < n:
            raise ConfigError(f"mean_field.energies has {len(self.sp_energies)} levels, need {n}")
        return MeanField(np.asarray(self.sp_energies[:n], dtype=float))

    def as_dict(self) -> dict:
        return asdict(self)

    def validate(self) -> "RunConfig":
        try:
            self.space
            if self.sp_energies is not None:
                self.mean_field()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        checks = [
            (self.v > 0, "interaction.v must be positive"),
            (self.members >= 1, "scan.members must be >= 1"),
            (len(self.lambdas) >= 1, "scan needs at least one lambda"),
            (all(x > 0 for x in self.lambdas), "lambda values must be positive"),
            (all(b > a for a, b in zip(self.lambdas, self.lambdas[1:])), "lambdas must be strictly increasing"),
            (self.k_window[0] < self.k_window[1], "analysis.k_window must be (lo, hi) with lo < hi"),
            (self.bins >= 20, "analysis.bins must be >= 20"),
            (self.e_range[0] < self.e_range[1], "analysis.e_range must be increasing"),
            (self.curve_window > 0, "analysis.curve_window must be positive"),
            (self.center in ("diagonal", "none"), "analysis.center must be 'diagonal' or 'none'"),
            (self.m_mode in ("half-filling", "fixed-N"), "duality.m_mode must be 'half-filling' or 'fixed-N'"),
            (self.observable in ("xi2", "s"), "duality.observable must be 'xi2' or 's'"),
            (self.mode in ("simulate", "ingest"), "output.mode must be 'simulate' or 'ingest'"),
            (all(m >= 2 for m in self.m_values), "duality.m_values must be >= 2"),
            (self.m_mode != "fixed-N" or all(m < self.fixed_n_sp for m in self.m_values),
             "fixed-N m-scan needs every m below duality.fixed_n_sp"),
            (0 <= self.master_seed < 2**64, "scan.master_seed must be a 64-bit unsigned integer"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        return self


_SECTIONS = {
    "space": {"n_sp": "n_sp", "n_fermions": "n_fermions"},
    "mean_field": {"energies": "sp_energies"},
    "interaction": {"v": "v"},
    "scan": {"lambdas": "lambdas", "members": "members", "master_seed": "master_seed"},
    "analysis": {
        "k_window": "k_window", "bins": "bins", "e_range": "e_range",
        "curve_window": "curve_window", "center": "center",
    },
    "duality": {
        "m_values": "m_values", "m_mode": "m_mode", "fixed_n_sp": "fixed_n_sp",
        "observable": "observable",
    },
    "generate": {"lambdas": "generate_lambdas"},
    "ingest": {"hamiltonians": "ingest_hamiltonians", "strengths": "ingest_strengths"},
    "output": {"dir": "out_dir", "mode": "mode"},
}


def config_from_dict(raw: dict) -> RunConfig:
    kwargs = {}
    for section, body in raw.items():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown config section [{section}]")
        if not isinstance(body, dict):
            raise ConfigError(f"[{section}] must be a table")
        body = dict(body)
        if section == "scan" and "lambdas" not in body and "lambda_min" in body:
            lo, hi = body.pop("lambda_min"), body.pop("lambda_max", 1.0)
            n = body.pop("lambda_points", 16)
            body["lambdas"] = np.geomspace(lo, hi, int(n)).tolist()
        for key, value in body.items():
            if key not in _SECTIONS[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            kwargs[_SECTIONS[section][key]] = value
    for key in ("k_window", "e_range"):
        if key in kwargs:
            if len(kwargs[key]) != 2:
                raise ConfigError(f"{key} must have two entries")
            kwargs[key] = tuple(float(x) for x in kwargs[key])
    try:
        cfg = RunConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    cfg = config_from_dict(raw)
    base = path.parent
    cfg.ingest_hamiltonians = [str(base / p) for p in cfg.ingest_hamiltonians]
    cfg.ingest_strengths = [str(base / p) for p in cfg.ingest_strengths]
    return cfg
