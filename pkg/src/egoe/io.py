"""Text formats for external Hamiltonians and strength functions, plus CSV
and JSON writers for results.

``EGOE-H v1``::

    EGOE-H v1
    dim <d>
    <d(d+1)/2 lower-triangular values, row-major, any whitespace>

``EGOE-F v1``::

    EGOE-F v1
    <e_hat> <density>      # one row per bin center, ascending

Lines starting with ``#`` after the first are comments.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ensemble import Hamiltonian

H_HEADER = "EGOE-H v1"
F_HEADER = "EGOE-F v1"


class FormatError(ValueError):
    """Malformed input file; the message names the file and line."""


def _comment_lines(comment) -> list[str]:
    if not comment:
        return []
    return [f"# {line}" for line in str(comment).splitlines()]


def write_hamiltonian(path, matrix, comment=None) -> Path:
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("Hamiltonian must be square")
    path = Path(path)
    lines = [H_HEADER, f"dim {a.shape[0]}", *_comment_lines(comment)]
    for i in range(a.shape[0]):
        lines.append(" ".join(repr(float(x)) for x in a[i, : i + 1]))
    path.write_text("\n".join(lines) + "\n")
    return path


def _data_lines(path: Path, header: str):
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc
    lines = text.splitlines()
    if not lines or lines[0].strip() != header:
        got = lines[0].strip() if lines else "<empty file>"
        raise FormatError(f"{path}:1: expected header {header!r}, got {got!r}")
    for n, line in enumerate(lines[1:], start=2):
        s = line.split("#", 1)[0].strip()
        if s:
            yield n, s


def load_external_hamiltonian(path) -> Hamiltonian:
    """Read an ``EGOE-H v1`` file into a symmetric Hamiltonian."""
    path = Path(path)
    rows = _data_lines(path, H_HEADER)
    try:
        n, first = next(rows)
    except StopIteration:
        raise FormatError(f"{path}:2: missing 'dim <d>' line") from None
    parts = first.split()
    if len(parts) != 2 or parts[0] != "dim" or not parts[1].isdigit() or int(parts[1]) < 1:
        raise FormatError(f"{path}:{n}: expected 'dim <d>' with d >= 1, got {first!r}")
    d = int(parts[1])
    expected = d * (d + 1) // 2
    values = []
    last_line = n
    for n, s in rows:
        last_line = n
        for tok in s.split():
            try:
                x = float(tok)
            except ValueError:
                raise FormatError(f"{path}:{n}: not a number: {tok!r}") from None
            if not math.isfinite(x):
                raise FormatError(f"{path}:{n}: non-finite value {tok!r}")
            values.append(x)
    if len(values) != expected:
        raise FormatError(
            f"{path}:{last_line}: expected d(d+1)/2 = {expected} values for dim {d}, "
            f"found {len(values)}"
        )
    a = np.zeros((d, d))
    a[np.tril_indices(d)] = values
    a = a + np.tril(a, -1).T
    return Hamiltonian(a, float("nan"), "external")


@dataclass(frozen=True)
class ExternalStrength:
    e_hat: np.ndarray
    density: np.ndarray
    norm_factor: float
    source: str = ""


def write_strength(path, e_hat, density, comment=None) -> Path:
    path = Path(path)
    lines = [F_HEADER, *_comment_lines(comment)]
    lines += [f"{float(e)!r} {float(f)!r}" for e, f in zip(e_hat, density)]
    path.write_text("\n".join(lines) + "\n")
    return path


def load_external_strength(path) -> ExternalStrength:
    """Read an ``EGOE-F v1`` file; the density is rescaled to unit
    trapezoid integral and the applied factor recorded."""
    path = Path(path)
    e, f = [], []
    for n, s in _data_lines(path, F_HEADER):
        parts = s.split()
        if len(parts) != 2:
            raise FormatError(f"{path}:{n}: expected two columns, got {len(parts)}")
        try:
            x, y = float(parts[0]), float(parts[1])
        except ValueError:
            raise FormatError(f"{path}:{n}: not a number in {s!r}") from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise FormatError(f"{path}:{n}: non-finite value")
        if y < 0:
            raise FormatError(f"{path}:{n}: negative density {y}")
        if e and x <= e[-1]:
            raise FormatError(f"{path}:{n}: bin centers must be strictly ascending")
        e.append(x)
        f.append(y)
    if len(e) < 2:
        raise FormatError(f"{path}: need at least two rows")
    e, f = np.array(e), np.array(f)
    area = float(np.trapezoid(f, e))
    if not area > 0:
        raise FormatError(f"{path}: density integrates to zero")
    return ExternalStrength(e, f / area, 1.0 / area, str(path))


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def provenance_line(cfg_hash: str, seed) -> str:
    return f"# config_hash={cfg_hash} master_seed={seed}"


def write_csv(path, header, rows, provenance: str | None = None) -> Path:
    """Write rows under a header; an empty ``rows`` gives a header-only file."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            if provenance:
                fh.write(provenance + "\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(x) for x in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return "nan" if not np.isfinite(x) else repr(float(x))
    if isinstance(x, np.integer):
        return int(x)
    return x


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open() as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(obj) if np.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


# --- result tables ------------------------------------------------------


def strength_rows(hist):
    return [(c, f, e) for c, f, e in zip(hist.centers, hist.density, hist.stderr)]


def curve_rows(*curves):
    return [
        (e, v, s, c.basis_tag)
        for c in curves
        for e, v, s in zip(c.e_hat, c.values, c.stderr)
    ]


STRENGTH_HEADER = ("e_hat", "density", "stderr")
CURVE_HEADER = ("e_hat", "value", "stderr", "basis")
DUALITY_HEADER = (
    "lambda", "xi2_weak", "xi2_strong", "s_weak", "s_strong",
    "err_xi2_weak", "err_xi2_strong", "err_s_weak", "err_s_strong",
    "err_xi2_diff", "err_s_diff",
)
SCALING_HEADER = ("m", "lambda_d", "err")


def duality_rows(scan):
    keys = ("xi2_weak", "xi2_strong", "s_weak", "s_strong")
    rows = []
    for j, lam in enumerate(scan.lambdas):
        rows.append(
            (lam, *(scan.means[k][j] for k in keys), *(scan.stderr[k][j] for k in keys),
             scan.diff_stderr["xi2"][j], scan.diff_stderr["s"][j])
        )
    return rows
