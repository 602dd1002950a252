"""
Versioned CSV run tables.

Layout::

    # schema=1
    # meta={"d": 1, "kernel": "matern", ...}
    t,x1,...,xd,y,f,mu,sigma,beta,inst_regret,cum_regret,info_gain
    1,...

Floats are written with 17 significant digits, so a write/read round trip
reproduces every value bit for bit.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import SchemaError
from .policies import RunRecord

SCHEMA_LINE = "# schema=1"
META_PREFIX = "# meta="
VALUE_COLUMNS = ("y", "f", "mu", "sigma", "beta", "inst_regret", "cum_regret", "info_gain")


def format_float(v: float) -> str:
    return format(float(v), ".17g")


def run_columns(d: int) -> list[str]:
    return ["t"] + [f"x{j}" for j in range(1, d + 1)] + list(VALUE_COLUMNS)


def write_run_csv(path, run: RunRecord, metadata: dict) -> Path:
    path = Path(path)
    d = run.x.shape[1]
    cum = np.cumsum(run.inst_regret)
    with path.open("w", newline="") as fh:
        fh.write(SCHEMA_LINE + "\n")
        fh.write(META_PREFIX + json.dumps(metadata, sort_keys=True) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(run_columns(d))
        for k in range(run.T):
            row = [str(k + 1)]
            row += [format_float(v) for v in run.x[k]]
            row += [
                format_float(v)
                for v in (run.y[k], run.f[k], run.mu[k], run.sigma[k], run.beta[k], run.inst_regret[k], cum[k], run.info_gain[k])
            ]
            w.writerow(row)
    return path


@dataclass(frozen=True)
class RunTable:
    """A parsed run CSV: metadata plus one float array per column."""

    metadata: dict
    columns: dict

    @property
    def T(self) -> int:
        return len(self.columns["t"])

    @property
    def d(self) -> int:
        return sum(1 for k in self.columns if k.startswith("x"))

    def __getitem__(self, key: str) -> np.ndarray:
        return self.columns[key]


def read_run_csv(path) -> RunTable:
    """Parse and validate a run table; errors name the offending line and column."""
    path = Path(path)
    with path.open(newline="") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != SCHEMA_LINE:
        raise SchemaError(f"{path}: line 1: expected '{SCHEMA_LINE}'")
    metadata: dict = {}
    body_start = 1
    if len(lines) > 1 and lines[1].startswith(META_PREFIX):
        try:
            metadata = json.loads(lines[1][len(META_PREFIX) :])
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: line 2: metadata is not valid JSON ({exc})") from exc
        body_start = 2
    rows = list(csv.reader(lines[body_start:]))
    if not rows:
        raise SchemaError(f"{path}: missing header row")
    header = rows[0]
    n_x = sum(1 for h in header if h.startswith("x"))
    expected = run_columns(n_x)
    if n_x < 1 or header != expected:
        raise SchemaError(f"{path}: line {body_start + 1}: header {header} does not match {expected}")
    data = {h: [] for h in header}
    for r, row in enumerate(rows[1:], start=body_start + 2):
        if len(row) != len(header):
            raise SchemaError(f"{path}: line {r}: expected {len(header)} fields, got {len(row)}")
        for h, cell in zip(header, row):
            try:
                data[h].append(float(cell))
            except ValueError as exc:
                raise SchemaError(f"{path}: line {r}, column '{h}': cannot parse {cell!r}") from exc
    if len(rows) < 2:
        raise SchemaError(f"{path}: no data rows")
    columns = {h: np.array(v) for h, v in data.items()}
    t = columns["t"]
    if not np.array_equal(t, np.arange(1, len(t) + 1)):
        bad = int(np.flatnonzero(t != np.arange(1, len(t) + 1))[0])
        raise SchemaError(f"{path}: line {body_start + 2 + bad}, column 't': steps must run 1, 2, ...")
    for h in ("inst_regret", "info_gain"):
        bad = np.flatnonzero(~np.isfinite(columns[h]))
        if bad.size:
            raise SchemaError(f"{path}: line {body_start + 2 + int(bad[0])}, column '{h}': value must be finite")
    return RunTable(metadata, columns)


def write_json(path, payload: dict) -> Path:
    """Deterministic JSON (sorted keys, non-finite floats as null)."""
    path = Path(path)
    path.write_text(json.dumps(_clean(payload), sort_keys=True, indent=2) + "\n")
    return path


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj
