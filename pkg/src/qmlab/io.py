"""Experiment configs and result tables.

Configs are flat ``key = value`` text files; ``#`` starts a comment. Ranges
are written ``min:max:step`` and include ``max`` when it lies on the grid.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np


class ConfigError(ValueError):
    """Bad experiment configuration; maps to exit code 2."""


def parse_config_text(text):
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key.replace("-", "_")] = value
    return out


def parse_config(path):
    try:
        with open(path) as fh:
            return parse_config_text(fh.read())
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e


def parse_range(text):
    """'a:b:h' -> array a, a+h, ..., up to b; a bare number is a single point."""
    parts = str(text).split(":")
    try:
        vals = [float(p) for p in parts]
    except ValueError as e:
        raise ConfigError(f"bad range {text!r}") from e
    if len(vals) == 1:
        return np.array(vals)
    if len(vals) != 3:
        raise ConfigError(f"range must be min:max:step, got {text!r}")
    lo, hi, step = vals
    if step <= 0 or not all(math.isfinite(v) for v in vals):
        raise ConfigError(f"range step must be positive and finite in {text!r}")
    if hi < lo:
        raise ConfigError(f"empty range {text!r}")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


def parse_list(text, kind=float):
    """Comma- or space-separated values."""
    items = [p for p in str(text).replace(",", " ").split() if p]
    if not items:
        raise ConfigError("empty list")
    try:
        return [kind(p) for p in items]
    except ValueError as e:
        raise ConfigError(f"bad list {text!r}") from e


@dataclass
class ResultTable:
    columns: list
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.columns = list(self.columns)
        self.rows = [list(r) for r in self.rows]
        for r in self.rows:
            if len(r) != len(self.columns):
                raise ValueError(f"row has {len(r)} entries for {len(self.columns)} columns")

    def column(self, name):
        k = self.columns.index(name)
        return [r[k] for r in self.rows]

    def append(self, row):
        row = list(row)
        if len(row) != len(self.columns):
            raise ValueError(f"row has {len(row)} entries for {len(self.columns)} columns")
        self.rows.append(row)


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def _plain(v):
    """Convert numpy scalars and arrays into JSON-ready Python values."""
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return _plain(v.tolist())
    if isinstance(v, (np.integer, bool, np.bool_)):
        return int(v) if not isinstance(v, (bool, np.bool_)) else bool(v)
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    return v


def table_to_json(t):
    return json.dumps(
        {"columns": t.columns, "rows": _plain(t.rows), "metadata": _plain(t.metadata)}, indent=1, sort_keys=True
    )


def table_from_json(text):
    d = json.loads(text)
    return ResultTable(d["columns"], d["rows"], d.get("metadata", {}))


def write_table(t, path, fmt=None):
    """Write ``t`` as CSV (header + 17-digit reals) or JSON; format from suffix by default."""
    if fmt is None:
        fmt = "json" if str(path).endswith(".json") else "csv"
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    with open(path, "w", newline="\n") as fh:
        if fmt == "json":
            fh.write(table_to_json(t) + "\n")
            return
        fh.write(",".join(t.columns) + "\n")
        fh.writelines(",".join(_cell(v) for v in r) + "\n" for r in t.rows)


def write_array_csv(path, columns, data, int_columns=0):
    """Fast CSV writer for a dense numeric array; the first ``int_columns`` are integers."""
    data = np.asarray(data)
    fmt = ["%d"] * int_columns + ["%.17g"] * (len(columns) - int_columns)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        if len(data):
            np.savetxt(fh, data, fmt=fmt, delimiter=",", newline="\n")


def read_csv(path):
    """Columns and float rows of a CSV written by :func:`write_table`."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    cols = lines[0].split(",") if lines else []
    rows = [[float(v) for v in line.split(",")] for line in lines[1:] if line]
    return cols, rows
