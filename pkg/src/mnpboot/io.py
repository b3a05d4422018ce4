"""Plain-text readers and writers.

Matrices are header-free CSV with one observation per line. Runs and test
results are JSON lines: a header record followed by one record per item.
Floats are written in their shortest round-tripping decimal form (``repr``),
so every file reads back bit-exactly.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import NDArray

from mnpboot.bootstrap import BootstrapRun, Replicate

__all__ = [
    "write_matrix_csv",
    "read_matrix_csv",
    "write_table_csv",
    "read_table_csv",
    "read_csv_header",
    "write_config",
    "read_config",
    "write_run_jsonl",
    "read_run_jsonl",
    "write_records_jsonl",
    "read_records_jsonl",
    "histogram",
]


def _fmt(x: float) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "nan" if math.isnan(x) else repr(float(x))
    return "" if x is None else str(x)


def write_matrix_csv(path: str | Path, Y: NDArray[np.float64]) -> None:
    with open(path, "w", newline="") as fh:
        for row in np.asarray(Y, dtype=np.float64):
            fh.write(",".join(map(repr, row.tolist())))
            fh.write("\n")


def read_matrix_csv(path: str | Path) -> NDArray[np.float64]:
    Y = np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
    if not np.all(np.isfinite(Y)):
        raise ValueError(f"{path}: non-finite entries")
    return Y


def write_table_csv(path: str | Path, rows: Sequence[dict], columns: Sequence[str] | None = None,
                    header: dict | None = None) -> None:
    """CSV with a column row; ``header`` is echoed first as ``# key = value`` lines."""
    columns = list(columns or (rows[0].keys() if rows else []))
    with open(path, "w", newline="") as fh:
        for k in sorted(header or {}):
            fh.write(f"# {k} = {_fmt(header[k])}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(c)) for c in columns])


def read_table_csv(path: str | Path) -> list[dict[str, str]]:
    """Rows as string dicts; ``#`` comment lines are skipped."""
    with open(path, newline="") as fh:
        return list(csv.DictReader(line for line in fh if not line.startswith("#")))


def read_csv_header(path: str | Path) -> dict[str, str]:
    out = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            k, _, v = line[1:].partition("=")
            out[k.strip()] = v.strip()
    return out


def write_config(path: str | Path, config: dict) -> None:
    """``key = value`` lines, readable by :func:`read_config`."""
    with open(path, "w") as fh:
        for k in sorted(config):
            fh.write(f"{k} = {_fmt(config[k])}\n")


def read_config(path: str | Path) -> dict[str, str]:
    """Parse ``key = value`` lines; blank lines and ``#`` comments are ignored."""
    out = {}
    with open(path) as fh:
        for no, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            k, sep, v = line.partition("=")
            if not sep or not k.strip():
                raise ValueError(f"{path}:{no}: expected 'key = value'")
            out[k.strip().replace("-", "_")] = v.strip()
    return out


class _Encoder(json.JSONEncoder):
    def default(self, o):
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.bool_):
            return bool(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        return super().default(o)


def _dumps(obj) -> str:
    # json emits repr(float), the shortest exactly round-tripping form
    return json.dumps(obj, cls=_Encoder, sort_keys=True, allow_nan=True)


def write_records_jsonl(path: str | Path, header: dict, records: Iterable[dict]) -> None:
    with open(path, "w") as fh:
        fh.write(_dumps({"type": "header", **header}) + "\n")
        for rec in records:
            fh.write(_dumps({"type": "record", **rec}) + "\n")


def read_records_jsonl(path: str | Path) -> tuple[dict, list[dict]]:
    header, recs = None, []
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            kind = obj.pop("type", None)
            if kind == "header":
                header = obj
            else:
                recs.append(obj)
    if header is None:
        raise ValueError(f"{path}: missing header record")
    return header, recs


def write_run_jsonl(path: str | Path, run: BootstrapRun, extra_header: dict | None = None) -> None:
    header = {**run.header(), **(extra_header or {})}
    recs = ({"index": r.index, "eigenvalues": r.eigenvalues, "lss": r.lss_values} for r in run.replicates)
    write_records_jsonl(path, header, recs)


def read_run_jsonl(path: str | Path) -> BootstrapRun:
    h, recs = read_records_jsonl(path)
    reps = [Replicate(r["index"], np.asarray(r["eigenvalues"], dtype=np.float64), dict(r["lss"])) for r in recs]
    return BootstrapRun(h["n"], h["p"], h["m"], h["q"], h["B"], h["strategy"],
                        h["projection_resample"], h["seed"], list(h["functions"]), reps)


def histogram(values: NDArray[np.float64], bins: int | None = None) -> list[dict]:
    """Density histogram rows ``(bin_left, bin_right, density)``.

    Freedman-Diaconis binning unless ``bins`` is given.
    """
    edges = np.histogram_bin_edges(values, bins=bins if bins else "fd")
    dens, edges = np.histogram(values, bins=edges, density=True)
    return [{"bin_left": float(a), "bin_right": float(b), "density": float(d)}
            for a, b, d in zip(edges[:-1], edges[1:], dens)]
