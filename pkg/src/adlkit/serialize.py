"""CSV and JSON emitters for analysis artifacts.

CSV conventions: '.' decimal point, LF line endings, one header row,
floats printed with %.17g so 64-bit values survive a round trip. JSON
replaces non-finite floats with null. All writers go through a temp file
and an atomic rename.
"""

from __future__ import annotations

import dataclasses
import json
import os

import numpy as np

from .errors import ArgumentError, FormatError
from .landscape import HeightField
from .trajectory import Series

__all__ = [
    "RunManifest",
    "write_columns_csv",
    "read_columns_csv",
    "write_series_csv",
    "read_series_csv",
    "write_field_csv",
    "read_field_csv",
    "to_jsonable",
    "write_json",
    "read_json",
    "write_manifest",
    "read_manifest",
]


@dataclasses.dataclass(frozen=True)
class RunManifest:
    """Everything needed to re-run an experiment and reproduce its outputs."""

    config: dict
    tool_version: str
    seeds: list
    outputs: list


def _atomic_write(path, text: str) -> None:
    path = os.fspath(path)
    tmp = f"{path}.tmp.{os.getpid()}"
    try:
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "%.17g" % float(value)


def write_columns_csv(path, header: tuple, columns: tuple) -> None:
    cols = [np.asarray(c) for c in columns]
    if len(cols) != len(header):
        raise ArgumentError("one header name per column required")
    if any(c.ndim != 1 or c.size != cols[0].size for c in cols):
        raise ArgumentError("columns must be 1-D and equally long")
    lines = [",".join(header)]
    for row in zip(*cols):
        lines.append(",".join(_fmt(v) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def read_columns_csv(path) -> tuple[list, np.ndarray]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise FormatError(f"{os.fspath(path)}: empty CSV")
    header = lines[0].split(",")
    try:
        data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    except ValueError as exc:
        raise FormatError(f"{os.fspath(path)}: non-numeric cell ({exc})") from exc
    if data.size and data.shape[1] != len(header):
        raise FormatError(f"{os.fspath(path)}: ragged rows")
    return header, data


def write_series_csv(path, series: Series, header: tuple = ("x", "y")) -> None:
    write_columns_csv(path, header, (series.x, series.y))


def read_series_csv(path) -> Series:
    _, data = read_columns_csv(path)
    if data.ndim != 2 or data.shape[1] != 2:
        raise FormatError(f"{os.fspath(path)}: expected exactly two columns")
    return Series(x=data[:, 0], y=data[:, 1])


def write_field_csv(path, field: HeightField) -> None:
    """Grid CSV: a metadata header (n, extent, kind, seed on line 2),
    then n rows of n cell values."""
    lines = ["n,extent,kind,seed"]
    lines.append(f"{field.n},{_fmt(field.extent)},{field.kind},{field.seed}")
    for row in field.values:
        lines.append(",".join(_fmt(v) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def read_field_csv(path) -> HeightField:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if len(lines) < 2 or lines[0] != "n,extent,kind,seed":
        raise FormatError(f"{os.fspath(path)}: missing field header")
    meta = lines[1].split(",")
    if len(meta) != 4:
        raise FormatError(f"{os.fspath(path)}: malformed metadata row")
    try:
        n = int(meta[0])
        extent = float(meta[1])
        seed = int(meta[3])
        values = np.array([[float(v) for v in ln.split(",")] for ln in lines[2:]])
    except ValueError as exc:
        raise FormatError(f"{os.fspath(path)}: non-numeric cell ({exc})") from exc
    if values.shape != (n, n):
        raise FormatError(
            f"{os.fspath(path)}: grid shape {values.shape} does not match n={n}"
        )
    return HeightField(values=values, extent=extent, kind=meta[2], seed=seed)


def to_jsonable(obj):
    """Recursively convert dataclasses/arrays/numpy scalars to plain JSON
    values; non-finite floats become null."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if np.isfinite(value) else None
    return obj


def write_json(path, obj) -> None:
    _atomic_write(path, json.dumps(to_jsonable(obj), indent=2) + "\n")


def read_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def write_manifest(path, manifest: RunManifest) -> None:
    write_json(path, manifest)


def read_manifest(path) -> RunManifest:
    raw = read_json(path)
    try:
        return RunManifest(
            config=raw["config"],
            tool_version=raw["tool_version"],
            seeds=list(raw["seeds"]),
            outputs=list(raw["outputs"]),
        )
    except KeyError as exc:
        raise FormatError(f"{os.fspath(path)}: manifest missing key {exc}") from exc
