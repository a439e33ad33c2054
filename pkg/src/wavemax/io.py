"""File formats: waveform / ambiguity / init CSVs, the WMAF binary, traces.

Every text file may start with ``#`` comment lines; writers put the config
hash there when one is given and readers skip them.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .ambiguity import AmbiguityData
from .frft import AngleGrid
from .waveforms import Waveform, WaveformKind

__all__ = [
    "write_waveform_csv",
    "read_waveform_csv",
    "write_ambiguity_csv",
    "read_ambiguity_csv",
    "write_ambiguity_binary",
    "read_ambiguity_binary",
    "write_init_result",
    "read_init_result",
    "write_trace_csv",
    "write_key_values",
    "read_key_values",
]

WMAF_MAGIC = b"WMAF"
_HEADER = struct.Struct("<4sIIxxxx")


def _fmt(v) -> str:
    # 17 significant digits round-trip every double exactly
    return format(float(v), ".17g")


def _open_writer(path, comments):
    fh = open(path, "w", newline="", encoding="utf-8")
    for line in comments or ():
        fh.write(f"# {line}\n")
    return fh, csv.writer(fh, lineterminator="\n")


def _data_lines(path):
    with open(path, encoding="utf-8") as fh:
        return [line for line in fh if line.strip() and not line.startswith("#")]


def write_waveform_csv(path, x, comments=()) -> None:
    x = np.asarray(getattr(x, "samples", x), dtype=complex).reshape(-1)
    fh, w = _open_writer(path, comments)
    with fh:
        w.writerow(["index", "real", "imag"])
        for i, v in enumerate(x):
            w.writerow([i, _fmt(v.real), _fmt(v.imag)])


def read_waveform_csv(path, sample_period: float | None = None) -> Waveform:
    rows = list(csv.DictReader(_data_lines(path)))
    if not rows:
        raise ValueError(f"{path}: no samples")
    order = np.array([int(r["index"]) for r in rows])
    if not np.array_equal(np.sort(order), np.arange(order.size)):
        raise ValueError(f"{path}: indices must cover 0..N-1")
    x = np.empty(order.size, dtype=complex)
    x[order] = [complex(float(r["real"]), float(r["imag"])) for r in rows]
    if sample_period is None:
        return Waveform(x, label=WaveformKind.CUSTOM)
    return Waveform(x, sample_period, WaveformKind.CUSTOM)


def write_ambiguity_csv(path, A: AmbiguityData, comments=()) -> None:
    fh, w = _open_writer(path, comments)
    with fh:
        w.writerow(["angle_index", "k", "value", "observed"])
        rows, cols = A.shape
        for r in range(rows):
            for k in range(cols):
                w.writerow([r, k, _fmt(A.values[r, k]), int(A.mask[r, k])])


def read_ambiguity_csv(path, grid: AngleGrid) -> AmbiguityData:
    rows = list(csv.DictReader(_data_lines(path)))
    n_angles = 1 + max(int(r["angle_index"]) for r in rows)
    n = 1 + max(int(r["k"]) for r in rows)
    values = np.zeros((n_angles, n))
    mask = np.zeros((n_angles, n), dtype=bool)
    for r in rows:
        a, k = int(r["angle_index"]), int(r["k"])
        values[a, k] = float(r["value"])
        mask[a, k] = bool(int(r["observed"]))
    return AmbiguityData(values, mask, grid)


def write_ambiguity_binary(path, values) -> None:
    """Header ``WMAF``, u32 ``N_alpha``, u32 ``N``, 4 pad bytes; then f64 LE row-major."""
    values = np.asarray(getattr(values, "values", values), dtype="<f8")
    if values.ndim != 2:
        raise ValueError("expected a 2-D array")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(WMAF_MAGIC, *values.shape))
        fh.write(np.ascontiguousarray(values).tobytes())


def read_ambiguity_binary(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, rows, cols = _HEADER.unpack_from(raw)
    if magic != WMAF_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    body = raw[_HEADER.size:]
    if len(body) != 8 * rows * cols:
        raise ValueError(f"{path}: payload size does not match {rows}x{cols}")
    return np.frombuffer(body, dtype="<f8").reshape(rows, cols).astype(float)


def write_key_values(path, items: dict, comments=()) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        for key, value in items.items():
            if isinstance(value, float):
                value = _fmt(value)
            fh.write(f"{key}={value}\n")


def read_key_values(path) -> dict:
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def write_init_result(stem, result, comments=()) -> tuple[Path, Path]:
    """``<stem>.csv`` holds ``x0``; ``<stem>.txt`` holds the scalars."""
    stem = Path(stem)
    csv_path, side = stem.with_suffix(".csv"), stem.with_suffix(".txt")
    write_waveform_csv(csv_path, result.x0, comments)
    write_key_values(side, {
        "lambda0": float(result.lambda0),
        "selected_count": int(len(result.selected_indices)),
        "power_iterations": len(result.iterate_residuals),
        "final_residual": float(result.iterate_residuals[-1]) if result.iterate_residuals else 0.0,
        "flags": ",".join(result.flags),
    }, comments)
    return csv_path, side


def read_init_result(stem):
    """Returns ``(x0, scalars)``."""
    stem = Path(stem)
    x0 = read_waveform_csv(stem.with_suffix(".csv")).samples
    return x0, read_key_values(stem.with_suffix(".txt"))


def write_trace_csv(path, state, comments=()) -> None:
    fh, w = _open_writer(path, comments)
    with fh:
        w.writerow(["iteration", "misfit", "alignment", "min_eigenvalue", "rel_change"])
        for row in state.trace_rows():
            w.writerow([row[0]] + [_fmt(v) for v in row[1:]])
