"""On-disk formats: CSV curves, binary field snapshots, JSON summaries.

Three artifact kinds, all deterministic for a fixed configuration:

* CSV for control curves and scalar time series.  UTF-8, comma separator,
  period decimal, one header row, 17 significant digits (enough to round
  trip a float64 exactly).  The time column is in milliseconds.
* Field snapshots as raw little-endian complex128 (8-byte re, im pairs) in
  C index order, next to a JSON sidecar carrying the grid shape, extents,
  physical time, unit scales and a kind tag.
* Run summaries as JSON with sorted keys.

Readers validate shape consistency and reject truncated payloads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .grid import ComplexField, Grid
from .units import UnitSystem

__all__ = [
    "FieldSnapshot",
    "read_control_csv",
    "read_field_snapshot",
    "read_series_csv",
    "read_summary",
    "sidecar_path",
    "write_control_csv",
    "write_field_snapshot",
    "write_series_csv",
    "write_summary",
]


def _format(value: float) -> str:
    """Decimal form with 17 significant digits (lossless for float64)."""
    return f"{value:.17g}"


def _write_csv(path: Path, header: Sequence[str], rows: np.ndarray) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_format(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _read_csv(path: Path) -> tuple[list[str], np.ndarray]:
    with open(path, encoding="utf-8") as handle:
        header = handle.readline().strip().split(",")
        data = np.loadtxt(handle, delimiter=",", ndmin=2)
    if data.size and data.shape[1] != len(header):
        raise ValueError(
            f"{path}: {data.shape[1]} columns but {len(header)} header fields"
        )
    return header, data


def write_control_csv(path: str | Path, times_ms: np.ndarray, samples: np.ndarray) -> None:
    """Write a control curve as ``t,lambda_1,...,lambda_m``.

    Parameters
    ----------
    times_ms : np.ndarray
        Sample times in milliseconds, shape (n,).
    samples : np.ndarray
        Control values, shape (n, m).
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    times_ms = np.asarray(times_ms, dtype=float)
    if samples.shape[0] != times_ms.shape[0]:
        raise ValueError("times and samples must have equal length")
    header = ["t"] + [f"lambda_{j + 1}" for j in range(samples.shape[1])]
    _write_csv(Path(path), header, np.column_stack([times_ms, samples]))


def read_control_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Read a control curve CSV, returning (times_ms, samples)."""
    header, data = _read_csv(Path(path))
    if len(header) < 2 or header[0] != "t":
        raise ValueError(f"{path}: expected header 't,lambda_1,...'")
    for j, name in enumerate(header[1:]):
        if name != f"lambda_{j + 1}":
            raise ValueError(f"{path}: unexpected column name {name!r}")
    return data[:, 0], data[:, 1:]


def write_series_csv(path: str | Path, times_ms: np.ndarray, values: np.ndarray) -> None:
    """Write a scalar time series as ``t,value``."""
    times_ms = np.asarray(times_ms, dtype=float)
    values = np.asarray(values, dtype=float)
    if times_ms.shape != values.shape:
        raise ValueError("times and values must have equal shape")
    _write_csv(Path(path), ["t", "value"], np.column_stack([times_ms, values]))


def read_series_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Read a scalar time series CSV, returning (times_ms, values)."""
    header, data = _read_csv(Path(path))
    if header != ["t", "value"]:
        raise ValueError(f"{path}: expected header 't,value'")
    return data[:, 0], data[:, 1]


# ---------------------------------------------------------------------------
# field snapshots

def sidecar_path(path: str | Path) -> Path:
    """JSON sidecar next to a snapshot payload (.bin -> .json)."""
    return Path(path).with_suffix(".json")


@dataclass
class FieldSnapshot:
    """A field read back from disk together with its sidecar metadata."""

    field: ComplexField
    kind: str
    t_ms: float | None
    meta: dict[str, Any] = field(default_factory=dict)


def write_field_snapshot(
    path: str | Path,
    psi: ComplexField,
    *,
    kind: str,
    t_ms: float | None = None,
    units: UnitSystem | None = None,
    extra: dict[str, Any] | None = None,
) -> None:
    """Write a field as raw little-endian complex128 plus a JSON sidecar.

    Parameters
    ----------
    path : str | Path
        Payload file; the sidecar replaces its suffix with ``.json``.
    psi : ComplexField
        Field to store, written in C index order.
    kind : str
        Tag naming what the field is (``groundstate``, ``final``, ...).
    t_ms : float | None
        Physical time of the snapshot in milliseconds, None if static.
    units : UnitSystem | None
        If given, the unit scales are recorded in the sidecar.
    extra : dict | None
        Additional sidecar entries (must be JSON-serializable).
    """
    path = Path(path)
    payload = np.ascontiguousarray(psi.values, dtype=np.complex128)
    path.write_bytes(payload.astype("<c16", copy=False).tobytes(order="C"))

    meta: dict[str, Any] = {
        "format": "complex128-le",
        "order": "C",
        "kind": kind,
        "shape": list(psi.grid.dims),
        "extent": list(psi.grid.extent),
        "t_ms": t_ms,
    }
    if units is not None:
        meta["units"] = {
            "length_unit_m": units.length_unit,
            "time_unit_s": units.time_unit,
            "energy_unit_J": units.energy_unit,
            "g": units.g,
            "atom_count": units.atom_count,
        }
    if extra:
        meta.update(extra)
    sidecar_path(path).write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def read_field_snapshot(path: str | Path) -> FieldSnapshot:
    """Read a snapshot written by :func:`write_field_snapshot`."""
    path = Path(path)
    meta = json.loads(sidecar_path(path).read_text(encoding="utf-8"))
    dims = tuple(int(n) for n in meta["shape"])
    extent = tuple(float(e) for e in meta["extent"])
    raw = path.read_bytes()
    expected = 16 * int(np.prod(dims))
    if len(raw) != expected:
        raise ValueError(
            f"{path}: payload is {len(raw)} bytes, sidecar shape needs {expected}"
        )
    values = np.frombuffer(raw, dtype="<c16").astype(np.complex128).reshape(dims)
    grid = Grid(dims=dims, extent=extent)
    return FieldSnapshot(
        field=ComplexField(grid, values),
        kind=str(meta.get("kind", "")),
        t_ms=meta.get("t_ms"),
        meta=meta,
    )


# ---------------------------------------------------------------------------
# run summaries

def write_summary(path: str | Path, payload: dict[str, Any]) -> None:
    """Write a machine-readable run summary as JSON."""
    Path(path).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def read_summary(path: str | Path) -> dict[str, Any]:
    """Read a JSON run summary."""
    return json.loads(Path(path).read_text(encoding="utf-8"))
