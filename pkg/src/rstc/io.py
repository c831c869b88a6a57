"""CSV readers and writers for curves, locations, labels and truth tables.

Formats
-------
curves     ``id,t1,...,tl``   header cells after ``id`` are the grid values;
                              empty cells are missing and get imputed
locations  ``id,lon,lat``
labels     ``id,cluster``
truth      ``id,cluster,outlier``   (outlier in {0, 1})
means      ``cluster,t1,...,tl``
"""
from __future__ import annotations

import csv
import hashlib
from pathlib import Path

import numpy as np

from .core import Dataset, IngestError, TimeGrid, interpolate_missing


def _rows(path):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise IngestError(f"{path}: empty file")
    return rows[0], rows[1:]


def _check_unique(ids, path):
    seen, dup = set(), []
    for i in ids:
        if i in seen and i not in dup:
            dup.append(i)
        seen.add(i)
    if dup:
        raise IngestError(f"{path}: duplicate id(s) {', '.join(dup)}")


def read_curves(path, max_missing: float = 0.05) -> tuple[list[str], TimeGrid, np.ndarray]:
    header, rows = _rows(path)
    try:
        grid = TimeGrid(np.array([float(h) for h in header[1:]]))
    except (ValueError, Exception) as exc:
        raise IngestError(f"{path}: header must be 'id' followed by increasing grid values ({exc})")
    ids = [r[0].strip() for r in rows]
    _check_unique(ids, path)
    curves = []
    for r in rows:
        cells = r[1:]
        if len(cells) != len(grid):
            raise IngestError(f"{path}: sample {r[0]!r} has {len(cells)} values, expected {len(grid)}")
        try:
            vals = [float(c) if c.strip() else None for c in cells]
        except ValueError as exc:
            raise IngestError(f"{path}: sample {r[0]!r}: {exc}") from exc
        curves.append(interpolate_missing(vals, grid, max_missing, sample_id=r[0]))
    return ids, grid, np.array(curves)


def read_table(path, columns: tuple[str, ...], types) -> dict[str, tuple]:
    header, rows = _rows(path)
    header = [h.strip() for h in header]
    if tuple(header[:len(columns) + 1]) != ("id",) + columns:
        raise IngestError(f"{path}: expected header {','.join(('id',) + columns)}, got {','.join(header)}")
    ids = [r[0].strip() for r in rows]
    _check_unique(ids, path)
    out = {}
    for r in rows:
        try:
            out[r[0].strip()] = tuple(t(r[j + 1]) for j, t in enumerate(types))
        except (ValueError, IndexError) as exc:
            raise IngestError(f"{path}: bad row for id {r[0]!r}: {exc}") from exc
    return out


def read_locations(path):
    return read_table(path, ("lon", "lat"), (float, float))


def read_labels(path) -> dict[str, int]:
    return {k: v[0] for k, v in read_table(path, ("cluster",), (int,)).items()}


def read_truth(path) -> dict[str, tuple[int, bool]]:
    raw = read_table(path, ("cluster", "outlier"), (int, int))
    return {k: (c, bool(o)) for k, (c, o) in raw.items()}


def read_means(path) -> tuple[TimeGrid, dict[int, np.ndarray]]:
    header, rows = _rows(path)
    grid = TimeGrid(np.array([float(h) for h in header[1:]]))
    return grid, {int(r[0]): np.array([float(c) for c in r[1:]]) for r in rows}


def align(ids: list[str], table: dict, what: str) -> list:
    """Values of ``table`` in ``ids`` order; error lists ids missing on either side."""
    missing = [i for i in ids if i not in table]
    extra = [i for i in table if i not in set(ids)]
    if missing or extra:
        parts = []
        if missing:
            parts.append(f"no {what} for id(s): {', '.join(missing)}")
        if extra:
            parts.append(f"{what} for unknown id(s): {', '.join(extra)}")
        raise IngestError("; ".join(parts))
    return [table[i] for i in ids]


def load_dataset(curves_path, locations_path, max_missing: float = 0.05) -> Dataset:
    ids, grid, curves = read_curves(curves_path, max_missing)
    locs = align(ids, read_locations(locations_path), "location")
    return Dataset(grid=grid, ids=tuple(ids), locations=np.array(locs), curves=curves)


def fmt(x: float) -> str:
    return repr(float(x))


def write_curves(path, ids, grid: TimeGrid, curves):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id"] + [fmt(t) for t in grid.points])
        for i, row in zip(ids, curves):
            w.writerow([i] + [fmt(v) for v in row])


def write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
