"""Discrete domains, datasets, CSV I/O and uniform-bin discretization."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import DataError

# Mixed-radix record codes are stored as int64.
MAX_CODE_SPACE = 2**62


@dataclass(frozen=True)
class Domain:
    """Per-attribute category counts ``k_i`` and attribute names."""

    dims: tuple[int, ...]
    names: tuple[str, ...] = ()

    def __post_init__(self):
        dims = tuple(int(k) for k in self.dims)
        names = tuple(self.names) or tuple(f"col{i}" for i in range(len(dims)))
        if not dims:
            raise DataError("domain needs at least one attribute")
        if len(names) != len(dims):
            raise DataError(f"{len(names)} names for {len(dims)} attributes")
        if any(k < 2 for k in dims):
            raise DataError(f"every attribute needs >= 2 categories, got {dims}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "names", names)

    @property
    def d(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        """Combined size K = prod k_i as an exact Python int."""
        return math.prod(self.dims)

    def checked_size(self, cap: int = MAX_CODE_SPACE) -> int:
        K = self.size
        if K > cap:
            raise DataError(f"oversized combined domain: K={K} exceeds {cap}")
        return K

    def strides(self) -> np.ndarray:
        """Row-major strides; the last attribute varies fastest."""
        self.checked_size()
        out = np.ones(self.d, dtype=np.int64)
        for i in range(self.d - 2, -1, -1):
            out[i] = out[i + 1] * self.dims[i + 1]
        return out

    def encode(self, rows: np.ndarray) -> np.ndarray:
        """Map records (n, d) to combined-domain indices."""
        return np.asarray(rows, dtype=np.int64) @ self.strides()

    def decode(self, codes: np.ndarray) -> np.ndarray:
        codes = np.asarray(codes, dtype=np.int64)
        out = np.empty(codes.shape + (self.d,), dtype=np.int64)
        rem = codes.copy()
        for i, s in enumerate(self.strides()):
            out[..., i], rem = np.divmod(rem, s)
        return out

    def grid(self) -> np.ndarray:
        """All K points of the domain, in code order."""
        return self.decode(np.arange(self.checked_size(10**7)))

    def validate(self, rows: np.ndarray) -> None:
        rows = np.asarray(rows)
        if rows.ndim != 2 or rows.shape[1] != self.d:
            raise DataError(f"expected records of length {self.d}, got shape {rows.shape}")
        bad = (rows < 0) | (rows >= np.asarray(self.dims))
        if bad.any():
            r, c = np.argwhere(bad)[0]
            raise DataError(
                f"value {rows[r, c]} out of range [0, {self.dims[c] - 1}] at row {r}, col {c}"
            )


@dataclass(frozen=True)
class Dataset:
    """n records of category indices over a :class:`Domain`.

    ``rows`` is an (n, d) int64 array; record ``j`` is ``rows[j]``.
    """

    domain: Domain
    rows: np.ndarray

    def __post_init__(self):
        rows = np.ascontiguousarray(self.rows, dtype=np.int64)
        if rows.ndim != 2 or rows.shape[0] < 1:
            raise DataError("dataset needs at least one row")
        self.domain.validate(rows)
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def names(self) -> tuple[str, ...]:
        return self.domain.names

    def column(self, i: int) -> np.ndarray:
        return self.rows[:, i]

    def select(self, cols: Sequence[int]) -> "Dataset":
        cols = list(cols)
        dom = Domain(
            tuple(self.domain.dims[c] for c in cols), tuple(self.domain.names[c] for c in cols)
        )
        return Dataset(dom, self.rows[:, cols])


@dataclass(frozen=True)
class ContinuousTable:
    """Named real-valued columns of equal length."""

    names: tuple[str, ...]
    values: np.ndarray = field(repr=False)  # shape (n, d)

    def __post_init__(self):
        values = np.array(self.values, dtype=float, ndmin=2)
        if values.shape[1] != len(self.names):
            raise DataError("column count does not match names")
        if not np.isfinite(values).all():
            raise DataError("non-finite value in table")
        values.setflags(write=False)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.names.index(name)]


def ingest_csv(path, has_header: bool = True) -> ContinuousTable:
    """Read a rectangular numeric CSV file.

    Without a header, columns are named ``col0 .. col{d-1}``. Row and column
    numbers in error messages are 1-based data coordinates.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not lines:
        raise DataError(f"empty file: {path}")
    if has_header:
        names, lines = [c.strip() for c in lines[0]], lines[1:]
        if not lines:
            raise DataError(f"no data rows in {path}")
    else:
        names = [f"col{i}" for i in range(len(lines[0]))]
    width = len(names)
    values = np.empty((len(lines), width))
    for r, line in enumerate(lines, start=1):
        if len(line) != width:
            raise DataError(f"ragged row {r}: expected {width} cells, got {len(line)}")
        for c, cell in enumerate(line, start=1):
            try:
                values[r - 1, c - 1] = float(cell)
            except ValueError:
                raise DataError(f"non-numeric cell at row {r}, col {c}: {cell!r}") from None
    return ContinuousTable(tuple(names), values)


def write_csv(table: ContinuousTable, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table.names)
        for row in table.values:
            w.writerow([repr(float(v)) for v in row])


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def write_dataset(ds: Dataset, path) -> None:
    """Write integer category codes as CSV plus a ``{"dims", "names"}`` JSON sidecar."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ds.names)
        w.writerows(ds.rows.tolist())
    with open(sidecar_path(path), "w", encoding="utf-8") as fh:
        json.dump({"dims": list(ds.domain.dims), "names": list(ds.names)}, fh)
        fh.write("\n")


def read_dataset(path) -> Dataset:
    side = sidecar_path(path)
    if not side.exists():
        raise DataError(f"missing dims sidecar {side}")
    meta = json.loads(side.read_text(encoding="utf-8"))
    table = ingest_csv(path, has_header=True)
    if not np.all(table.values == np.round(table.values)):
        raise DataError("category codes must be integers")
    return Dataset(Domain(tuple(meta["dims"]), tuple(meta["names"])), table.values.astype(np.int64))


def choose_bin_count(u: int) -> int:
    """Bin count from the number of distinct values, ``min(u, 100, 0.1 u)``.

    Clamped below at 2 so every discretized attribute is a valid domain.
    """
    if u < 1:
        raise ValueError("u must be >= 1")
    return max(2, math.floor(min(u, 100, 0.1 * u)))


def discretize(
    table: ContinuousTable,
    bins: int | Sequence[int],
    ranges: Optional[Sequence[Optional[tuple[float, float]]]] = None,
) -> Dataset:
    """Uniform bins over a fixed range per column.

    Without an explicit range the column min/max are used. The upper edge
    falls into the last bin; values outside the range clamp to the edge bins.
    """
    d = table.d
    bins = [int(bins)] * d if np.isscalar(bins) else [int(b) for b in bins]
    if len(bins) != d:
        raise DataError(f"{len(bins)} bin counts for {d} columns")
    ranges = list(ranges) if ranges is not None else [None] * d
    out = np.empty((table.n, d), dtype=np.int64)
    for c in range(d):
        if bins[c] < 2:
            raise DataError(f"bins must be >= 2 (column {table.names[c]})")
        col = table.values[:, c]
        lo, hi = ranges[c] if ranges[c] is not None else (col.min(), col.max())
        if not hi > lo:
            raise DataError(f"degenerate range [{lo}, {hi}] for column {table.names[c]}")
        idx = np.floor((col - lo) / (hi - lo) * bins[c])
        out[:, c] = np.clip(idx, 0, bins[c] - 1)
    return Dataset(Domain(tuple(bins), table.names), out)


def discretize_auto(table: ContinuousTable) -> Dataset:
    """Discretize each column with :func:`choose_bin_count` on its distinct values."""
    bins = [choose_bin_count(len(np.unique(table.values[:, c]))) for c in range(table.d)]
    return discretize(table, bins)
