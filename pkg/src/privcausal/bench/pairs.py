"""Cause-effect pair collections.

A pairs directory follows the layout of the Tuebingen cause-effect pairs
distribution:

* ``pairmeta.txt``: one line per pair,
  ``<id> <cause first col> <cause last col> <effect first col> <effect last col> <weight>``
  with 1-based column numbers;
* ``pairNNNN.txt``: whitespace-separated numeric columns for pair ``NNNN``.

Only pairs with a one-dimensional cause and effect in a two-column file are
loaded; multivariate pairs are skipped and reported.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..data import ContinuousTable, Dataset, choose_bin_count, discretize
from ..errors import DataError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CausePair:
    pair_id: str
    x: np.ndarray
    y: np.ndarray
    weight: float
    truth_direction: str  # "x_to_y" or "y_to_x"

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def bins(self) -> tuple[int, int]:
        return (
            choose_bin_count(np.unique(self.x).size),
            choose_bin_count(np.unique(self.y).size),
        )

    def discretized(self) -> Dataset:
        table = ContinuousTable(("x", "y"), np.column_stack([self.x, self.y]))
        return discretize(table, self.bins)


def _read_meta(path: Path) -> dict:
    meta = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 6:
            raise DataError(f"{path.name}:{lineno}: expected 6 fields, got {len(parts)}")
        try:
            pid = int(parts[0])
            cols = tuple(int(p) for p in parts[1:5])
            weight = float(parts[5])
        except ValueError:
            raise DataError(f"{path.name}:{lineno}: malformed entry") from None
        meta[pid] = (cols, weight)
    return meta


def ingest_pairs_dir(path) -> list[CausePair]:
    root = Path(path)
    meta_path = root / "pairmeta.txt"
    if not meta_path.exists():
        raise DataError(f"missing metadata file {meta_path}")
    meta = _read_meta(meta_path)
    pairs = []
    for f in sorted(root.glob("pair[0-9]*.txt")):
        pid = int(f.stem[4:])
        if pid not in meta:
            raise DataError(f"no metadata entry for {f.name}")
        (c0, c1, e0, e1), weight = meta[pid]
        try:
            data = np.loadtxt(f, ndmin=2)
        except ValueError as exc:
            raise DataError(f"malformed pair file {f.name}: {exc}") from None
        if c0 != c1 or e0 != e1 or data.shape[1] != 2 or {c0, e0} != {1, 2}:
            log.warning("skipping multivariate pair %s", f.name)
            continue
        if not np.isfinite(data).all():
            raise DataError(f"non-finite value in {f.name}")
        truth = "x_to_y" if c0 == 1 else "y_to_x"
        pairs.append(CausePair(f"pair{pid:04d}", data[:, 0], data[:, 1], weight, truth))
    if not pairs:
        raise DataError(f"no usable pairs in {root}")
    return pairs
