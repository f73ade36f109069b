"""Torus point sets, the wrap-around metric, and fixed-radius neighbor queries.

Points live on the unit torus [0,1)^2 with the metric

    d(x, y) = sqrt(sum_i min(|x_i - y_i|, 1 - |x_i - y_i|)^2),

so there are no boundary effects.  Neighbor queries use a uniform grid whose
cells are at least as wide as the query radius, which makes the 3x3 cell
neighborhood (with wrap) a complete candidate set.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import seeding

__all__ = [
    "TorusPoints",
    "GridIndex",
    "torus_distance",
    "sample_points",
    "neighbors_within",
    "count_in_ball",
    "neighbor_csr",
    "write_points_binary",
    "read_points_binary",
]

_TAG_POINTS_X = 0x7031
_TAG_POINTS_Y = 0x7032

POINTS_MAGIC = b"TORPTS01"
POINTS_VERSION = 1


@dataclass(frozen=True)
class TorusPoints:
    """An immutable batch of points in [0,1)^2.

    ``seed`` is the generator key for sampled sets (coords are a pure function
    of (n, seed)); it is None for hand-built sets.
    """

    coords: np.ndarray
    seed: int | None = None

    def __post_init__(self) -> None:
        coords = np.ascontiguousarray(self.coords, dtype=np.float64)
        if coords.ndim != 2 or coords.shape[1] != 2 or coords.shape[0] < 1:
            raise ValueError("coords must have shape (n, 2) with n >= 1")
        if np.any(coords < 0.0) or np.any(coords >= 1.0):
            raise ValueError("coordinates must lie in [0, 1)")
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @classmethod
    def from_coords(cls, coords) -> "TorusPoints":
        """Wrap an explicit coordinate array (no seeding contract)."""
        return cls(np.asarray(coords, dtype=np.float64), seed=None)

    def __repr__(self) -> str:  # keep reprs small for big point sets
        tag = "hand-built" if self.seed is None else f"seed={self.seed}"
        return f"TorusPoints(n={self.n}, {tag})"


def sample_points(n: int, seed: int) -> TorusPoints:
    """n i.i.d. uniform points; coordinate i depends only on (seed, i)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    idx = np.arange(n, dtype=np.uint64)
    x = seeding.hashed_uniform(seeding.key64(seed, _TAG_POINTS_X), idx)
    y = seeding.hashed_uniform(seeding.key64(seed, _TAG_POINTS_Y), idx)
    coords = np.column_stack([x, y])
    return TorusPoints(coords, seed=int(seed))


def torus_distance(x, y):
    """Wrap-around distance; broadcasts over leading axes, max value sqrt(1/2)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    diff = np.abs(x - y)
    diff = np.minimum(diff, 1.0 - diff)
    out = np.sqrt(np.sum(diff * diff, axis=-1))
    if out.ndim == 0:
        return float(out)
    return out


class GridIndex:
    """Uniform grid over the torus for fixed-radius queries.

    The grid has W = floor(1/cell_size) cells per axis, each of side 1/W >=
    cell_size, so any query with radius r <= cell_size only needs the 3x3
    neighborhood of the query's cell, including across the wrap seam.
    Queries with a larger radius are rejected rather than silently scanning
    wider rings.
    """

    def __init__(self, points: TorusPoints, cell_size: float):
        if not (0.0 < cell_size <= 1.0):
            raise ValueError("cell_size must lie in (0, 1]")
        self.points = points
        self.width = max(1, int(1.0 / cell_size + 1e-9))
        self.cell_size = 1.0 / self.width
        w = self.width
        coords = points.coords
        cx = np.minimum((coords[:, 0] * w).astype(np.int64), w - 1)
        cy = np.minimum((coords[:, 1] * w).astype(np.int64), w - 1)
        self._cell_id = cx * w + cy
        self._order = np.argsort(self._cell_id, kind="stable")
        self._sorted_cells = self._cell_id[self._order]

    @property
    def buckets(self) -> dict[tuple[int, int], np.ndarray]:
        """Non-empty buckets as {(cx, cy): sorted point indices}."""
        out: dict[tuple[int, int], np.ndarray] = {}
        w = self.width
        boundaries = np.flatnonzero(np.diff(self._sorted_cells)) + 1
        for chunk in np.split(self._order, boundaries):
            cell = int(self._cell_id[chunk[0]])
            out[(cell // w, cell % w)] = np.sort(chunk)
        return out

    def _offsets(self, cx: int, cy: int) -> tuple[np.ndarray, np.ndarray]:
        w = self.width
        ox = np.unique(np.array([(cx - 1) % w, cx, (cx + 1) % w]))
        oy = np.unique(np.array([(cy - 1) % w, cy, (cy + 1) % w]))
        return ox, oy

    def _check_radius(self, r: float) -> None:
        if r >= 0.5:
            raise ValueError("query radius must be < 1/2 on the torus")
        if r > self.cell_size * (1.0 + 1e-12):
            raise ValueError(
                f"query radius {r} exceeds index cell size {self.cell_size}; "
                "rebuild the index with cell_size >= r"
            )

    def candidates(self, x) -> np.ndarray:
        """Indices of all points in the 3x3 cell neighborhood of location x."""
        w = self.width
        cx = min(int(x[0] * w), w - 1)
        cy = min(int(x[1] * w), w - 1)
        ox, oy = self._offsets(cx, cy)
        cells = (ox[:, None] * w + oy[None, :]).ravel()
        lo = np.searchsorted(self._sorted_cells, cells, side="left")
        hi = np.searchsorted(self._sorted_cells, cells, side="right")
        return np.concatenate([self._order[a:b] for a, b in zip(lo, hi)])


def neighbors_within(idx: GridIndex, pts: TorusPoints, x, r: float) -> np.ndarray:
    """Sorted indices j with torus_distance(x, pts[j]) < r (strict).

    Includes x's own index when x coincides with a stored point.
    """
    if idx.points is not pts:
        raise ValueError("index was built over a different point set")
    idx._check_radius(r)
    cand = idx.candidates(x)
    if cand.size == 0:
        return cand
    d = torus_distance(pts.coords[cand], np.asarray(x, dtype=np.float64))
    return np.sort(cand[d < r])


def count_in_ball(idx: GridIndex, pts: TorusPoints, x, r: float) -> int:
    """|{j : torus_distance(x, pts[j]) < r}|."""
    return int(neighbors_within(idx, pts, x, r).size)


def neighbor_csr(
    idx: GridIndex, r: float, chunk_pairs: int = 4_000_000
) -> tuple[np.ndarray, np.ndarray]:
    """All-pairs fixed-radius adjacency in CSR form.

    Returns (indptr, indices): row u lists all points within strict distance r
    of point u, sorted ascending, *including u itself* (distance 0).  Built by
    scanning the 3x3 cell neighborhood of each point in vectorized chunks.
    """
    idx._check_radius(r)
    pts = idx.points
    coords = pts.coords
    n = pts.n
    w = idx.width
    cells = idx._cell_id
    cx = cells // w
    cy = cells % w

    if w >= 3:
        deltas = [(dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1)]
    else:
        seen = set()
        deltas = []
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                key = (dx % w, dy % w)
                if key not in seen:
                    seen.add(key)
                    deltas.append(key)

    sorted_cells = idx._sorted_cells
    order = idx._order

    indptr = np.zeros(n + 1, dtype=np.int64)
    parts: list[np.ndarray] = []
    counts_out = np.zeros(n, dtype=np.int64)

    # Choose a row chunk size from the average 3x3 occupancy.
    mean_cell = max(n / (w * w), 1.0)
    rows_per_chunk = max(1, int(chunk_pairs / (len(deltas) * mean_cell)))

    for start in range(0, n, rows_per_chunk):
        stop = min(n, start + rows_per_chunk)
        rows = np.arange(start, stop, dtype=np.int64)
        los = []
        his = []
        for dx, dy in deltas:
            tc = ((cx[start:stop] + dx) % w) * w + (cy[start:stop] + dy) % w
            los.append(np.searchsorted(sorted_cells, tc, side="left"))
            his.append(np.searchsorted(sorted_cells, tc, side="right"))
        lo = np.stack(los, axis=1)
        hi = np.stack(his, axis=1)
        lens = (hi - lo).ravel()
        total = int(lens.sum())
        if total == 0:
            continue
        # Flatten all candidate ranges for this chunk of rows.
        flat_lo = lo.ravel()
        offsets = np.repeat(np.cumsum(lens) - lens, lens)
        cand_pos = np.arange(total, dtype=np.int64) - offsets + np.repeat(flat_lo, lens)
        cand = order[cand_pos]
        row_of = np.repeat(np.repeat(rows, len(deltas)), lens)
        diff = np.abs(coords[cand] - coords[row_of])
        diff = np.minimum(diff, 1.0 - diff)
        keep = (diff[:, 0] * diff[:, 0] + diff[:, 1] * diff[:, 1]) < r * r
        cand = cand[keep]
        row_of = row_of[keep]
        sel = np.lexsort((cand, row_of))
        parts.append(cand[sel])
        counts_out[start:stop] = np.bincount(row_of - start, minlength=stop - start)

    np.cumsum(counts_out, out=indptr[1:])
    indices = np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
    return indptr, indices


def write_points_binary(pts: TorusPoints, path) -> None:
    """Binary dump: header (magic, version, n, seed) + n little-endian f64 pairs."""
    if pts.seed is None:
        raise ValueError("only seeded point sets can be dumped (seed is part of the header)")
    header = struct.pack("<8sIQQ", POINTS_MAGIC, POINTS_VERSION, pts.n, pts.seed & (2**64 - 1))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(pts.coords, dtype="<f8").tobytes())


def read_points_binary(path) -> TorusPoints:
    """Inverse of write_points_binary; validates magic and version."""
    with open(path, "rb") as fh:
        raw = fh.read()
    head_size = struct.calcsize("<8sIQQ")
    if len(raw) < head_size:
        raise ValueError("truncated points file")
    magic, version, n, seed = struct.unpack_from("<8sIQQ", raw)
    if magic != POINTS_MAGIC:
        raise ValueError(f"bad magic {magic!r}; not a points dump")
    if version != POINTS_VERSION:
        raise ValueError(f"unsupported points dump version {version}")
    body = np.frombuffer(raw, dtype="<f8", offset=head_size)
    if body.size != 2 * n:
        raise ValueError("points payload size does not match header count")
    coords = body.reshape(n, 2).astype(np.float64)
    return TorusPoints(coords, seed=int(seed))
