"""Coarse-graining of the torus into cells and boxes.

The torus is split into m^2 congruent cells with m = ceil(2/(k*r)) and an
adjusted radius r' = 2/(k*m) <= r; each cell splits into (k*d)^2 boxes of
side r'/(2d), with k and d odd so every cell has a well-defined central box.
A cell is delta-good when every one of its box counts lies within
(1 +- delta) * n * r^2 / (4 d^2).

The discrete disk is the set of box offsets guaranteed to lie inside every
radius-r ball anchored anywhere in a reference box; it is the increment
alphabet of the comparison random walk and is translation invariant, so one
computation serves all boxes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import TorusPoints

__all__ = [
    "LatticeFrame",
    "GoodnessReport",
    "DiscreteDisk",
    "CellBoxes",
    "cell_params",
    "locate",
    "delta_goodness",
    "discrete_disk",
    "disk_for",
    "seed_and_central_boxes",
    "goodness_rows",
]


def cell_params(r: float, k: int) -> tuple[int, float]:
    """(m, r') with m = ceil(2/(k*r)) and r' = 2/(k*m); rejects even k."""
    if not (0.0 < r < 1.0):
        raise ValueError("radius must lie in (0, 1)")
    if k < 1 or k % 2 == 0:
        raise ValueError("k must be an odd integer >= 1")
    m = int(math.ceil(2.0 / (k * r) - 1e-9))
    m = max(m, 1)
    return m, 2.0 / (k * m)


class LatticeFrame:
    """Cell/box partition of the torus bound to one point set.

    Boxes are indexed globally on a (m*k*d)^2 grid; cell (i, j) owns the
    k*d x k*d block starting at (i*k*d, j*k*d).  Buckets list point indices
    per box, ascending.
    """

    def __init__(self, points: TorusPoints, r: float, k: int, d: int):
        if d < 1 or d % 2 == 0:
            raise ValueError("d must be an odd integer >= 1")
        self.points = points
        self.r = float(r)
        self.k = int(k)
        self.d = int(d)
        self.m, self.r_prime = cell_params(r, k)
        self.kd = self.k * self.d
        self.boxes_per_axis = self.m * self.kd
        self.box_side = 1.0 / self.boxes_per_axis
        self.degenerate_kr = self.k * self.r >= 1.0
        b = self.boxes_per_axis
        coords = points.coords
        bx = np.minimum((coords[:, 0] * b).astype(np.int64), b - 1)
        by = np.minimum((coords[:, 1] * b).astype(np.int64), b - 1)
        self.point_box = np.column_stack([bx, by])
        self.point_box_id = bx * b + by
        self.point_cell = np.column_stack([bx // self.kd, by // self.kd])
        self.point_cell_id = self.point_cell[:, 0] * self.m + self.point_cell[:, 1]
        order = np.argsort(self.point_box_id, kind="stable")
        self._bucket_order = order
        self._bucket_sorted = self.point_box_id[order]
        counts = np.bincount(self.point_box_id, minlength=b * b)
        self.box_counts = counts.reshape(b, b)

    @property
    def n(self) -> int:
        return self.points.n

    def box_points(self, bx: int, by: int) -> np.ndarray:
        """Ascending point indices inside global box (bx, by)."""
        b = self.boxes_per_axis
        box_id = bx * b + by
        lo = np.searchsorted(self._bucket_sorted, box_id, side="left")
        hi = np.searchsorted(self._bucket_sorted, box_id, side="right")
        return np.sort(self._bucket_order[lo:hi])

    def cell_points(self, cell: tuple[int, int]) -> np.ndarray:
        """Ascending point indices inside a cell."""
        cid = cell[0] * self.m + cell[1]
        return np.sort(np.flatnonzero(self.point_cell_id == cid))

    def locate(self, x) -> tuple[tuple[int, int], tuple[int, int]]:
        """(cell indices, box indices within the cell) for a location x."""
        m, kd = self.m, self.kd
        b = self.boxes_per_axis
        cx = min(int(x[0] * m), m - 1)
        cy = min(int(x[1] * m), m - 1)
        bx = min(int(x[0] * b), b - 1)
        by = min(int(x[1] * b), b - 1)
        return (cx, cy), (bx % kd, by % kd)

    def central_box(self, cell: tuple[int, int]) -> tuple[int, int]:
        half = (self.kd - 1) // 2
        return (cell[0] * self.kd + half, cell[1] * self.kd + half)

    def __repr__(self) -> str:
        return (
            f"LatticeFrame(m={self.m}, k={self.k}, d={self.d}, "
            f"r={self.r}, r_prime={self.r_prime})"
        )


def locate(frame: LatticeFrame, x) -> tuple[tuple[int, int], tuple[int, int]]:
    """Module-level alias for LatticeFrame.locate."""
    return frame.locate(x)


@dataclass(frozen=True)
class GoodnessReport:
    """Box-count uniformity verdicts at one delta, plus the analytic lower bound."""

    delta: float
    low: float
    high: float
    box_counts: np.ndarray
    cell_good: np.ndarray
    all_good: bool
    bound: float
    bound_vacuous: bool
    degenerate_kr: bool


def delta_goodness(frame: LatticeFrame, pts: TorusPoints, delta: float) -> GoodnessReport:
    """Check every cell's box counts against (1 +- delta) * n r^2 / (4 d^2).

    Also evaluates the analytic lower bound 1 - 2(mkd)^2 n^(-gamma^2 delta^2
    / (24 d^2)) on P(all cells good), with gamma = r * sqrt(n / log n).
    """
    if not (0.0 < delta < 1.0):
        raise ValueError("delta must lie in (0, 1)")
    if pts is not frame.points:
        raise ValueError("frame was built over a different point set")
    n = pts.n
    d = frame.d
    target = n * frame.r**2 / (4.0 * d * d)
    low = (1.0 - delta) * target
    high = (1.0 + delta) * target
    b = frame.boxes_per_axis
    kd = frame.kd
    per_cell = frame.box_counts.reshape(frame.m, kd, frame.m, kd)
    cmin = per_cell.min(axis=(1, 3))
    cmax = per_cell.max(axis=(1, 3))
    cell_good = (cmin >= low) & (cmax <= high)
    gamma = frame.r * math.sqrt(n / math.log(n)) if n > 1 else 0.0
    exponent = gamma * gamma * delta * delta / (24.0 * d * d)
    raw = 1.0 - 2.0 * (b * b) * n ** (-exponent) if n > 1 else 0.0
    bound = min(max(raw, 0.0), 1.0)
    return GoodnessReport(
        delta=delta,
        low=low,
        high=high,
        box_counts=frame.box_counts,
        cell_good=cell_good,
        all_good=bool(cell_good.all()),
        bound=bound,
        bound_vacuous=raw <= 0.0,
        degenerate_kr=frame.degenerate_kr,
    )


def goodness_rows(frame: LatticeFrame, report: GoodnessReport) -> list[dict[str, object]]:
    """Per-cell CSV rows: cell_i, cell_j, min_box_count, max_box_count, good."""
    kd = frame.kd
    per_cell = report.box_counts.reshape(frame.m, kd, frame.m, kd)
    cmin = per_cell.min(axis=(1, 3))
    cmax = per_cell.max(axis=(1, 3))
    rows = []
    for i in range(frame.m):
        for j in range(frame.m):
            rows.append(
                {
                    "cell_i": i,
                    "cell_j": j,
                    "min_box_count": int(cmin[i, j]),
                    "max_box_count": int(cmax[i, j]),
                    "good": int(report.cell_good[i, j]),
                }
            )
    return rows


@dataclass(frozen=True)
class DiscreteDisk:
    """Box offsets fully inside every radius-r ball anchored in a reference box."""

    offsets: np.ndarray  # (a, 2) int64, lexicographically sorted
    a: int
    box_side: float
    degenerate: bool

    def contains(self, delta: tuple[int, int]) -> bool:
        return bool(np.any((self.offsets[:, 0] == delta[0]) & (self.offsets[:, 1] == delta[1])))


def _disk_offsets(r: float, side: float) -> np.ndarray:
    """Offsets passing the four-corner test ((|t1|+1)^2 + (|t2|+1)^2)*side^2 <= r^2."""
    limit = (r / side) ** 2 * (1.0 + 1e-12)
    reach = int(math.floor(r / side)) + 1
    vals = np.arange(-reach, reach + 1, dtype=np.int64)
    t1, t2 = np.meshgrid(vals, vals, indexing="ij")
    ok = (np.abs(t1) + 1) ** 2 + (np.abs(t2) + 1) ** 2 <= limit
    offsets = np.column_stack([t1[ok], t2[ok]])
    return offsets[np.lexsort((offsets[:, 1], offsets[:, 0]))]


def discrete_disk(frame: LatticeFrame) -> DiscreteDisk:
    """Offsets D with sup_{y in anchor box, z in box+D} d(y, z) <= r.

    Along one axis an offset of t boxes separates the far corners by
    (|t|+1) box sides, so the worst-case test is
    ((|t1|+1)^2 + (|t2|+1)^2) * side^2 <= r^2.  Offsets are the same for
    every anchor box (translation invariance on the torus).
    """
    if not (0.0 < frame.r < 0.5):
        raise ValueError("discrete disk needs r < 1/2")
    offsets = _disk_offsets(frame.r, frame.box_side)
    return DiscreteDisk(
        offsets=offsets,
        a=int(offsets.shape[0]),
        box_side=frame.box_side,
        degenerate=offsets.shape[0] <= 1,
    )


def disk_for(r: float, k: int, d: int) -> DiscreteDisk:
    """Discrete disk for the (r, k, d) geometry, without binding a point set."""
    if d < 1 or d % 2 == 0:
        raise ValueError("d must be an odd integer >= 1")
    if not (0.0 < r < 0.5):
        raise ValueError("discrete disk needs r < 1/2")
    m, r_prime = cell_params(r, k)
    side = r_prime / (2.0 * d)
    offsets = _disk_offsets(r, side)
    return DiscreteDisk(
        offsets=offsets,
        a=int(offsets.shape[0]),
        box_side=side,
        degenerate=offsets.shape[0] <= 1,
    )


@dataclass(frozen=True)
class CellBoxes:
    """Central box, seed boxes, and the face-box resolver for one cell."""

    cell: tuple[int, int]
    m: int
    kd: int
    central: tuple[int, int]
    seeds: dict[str, tuple[int, int]]

    def toward(self, other: tuple[int, int]) -> tuple[int, int]:
        """Seed box of this cell on the face shared with adjacent cell `other`."""
        m = self.m
        diff = ((other[0] - self.cell[0]) % m, (other[1] - self.cell[1]) % m)
        if diff == (1, 0):
            return self.seeds["+x"]
        if diff == (m - 1, 0):
            return self.seeds["-x"]
        if diff == (0, 1):
            return self.seeds["+y"]
        if diff == (0, m - 1):
            return self.seeds["-y"]
        raise ValueError(f"cells {self.cell} and {other} are not adjacent on the {m}x{m} torus")


def seed_and_central_boxes(frame: LatticeFrame, cell: tuple[int, int]) -> CellBoxes:
    """Global box ids of C(Q) and the four seed boxes of a cell.

    Seed boxes sit at centered offsets (+-floor(kd/2), 0) and (0, +-floor(kd/2)),
    i.e. at the midpoints of the four faces; the resolver maps an adjacent
    cell to the seed box on the shared face, antisymmetrically (the two
    facing seed boxes mirror each other).
    """
    kd = frame.kd
    if kd % 2 == 0:
        raise ValueError("k*d must be odd")
    cx, cy = int(cell[0]), int(cell[1])
    if not (0 <= cx < frame.m and 0 <= cy < frame.m):
        raise ValueError(f"cell {cell} outside the {frame.m}x{frame.m} grid")
    half = (kd - 1) // 2
    base = (cx * kd + half, cy * kd + half)

    def at(off_x: int, off_y: int) -> tuple[int, int]:
        return (base[0] + off_x, base[1] + off_y)

    return CellBoxes(
        cell=(cx, cy),
        m=frame.m,
        kd=kd,
        central=at(0, 0),
        seeds={
            "+x": at(half, 0),
            "-x": at(-half, 0),
            "+y": at(0, half),
            "-y": at(0, -half),
        },
    )
