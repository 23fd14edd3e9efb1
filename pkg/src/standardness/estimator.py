"""Plug-in and bias-corrected estimators of the standardness constant.

Both estimators are built on exact closed-ball neighbour counts: for each
sample point ``X_j`` the number of sample points (``X_j`` included) at
Euclidean distance ``<= r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _grid
from .geometry import unit_ball_volume


@dataclass(frozen=True)
class SampleCloud:
    """``n`` points in ``R^d`` stored as a read-only ``(n, d)`` float array."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64, copy=True)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError(f"a cloud needs shape (n, d) with n, d >= 1, got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("cloud coordinates must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.n


def as_cloud(points) -> SampleCloud:
    return points if isinstance(points, SampleCloud) else SampleCloud(points)


@dataclass(frozen=True)
class GridIndex:
    """Uniform grid of cell side ``cell_size`` anchored at ``origin``.

    ``cells`` holds the integer coordinates of the non-empty cells in
    lexicographic order; the points of cell ``c`` are
    ``order[starts[c]:starts[c + 1]]``.
    """

    cell_size: float
    origin: np.ndarray
    cells: np.ndarray
    starts: np.ndarray
    order: np.ndarray

    @classmethod
    def build(cls, points: np.ndarray, cell_size: float) -> "GridIndex":
        if not cell_size > 0:
            raise ValueError("cell_size must be positive")
        origin = points.min(axis=0)
        coords = np.floor((points - origin) / cell_size).astype(np.int64)
        # lexsort keys are given last-axis-first
        order = np.lexsort(coords.T[::-1]).astype(np.int64)
        sorted_coords = coords[order]
        new_cell = np.ones(len(order), dtype=bool)
        new_cell[1:] = np.any(sorted_coords[1:] != sorted_coords[:-1], axis=1)
        first = np.flatnonzero(new_cell)
        cells = np.ascontiguousarray(sorted_coords[first])
        starts = np.append(first, len(order)).astype(np.int64)
        return cls(float(cell_size), origin, cells, starts, order)

    def cell_of(self, p) -> np.ndarray:
        return np.floor((np.asarray(p, dtype=float) - self.origin) / self.cell_size).astype(np.int64)

    @property
    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        lo = self.origin + self.cells.min(axis=0) * self.cell_size
        hi = self.origin + (self.cells.max(axis=0) + 1) * self.cell_size
        return lo, hi


@dataclass(frozen=True)
class EstimateResult:
    n: int
    d: int
    r: float
    upsilon_hat: float
    upsilon_tilde: float
    a_count: int
    min_count: int

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "r": self.r,
            "upsilon_hat": self.upsilon_hat,
            "upsilon_tilde": self.upsilon_tilde,
            "a_count": self.a_count,
        }


def default_radius(n: int, d: int) -> float:
    """Radius ``(log(n) / n) ** (1 / (2 d))`` used throughout the simulations."""
    if n < 2:
        raise ValueError("default radius needs n >= 2")
    if d < 1:
        raise ValueError("dimension must be >= 1")
    return (math.log(n) / n) ** (1.0 / (2 * d))


def neighbor_counts(cloud, r: float, naive: bool = False, include_self: bool = True) -> np.ndarray:
    """Closed-ball neighbour counts, each point counting itself.

    Parameters
    ----------
    cloud : SampleCloud or array_like, shape (n, d)
    r : float
        Query radius; also the grid cell size.
    naive : bool
        Use the O(n^2) double loop instead of the grid.
    include_self : bool
        With ``False`` each count drops the point itself (duplicates of it
        still count).

    Returns
    -------
    ndarray of int64, shape (n,)
    """
    if not r > 0:
        raise ValueError("radius must be positive")
    pts = as_cloud(cloud).points
    r2 = float(r) * float(r)
    if naive:
        counts = _grid.naive_counts(pts, r2)
    else:
        grid = GridIndex.build(pts, float(r))
        counts = _grid.grid_counts(pts, grid.order, grid.cells, grid.starts, r2)
    if not include_self:
        counts -= 1
    return counts


def _normalised(counts: np.ndarray, n: int, d: int, r: float) -> np.ndarray:
    return counts / (n * unit_ball_volume(d) * r**d)


def plugin_estimate(cloud, r: float, naive: bool = False, include_self: bool = True) -> float:
    """Minimum over sample points of ``count / (n * omega_d * r**d)``."""
    cloud = as_cloud(cloud)
    counts = neighbor_counts(cloud, r, naive=naive, include_self=include_self)
    return float(_normalised(counts, cloud.n, cloud.d, r).min())


def bias_corrected_estimate(
    cloud,
    r: float | None = None,
    naive: bool = False,
    slack: float | None = None,
    include_self: bool = True,
) -> EstimateResult:
    """Plug-in estimate together with its bias correction.

    The correction multiplies the plug-in value by ``1 + #A / n`` where
    ``A`` collects the points whose normalised count is within a factor
    ``1 + slack * r**(d/2)`` of the minimum. ``slack`` defaults to
    ``omega_d``.

    ``include_self=False`` drops each point from its own count. Counts can
    then be zero, so ``upsilon_hat`` may vanish and the strict ordering
    ``upsilon_hat < upsilon_tilde`` is no longer guaranteed.
    """
    cloud = as_cloud(cloud)
    n, d = cloud.n, cloud.d
    if r is None:
        r = default_radius(n, d)
    r = float(r)
    counts = neighbor_counts(cloud, r, naive=naive, include_self=include_self)
    frac = _normalised(counts, n, d, r)
    j = int(np.argmin(frac))
    hat = float(frac[j])
    if slack is None:
        slack = unit_ball_volume(d)
    a_count = int(np.count_nonzero(frac <= hat * (1.0 + slack * r ** (d / 2))))
    return EstimateResult(
        n=n,
        d=d,
        r=r,
        upsilon_hat=hat,
        upsilon_tilde=hat * (1.0 + a_count / n),
        a_count=a_count,
        min_count=int(counts[j]),
    )
