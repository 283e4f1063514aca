"""One-dimensional grids over latitude; longitude is the sort dimension.

Stripe membership is half-open ``[lo, hi)`` with the last stripe closed.
"""

from __future__ import annotations

import math
from bisect import bisect_right

import numpy as np

from ..geo import Rect


class FixedGridDirectory:
    """Equidistant cut-points; a query's stripes come from offset arithmetic."""

    def __init__(self, lat_min: float, lat_max: float, cells: int, cell_to_pid: list[int]):
        self.lat_min = lat_min
        self.lat_max = lat_max
        self.cells = cells
        self.width = (lat_max - lat_min) / cells
        self.cell_to_pid = cell_to_pid
        self.bounds: list[Rect] = []

    def attach(self, bounds: list[Rect]) -> None:
        self.bounds = bounds

    @property
    def cut_points(self) -> list[float]:
        return [self.lat_min + i * self.width for i in range(self.cells + 1)]

    def cell_of(self, lat: float) -> int:
        if self.width == 0.0:
            return 0
        c = int((lat - self.lat_min) / self.width)
        return c if c < self.cells else self.cells - 1

    def lookup(self, q: Rect) -> list[int]:
        if not self.bounds or q.xh < self.lat_min or q.xl > self.lat_max:
            return []
        c0 = self.cell_of(q.xl if q.xl > self.lat_min else self.lat_min)
        c1 = self.cell_of(q.xh if q.xh < self.lat_max else self.lat_max)
        out = []
        bounds = self.bounds
        cell_to_pid = self.cell_to_pid
        yl, yh, xl, xh = q.yl, q.yh, q.xl, q.xh
        for c in range(c0, c1 + 1):
            pid = cell_to_pid[c]
            if pid < 0:
                continue
            b = bounds[pid]
            if b.yh < yl or b.yl > yh or b.xh < xl or b.xl > xh:
                continue
            out.append(pid)
        return out

    def locate(self, p) -> list[int]:
        return self.lookup(Rect(p[0], p[1], p[0], p[1]))

    def size_bytes(self) -> int:
        return 8 * (self.cells + 1) + 4 * self.cells + 32


def _groups_from_cells(cells_of_points: np.ndarray, ncells: int):
    order = np.argsort(cells_of_points, kind="stable")
    counts = np.bincount(cells_of_points, minlength=ncells)
    starts = np.concatenate(([0], np.cumsum(counts)))
    groups = []
    cell_to_pid = [-1] * ncells
    for c in range(ncells):
        if counts[c]:
            cell_to_pid[c] = len(groups)
            groups.append(order[starts[c]:starts[c + 1]])
    return groups, cell_to_pid


def partition_fixed(lats: np.ndarray, lons: np.ndarray, cfg):
    n = len(lats)
    if n == 0:
        return [], FixedGridDirectory(0.0, 0.0, 1, [-1])
    cells = math.ceil(n / cfg.leaf_size)
    lat_min = float(lats.min())
    lat_max = float(lats.max())
    directory = FixedGridDirectory(lat_min, lat_max, cells, [])
    if directory.width == 0.0:
        cell = np.zeros(n, dtype=np.int64)
    else:
        cell = np.minimum(((lats - lat_min) / directory.width).astype(np.int64), cells - 1)
    groups, directory.cell_to_pid = _groups_from_cells(cell, cells)
    return groups, directory


class AdaptiveGridDirectory:
    """Equal-frequency cut-points (linear scales), searched by bisection."""

    def __init__(self, scales: list[float], stripe_to_pid: list[int]):
        self.scales = scales
        self.stripe_to_pid = stripe_to_pid
        self.bounds: list[Rect] = []

    def attach(self, bounds: list[Rect]) -> None:
        self.bounds = bounds

    def lookup(self, q: Rect) -> list[int]:
        if not self.bounds:
            return []
        s0 = bisect_right(self.scales, q.xl)
        s1 = bisect_right(self.scales, q.xh)
        out = []
        bounds = self.bounds
        yl, yh, xl, xh = q.yl, q.yh, q.xl, q.xh
        for s in range(s0, s1 + 1):
            pid = self.stripe_to_pid[s]
            if pid < 0:
                continue
            b = bounds[pid]
            if b.yh < yl or b.yl > yh or b.xh < xl or b.xl > xh:
                continue
            out.append(pid)
        return out

    def locate(self, p) -> list[int]:
        return self.lookup(Rect(p[0], p[1], p[0], p[1]))

    def size_bytes(self) -> int:
        return 8 * len(self.scales) + 4 * len(self.stripe_to_pid) + 32


def partition_adaptive(lats: np.ndarray, lons: np.ndarray, cfg):
    n = len(lats)
    if n == 0:
        return [], AdaptiveGridDirectory([], [-1])
    stripes = math.ceil(n / cfg.leaf_size)
    sorted_lats = np.sort(lats)
    scales = [float(sorted_lats[round(k * n / stripes)]) for k in range(1, stripes)]
    stripe = np.searchsorted(np.asarray(scales), lats, side="right")
    groups, stripe_to_pid = _groups_from_cells(stripe, stripes)
    return groups, AdaptiveGridDirectory(scales, stripe_to_pid)
