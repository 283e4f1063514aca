"""Linearization: points ordered along a Hilbert curve, chunked into runs.

Points are sorted by (curve position, lon, lat) and cut into runs of
``leaf_size``. The directory keeps each run's first and last curve
position, with spline models over both arrays to map curve ranges to runs.
"""

from __future__ import annotations

from bisect import bisect_right

import numpy as np

from ..geo import Rect
from ..hilbert import cover_ranges, points_to_cells, xy_to_hilbert, xy_to_hilbert_array
from ..search import SplineModel


class HilbertDirectory:
    def __init__(self, order: int, domain: Rect, first_d: list[int], last_d: list[int],
                 start_keys: list[tuple[int, float, float]], max_error: int,
                 max_ranges: int | None = None):
        self.order = order
        self.domain = domain
        self.first_d = first_d
        self.last_d = last_d
        self.start_keys = start_keys
        self.max_ranges = max_ranges
        self.first_model = SplineModel([float(d) for d in first_d], max_error)
        self.last_model = SplineModel([float(d) for d in last_d], max_error)
        self.bounds: list[Rect] = []
        n = 1 << order
        dom = domain
        self._sx = n / (dom.xh - dom.xl)
        self._sy = n / (dom.yh - dom.yl)
        self._n = n

    def attach(self, bounds) -> None:
        self.bounds = bounds

    def _cell(self, lat: float, lon: float) -> tuple[int, int]:
        dom = self.domain
        n = self._n
        cx = int((lat - dom.xl) / (dom.xh - dom.xl) * n)
        cy = int((lon - dom.yl) / (dom.yh - dom.yl) * n)
        return min(cx, n - 1), min(cy, n - 1)

    def _span(self, lo: int, hi: int) -> tuple[int, int]:
        """Half-open range of runs whose curve span meets [lo, hi]."""
        i0 = self.last_model.lower_bound(float(lo))
        i1 = self.first_model.upper_bound(float(hi))
        return i0, i1

    def curve_ranges(self, q: Rect) -> list[tuple[int, int]]:
        dom = self.domain
        if not self.bounds or not dom.intersects(q):
            return []
        cx0, cy0 = self._cell(max(q.xl, dom.xl), max(q.yl, dom.yl))
        cx1, cy1 = self._cell(min(q.xh, dom.xh), min(q.yh, dom.yh))

        def refine(lo: int, hi: int) -> bool:
            i0, i1 = self._span(lo, hi)
            return i1 - i0 > 1

        return cover_ranges(self.order, cx0, cy0, cx1, cy1, self.max_ranges, refine)

    def lookup(self, q: Rect) -> list[int]:
        out = []
        last = -1
        bounds = self.bounds
        xl, yl, xh, yh = q
        for lo, hi in self.curve_ranges(q):
            i0, i1 = self._span(lo, hi)
            for i in range(max(i0, last + 1), i1):
                b = bounds[i]
                if not (b.yh < yl or b.yl > yh or b.xh < xl or b.xl > xh):
                    out.append(i)
                last = i
        return out

    def locate(self, p) -> list[int]:
        """The single run whose (curve, lon, lat) key range holds ``p``."""
        if not self.bounds or not self.domain.contains(p):
            return []
        cx, cy = self._cell(p[0], p[1])
        key = (xy_to_hilbert(self.order, cx, cy), p[1], p[0])
        i = bisect_right(self.start_keys, key) - 1
        if i < 0 or not self.bounds[i].contains(p):
            return []
        return [i]

    def size_bytes(self) -> int:
        runs = len(self.first_d)
        return 8 * 2 * runs + 24 * runs + self.first_model.size_bytes() + self.last_model.size_bytes() + 48


def hilbert_domain(lats: np.ndarray, lons: np.ndarray) -> Rect:
    """Data MBR, widened where it is degenerate so every cell has extent."""
    xl, xh = float(lats.min()), float(lats.max())
    yl, yh = float(lons.min()), float(lons.max())
    if xh <= xl:
        xh = xl + 1.0
    if yh <= yl:
        yh = yl + 1.0
    return Rect(xl, yl, xh, yh)


def partition_hilbert(lats: np.ndarray, lons: np.ndarray, cfg):
    n = len(lats)
    order = cfg.hilbert_order
    if n == 0:
        return [], HilbertDirectory(order, Rect(0.0, 0.0, 1.0, 1.0), [], [], [], cfg.max_error)
    domain = hilbert_domain(lats, lons)
    cx, cy = points_to_cells(order, domain, lats, lons)
    d = xy_to_hilbert_array(order, cx, cy)
    perm = np.lexsort((lats, lons, d))
    groups = [perm[s:s + cfg.leaf_size] for s in range(0, n, cfg.leaf_size)]
    first_d = [int(d[g[0]]) for g in groups]
    last_d = [int(d[g[-1]]) for g in groups]
    start_keys = [(int(d[g[0]]), float(lons[g[0]]), float(lats[g[0]])) for g in groups]
    directory = HilbertDirectory(order, domain, first_d, last_d, start_keys, cfg.max_error)
    return groups, directory
