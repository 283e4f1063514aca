"""Brute-force answers for every query type, used to verify the index."""

from __future__ import annotations

import numpy as np

from .geo import EARTH_RADIUS_M, GeoPoint, Rect, haversine
from .index import as_coords
from .polygon import Polygon, point_in_polygon_all_edges


class BruteForce:
    """Answers queries by scanning every point of the dataset."""

    def __init__(self, data):
        self.lats, self.lons = as_coords(data)
        self._members = set(zip(self.lats.tolist(), self.lons.tolist()))

    def __len__(self) -> int:
        return len(self.lats)

    def _points(self, mask: np.ndarray) -> list[GeoPoint]:
        return list(map(GeoPoint, self.lats[mask].tolist(), self.lons[mask].tolist()))

    def range_mask(self, q: Rect) -> np.ndarray:
        la, lo = self.lats, self.lons
        return (la >= q.xl) & (la <= q.xh) & (lo >= q.yl) & (lo <= q.yh)

    def range_count(self, q: Rect) -> int:
        return int(np.count_nonzero(self.range_mask(q)))

    def range(self, q: Rect) -> list[GeoPoint]:
        return self._points(self.range_mask(q))

    def point(self, qp) -> bool:
        return (float(qp[0]), float(qp[1])) in self._members

    def distances(self, center) -> np.ndarray:
        """Vectorised haversine from ``center`` to every point (meters)."""
        lat1 = np.radians(center[0])
        lat2 = np.radians(self.lats)
        dlat = lat2 - lat1
        dlon = np.radians(self.lons - center[1])
        h = np.sin(dlat / 2) ** 2 + np.cos(lat1) * np.cos(lat2) * np.sin(dlon / 2) ** 2
        return 2 * EARTH_RADIUS_M * np.arcsin(np.sqrt(np.minimum(h, 1.0)))

    def distance(self, center, d: float) -> list[GeoPoint]:
        # vectorised prefilter with slack; the scalar formula decides
        near = self.distances(center) <= d * (1 + 1e-9) + 1e-3
        cands = self._points(near)
        return [p for p in cands if haversine(center, p) <= d]

    def polygon(self, poly: Polygon) -> list[GeoPoint]:
        cands = self._points(self.range_mask(poly.mbr))
        return [p for p in cands if point_in_polygon_all_edges(poly, p)]


def as_multiset(points) -> list[tuple[float, float]]:
    """Order-independent comparable form of a result set."""
    return sorted((float(p[0]), float(p[1])) for p in points)
