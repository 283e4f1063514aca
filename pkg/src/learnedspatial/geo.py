"""Geometric primitives: points, rectangles, great-circle distance."""

from __future__ import annotations

import math
from typing import NamedTuple

EARTH_RADIUS_M = 6_371_000.0
# degrees added around a circle's box to absorb haversine rounding
_BOX_PAD_REL = 1e-9
_BOX_PAD_ABS = 1e-11


class GeoPoint(NamedTuple):
    """A latitude/longitude pair in degrees.

    Latitude is the partitioning (x) dimension and longitude the sort (y)
    dimension throughout the library. Equality is exact on both fields.
    """

    lat: float
    lon: float


def is_valid(lat: float, lon: float) -> bool:
    return -90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0


class Rect(NamedTuple):
    """Closed axis-aligned box; ``x`` is latitude, ``y`` is longitude."""

    xl: float
    yl: float
    xh: float
    yh: float

    def contains(self, p) -> bool:
        return self.xl <= p[0] <= self.xh and self.yl <= p[1] <= self.yh

    def intersects(self, other: "Rect") -> bool:
        return not (
            other.xh < self.xl
            or other.xl > self.xh
            or other.yh < self.yl
            or other.yl > self.yh
        )

    def contains_rect(self, other: "Rect") -> bool:
        return (
            self.xl <= other.xl
            and other.xh <= self.xh
            and self.yl <= other.yl
            and other.yh <= self.yh
        )

    def is_valid(self) -> bool:
        return self.xl <= self.xh and self.yl <= self.yh

    @classmethod
    def of_point(cls, p) -> "Rect":
        return cls(p[0], p[1], p[0], p[1])

    @classmethod
    def bounding(cls, lats, lons) -> "Rect":
        """Tight MBR of coordinate sequences (numpy arrays or lists)."""
        return cls(float(min(lats)), float(min(lons)), float(max(lats)), float(max(lons)))


def haversine(a, b) -> float:
    """Great-circle distance in meters between two (lat, lon) points."""
    lat1 = math.radians(a[0])
    lat2 = math.radians(b[0])
    dlat = lat2 - lat1
    dlon = math.radians(b[1] - a[1])
    h = math.sin(dlat * 0.5) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon * 0.5) ** 2
    if h > 1.0:
        h = 1.0
    return 2.0 * EARTH_RADIUS_M * math.asin(math.sqrt(h))


def mbr_of_circle(center, d: float) -> Rect:
    """Bounding box of all points within ``d`` meters of ``center``.

    The box spans the full longitude range when a pole or the antimeridian
    falls inside the circle (one box, never split).
    """
    if d < 0:
        raise ValueError(f"negative distance {d}")
    lat, lon = center[0], center[1]
    dlat = math.degrees(d / EARTH_RADIUS_M)
    if d > 0:
        dlat += dlat * _BOX_PAD_REL + _BOX_PAD_ABS
    xl = lat - dlat
    xh = lat + dlat
    if xl <= -90.0 or xh >= 90.0:
        return Rect(max(xl, -90.0), -180.0, min(xh, 90.0), 180.0)
    far = math.radians(max(abs(xl), abs(xh)))
    dlon = math.degrees(d / (EARTH_RADIUS_M * math.cos(far)))
    if d > 0:
        dlon += dlon * _BOX_PAD_REL + _BOX_PAD_ABS
    yl = lon - dlon
    yh = lon + dlon
    if dlon >= 180.0 or yl < -180.0 or yh > 180.0:
        return Rect(xl, -180.0, xh, 180.0)
    return Rect(xl, yl, xh, yh)
