"""Polygon containment by ray casting, with polygon edges held in an interval tree.

The ray runs from the candidate point towards +longitude at constant
latitude, so only edges whose latitude span contains the point's latitude
can be crossed. Those edges come from stabbing an interval tree keyed on
each edge's latitude span.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

from .geo import GeoPoint, Rect, is_valid


class PolygonError(ValueError):
    pass


class IntervalTree:
    """Static interval tree laid out as an implicit balanced BST.

    Intervals are sorted by their low end; the node for an index range
    ``[a, b)`` sits at ``(a + b) // 2`` and ``_max_hi`` holds the largest
    high end in that node's subtree.
    """

    def __init__(self, intervals: Iterable[tuple[float, float, int]] = ()):
        items = sorted(intervals, key=lambda t: (t[0], t[1], t[2]))
        for lo, hi, _ in items:
            if lo > hi:
                raise ValueError(f"interval [{lo}, {hi}] has lo > hi")
        self._lo = [t[0] for t in items]
        self._hi = [t[1] for t in items]
        self._ids = [t[2] for t in items]
        self._max_hi = [0.0] * len(items)
        if items:
            self._fill_max(0, len(items))

    def _fill_max(self, a: int, b: int) -> float:
        m = (a + b) // 2
        best = self._hi[m]
        if a < m:
            best = max(best, self._fill_max(a, m))
        if m + 1 < b:
            best = max(best, self._fill_max(m + 1, b))
        self._max_hi[m] = best
        return best

    def __len__(self) -> int:
        return len(self._lo)

    def stab(self, v: float) -> list[int]:
        """Ids of all intervals with ``lo <= v <= hi``."""
        lo, hi, ids, max_hi = self._lo, self._hi, self._ids, self._max_hi
        out = []
        stack = [(0, len(lo))]
        while stack:
            a, b = stack.pop()
            if a >= b:
                continue
            m = (a + b) >> 1
            if max_hi[m] < v:
                continue
            stack.append((a, m))
            if lo[m] <= v:
                if hi[m] >= v:
                    out.append(ids[m])
                stack.append((m + 1, b))
        return out

    def intervals(self) -> list[tuple[float, float, int]]:
        return list(zip(self._lo, self._hi, self._ids))


def _edge_hit(lat: float, lon: float, e: tuple[float, float, float, float]) -> int:
    """Classify one edge against the +lon ray from (lat, lon).

    Returns 2 when the point lies on the edge, 1 for a counted crossing,
    0 otherwise. A vertex exactly at the ray's latitude counts only for the
    edge whose other endpoint lies strictly above.
    """
    alat, alon, blat, blon = e
    if alat == blat:
        if lat == alat and min(alon, blon) <= lon <= max(alon, blon):
            return 2
        return 0
    if lat < min(alat, blat) or lat > max(alat, blat):
        return 0
    x = alon + (lat - alat) * (blon - alon) / (blat - alat)
    if x == lon:
        return 2
    if (alat > lat) != (blat > lat) and lon < x:
        return 1
    return 0


class Polygon:
    """Simple polygon (no holes) as a closed ring of (lat, lon) vertices."""

    def __init__(self, vertices: Sequence[Sequence[float]], pid: str | int | None = None):
        ring = [GeoPoint(float(v[0]), float(v[1])) for v in vertices]
        if len(ring) > 1 and ring[0] == ring[-1]:
            ring = ring[:-1]
        if len(set(ring)) < 3:
            raise PolygonError(f"polygon {pid!r} needs at least 3 distinct vertices")
        for v in ring:
            if not is_valid(v.lat, v.lon):
                raise PolygonError(f"polygon {pid!r} has out-of-range vertex {tuple(v)}")
        self.id = pid
        self.vertices = ring + [ring[0]]
        self.edges = [
            (a.lat, a.lon, b.lat, b.lon) for a, b in zip(self.vertices, self.vertices[1:])
        ]
        self.edge_index = IntervalTree(
            (min(e[0], e[2]), max(e[0], e[2]), i) for i, e in enumerate(self.edges)
        )
        lats = [v.lat for v in ring]
        lons = [v.lon for v in ring]
        self.mbr = Rect.bounding(lats, lons)

    def __len__(self) -> int:
        return len(self.edges)

    def __repr__(self) -> str:
        return f"Polygon(id={self.id!r}, edges={len(self.edges)})"

    def contains(self, p) -> bool:
        return point_in_polygon(self, p)


def point_in_polygon(poly: Polygon, p) -> bool:
    """Odd crossing count of the +lon ray, using only stabbed edges.

    Points on the boundary are inside.
    """
    lat, lon = p[0], p[1]
    edges = poly.edges
    inside = False
    for i in poly.edge_index.stab(lat):
        hit = _edge_hit(lat, lon, edges[i])
        if hit == 2:
            return True
        if hit:
            inside = not inside
    return inside


def point_in_polygon_all_edges(poly: Polygon, p) -> bool:
    """Reference ray cast over every edge; no interval tree."""
    lat, lon = p[0], p[1]
    inside = False
    for e in poly.edges:
        hit = _edge_hit(lat, lon, e)
        if hit == 2:
            return True
        if hit:
            inside = not inside
    return inside


def parse_polygon_line(line: str, lineno: int = 0) -> Polygon:
    """Parse ``<id>;<lat> <lon>,<lat> <lon>,...``."""
    try:
        pid, coords = line.split(";", 1)
        verts = []
        for pair in coords.split(","):
            lat_s, lon_s = pair.split()
            verts.append((float(lat_s), float(lon_s)))
    except ValueError as exc:
        raise PolygonError(f"line {lineno}: malformed polygon: {line.strip()!r}") from exc
    try:
        return Polygon(verts, pid=pid.strip())
    except PolygonError as exc:
        raise PolygonError(f"line {lineno}: {exc}") from exc


def read_polygons(path: str | Path, strict: bool = True) -> list[Polygon | PolygonError]:
    """Read a polygon file.

    With ``strict=False`` malformed lines come back as ``PolygonError``
    entries in place, so callers can keep processing the rest.
    """
    out: list[Polygon | PolygonError] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(parse_polygon_line(line, lineno))
            except PolygonError as exc:
                if strict:
                    raise
                out.append(exc)
    return out


def format_polygon(poly: Polygon) -> str:
    ring = poly.vertices[:-1]
    coords = ",".join(f"{v.lat!r} {v.lon!r}" for v in ring)
    return f"{poly.id};{coords}"


def write_polygons(path: str | Path, polys: Iterable[Polygon]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for poly in polys:
            fh.write(format_polygon(poly) + "\n")
