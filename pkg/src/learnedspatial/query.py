"""Range, point, distance and polygon-join queries over a PartitionedIndex.

Range queries run in three phases: index lookup finds the intersected
partitions, boundary refinement locates the query's longitude bounds inside
each partition, and the scan copies or filters the points between them.
Distance and join queries use a range query over an MBR as the filter and
then refine each candidate with the exact predicate.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from time import perf_counter_ns as _clock
from typing import Iterable, Sequence

from .geo import GeoPoint, Rect, haversine, mbr_of_circle
from .index import PartitionedIndex
from .polygon import Polygon, PolygonError
from .search import search_point


@dataclass(slots=True)
class QueryProfile:
    """Per-phase nanoseconds and counters for one query."""

    lookup_ns: int = 0
    bounds_ns: int = 0
    scan_ns: int = 0
    refine_ns: int = 0
    partitions: int = 0
    scanned: int = 0
    candidates: int = 0
    results: int = 0

    @property
    def total_ns(self) -> int:
        return self.lookup_ns + self.bounds_ns + self.scan_ns + self.refine_ns

    def add(self, other: "QueryProfile") -> None:
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))


def range_query(idx: PartitionedIndex, q: Rect, profile: QueryProfile | None = None) -> list[GeoPoint]:
    """All indexed points ``p`` with ``q.xl <= p.lat <= q.xh`` and ``q.yl <= p.lon <= q.yh``."""
    t0 = _clock()
    ips = idx.directory.lookup(q)
    t1 = _clock()
    parts = idx.partitions
    xl, yl, xh, yh = q
    plan = []
    for pid in ips:
        part = parts[pid]
        b = part.bounds
        if xl <= b.xl and b.xh <= xh:
            if yl <= b.yl and b.yh <= yh:
                plan.append((part.points, 0, len(part.points), False))
            else:
                m = part.model
                plan.append((part.points, m.lower_bound(yl), m.upper_bound(yh), False))
        else:
            m = part.model
            plan.append((part.points, m.lower_bound(yl), m.upper_bound(yh), True))
    t2 = _clock()
    out: list[GeoPoint] = []
    scanned = 0
    for points, lb, ub, scan in plan:
        if lb >= ub:
            continue
        scanned += ub - lb
        if scan:
            out.extend([p for p in points[lb:ub] if xl <= p[0] <= xh])
        else:
            out.extend(points[lb:ub])
    t3 = _clock()
    if profile is not None:
        profile.lookup_ns += t1 - t0
        profile.bounds_ns += t2 - t1
        profile.scan_ns += t3 - t2
        profile.partitions += len(ips)
        profile.scanned += scanned
        profile.results += len(out)
    return out


def point_query(idx: PartitionedIndex, qp, profile: QueryProfile | None = None) -> bool:
    """Whether a point equal to ``qp`` on both coordinates is indexed."""
    t0 = _clock()
    ips = idx.directory.locate(qp)
    t1 = _clock()
    found = False
    parts = idx.partitions
    for pid in ips:
        part = parts[pid]
        est = part.model.estimate_from(qp[1])
        if search_point(part.points, part.keys, est, qp):
            found = True
            break
    t2 = _clock()
    if profile is not None:
        profile.lookup_ns += t1 - t0
        profile.bounds_ns += t2 - t1
        profile.partitions += len(ips)
        profile.results += int(found)
    return found


def distance_query(idx: PartitionedIndex, center, d: float,
                   profile: QueryProfile | None = None) -> list[GeoPoint]:
    """Points within ``d`` meters (great-circle) of ``center``, boundary included."""
    t0 = _clock()
    mbr = mbr_of_circle(center, d)
    t1 = _clock()
    prof = profile if profile is not None else QueryProfile()
    candidates = range_query(idx, mbr, prof)
    t2 = _clock()
    out = [p for p in candidates if haversine(center, p) <= d]
    t3 = _clock()
    prof.lookup_ns += t1 - t0
    prof.refine_ns += t3 - t2
    prof.candidates += len(candidates)
    prof.results += len(out) - len(candidates)
    return out


def polygon_query(idx: PartitionedIndex, poly: Polygon,
                  profile: QueryProfile | None = None) -> list[GeoPoint]:
    """Points contained in ``poly`` (boundary included): MBR filter, ray-cast refine."""
    prof = profile if profile is not None else QueryProfile()
    candidates = range_query(idx, poly.mbr, prof)
    t0 = _clock()
    contains = poly.contains
    out = [p for p in candidates if contains(p)]
    t1 = _clock()
    prof.refine_ns += t1 - t0
    prof.candidates += len(candidates)
    prof.results += len(out) - len(candidates)
    return out


def join_query(idx: PartitionedIndex, polygons: Iterable[Polygon | Sequence | PolygonError],
               profiles: list[QueryProfile] | None = None) -> list[list[GeoPoint] | PolygonError]:
    """Contained points per polygon, in input order.

    Entries that are not valid polygons (raw vertex lists that fail to
    build, or ``PolygonError`` placeholders from a lenient file read) come
    back as ``PolygonError`` in their slot; the rest are still processed.
    """
    out: list[list[GeoPoint] | PolygonError] = []
    for i, item in enumerate(polygons):
        if isinstance(item, PolygonError):
            out.append(item)
            continue
        if not isinstance(item, Polygon):
            try:
                item = Polygon(item, pid=i)
            except PolygonError as exc:
                out.append(exc)
                continue
        prof = QueryProfile()
        out.append(polygon_query(idx, item, prof))
        if profiles is not None:
            profiles.append(prof)
    return out
