"""Dataset ingestion, synthetic data, and query workloads at a target selectivity.

Range and distance queries start at a seed location (a data record for
skewed workloads, a uniform domain point otherwise) and grow until the
true result count reaches ``selectivity * |D|``. Counting uses a
latitude-sorted copy of the data so each probe only looks at one slice.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .geo import EARTH_RADIUS_M, GeoPoint, Rect, is_valid
from .index import as_coords
from .polygon import Polygon, PolygonError, format_polygon, parse_polygon_line

QUERY_TYPES = ("range", "point", "distance", "join")
DISTRIBUTIONS = ("skewed", "uniform")
DEFAULT_SELECTIVITIES = (1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2)
WORLD = Rect(-90.0, -180.0, 90.0, 180.0)

GROWTH = (1.1, 1.5)
ASPECT = (0.25, 4.0)
BISECT_STEPS = 60
MAX_GROWTH_STEPS = 2000


class IngestionError(ValueError):
    """Bad input file; ``lines`` holds the offending 1-based line numbers."""

    def __init__(self, message: str, lines: list[int] | None = None):
        super().__init__(message)
        self.lines = lines or []


class SpecError(ValueError):
    pass


class DistanceQuery(NamedTuple):
    center: GeoPoint
    d: float


@dataclass(frozen=True)
class WorkloadSpec:
    query_type: str = "range"
    selectivity: float = 1e-5
    distribution: str = "skewed"
    count: int = 1000
    seed: int = 0

    def validate(self) -> None:
        if self.query_type not in QUERY_TYPES:
            raise SpecError(f"unknown query type {self.query_type!r}")
        if self.distribution not in DISTRIBUTIONS:
            raise SpecError(f"unknown distribution {self.distribution!r}")
        if not 0.0 < self.selectivity <= 1.0:
            raise SpecError(f"selectivity must be in (0, 1], got {self.selectivity}")
        if self.count < 0:
            raise SpecError(f"query count must be >= 0, got {self.count}")


@dataclass(frozen=True)
class SyntheticSpec:
    n: int = 100_000
    clusters: int = 5
    spread: float = 1.0
    domain: Rect = WORLD
    seed: int = 0

    def validate(self) -> None:
        if self.n < 1:
            raise SpecError(f"n must be >= 1, got {self.n}")
        if self.clusters < 0 or self.spread < 0:
            raise SpecError("clusters and spread must be non-negative")
        d = self.domain
        if not (d.is_valid() and is_valid(d.xl, d.yl) and is_valid(d.xh, d.yh)):
            raise SpecError(f"invalid domain {d}")


# ---------------------------------------------------------------- points I/O

def load_points(path: str | Path) -> np.ndarray:
    """Read a ``lat,lon`` CSV into an ``(n, 2)`` float array."""
    path = Path(path)
    if not path.is_file():
        raise IngestionError(f"{path}: no such file")
    rows: list[tuple[float, float]] = []
    bad: list[int] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise IngestionError(f"{path}: empty dataset")
        if [h.strip().lower() for h in header] != ["lat", "lon"]:
            raise IngestionError(f"{path}: line 1: expected header 'lat,lon', got {','.join(header)!r}", [1])
        for lineno, row in enumerate(reader, 2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                if len(row) != 2:
                    raise ValueError
                lat, lon = float(row[0]), float(row[1])
            except ValueError:
                bad.append(lineno)
                continue
            if not is_valid(lat, lon):
                bad.append(lineno)
                continue
            rows.append((lat, lon))
    if bad:
        shown = ", ".join(map(str, bad[:20])) + (" ..." if len(bad) > 20 else "")
        raise IngestionError(f"{path}: {len(bad)} bad row(s) at line(s) {shown}", bad)
    return np.array(rows, dtype=np.float64).reshape(-1, 2)


def save_points(path: str | Path, data) -> None:
    lats, lons = as_coords(data)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("lat,lon\n")
        for lat, lon in zip(lats.tolist(), lons.tolist()):
            fh.write(f"{lat!r},{lon!r}\n")


def gen_synthetic(spec: SyntheticSpec) -> np.ndarray:
    """Gaussian mixture clamped to the domain; ``clusters=0`` means uniform."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    d = spec.domain
    lo = np.array([d.xl, d.yl])
    hi = np.array([d.xh, d.yh])
    if spec.clusters == 0:
        return rng.uniform(lo, hi, size=(spec.n, 2))
    centers = rng.uniform(lo, hi, size=(spec.clusters, 2))
    which = rng.integers(0, spec.clusters, size=spec.n)
    pts = centers[which] + rng.normal(0.0, 1.0, size=(spec.n, 2)) * spec.spread
    return np.clip(pts, lo, hi)


# ---------------------------------------------------------------- counting

class _Counter:
    """Result counts for candidate queries over a latitude-sorted copy."""

    def __init__(self, data):
        lats, lons = as_coords(data)
        order = np.argsort(lats, kind="stable")
        self.lats = lats[order]
        self.lons = lons[order]
        self.n = len(lats)
        self.mbr = Rect.bounding(lats, lons) if self.n else WORLD

    def _slice(self, lat_lo: float, lat_hi: float) -> slice:
        i = int(np.searchsorted(self.lats, lat_lo, side="left"))
        j = int(np.searchsorted(self.lats, lat_hi, side="right"))
        return slice(i, j)

    def rect(self, q: Rect) -> int:
        s = self._slice(q.xl, q.xh)
        lons = self.lons[s]
        return int(np.count_nonzero((lons >= q.yl) & (lons <= q.yh)))

    def circle(self, center, d: float) -> int:
        dlat = math.degrees(d / EARTH_RADIUS_M)
        s = self._slice(center[0] - dlat, center[0] + dlat)
        lat1 = math.radians(center[0])
        lat2 = np.radians(self.lats[s])
        dlon = np.radians(self.lons[s] - center[1])
        h = np.sin((lat2 - lat1) / 2) ** 2 + math.cos(lat1) * np.cos(lat2) * np.sin(dlon / 2) ** 2
        dist = 2 * EARTH_RADIUS_M * np.arcsin(np.sqrt(np.minimum(h, 1.0)))
        return int(np.count_nonzero(dist <= d))

    def polygon(self, verts: np.ndarray) -> int:
        s = self._slice(float(verts[:, 0].min()), float(verts[:, 0].max()))
        lat = self.lats[s]
        lon = self.lons[s]
        keep = (lon >= verts[:, 1].min()) & (lon <= verts[:, 1].max())
        lat, lon = lat[keep], lon[keep]
        inside = np.zeros(len(lat), dtype=bool)
        ring = np.vstack([verts, verts[:1]])
        for (alat, alon), (blat, blon) in zip(ring[:-1], ring[1:]):
            crosses = (alat > lat) != (blat > lat)
            with np.errstate(divide="ignore", invalid="ignore"):
                x = alon + (lat - alat) * (blon - alon) / (blat - alat)
            inside ^= crosses & (lon < x)
        return int(np.count_nonzero(inside))


def target_count(n: int, selectivity: float) -> float:
    """Result count a query aims for; at least one point."""
    return max(1.0, selectivity * n)


def _grow(count_at, rng: np.random.Generator, start: float, target: float) -> float:
    """Scale at which ``count_at`` first reaches ``target``, tightened by bisection.

    The scale is multiplied by a random factor in GROWTH until the count
    reaches the target. If that step overshoots ``2 * target`` the last
    bracket is bisected looking for a count in ``[target, 2 * target]``.
    """
    lo, hi = 0.0, start
    c = count_at(hi)
    steps = 0
    while c < target and steps < MAX_GROWTH_STEPS:
        steps += 1
        lo = hi
        hi *= rng.uniform(*GROWTH)
        c = count_at(hi)
    if c <= 2 * target:
        return hi
    best, best_c = hi, c
    for _ in range(BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        c = count_at(mid)
        if c < target:
            lo = mid
        else:
            hi = mid
            best, best_c = mid, c
            if c <= 2 * target:
                break
    return best


def _seed(rng: np.random.Generator, data: np.ndarray, counter: _Counter, distribution: str) -> GeoPoint:
    if distribution == "skewed":
        i = int(rng.integers(0, len(data)))
        return GeoPoint(float(data[i, 0]), float(data[i, 1]))
    m = counter.mbr
    return GeoPoint(float(rng.uniform(m.xl, m.xh)), float(rng.uniform(m.yl, m.yh)))


def _prepare(data, spec: WorkloadSpec, query_type: str):
    spec.validate()
    if spec.query_type != query_type:
        raise SpecError(f"spec is for {spec.query_type!r} queries, not {query_type!r}")
    lats, lons = as_coords(data)
    if len(lats) == 0:
        raise SpecError("cannot generate a workload over an empty dataset")
    arr = np.column_stack([lats, lons])
    return arr, _Counter(arr), np.random.default_rng(spec.seed)


def _clamp_rect(lat: float, lon: float, hx: float, hy: float) -> Rect:
    return Rect(max(lat - hx, -90.0), max(lon - hy, -180.0), min(lat + hx, 90.0), min(lon + hy, 180.0))


def gen_range_workload(data, spec: WorkloadSpec) -> list[Rect]:
    arr, counter, rng = _prepare(data, spec, "range")
    t = target_count(counter.n, spec.selectivity)
    m = counter.mbr
    start = max(m.xh - m.xl, m.yh - m.yl, 1e-6) * 1e-7
    out = []
    for _ in range(spec.count):
        c = _seed(rng, arr, counter, spec.distribution)
        aspect = math.sqrt(math.exp(rng.uniform(math.log(ASPECT[0]), math.log(ASPECT[1]))))

        def count_at(h: float) -> int:
            return counter.rect(_clamp_rect(c.lat, c.lon, h * aspect, h / aspect))

        h = _grow(count_at, rng, start, t)
        out.append(_clamp_rect(c.lat, c.lon, h * aspect, h / aspect))
    return out


def gen_distance_workload(data, spec: WorkloadSpec) -> list[DistanceQuery]:
    arr, counter, rng = _prepare(data, spec, "distance")
    t = target_count(counter.n, spec.selectivity)
    out = []
    for _ in range(spec.count):
        c = _seed(rng, arr, counter, spec.distribution)
        d = _grow(lambda r: counter.circle(c, r), rng, 1.0, t)
        out.append(DistanceQuery(c, float(d)))
    return out


def gen_point_workload(data, spec: WorkloadSpec) -> list[GeoPoint]:
    """Points drawn uniformly from the dataset itself, so each query hits."""
    arr, _, rng = _prepare(data, spec, "point")
    idx = rng.integers(0, len(arr), size=spec.count)
    return [GeoPoint(float(arr[i, 0]), float(arr[i, 1])) for i in idx]


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Counter-clockwise hull vertices (monotone chain), collinear points dropped."""
    pts = sorted(set(map(tuple, points.tolist())))
    if len(pts) < 3:
        return np.array(pts)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def gen_join_workload(data, spec: WorkloadSpec, vertices: int = 12) -> list[Polygon]:
    """Random convex polygons around seed locations, scaled to the target count."""
    arr, counter, rng = _prepare(data, spec, "join")
    t = target_count(counter.n, spec.selectivity)
    m = counter.mbr
    start = max(m.xh - m.xl, m.yh - m.yl, 1e-6) * 1e-7
    out = []
    while len(out) < spec.count:
        c = _seed(rng, arr, counter, spec.distribution)
        # one vertex per angular sector keeps the origin inside the hull
        ang = (np.arange(vertices) + rng.uniform(0, 1, size=vertices)) * (2 * math.pi / vertices)
        rad = np.sqrt(rng.uniform(0.25, 1.0, size=vertices))
        shape = convex_hull(np.column_stack([rad * np.cos(ang), rad * np.sin(ang)]))
        if len(shape) < 3:
            continue
        centre = np.array([c.lat, c.lon])
        lo, hi = np.array([-90.0, -180.0]), np.array([90.0, 180.0])

        def ring(h: float) -> np.ndarray:
            return np.clip(centre + shape * h, lo, hi)

        h = _grow(lambda s: counter.polygon(ring(s)), rng, start, t)
        try:
            out.append(Polygon(ring(h).tolist(), pid=len(out)))
        except PolygonError:
            continue
    return out


def gen_workload(data, spec: WorkloadSpec) -> list:
    return {
        "range": gen_range_workload,
        "point": gen_point_workload,
        "distance": gen_distance_workload,
        "join": gen_join_workload,
    }[spec.query_type](data, spec)


# ---------------------------------------------------------------- workload I/O

def write_workload(path: str | Path, query_type: str, queries) -> None:
    """One query per row after a header line naming the query type."""
    if query_type not in QUERY_TYPES:
        raise SpecError(f"unknown query type {query_type!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(query_type + "\n")
        for q in queries:
            if query_type == "range":
                fh.write(f"{q[0]!r},{q[1]!r},{q[2]!r},{q[3]!r}\n")
            elif query_type == "point":
                fh.write(f"{q[0]!r},{q[1]!r}\n")
            elif query_type == "distance":
                fh.write(f"{q.center[0]!r},{q.center[1]!r},{q.d!r}\n")
            else:
                fh.write(format_polygon(q) + "\n")


def read_workload(path: str | Path) -> tuple[str, list]:
    """Inverse of ``write_workload``; malformed join rows become ``PolygonError`` slots."""
    path = Path(path)
    if not path.is_file():
        raise IngestionError(f"{path}: no such file")
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() not in QUERY_TYPES:
        raise IngestionError(f"{path}: line 1: header must name one of {QUERY_TYPES}", [1])
    qtype = lines[0].strip()
    out: list = []
    bad: list[int] = []
    width = {"range": 4, "point": 2, "distance": 3}.get(qtype)
    for lineno, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        if qtype == "join":
            try:
                out.append(parse_polygon_line(line, lineno))
            except PolygonError as exc:
                out.append(exc)
            continue
        try:
            vals = [float(v) for v in line.split(",")]
            if len(vals) != width:
                raise ValueError
        except ValueError:
            bad.append(lineno)
            continue
        if qtype == "range":
            q = Rect(*vals)
            if not (q.is_valid() and is_valid(q.xl, q.yl) and is_valid(q.xh, q.yh)):
                bad.append(lineno)
                continue
            out.append(q)
        elif qtype == "point":
            out.append(GeoPoint(*vals))
        else:
            if vals[2] < 0 or not is_valid(vals[0], vals[1]):
                bad.append(lineno)
                continue
            out.append(DistanceQuery(GeoPoint(vals[0], vals[1]), vals[2]))
    if bad:
        raise IngestionError(f"{path}: bad row(s) at line(s) {', '.join(map(str, bad[:20]))}", bad)
    return qtype, out
