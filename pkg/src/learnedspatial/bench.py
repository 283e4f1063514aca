"""Measurement harness: run workloads, verify against the oracle, tune, compare."""

from __future__ import annotations

import gc
import hashlib
import struct
from dataclasses import asdict, dataclass, field
from pathlib import Path
from time import perf_counter_ns
from typing import Sequence

import numpy as np

from .geo import GeoPoint
from .index import BuildConfig, ConfigError, PartitionedIndex, TECHNIQUES, build
from .oracle import BruteForce, as_multiset
from .polygon import PolygonError
from .query import QueryProfile, distance_query, join_query, point_query, range_query

MAGIC = b"LSIX1"
DEFAULT_SWEEP = (16, 64, 256, 1024, 4096, 16384, 65536)
_HEADER = struct.Struct("<QIII Q")


class VerificationError(AssertionError):
    """Index result differs from the oracle for query ``index``."""

    def __init__(self, index: int, query, detail: str):
        super().__init__(f"query {index} {query!r}: {detail}")
        self.index = index
        self.query = query
        self.detail = detail


# ---------------------------------------------------------------- execution

def run_one(idx: PartitionedIndex, query_type: str, q, profile: QueryProfile | None = None):
    if query_type == "range":
        return range_query(idx, q, profile)
    if query_type == "point":
        return point_query(idx, q, profile)
    if query_type == "distance":
        return distance_query(idx, q[0], q[1], profile)
    if query_type == "join":
        profiles: list[QueryProfile] = []
        res = join_query(idx, [q], profiles)[0]
        if profile is not None and profiles:
            profile.add(profiles[0])
        return res
    raise ConfigError(f"unknown query type {query_type!r}")


@dataclass
class RunResult:
    results: list
    latencies_ns: list[int]
    profiles: list[QueryProfile]

    def phase_means_ns(self) -> dict[str, float]:
        n = max(len(self.profiles), 1)
        return {
            "lookup": sum(p.lookup_ns for p in self.profiles) / n,
            "refinement": sum(p.bounds_ns for p in self.profiles) / n,
            "scan": sum(p.scan_ns for p in self.profiles) / n,
            "refine": sum(p.refine_ns for p in self.profiles) / n,
        }


def run_workload(idx: PartitionedIndex, query_type: str, queries: Sequence, warmup: bool = True) -> RunResult:
    """Execute every query once unmeasured (warm-up), then once measured.

    The cyclic garbage collector is paused during the measured pass so its
    sweeps over the index's objects do not land inside query timings.
    """
    if warmup:
        for q in queries:
            run_one(idx, query_type, q)
    results, lat, profs = [], [], []
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        for q in queries:
            prof = QueryProfile()
            t0 = perf_counter_ns()
            r = run_one(idx, query_type, q, prof)
            lat.append(perf_counter_ns() - t0)
            results.append(r)
            profs.append(prof)
    finally:
        if was_enabled:
            gc.enable()
    return RunResult(results, lat, profs)


def oracle_results(bf: BruteForce, query_type: str, queries: Sequence) -> list:
    out = []
    for q in queries:
        if query_type == "range":
            out.append(bf.range(q))
        elif query_type == "point":
            out.append(bf.point(q))
        elif query_type == "distance":
            out.append(bf.distance(q[0], q[1]))
        elif isinstance(q, PolygonError):
            out.append(q)
        else:
            out.append(bf.polygon(q))
    return out


def _canonical(r):
    if isinstance(r, bool):
        return r
    if isinstance(r, PolygonError):
        return "error"
    return as_multiset(r)


def checksum(results: Sequence) -> str:
    """Order-of-points-independent digest of a workload's results."""
    h = hashlib.blake2b(digest_size=16)
    for r in results:
        c = _canonical(r)
        if isinstance(c, bool):
            h.update(b"T" if c else b"F")
        elif c == "error":
            h.update(b"E")
        else:
            h.update(struct.pack("<Q", len(c)))
            for lat, lon in c:
                h.update(struct.pack("<dd", lat, lon))
        h.update(b";")
    return h.hexdigest()


def verify(queries: Sequence, results: Sequence, expected: Sequence) -> None:
    """Raise ``VerificationError`` at the first query whose result differs."""
    for i, (q, got, want) in enumerate(zip(queries, results, expected)):
        a, b = _canonical(got), _canonical(want)
        if a == b:
            continue
        if isinstance(a, list) and isinstance(b, list):
            sa, sb = set(a), set(b)
            missing = sorted(sb - sa)[:5]
            extra = sorted(sa - sb)[:5]
            detail = f"got {len(a)} points, expected {len(b)}; missing {missing}; unexpected {extra}"
        else:
            detail = f"got {a!r}, expected {b!r}"
        raise VerificationError(i, q, detail)


# ---------------------------------------------------------------- reports

@dataclass
class BenchRow:
    technique: str
    search: str
    leaf_size: int
    query_type: str
    selectivity: float
    distribution: str
    queries: int
    mean_us: float
    median_us: float
    p99_us: float
    build_ms: float
    index_bytes: int
    partitions: int
    avg_partitions: float
    avg_scanned: float
    checksum: str
    verified: bool = False
    phases_us: dict[str, float] = field(default_factory=dict)

    def as_dict(self, plot_data: bool = False) -> dict:
        d = asdict(self)
        phases = d.pop("phases_us")
        if plot_data:
            for k, v in phases.items():
                d[f"{k}_us"] = round(v, 3)
        return d


def summarize(idx: PartitionedIndex, query_type: str, run: RunResult, selectivity: float = float("nan"),
              distribution: str = "", verified: bool = False) -> BenchRow:
    lat_us = np.asarray(run.latencies_ns, dtype=np.float64) / 1e3
    n = max(len(run.profiles), 1)
    has = len(lat_us) > 0
    return BenchRow(
        technique=idx.technique,
        search=idx.config.search,
        leaf_size=idx.leaf_size,
        query_type=query_type,
        selectivity=selectivity,
        distribution=distribution,
        queries=len(run.results),
        mean_us=round(float(lat_us.mean()), 3) if has else 0.0,
        median_us=round(float(np.median(lat_us)), 3) if has else 0.0,
        p99_us=round(float(np.percentile(lat_us, 99)), 3) if has else 0.0,
        build_ms=round(idx.build_seconds * 1e3, 3),
        index_bytes=idx.size_bytes(),
        partitions=len(idx.partitions),
        avg_partitions=round(sum(p.partitions for p in run.profiles) / n, 4),
        avg_scanned=round(sum(p.scanned for p in run.profiles) / n, 4),
        checksum=checksum(run.results),
        verified=verified,
        phases_us={k: v / 1e3 for k, v in run.phase_means_ns().items()},
    )


def bench(data, cfg: BuildConfig, query_type: str, queries: Sequence, *, oracle: BruteForce | None = None,
          expected: Sequence | None = None, selectivity: float = float("nan"), distribution: str = "",
          idx: PartitionedIndex | None = None) -> BenchRow:
    """Build (unless ``idx`` is given), run the workload, optionally verify."""
    if idx is None:
        idx = build(data, cfg)
    run = run_workload(idx, query_type, queries)
    verified = False
    if oracle is not None or expected is not None:
        if expected is None:
            expected = oracle_results(oracle, query_type, queries)
        verify(queries, run.results, expected)
        verified = True
    return summarize(idx, query_type, run, selectivity, distribution, verified)


def tune(data, technique: str, search: str, sweep: Sequence[int], query_type: str, queries: Sequence,
         **kw) -> tuple[list[BenchRow], int]:
    """One row per leaf size; returns the rows and the leaf size with the lowest mean latency."""
    sweep = list(sweep)
    if not sweep or any(b <= a for a, b in zip(sweep, sweep[1:])):
        raise ConfigError(f"sweep must be non-empty and strictly increasing, got {sweep}")
    base = dict(kw.pop("config", {}))
    rows = [bench(data, BuildConfig(technique, l, search, **base), query_type, queries, **kw) for l in sweep]
    best = min(rows, key=lambda r: r.mean_us)
    return rows, best.leaf_size


def compare(data, techniques: Sequence[str], searches: Sequence[str], sweep: Sequence[int], query_type: str,
            queries: Sequence, **kw) -> tuple[list[BenchRow], dict[str, float]]:
    """Each technique/search pair tuned at its own best leaf size.

    Returns the tuned rows and, per technique with both search models,
    the ratio of binary-search mean latency to spline mean latency.
    """
    rows: list[BenchRow] = []
    for t in techniques:
        for s in searches:
            curve, best = tune(data, t, s, sweep, query_type, queries, **kw)
            rows.append(next(r for r in curve if r.leaf_size == best))
    ratios = {}
    for t in techniques:
        by = {r.search: r for r in rows if r.technique == t}
        if "binary" in by and "spline" in by and by["spline"].mean_us > 0:
            ratios[t] = by["binary"].mean_us / by["spline"].mean_us
    return rows, ratios


# ---------------------------------------------------------------- serialization

def _points_in_partition_order(idx: PartitionedIndex) -> list[GeoPoint]:
    return [p for part in idx.partitions for p in part.points]


def save_index(path: str | Path, idx: PartitionedIndex) -> int:
    """Write the build configuration and points; returns bytes written."""
    cfg = idx.config
    tech = cfg.technique.encode()
    search = cfg.search.encode()
    pts = _points_in_partition_order(idx)
    buf = bytearray(MAGIC)
    buf += struct.pack("<B", len(tech)) + tech + struct.pack("<B", len(search)) + search
    buf += _HEADER.pack(cfg.leaf_size, cfg.max_error, cfg.hilbert_order, cfg.radix_bits, len(pts))
    buf += np.asarray(pts, dtype="<f8").reshape(-1).tobytes()
    Path(path).write_bytes(bytes(buf))
    return len(buf)


def is_index_file(path: str | Path) -> bool:
    try:
        with open(path, "rb") as fh:
            return fh.read(len(MAGIC)) == MAGIC
    except OSError:
        return False


def read_index_file(path: str | Path) -> tuple[BuildConfig, np.ndarray]:
    raw = Path(path).read_bytes()
    if not raw.startswith(MAGIC):
        raise ValueError(f"{path}: not an index file (bad magic)")
    try:
        off = len(MAGIC)
        (n,) = struct.unpack_from("<B", raw, off)
        tech = raw[off + 1:off + 1 + n].decode()
        off += 1 + n
        (n,) = struct.unpack_from("<B", raw, off)
        search = raw[off + 1:off + 1 + n].decode()
        off += 1 + n
        leaf, err, order, radix, count = _HEADER.unpack_from(raw, off)
        off += _HEADER.size
        pts = np.frombuffer(raw, dtype="<f8", count=2 * count, offset=off).reshape(-1, 2)
    except (struct.error, ValueError, UnicodeDecodeError) as exc:
        raise ValueError(f"{path}: truncated or corrupt index file") from exc
    return BuildConfig(tech, leaf, search, err, order, radix), pts.astype(np.float64)


def load_index(path: str | Path) -> PartitionedIndex:
    cfg, pts = read_index_file(path)
    return build(pts, cfg)


__all__ = [
    "BenchRow", "DEFAULT_SWEEP", "MAGIC", "RunResult", "TECHNIQUES", "VerificationError", "bench",
    "checksum", "compare", "load_index", "oracle_results", "run_workload", "save_index", "summarize",
    "tune", "verify",
]
