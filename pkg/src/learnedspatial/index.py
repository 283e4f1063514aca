"""Generic learned-index build over a spatial partitioning.

``build`` partitions the data with one of six techniques, sorts every
partition on longitude and attaches a search model to it. The technique
also supplies a directory that maps query rectangles to partitions.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from .geo import GeoPoint, Rect
from .search import DEFAULT_MAX_ERROR, DEFAULT_RADIX_BITS, SEARCH_KINDS, SearchModel, make_model

TECHNIQUES = ("fixed", "adaptive", "kdtree", "quadtree", "str", "hilbert")
SPACE_PARTITIONING = ("fixed", "quadtree", "hilbert")
POINT_BYTES = 16


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class BuildConfig:
    technique: str
    leaf_size: int
    search: str = "spline"
    max_error: int = DEFAULT_MAX_ERROR
    hilbert_order: int = 16
    radix_bits: int = DEFAULT_RADIX_BITS

    def validate(self) -> None:
        if self.technique not in TECHNIQUES:
            raise ConfigError(f"unknown technique {self.technique!r}; expected one of {TECHNIQUES}")
        if self.search not in SEARCH_KINDS:
            raise ConfigError(f"unknown search {self.search!r}; expected one of {SEARCH_KINDS}")
        if self.leaf_size < 1:
            raise ConfigError(f"leaf size must be >= 1, got {self.leaf_size}")
        if self.max_error < 1:
            raise ConfigError(f"spline error must be >= 1, got {self.max_error}")
        if not 1 <= self.hilbert_order <= 31:
            raise ConfigError(f"hilbert order must be in [1, 31], got {self.hilbert_order}")
        if self.radix_bits < 1:
            raise ConfigError(f"radix bits must be >= 1, got {self.radix_bits}")


@dataclass(slots=True)
class Partition:
    bounds: Rect
    points: list[GeoPoint]
    keys: list[float]
    model: SearchModel

    def __len__(self) -> int:
        return len(self.points)


class Directory(Protocol):
    def lookup(self, q: Rect) -> list[int]: ...

    def locate(self, p) -> list[int]: ...

    def size_bytes(self) -> int: ...


@dataclass
class PartitionedIndex:
    config: BuildConfig
    partitions: list[Partition]
    directory: Directory
    n_points: int
    build_seconds: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def technique(self) -> str:
        return self.config.technique

    @property
    def leaf_size(self) -> int:
        return self.config.leaf_size

    def index_lookup(self, q: Rect) -> list[int]:
        return self.directory.lookup(q)

    def locate(self, p) -> list[int]:
        return self.directory.locate(p)

    def size_bytes(self) -> int:
        models = sum(p.model.size_bytes() for p in self.partitions)
        return self.directory.size_bytes() + models + POINT_BYTES * self.n_points

    def summary(self) -> dict:
        sizes = [len(p) for p in self.partitions]
        return {
            "technique": self.technique,
            "search": self.config.search,
            "leaf_size": self.leaf_size,
            "points": self.n_points,
            "partitions": len(self.partitions),
            "max_partition": max(sizes, default=0),
            "build_ms": round(self.build_seconds * 1e3, 3),
            "index_bytes": self.size_bytes(),
        }


def as_coords(data) -> tuple[np.ndarray, np.ndarray]:
    """Split point data into float64 ``(lats, lons)`` arrays."""
    arr = np.asarray(data, dtype=np.float64)
    if arr.size == 0:
        return np.empty(0), np.empty(0)
    arr = arr.reshape(-1, 2)
    return np.ascontiguousarray(arr[:, 0]), np.ascontiguousarray(arr[:, 1])


def make_partition(lats: np.ndarray, lons: np.ndarray, idx: np.ndarray, cfg: BuildConfig) -> Partition:
    """Sort a group of points on longitude and attach its search model."""
    order = idx[np.lexsort((lats[idx], lons[idx]))]
    plats = lats[order].tolist()
    plons = lons[order].tolist()
    points = list(map(GeoPoint, plats, plons))
    model = make_model(cfg.search, plons, cfg.max_error, cfg.radix_bits)
    bounds = Rect(min(plats), plons[0], max(plats), plons[-1])
    return Partition(bounds, points, plons, model)


def build(data, cfg: BuildConfig) -> PartitionedIndex:
    cfg.validate()
    from . import partitioners

    lats, lons = as_coords(data)
    start = time.perf_counter()
    groups, directory = partitioners.partition(lats, lons, cfg)
    partitions = [make_partition(lats, lons, g, cfg) for g in groups]
    directory.attach([p.bounds for p in partitions])
    elapsed = time.perf_counter() - start
    return PartitionedIndex(cfg, partitions, directory, len(lats), elapsed)


def brute_force_lookup(idx: PartitionedIndex, q: Rect) -> list[int]:
    """Partitions whose tight bounds intersect ``q``, by scanning all of them."""
    return [i for i, p in enumerate(idx.partitions) if p.bounds.intersects(q)]


@dataclass
class LookupStats:
    counts: list[int]

    @property
    def mean(self) -> float:
        return float(np.mean(self.counts)) if self.counts else 0.0

    def histogram(self) -> dict[int, int]:
        values, freq = np.unique(np.asarray(self.counts, dtype=np.int64), return_counts=True)
        return {int(v): int(f) for v, f in zip(values, freq)}


def lookup_stats(idx: PartitionedIndex, queries: Sequence) -> LookupStats:
    """Intersected-partition counts per query (rectangles or points)."""
    counts = []
    for q in queries:
        if isinstance(q, Rect):
            counts.append(len(idx.index_lookup(q)))
        else:
            counts.append(len(idx.locate(q)))
    return LookupStats(counts)
