"""Partitioning techniques. Each returns point-index groups plus a directory."""

from __future__ import annotations

from .grid import partition_adaptive, partition_fixed
from .hilbert_curve import partition_hilbert
from .kdtree import partition_kdtree
from .quadtree import partition_quadtree
from .strtree import partition_str

_TECHNIQUES = {
    "fixed": partition_fixed,
    "adaptive": partition_adaptive,
    "kdtree": partition_kdtree,
    "quadtree": partition_quadtree,
    "str": partition_str,
    "hilbert": partition_hilbert,
}


def partition(lats, lons, cfg):
    return _TECHNIQUES[cfg.technique](lats, lons, cfg)
