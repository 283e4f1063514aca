"""Sort-Tile-Recursive packing.

With P points and node capacity N, there are ceil(P/N) leaves and
S = ceil(sqrt(P/N)) vertical slices of S*N points each. Each slice is
sorted on longitude and cut into runs of N. Upper levels pack the child
MBR centres the same way until a single root remains.
"""

from __future__ import annotations

import math

import numpy as np

from ..geo import Rect


class StrNode:
    __slots__ = ("mbr", "children", "pid")

    def __init__(self, mbr: Rect, children=None, pid: int = -1):
        self.mbr = mbr
        self.children: list[StrNode] = children or []
        self.pid = pid


def str_runs(xs: np.ndarray, ys: np.ndarray, capacity: int) -> tuple[list[np.ndarray], int]:
    """Group item indices into STR runs; returns (runs, slice count)."""
    p = len(xs)
    leaves = math.ceil(p / capacity)
    s = math.ceil(math.sqrt(leaves))
    per_slice = s * capacity
    by_x = np.lexsort((ys, xs))
    runs = []
    n_slices = 0
    for start in range(0, p, per_slice):
        n_slices += 1
        sl = by_x[start:start + per_slice]
        sl = sl[np.lexsort((xs[sl], ys[sl]))]
        for r in range(0, len(sl), capacity):
            runs.append(sl[r:r + capacity])
    return runs, n_slices


class StrDirectory:
    def __init__(self, root: StrNode | None, n_nodes: int, slices: int, levels: int):
        self.root = root
        self.n_nodes = n_nodes
        self.slices = slices
        self.levels = levels

    def attach(self, bounds) -> None:
        pass

    def lookup(self, q: Rect) -> list[int]:
        out = []
        if self.root is None:
            return out
        xl, yl, xh, yh = q
        stack = [self.root]
        while stack:
            node = stack.pop()
            b = node.mbr
            if b.yh < yl or b.yl > yh or b.xh < xl or b.xl > xh:
                continue
            if node.pid >= 0:
                out.append(node.pid)
            else:
                stack.extend(reversed(node.children))
        return out

    def locate(self, p) -> list[int]:
        return self.lookup(Rect(p[0], p[1], p[0], p[1]))

    def size_bytes(self) -> int:
        return self.n_nodes * (32 + 8)


def _union(rects) -> Rect:
    return Rect(
        min(r.xl for r in rects), min(r.yl for r in rects),
        max(r.xh for r in rects), max(r.yh for r in rects),
    )


def partition_str(lats: np.ndarray, lons: np.ndarray, cfg):
    n = len(lats)
    if n == 0:
        return [], StrDirectory(None, 0, 0, 0)
    capacity = cfg.leaf_size
    groups, slices = str_runs(lats, lons, capacity)
    level = [
        StrNode(Rect(float(lats[g].min()), float(lons[g].min()), float(lats[g].max()), float(lons[g].max())), pid=i)
        for i, g in enumerate(groups)
    ]
    count = len(level)
    levels = 1
    fanout = max(capacity, 2)
    while len(level) > 1:
        cx = np.array([(nd.mbr.xl + nd.mbr.xh) * 0.5 for nd in level])
        cy = np.array([(nd.mbr.yl + nd.mbr.yh) * 0.5 for nd in level])
        runs, _ = str_runs(cx, cy, fanout)
        level = [StrNode(_union([level[i].mbr for i in run]), [level[i] for i in run]) for run in runs]
        count += len(level)
        levels += 1
    return groups, StrDirectory(level[0], count, slices, levels)
