"""Data-aware K-d tree: median splits, discriminator alternating lat, lon, ..."""

from __future__ import annotations

import numpy as np

from ..geo import Rect


class KdNode:
    __slots__ = ("mbr", "left", "right", "pid", "dim", "split")

    def __init__(self, mbr: Rect):
        self.mbr = mbr
        self.left: KdNode | None = None
        self.right: KdNode | None = None
        self.pid = -1
        self.dim = 0
        self.split = 0.0


class KdTreeDirectory:
    def __init__(self, root: KdNode | None, n_nodes: int):
        self.root = root
        self.n_nodes = n_nodes

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
                stack.append(node.right)
                stack.append(node.left)
        return out

    def locate(self, p) -> list[int]:
        return self.lookup(Rect(p[0], p[1], p[0], p[1]))

    def size_bytes(self) -> int:
        # MBR + two child pointers + split value per node
        return self.n_nodes * (32 + 16 + 8)


def _mbr(lats, lons, idx) -> Rect:
    a = lats[idx]
    b = lons[idx]
    return Rect(float(a.min()), float(b.min()), float(a.max()), float(b.max()))


def partition_kdtree(lats: np.ndarray, lons: np.ndarray, cfg):
    n = len(lats)
    if n == 0:
        return [], KdTreeDirectory(None, 0)
    coords = (lats, lons)
    groups: list[np.ndarray] = []
    root = KdNode(_mbr(lats, lons, np.arange(n)))
    count = 1
    stack = [(root, np.arange(n), 0)]
    while stack:
        node, idx, depth = stack.pop()
        if len(idx) <= cfg.leaf_size:
            node.pid = len(groups)
            groups.append(idx)
            continue
        dim = depth % 2
        vals = coords[dim][idx]
        order = idx[np.argsort(vals, kind="stable")]
        m = len(order) // 2
        node.dim = dim
        node.split = float(coords[dim][order[m]])
        left, right = order[:m], order[m:]
        node.left = KdNode(_mbr(lats, lons, left))
        node.right = KdNode(_mbr(lats, lons, right))
        count += 2
        # right first so groups come out in left-to-right order
        stack.append((node.right, right, depth + 1))
        stack.append((node.left, left, depth + 1))
    return groups, KdTreeDirectory(root, count)
