"""Point-region Quadtree over the data MBR.

Nodes split at the midpoint of their region while they hold more than
``leaf_size`` points. Points on a split line go to the higher quadrant.
Empty quadrants are dropped. A node stops splitting when its points are
all identical or its region can no longer be halved in floating point.
"""

from __future__ import annotations

import numpy as np

from ..geo import Rect


class QuadNode:
    __slots__ = ("region", "children", "pid")

    def __init__(self, region: Rect):
        self.region = region
        self.children: list[QuadNode] = []
        self.pid = -1


class QuadtreeDirectory:
    def __init__(self, root: QuadNode | None, n_nodes: int):
        self.root = root
        self.n_nodes = n_nodes
        self.bounds: list[Rect] = []

    def attach(self, bounds) -> None:
        self.bounds = bounds

    def lookup(self, q: Rect) -> list[int]:
        out = []
        if self.root is None:
            return out
        xl, yl, xh, yh = q
        bounds = self.bounds
        stack = [self.root]
        while stack:
            node = stack.pop()
            r = node.region
            if r.yh < yl or r.yl > yh or r.xh < xl or r.xl > xh:
                continue
            if node.pid >= 0:
                b = bounds[node.pid]
                if not (b.yh < yl or b.yl > yh or b.xh < xl or b.xl > xh):
                    out.append(node.pid)
            else:
                stack.extend(reversed(node.children))
        return out

    def locate(self, p) -> list[int]:
        return self.lookup(Rect(p[0], p[1], p[0], p[1]))

    def size_bytes(self) -> int:
        return self.n_nodes * (32 + 4 * 8)


def partition_quadtree(lats: np.ndarray, lons: np.ndarray, cfg):
    n = len(lats)
    if n == 0:
        return [], QuadtreeDirectory(None, 0)
    region = Rect(float(lats.min()), float(lons.min()), float(lats.max()), float(lons.max()))
    root = QuadNode(region)
    groups: list[np.ndarray] = []
    count = 1
    stack = [(root, np.arange(n))]
    while stack:
        node, idx = stack.pop()
        r = node.region
        mx = (r.xl + r.xh) * 0.5
        my = (r.yl + r.yh) * 0.5
        a = lats[idx]
        b = lons[idx]
        splittable = (r.xl < mx < r.xh) or (r.yl < my < r.yh)
        identical = a.min() == a.max() and b.min() == b.max()
        if len(idx) <= cfg.leaf_size or identical or not splittable:
            node.pid = len(groups)
            groups.append(idx)
            continue
        quad = (a >= mx).astype(np.int8) * 2 + (b >= my).astype(np.int8)
        children = []
        for k, region_k in enumerate((
            Rect(r.xl, r.yl, mx, my),
            Rect(r.xl, my, mx, r.yh),
            Rect(mx, r.yl, r.xh, my),
            Rect(mx, my, r.xh, r.yh),
        )):
            sub = idx[quad == k]
            if len(sub):
                child = QuadNode(region_k)
                children.append((child, sub))
        node.children = [c for c, _ in children]
        count += len(children)
        for child, sub in reversed(children):
            stack.append((child, sub))
    return groups, QuadtreeDirectory(root, count)
