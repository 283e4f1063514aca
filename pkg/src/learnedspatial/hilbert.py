"""Hilbert curve encoding over a 2^order x 2^order grid.

Orientation: within every 2x2 block the curve visits (0,0), (0,1), (1,1),
(1,0). Coordinates are ``(cx, cy)`` where ``cx`` indexes latitude and
``cy`` longitude.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .geo import Rect

MAX_ORDER = 31


def _check_order(order: int) -> None:
    if not 1 <= order <= MAX_ORDER:
        raise ValueError(f"hilbert order must be in [1, {MAX_ORDER}], got {order}")


def xy_to_hilbert(order: int, cx: int, cy: int) -> int:
    _check_order(order)
    n = 1 << order
    if not (0 <= cx < n and 0 <= cy < n):
        raise ValueError(f"cell ({cx}, {cy}) outside {n}x{n} grid")
    d = 0
    s = n >> 1
    x, y = cx, cy
    while s:
        rx = 1 if x & s else 0
        ry = 1 if y & s else 0
        d += s * s * ((3 * rx) ^ ry)
        if not ry:
            if rx:
                x = n - 1 - x
                y = n - 1 - y
            x, y = y, x
        s >>= 1
    return d


def hilbert_to_xy(order: int, d: int) -> tuple[int, int]:
    _check_order(order)
    n = 1 << order
    if not 0 <= d < n * n:
        raise ValueError(f"curve position {d} outside [0, {n * n})")
    x = y = 0
    t = d
    s = 1
    while s < n:
        rx = 1 & (t >> 1)
        ry = 1 & (t ^ rx)
        if not ry:
            if rx:
                x = s - 1 - x
                y = s - 1 - y
            x, y = y, x
        x += s * rx
        y += s * ry
        t >>= 2
        s <<= 1
    return x, y


def xy_to_hilbert_array(order: int, cx: np.ndarray, cy: np.ndarray) -> np.ndarray:
    """Vectorized ``xy_to_hilbert`` over int arrays."""
    _check_order(order)
    n = np.int64(1 << order)
    x = np.asarray(cx, dtype=np.int64).copy()
    y = np.asarray(cy, dtype=np.int64).copy()
    d = np.zeros_like(x)
    s = np.int64(1 << (order - 1))
    while s:
        rx = (x & s) > 0
        ry = (y & s) > 0
        d += s * s * ((3 * rx.astype(np.int64)) ^ ry.astype(np.int64))
        flip = ~ry & rx
        x = np.where(flip, n - 1 - x, x)
        y = np.where(flip, n - 1 - y, y)
        swap = ~ry
        x, y = np.where(swap, y, x), np.where(swap, x, y)
        s >>= 1
    return d


def point_to_cell(order: int, domain: Rect, p) -> tuple[int, int]:
    _check_order(order)
    if not domain.contains(p):
        raise ValueError(f"point {tuple(p)} outside domain {tuple(domain)}")
    w = domain.xh - domain.xl
    h = domain.yh - domain.yl
    if w <= 0 or h <= 0:
        raise ValueError("domain needs positive extent in both dimensions")
    n = 1 << order
    cx = min(int((p[0] - domain.xl) / w * n), n - 1)
    cy = min(int((p[1] - domain.yl) / h * n), n - 1)
    return cx, cy


def points_to_cells(order: int, domain: Rect, lats: np.ndarray, lons: np.ndarray):
    """Vectorized ``point_to_cell``; inputs must lie inside ``domain``."""
    n = 1 << order
    w = domain.xh - domain.xl
    h = domain.yh - domain.yl
    cx = np.minimum(((lats - domain.xl) / w * n).astype(np.int64), n - 1)
    cy = np.minimum(((lons - domain.yl) / h * n).astype(np.int64), n - 1)
    return cx, cy


# The accumulated reflect/swap transform of a curve block is an element of
# the Klein four-group, encoded in 2 bits: bit 0 = swap axes, bit 1 = flip
# both axes. Composition is XOR.
_STEP = {(0, 0): 1, (1, 0): 3, (0, 1): 0, (1, 1): 0}


def _child_blocks(state: int):
    """(quadrant qx, qy, curve index, child state) for the 4 children, in curve order."""
    out = []
    for qx in (0, 1):
        for qy in (0, 1):
            rx, ry = qx, qy
            if state & 1:
                rx, ry = ry, rx
            if state & 2:
                rx, ry = 1 - rx, 1 - ry
            out.append((qx, qy, (3 * rx) ^ ry, state ^ _STEP[(rx, ry)]))
    out.sort(key=lambda t: t[2])
    return tuple((qx, qy, st) for qx, qy, _, st in out)


_CHILDREN = tuple(_child_blocks(s) for s in range(4))


def cover_ranges(
    order: int, cx_lo: int, cy_lo: int, cx_hi: int, cy_hi: int,
    max_ranges: int | None = None,
    refine: Callable[[int, int], bool] | None = None,
) -> list[tuple[int, int]]:
    """Sorted, merged inclusive curve ranges covering a closed cell rectangle.

    Blocks are refined top-down, level by level, until every block is either
    fully inside the rectangle or a single cell. Refinement stops early once
    the frontier would exceed ``max_ranges`` blocks; the remaining partial
    blocks are emitted whole, so the result is always a superset cover.
    A partial block is also kept whole when ``refine(lo, hi)`` is false for
    its curve range.
    """
    _check_order(order)
    if max_ranges is None:
        max_ranges = 4 << order
    n = 1 << order
    cx_lo, cy_lo = max(cx_lo, 0), max(cy_lo, 0)
    cx_hi, cy_hi = min(cx_hi, n - 1), min(cy_hi, n - 1)
    if cx_lo > cx_hi or cy_lo > cy_hi:
        return []
    # frontier entries: (d0, x0, y0, size, state, full)
    whole = cx_lo == 0 and cy_lo == 0 and cx_hi == n - 1 and cy_hi == n - 1
    frontier = [(0, 0, 0, n, 0, whole)]
    size = n
    while size > 1 and not all(f[5] for f in frontier):
        half = size >> 1
        block = half * half
        nxt = []
        for entry in frontier:
            if entry[5]:
                nxt.append(entry)
                continue
            d0, x0, y0, bsize, state, _ = entry
            if refine is not None and not refine(d0, d0 + bsize * bsize - 1):
                nxt.append((d0, x0, y0, bsize, state, True))
                continue
            for k, (qx, qy, st) in enumerate(_CHILDREN[state]):
                bx = x0 + qx * half
                by = y0 + qy * half
                ex = bx + half - 1
                ey = by + half - 1
                if ex < cx_lo or bx > cx_hi or ey < cy_lo or by > cy_hi:
                    continue
                inside = cx_lo <= bx and ex <= cx_hi and cy_lo <= by and ey <= cy_hi
                nxt.append((d0 + k * block, bx, by, half, st, inside or half == 1))
        if len(nxt) > max_ranges:
            break
        frontier = nxt
        size = half
    ranges: list[tuple[int, int]] = []
    for d0, _, _, bsize, _, _ in frontier:
        lo, hi = d0, d0 + bsize * bsize - 1
        if ranges and ranges[-1][1] + 1 >= lo:
            ranges[-1] = (ranges[-1][0], max(ranges[-1][1], hi))
        else:
            ranges.append((lo, hi))
    return ranges
