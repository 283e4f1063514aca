"""Boundary refinement inside a partition: binary search or a radix spline.

Both strategies answer the same two questions over a sorted key list:
the first index with ``key >= bound`` (lower bound) and the first index
with ``key > bound`` (upper bound). The binary search is exact; the spline
gives an estimate within ``max_error`` of the true position, which a short
local search then corrects.

Both are written as plain Python loops on purpose so their relative cost is
measured at the same interpretive level.
"""

from __future__ import annotations

import struct

_SIGN = 1 << 63
_MASK = (1 << 64) - 1
_pack_d = struct.Struct("<d").pack
_unpack_q = struct.Struct("<Q").unpack

SEARCH_KINDS = ("binary", "spline")
DEFAULT_MAX_ERROR = 32
DEFAULT_RADIX_BITS = 18


def ordered_bits(x: float) -> int:
    """Order-preserving unsigned 64-bit image of an IEEE-754 double."""
    u = _unpack_q(_pack_d(x))[0]
    return u ^ _MASK if u & _SIGN else u | _SIGN


def _lower(keys, lo: int, hi: int, bound: float) -> int:
    while lo < hi:
        mid = (lo + hi) >> 1
        if keys[mid] < bound:
            lo = mid + 1
        else:
            hi = mid
    return lo


def _upper(keys, lo: int, hi: int, bound: float) -> int:
    while lo < hi:
        mid = (lo + hi) >> 1
        if keys[mid] <= bound:
            lo = mid + 1
        else:
            hi = mid
    return lo


def local_search_lower(keys, est: int, bound: float) -> int:
    """Exact first index with ``key >= bound``, starting from any estimate.

    Gallops away from ``est`` in the direction of the answer, then binary
    searches the bracket, so the cost grows with the log of the estimate's
    error.
    """
    n = len(keys)
    est = min(max(est, 0), n)
    if est < n and keys[est] < bound:
        lo, step = est + 1, 1
        hi = lo
        while hi < n and keys[hi] < bound:
            lo = hi + 1
            hi += step
            step <<= 1
        return _lower(keys, lo, min(hi, n), bound)
    hi, step = est, 1
    lo = hi
    while lo > 0 and keys[lo - 1] >= bound:
        hi = lo - 1
        lo -= step
        step <<= 1
    return _lower(keys, max(lo, 0), hi, bound)


def local_search_upper(keys, est: int, bound: float) -> int:
    """Exact first index with ``key > bound``, starting from any estimate."""
    n = len(keys)
    est = min(max(est, 0), n)
    if est < n and keys[est] <= bound:
        lo, step = est + 1, 1
        hi = lo
        while hi < n and keys[hi] <= bound:
            lo = hi + 1
            hi += step
            step <<= 1
        return _upper(keys, lo, min(hi, n), bound)
    hi, step = est, 1
    lo = hi
    while lo > 0 and keys[lo - 1] > bound:
        hi = lo - 1
        lo -= step
        step <<= 1
    return _upper(keys, max(lo, 0), hi, bound)


class BinarySearch:
    """Exact lower/upper bound by bisection over the whole partition."""

    kind = "binary"
    max_error = 0

    def __init__(self, keys):
        self.keys = keys
        self.n = len(keys)

    def lower_bound(self, bound: float) -> int:
        keys = self.keys
        lo = 0
        hi = self.n
        while lo < hi:
            mid = (lo + hi) >> 1
            if keys[mid] < bound:
                lo = mid + 1
            else:
                hi = mid
        return lo

    def upper_bound(self, bound: float) -> int:
        keys = self.keys
        lo = 0
        hi = self.n
        while lo < hi:
            mid = (lo + hi) >> 1
            if keys[mid] <= bound:
                lo = mid + 1
            else:
                hi = mid
        return lo

    estimate_from = lower_bound
    estimate_to = upper_bound

    def size_bytes(self) -> int:
        return 0


def _orientation(ax, ay, bx, by, cx, cy) -> float:
    # > 0: c is counter-clockwise of a->b
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _fit_spline(keys, max_error: int) -> tuple[list[float], list[float]]:
    """Greedy one-pass error corridor over (key, first-occurrence position)."""
    xs: list[float] = []
    ys: list[float] = []
    n = len(keys)
    if n == 0:
        return xs, ys
    xs.append(keys[0])
    ys.append(0.0)
    prev_x, prev_y = keys[0], 0.0
    distinct = 1
    ux = uy = lx = ly = 0.0
    for pos in range(1, n):
        k = keys[pos]
        if k == prev_x:
            continue
        distinct += 1
        y = float(pos)
        up = y + max_error
        low = y - max_error if y > max_error else 0.0
        if distinct == 2:
            ux, uy, lx, ly = k, up, k, low
        else:
            bx, by = xs[-1], ys[-1]
            if _orientation(bx, by, ux, uy, k, y) > 0 or _orientation(bx, by, lx, ly, k, y) < 0:
                xs.append(prev_x)
                ys.append(prev_y)
                ux, uy, lx, ly = k, up, k, low
            else:
                if _orientation(bx, by, ux, uy, k, up) < 0:
                    ux, uy = k, up
                if _orientation(bx, by, lx, ly, k, low) > 0:
                    lx, ly = k, low
        prev_x, prev_y = k, y
    if distinct > 1:
        xs.append(prev_x)
        ys.append(prev_y)
    return xs, ys


class SplineModel:
    """Error-bounded linear spline over sorted float keys plus a radix table.

    The radix table is indexed by the top bits of ``ordered_bits(key) -
    ordered_bits(min_key)`` and maps each prefix to the range of spline
    points whose keys share it.
    """

    kind = "spline"

    def __init__(self, keys, max_error: int = DEFAULT_MAX_ERROR, radix_bits: int = DEFAULT_RADIX_BITS):
        if max_error < 1:
            raise ValueError("max_error must be >= 1")
        if radix_bits < 1:
            raise ValueError("radix_bits must be >= 1")
        self.keys = keys
        self.n = len(keys)
        self.max_error = max_error
        xs, ys = _fit_spline(keys, max_error)
        self.spline_keys = xs
        self.spline_pos = ys
        self.slopes = [0.0] + [
            (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]) for i in range(1, len(xs))
        ]
        if self.n:
            self.min_key = keys[0]
            self.max_key = keys[-1]
        else:
            self.min_key = self.max_key = 0.0
        # table slots stay within twice the key count
        self.radix_bits = min(radix_bits, max(1, self.n.bit_length()))
        self._build_radix()

    def _build_radix(self) -> None:
        xs = self.spline_keys
        bits = self.radix_bits
        self.min_bits = ordered_bits(self.min_key)
        span = ordered_bits(self.max_key) - self.min_bits
        shift = 0
        while (span >> shift) >= (1 << bits):
            shift += 1
        self.shift = shift
        size = (1 << bits) + 2
        table = [0] * size
        prev = 0
        for i, x in enumerate(xs):
            prefix = (ordered_bits(x) - self.min_bits) >> shift
            if prefix != prev:
                for p in range(prev + 1, prefix + 1):
                    table[p] = i
                prev = prefix
        for p in range(prev + 1, size):
            table[p] = len(xs)
        self.radix_table = table

    @property
    def spline_points(self) -> list[tuple[float, float]]:
        return list(zip(self.spline_keys, self.spline_pos))

    def segment(self, key: float) -> int:
        """Index of the first spline point with spline key >= ``key``.

        Only meaningful for ``min_key < key <= max_key``.
        """
        u = _unpack_q(_pack_d(key))[0]
        u = u ^ _MASK if u & _SIGN else u | _SIGN
        prefix = (u - self.min_bits) >> self.shift
        i = self.radix_table[prefix]
        end = self.radix_table[prefix + 1]
        xs = self.spline_keys
        if end - i > 32:
            return _lower(xs, i, end, key)
        while xs[i] < key:
            i += 1
        return i

    def interpolate(self, key: float) -> float:
        """Predicted (fractional) position of ``key``."""
        if self.n == 0 or key <= self.min_key:
            return 0.0
        if key >= self.max_key:
            return self.spline_pos[-1]
        i = self.segment(key)
        return self.spline_pos[i - 1] + (key - self.spline_keys[i - 1]) * self.slopes[i]

    def estimate_from(self, bound: float) -> int:
        if self.n == 0 or bound <= self.min_key:
            return 0
        if bound > self.max_key:
            return self.n
        return int(self.interpolate(bound))

    def estimate_to(self, bound: float) -> int:
        if self.n == 0 or bound < self.min_key:
            return 0
        if bound >= self.max_key:
            return self.n
        return int(self.interpolate(bound))

    def lower_bound(self, bound: float) -> int:
        """Exact first index with ``key >= bound``: estimate, then windowed search."""
        if bound <= self.min_key:
            return 0
        n = self.n
        if bound > self.max_key:
            return n
        u = _unpack_q(_pack_d(bound))[0]
        u = u ^ _MASK if u & _SIGN else u | _SIGN
        prefix = (u - self.min_bits) >> self.shift
        table = self.radix_table
        i = table[prefix]
        xs = self.spline_keys
        if table[prefix + 1] - i > 32:
            i = _lower(xs, i, table[prefix + 1], bound)
        else:
            while xs[i] < bound:
                i += 1
        est = int(self.spline_pos[i - 1] + (bound - xs[i - 1]) * self.slopes[i])
        keys = self.keys
        err = self.max_error
        if keys[est] < bound:
            lo = est + 1
            hi = est + err + 1
            if hi >= n:
                hi = n
            elif keys[hi] < bound:
                lo, hi = hi + 1, n
        else:
            hi = est
            lo = est - err
            if lo <= 0:
                lo = 0
            elif keys[lo - 1] >= bound:
                lo, hi = 0, lo - 1
        while lo < hi:
            mid = (lo + hi) >> 1
            if keys[mid] < bound:
                lo = mid + 1
            else:
                hi = mid
        return lo

    def upper_bound(self, bound: float) -> int:
        """Exact first index with ``key > bound``."""
        if bound < self.min_key:
            return 0
        n = self.n
        if bound >= self.max_key:
            return n
        u = _unpack_q(_pack_d(bound))[0]
        u = u ^ _MASK if u & _SIGN else u | _SIGN
        prefix = (u - self.min_bits) >> self.shift
        table = self.radix_table
        i = table[prefix]
        xs = self.spline_keys
        if table[prefix + 1] - i > 32:
            i = _lower(xs, i, table[prefix + 1], bound)
        else:
            while xs[i] < bound:
                i += 1
        if i == 0:
            est = 0
        else:
            est = int(self.spline_pos[i - 1] + (bound - xs[i - 1]) * self.slopes[i])
        keys = self.keys
        err = self.max_error
        if keys[est] <= bound:
            lo = est + 1
            hi = est + err + 1
            if hi >= n:
                hi = n
            elif keys[hi] <= bound:
                lo, hi = hi + 1, n
        else:
            hi = est
            lo = est - err
            if lo <= 0:
                lo = 0
            elif keys[lo - 1] > bound:
                lo, hi = 0, lo - 1
        while lo < hi:
            mid = (lo + hi) >> 1
            if keys[mid] <= bound:
                lo = mid + 1
            else:
                hi = mid
        return lo

    def size_bytes(self) -> int:
        return 16 * len(self.spline_keys) + 4 * len(self.radix_table) + 40


SearchModel = BinarySearch | SplineModel


def build_spline(sorted_keys, max_error: int = DEFAULT_MAX_ERROR,
                 radix_bits: int = DEFAULT_RADIX_BITS) -> SplineModel:
    return SplineModel(sorted_keys, max_error, radix_bits)


def make_model(kind: str, keys, max_error: int = DEFAULT_MAX_ERROR,
               radix_bits: int = DEFAULT_RADIX_BITS) -> SearchModel:
    if kind == "binary":
        return BinarySearch(keys)
    if kind == "spline":
        return SplineModel(keys, max_error, radix_bits)
    raise ValueError(f"unknown search kind {kind!r}; expected one of {SEARCH_KINDS}")


def search_point(points, keys, est: int, q) -> bool:
    """Whether ``q`` occurs in ``points`` (sorted by lon, ``keys`` = lons).

    Starting at the estimate: if its key is below ``q.lon`` scan up to the
    first equal key, if above scan down to the last equal key, then compare
    both coordinates across the run of equal keys. When the estimate lands
    inside the run, scan up first and then down.
    """
    n = len(keys)
    if n == 0:
        return False
    qlat, qlon = q[0], q[1]
    i = min(max(est, 0), n - 1)
    k = keys[i]
    if k < qlon:
        while i < n and keys[i] < qlon:
            i += 1
        while i < n and keys[i] == qlon:
            if points[i][0] == qlat:
                return True
            i += 1
        return False
    if k > qlon:
        while i >= 0 and keys[i] > qlon:
            i -= 1
        while i >= 0 and keys[i] == qlon:
            if points[i][0] == qlat:
                return True
            i -= 1
        return False
    j = i
    while j < n and keys[j] == qlon:
        if points[j][0] == qlat:
            return True
        j += 1
    j = i - 1
    while j >= 0 and keys[j] == qlon:
        if points[j][0] == qlat:
            return True
        j -= 1
    return False
