"""In-memory learned spatial index over (lat, lon) points."""

from .geo import EARTH_RADIUS_M, GeoPoint, Rect, haversine, mbr_of_circle
from .index import BuildConfig, ConfigError, PartitionedIndex, TECHNIQUES, build
from .polygon import IntervalTree, Polygon, PolygonError, point_in_polygon
from .query import QueryProfile, distance_query, join_query, point_query, polygon_query, range_query
from .search import BinarySearch, SplineModel, build_spline

__all__ = [
    "EARTH_RADIUS_M", "GeoPoint", "Rect", "haversine", "mbr_of_circle",
    "BuildConfig", "ConfigError", "PartitionedIndex", "TECHNIQUES", "build",
    "IntervalTree", "Polygon", "PolygonError", "point_in_polygon",
    "QueryProfile", "distance_query", "join_query", "point_query", "polygon_query", "range_query",
    "BinarySearch", "SplineModel", "build_spline",
]
