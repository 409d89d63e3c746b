# conflict-sim - traffic-conflict game simulation toolkit

from typing import Sequence, Tuple

import numpy as np
import shapely
from shapely.geometry import LineString, Point, Polygon, box


class Path:
    """
    An ordered polyline an agent follows from start to goal, parametrized by arc length.

    Positions requested before the start or past the goal are extrapolated along the first or last segment, which
    is how trajectories are continued after the agent leaves the mapped part of its path.

    Attributes:
        points (np.ndarray): Vertices, shape (n, 2), in meters.
        arc (np.ndarray): Cumulative arc length at every vertex, shape (n,).
        length (float): Total arc length.
        line (LineString): The same polyline as a shapely geometry.
    """

    def __init__(self, points: Sequence[Sequence[float]]):
        """
        Initialize a Path from its vertices.

        Args:
            points (Sequence[Sequence[float]]): At least two (x, y) pairs.

        Raises:
            (ValueError): If there are fewer than two points or a segment has zero length.
        """
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
            raise ValueError("a path needs at least 2 points of the form [x, y]")
        seg = np.diff(pts, axis=0)
        seg_len = np.hypot(seg[:, 0], seg[:, 1])
        if np.any(seg_len <= 0):
            raise ValueError("path arc length must be strictly increasing (repeated point)")

        self.points = pts
        self.arc = np.concatenate(([0.0], np.cumsum(seg_len)))
        self.length = float(self.arc[-1])
        self.line = LineString(pts)
        self._unit = seg / seg_len[:, None]
        self._mid = self.arc[:-1] + seg_len / 2
        self._heading = np.unwrap(np.arctan2(seg[:, 1], seg[:, 0]))

    def _segment(self, s: np.ndarray) -> np.ndarray:
        """Index of the segment each arc position falls in (first/last segment outside the path)."""
        return np.clip(np.searchsorted(self.arc, s, side="right") - 1, 0, len(self.points) - 2)

    def position(self, s) -> Tuple[np.ndarray, np.ndarray]:
        """
        Plane coordinates at arc positions.

        Args:
            s (float | np.ndarray): Arc length(s) from the path start.

        Returns:
            (Tuple[np.ndarray, np.ndarray]): x and y arrays with the shape of `s`.
        """
        s = np.asarray(s, dtype=float)
        idx = self._segment(s)
        offset = s - self.arc[idx]
        xy = self.points[idx] + offset[..., None] * self._unit[idx]
        return xy[..., 0], xy[..., 1]

    def heading(self, s) -> np.ndarray:
        """Yaw (rad) at arc positions, blended linearly between segment midpoints so that corners turn gradually."""
        return np.interp(np.asarray(s, dtype=float), self._mid, self._heading)

    def project(self, x: float, y: float) -> float:
        """Arc length of the point on the path closest to (x, y)."""
        return float(self.line.project(Point(x, y)))

    def __repr__(self) -> str:
        """Short description with vertex count and length."""
        return f"Path({len(self.points)} points, {self.length:.2f} m)"


def default_conflict_zone(a: Path, b: Path, margin: float = 1.0) -> Polygon:
    """
    Axis-aligned bounding box of the region where two paths cross, inflated by a margin.

    Args:
        a (Path): First agent path.
        b (Path): Second agent path.
        margin (float): Inflation on every side (m).

    Returns:
        (Polygon): The conflict zone.

    Raises:
        (ValueError): If the paths do not intersect.
    """
    crossing = a.line.intersection(b.line)
    if crossing.is_empty:
        raise ValueError("agent paths do not intersect; a conflict_zone must be given explicitly")
    minx, miny, maxx, maxy = crossing.bounds
    return box(minx - margin, miny - margin, maxx + margin, maxy + margin)


def is_convex(zone: Polygon) -> bool:
    """Whether a polygon is valid and equal to its convex hull."""
    return zone.is_valid and not zone.is_empty and zone.equals(zone.convex_hull)


def zone_interval(path: Path, zone: Polygon) -> Tuple[float, float]:
    """
    Arc interval over which a path runs inside a conflict zone.

    Args:
        path (Path): The agent path.
        zone (Polygon): The conflict zone.

    Returns:
        (Tuple[float, float]): Entry and exit arc lengths; the agent has cleared the zone once past the exit.

    Raises:
        (ValueError): If the path does not touch the zone.
    """
    inside = path.line.intersection(zone)
    if inside.is_empty:
        raise ValueError("path does not intersect the conflict zone")
    coords = shapely.get_coordinates(inside)
    arcs = shapely.line_locate_point(path.line, shapely.points(coords))
    return float(np.min(arcs)), float(np.max(arcs))
