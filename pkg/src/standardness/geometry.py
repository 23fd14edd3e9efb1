"""Supports, volumes and exact ball/support intersection measures.

Two kinds of support are handled: strictly convex polygons in the plane
and Euclidean balls of any dimension. Balls are closed throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np
from scipy.special import betainc


class ShapeError(ValueError):
    """Raised for degenerate or malformed shapes."""


@lru_cache(maxsize=None)
def unit_ball_volume(d: int) -> float:
    """Lebesgue measure ``pi**(d/2) / Gamma(d/2 + 1)`` of the unit ball in ``R^d``."""
    if int(d) != d or d < 1:
        raise ValueError(f"invalid dimension {d!r}")
    d = int(d)
    return math.exp(0.5 * d * math.log(math.pi) - math.lgamma(0.5 * d + 1.0))


def ball_volume_table(max_dim: int) -> dict[int, float]:
    return {d: unit_ball_volume(d) for d in range(1, max_dim + 1)}


def _cross(a, b) -> float:
    return float(a[0] * b[1] - a[1] * b[0])


@dataclass(frozen=True, eq=False)
class ConvexPolygon:
    """Strictly convex polygon, vertices in counter-clockwise order."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=np.float64, copy=True)
        if v.ndim != 2 or v.shape[1] != 2:
            raise ShapeError("polygon vertices must be an (m, 2) array")
        if v.shape[0] < 3:
            raise ShapeError("a polygon needs at least 3 vertices")
        if not np.all(np.isfinite(v)):
            raise ShapeError("polygon vertices must be finite")
        edges = np.roll(v, -1, axis=0) - v
        turns = edges[:, 0] * np.roll(edges, -1, axis=0)[:, 1] - edges[:, 1] * np.roll(edges, -1, axis=0)[:, 0]
        if np.any(turns <= 0):
            raise ShapeError("polygon must be strictly convex and counter-clockwise")
        # left turns everywhere plus total turning 2*pi rules out self-winding
        heading = np.arctan2(edges[:, 1], edges[:, 0])
        turning = np.mod(np.roll(heading, -1) - heading, 2 * np.pi).sum()
        if abs(turning - 2 * np.pi) > 1e-9:
            raise ShapeError("polygon is not simple")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    def __eq__(self, other):
        return isinstance(other, ConvexPolygon) and np.array_equal(self.vertices, other.vertices)

    def __hash__(self):
        return hash(("polygon", self.vertices.tobytes()))

    @property
    def dim(self) -> int:
        return 2

    @property
    def edges(self) -> np.ndarray:
        return np.roll(self.vertices, -1, axis=0) - self.vertices

    def interior_angles(self) -> np.ndarray:
        v = self.vertices
        to_prev = np.roll(v, 1, axis=0) - v
        to_next = np.roll(v, -1, axis=0) - v
        cos = np.einsum("ij,ij->i", to_prev, to_next)
        sin = to_next[:, 0] * to_prev[:, 1] - to_next[:, 1] * to_prev[:, 0]
        return np.arctan2(np.abs(sin), cos)

    def perimeter(self) -> float:
        return float(np.linalg.norm(self.edges, axis=1).sum())

    def diameter(self) -> float:
        diff = self.vertices[:, None, :] - self.vertices[None, :, :]
        return float(np.sqrt((diff**2).sum(-1)).max())

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)


@dataclass(frozen=True, eq=False)
class Ball:
    """Closed ball ``B(center, radius)`` in ``R^dim``."""

    dim: int
    center: np.ndarray
    radius: float

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ShapeError(f"invalid ball dimension {self.dim!r}")
        c = np.array(self.center, dtype=np.float64, copy=True).reshape(-1)
        if c.shape[0] != self.dim:
            raise ShapeError(f"center has {c.shape[0]} coordinates, expected {self.dim}")
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ShapeError("ball radius must be positive")
        c.setflags(write=False)
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    def __eq__(self, other):
        return (
            isinstance(other, Ball)
            and self.dim == other.dim
            and self.radius == other.radius
            and np.array_equal(self.center, other.center)
        )

    def __hash__(self):
        return hash(("ball", self.dim, self.radius, self.center.tobytes()))

    @classmethod
    def with_volume(cls, dim: int, volume: float = 1.0, center=None) -> "Ball":
        radius = (volume / unit_ball_volume(dim)) ** (1.0 / dim)
        return cls(dim, np.zeros(dim) if center is None else center, radius)

    def diameter(self) -> float:
        return 2.0 * self.radius

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.center - self.radius, self.center + self.radius


Shape = Union[ConvexPolygon, Ball]


def area(shape: Shape) -> float:
    """Lebesgue measure of the shape."""
    if isinstance(shape, ConvexPolygon):
        x, y = shape.vertices.T
        a = 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))
        if not a > 0:
            raise ShapeError("degenerate polygon")
        return a
    if isinstance(shape, Ball):
        return unit_ball_volume(shape.dim) * shape.radius**shape.dim
    raise TypeError(f"not a shape: {shape!r}")


def contains(shape: Shape, x, tol: float = 1e-12) -> bool | np.ndarray:
    """Closed membership test; accepts one point or an ``(m, d)`` array."""
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if isinstance(shape, ConvexPolygon):
        v = shape.vertices
        e = shape.edges
        rel = pts[:, None, :] - v[None, :, :]
        side = e[None, :, 0] * rel[..., 1] - e[None, :, 1] * rel[..., 0]
        scale = np.linalg.norm(e, axis=1)[None, :] * max(1.0, shape.diameter())
        inside = np.all(side >= -tol * scale, axis=1)
    elif isinstance(shape, Ball):
        dist = np.linalg.norm(pts - shape.center, axis=1)
        inside = dist <= shape.radius * (1.0 + tol)
    else:
        raise TypeError(f"not a shape: {shape!r}")
    return bool(inside[0]) if single else inside


_REGULAR_SIDES = (3, 4, 6)


def make_regular_polygon(sides: int, target_area: float = 1.0) -> ConvexPolygon:
    """Regular polygon centred at the origin with a horizontal bottom edge."""
    if sides not in _REGULAR_SIDES:
        raise ShapeError(f"unsupported side count {sides}; expected one of {_REGULAR_SIDES}")
    if not target_area > 0:
        raise ShapeError("target area must be positive")
    circumradius = math.sqrt(2.0 * target_area / (sides * math.sin(2.0 * math.pi / sides)))
    start = -0.5 * math.pi + math.pi / sides
    angles = start + 2.0 * math.pi * np.arange(sides) / sides
    verts = circumradius * np.column_stack([np.cos(angles), np.sin(angles)])
    return ConvexPolygon(verts)


def unit_square() -> ConvexPolygon:
    return ConvexPolygon([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def min_interior_angle(polygon: ConvexPolygon) -> float:
    if not isinstance(polygon, ConvexPolygon):
        raise TypeError("min_interior_angle needs a ConvexPolygon")
    return float(polygon.interior_angles().min())


# -- disk / polygon ---------------------------------------------------------


def _segment_disk_area(a: np.ndarray, b: np.ndarray, r: float) -> float:
    """Signed area of ``B(0, r)`` intersected with the triangle ``(0, a, b)``."""
    d = b - a
    qa = float(d @ d)
    if qa == 0.0:
        return 0.0
    qb = float(a @ d)
    qc = float(a @ a) - r * r
    cuts = [0.0]
    disc = qb * qb - qa * qc
    if disc > 0.0:
        sq = math.sqrt(disc)
        for t in ((-qb - sq) / qa, (-qb + sq) / qa):
            if 0.0 < t < 1.0:
                cuts.append(t)
    cuts.append(1.0)
    total = 0.0
    for t0, t1 in zip(cuts[:-1], cuts[1:]):
        p = a + t0 * d
        q = a + t1 * d
        m = a + 0.5 * (t0 + t1) * d
        if float(m @ m) <= r * r:
            total += 0.5 * _cross(p, q)
        else:
            total += 0.5 * r * r * math.atan2(_cross(p, q), float(p @ q))
    return total


def disk_polygon_area(polygon: ConvexPolygon, x, r: float) -> float:
    """Exact area of ``B(x, r)`` intersected with a polygon."""
    rel = polygon.vertices - np.asarray(x, dtype=float)
    nxt = np.roll(rel, -1, axis=0)
    total = 0.0
    for a, b in zip(rel, nxt):
        total += _segment_disk_area(a, b, r)
    return min(max(total, 0.0), math.pi * r * r)


# -- ball / ball ------------------------------------------------------------


def cap_volume(d: int, r: float, h: float) -> float:
    """Volume of the cap of height ``h`` (``0 <= h <= 2r``) cut from a ``d``-ball of radius ``r``.

    Uses ``cap = omega_d r**d I_x((d+1)/2, 1/2) / 2`` with ``x = h (2r - h) / r**2``
    for ``h <= r``, which stays accurate for caps many orders of magnitude
    thinner than the ball.
    """
    h = min(max(h, 0.0), 2.0 * r)
    if d == 1:
        return h
    full = unit_ball_volume(d) * r**d
    if h > r:
        return full - cap_volume(d, r, 2.0 * r - h)
    x = h * (2.0 * r - h) / (r * r)
    return 0.5 * full * float(betainc(0.5 * (d + 1), 0.5, x))


def ball_ball_volume(d: int, dist: float, r1: float, r2: float) -> float:
    """Volume of the intersection of two closed ``d``-balls at centre distance ``dist``."""
    if dist >= r1 + r2:
        return 0.0
    if dist + r1 <= r2:
        return unit_ball_volume(d) * r1**d
    if dist + r2 <= r1:
        return unit_ball_volume(d) * r2**d
    # signed distances from each centre to the radical hyperplane
    a1 = (dist * dist + r1 * r1 - r2 * r2) / (2.0 * dist)
    a2 = dist - a1
    return cap_volume(d, r1, r1 - a1) + cap_volume(d, r2, r2 - a2)


def ball_shape_intersection(shape: Shape, x, r: float) -> float:
    """Lebesgue measure of ``B(x, r)`` intersected with ``shape``."""
    if not r > 0:
        raise ValueError("radius must be positive")
    x = np.asarray(x, dtype=float).reshape(-1)
    if isinstance(shape, ConvexPolygon):
        if x.shape[0] != 2:
            raise ValueError("polygon queries need a 2-D point")
        return disk_polygon_area(shape, x, r)
    if isinstance(shape, Ball):
        if x.shape[0] != shape.dim:
            raise ValueError(f"point has {x.shape[0]} coordinates, ball has dimension {shape.dim}")
        dist = float(np.linalg.norm(x - shape.center))
        return ball_ball_volume(shape.dim, dist, r, shape.radius)
    raise TypeError(f"not a shape: {shape!r}")


# -- standardness constants -------------------------------------------------


class _Unknown:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "UNKNOWN"

    def __bool__(self):
        return False


UNKNOWN = _Unknown()


def analytic_upsilon(dist):
    """Closed-form standardness constant, or ``UNKNOWN``.

    Uniform law on a convex polygon: smallest interior angle over
    ``2 pi area``. Uniform law on a ball: ``1 / (2 volume)``. The radial
    mixture on the unit disk: ``1 / (4 pi)``, the mixture density at the
    origin.
    """
    from .sampling import RadialCombination, UniformOnShape

    if isinstance(dist, UniformOnShape):
        shape = dist.shape
        if isinstance(shape, ConvexPolygon):
            return min_interior_angle(shape) / (2.0 * math.pi * area(shape))
        if isinstance(shape, Ball):
            return 1.0 / (2.0 * area(shape))
    if isinstance(dist, RadialCombination):
        return 1.0 / (4.0 * math.pi)
    return UNKNOWN


# -- JSON -------------------------------------------------------------------


def shape_to_json(shape: Shape) -> dict:
    if isinstance(shape, ConvexPolygon):
        return {"type": "polygon", "vertices": shape.vertices.tolist()}
    if isinstance(shape, Ball):
        return {"type": "ball", "dim": shape.dim, "center": shape.center.tolist(), "radius": shape.radius}
    raise TypeError(f"not a shape: {shape!r}")


def shape_from_json(obj: dict) -> Shape:
    kind = obj.get("type")
    if kind == "polygon":
        return ConvexPolygon(obj["vertices"])
    if kind == "ball":
        dim = int(obj["dim"])
        center = obj.get("center", [0.0] * dim)
        return Ball(dim, center, float(obj["radius"]))
    raise ShapeError(f"unknown shape type {kind!r}")
