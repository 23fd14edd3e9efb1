"""Seeded samplers and ball-mass queries for the supported laws.

Random streams come from numpy's ``SeedSequence``/``PCG64`` pair. A stream
is addressed by ``(master_seed, cell_index, replication_index)`` through
``SeedSequence(master_seed, spawn_key=(cell_index, replication_index))``,
so any replication can be regenerated on its own, in any order, on any
thread. ``STREAM_VERSION`` changes whenever that rule or the order in
which a sampler consumes draws changes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Union

import numpy as np
from scipy.spatial import cKDTree

from .estimator import SampleCloud
from .geometry import Ball, ConvexPolygon, Shape, area, ball_shape_intersection, shape_from_json, shape_to_json

STREAM_VERSION = 1
DEFAULT_SEED = 20240517
# dedicated spawn key for the Monte Carlo ball-mass stream
_MC_KEY = (2**32 - 1,)
MIN_MC_BUDGET = 10_000


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int = DEFAULT_SEED

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError("master_seed must fit in an unsigned 64-bit integer")

    def seed_sequence(self, cell_index: int, replication_index: int) -> np.random.SeedSequence:
        return np.random.SeedSequence(int(self.master_seed), spawn_key=(int(cell_index), int(replication_index)))

    def stream(self, cell_index: int = 0, replication_index: int = 0) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed_sequence(cell_index, replication_index)))


def as_generator(seed) -> np.random.Generator:
    """Accept a Generator, a SeedSpec (stream (0, 0)) or anything ``default_rng`` takes."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, SeedSpec):
        return seed.stream()
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class UniformOnShape:
    shape: Shape

    @property
    def dim(self) -> int:
        return self.shape.dim


@dataclass(frozen=True)
class RadialCombination:
    """Radial law on the closed unit disk with an antimode at the origin.

    With probability 1/4 a point is uniform on the disk (radius
    ``sqrt(U)``); otherwise its radius is ``U**(1/4)``. Angles are uniform.
    The density is ``1/(4 pi) + 3 rho**2 / (2 pi)``.
    """

    @property
    def dim(self) -> int:
        return 2


Distribution = Union[UniformOnShape, RadialCombination]

_DISK = Ball(2, (0.0, 0.0), 1.0)


def support(dist: Distribution) -> Shape:
    if isinstance(dist, UniformOnShape):
        return dist.shape
    if isinstance(dist, RadialCombination):
        return _DISK
    raise TypeError(f"unsupported distribution {dist!r}")


def _sample_triangles(tris: np.ndarray, idx: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    u = rng.random(len(idx))
    v = rng.random(len(idx))
    su = np.sqrt(u)
    a, b, c = tris[idx, 0], tris[idx, 1], tris[idx, 2]
    return (1.0 - su)[:, None] * a + (su * (1.0 - v))[:, None] * b + (su * v)[:, None] * c


def _fan(polygon: ConvexPolygon) -> tuple[np.ndarray, np.ndarray]:
    v = polygon.vertices
    centroid = v.mean(axis=0)
    nxt = np.roll(v, -1, axis=0)
    tris = np.stack([np.broadcast_to(centroid, v.shape), v, nxt], axis=1)
    e1 = tris[:, 1] - tris[:, 0]
    e2 = tris[:, 2] - tris[:, 0]
    areas = 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    return tris, areas


def _sample_polygon(polygon: ConvexPolygon, n: int, rng: np.random.Generator) -> np.ndarray:
    tris, areas = _fan(polygon)
    idx = rng.choice(len(areas), size=n, p=areas / areas.sum())
    return _sample_triangles(tris, idx, rng)


def _sample_ball(ball: Ball, n: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((n, ball.dim))
    norms = np.linalg.norm(g, axis=1)
    # a zero Gaussian vector has probability zero; redraw defensively
    while np.any(norms == 0):
        bad = norms == 0
        g[bad] = rng.standard_normal((int(bad.sum()), ball.dim))
        norms = np.linalg.norm(g, axis=1)
    radii = ball.radius * rng.random(n) ** (1.0 / ball.dim)
    return ball.center + g * (radii / norms)[:, None]


def _sample_radial(n: int, rng: np.random.Generator) -> np.ndarray:
    uniform_part = rng.random(n) < 0.25
    u = rng.random(n)
    theta = rng.uniform(0.0, 2.0 * np.pi, n)
    rho = np.where(uniform_part, np.sqrt(u), np.sqrt(np.sqrt(u)))
    return rho[:, None] * np.column_stack([np.cos(theta), np.sin(theta)])


def sample_points(dist: Distribution, n: int, rng) -> np.ndarray:
    """Draw ``n`` i.i.d. points as a plain ``(n, d)`` array."""
    if int(n) != n or n < 1:
        raise ValueError("sample size must be a positive integer")
    rng = as_generator(rng)
    if isinstance(dist, UniformOnShape):
        if isinstance(dist.shape, ConvexPolygon):
            return _sample_polygon(dist.shape, int(n), rng)
        return _sample_ball(dist.shape, int(n), rng)
    if isinstance(dist, RadialCombination):
        return _sample_radial(int(n), rng)
    raise TypeError(f"unsupported distribution {dist!r}")


def sample(dist: Distribution, n: int, rng) -> SampleCloud:
    return SampleCloud(sample_points(dist, n, rng))


class BallMass(NamedTuple):
    value: float
    stderr: float = 0.0


@lru_cache(maxsize=4)
def _mc_tree(mc_budget: int, master_seed: int) -> cKDTree:
    ss = np.random.SeedSequence(master_seed, spawn_key=_MC_KEY)
    pts = _sample_radial(mc_budget, np.random.Generator(np.random.PCG64(ss)))
    return cKDTree(pts)


def nu_ball_many(
    dist: Distribution, xs, r: float, mc_budget: int = 1_000_000, seed: int = DEFAULT_SEED
) -> tuple[np.ndarray, np.ndarray]:
    """Ball masses ``nu(B(x, r))`` for each row of ``xs`` plus standard errors.

    Uniform laws are exact. The radial law is estimated from one cached set
    of ``mc_budget`` draws, shared by every query (common random numbers).
    """
    if not r > 0:
        raise ValueError("radius must be positive")
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    if isinstance(dist, UniformOnShape):
        vol = area(dist.shape)
        vals = np.array([ball_shape_intersection(dist.shape, x, r) / vol for x in xs])
        return np.minimum(vals, 1.0), np.zeros(len(vals))
    if isinstance(dist, RadialCombination):
        if mc_budget < MIN_MC_BUDGET:
            raise ValueError(f"mc_budget must be at least {MIN_MC_BUDGET}, got {mc_budget}")
        tree = _mc_tree(int(mc_budget), int(seed))
        hits = np.asarray(tree.query_ball_point(xs, r, return_length=True), dtype=float)
        p = hits / mc_budget
        return p, np.sqrt(p * (1.0 - p) / mc_budget)
    raise TypeError(f"unsupported distribution {dist!r}")


def nu_ball(dist: Distribution, x, r: float, mc_budget: int = 1_000_000, seed: int = DEFAULT_SEED) -> BallMass:
    vals, errs = nu_ball_many(dist, np.asarray(x, dtype=float).reshape(1, -1), r, mc_budget, seed)
    return BallMass(float(vals[0]), float(errs[0]))


def distribution_to_json(dist: Distribution) -> dict:
    if isinstance(dist, UniformOnShape):
        return {"type": "uniform", "shape": shape_to_json(dist.shape)}
    if isinstance(dist, RadialCombination):
        return {"type": "radial_combination"}
    raise TypeError(f"unsupported distribution {dist!r}")


def distribution_from_json(obj: dict) -> Distribution:
    kind = obj.get("type")
    if kind == "uniform":
        return UniformOnShape(shape_from_json(obj["shape"]))
    if kind == "radial_combination":
        return RadialCombination()
    raise ValueError(f"unknown distribution type {kind!r}")


def radial_density(x) -> np.ndarray:
    """Density of :class:`RadialCombination` at the rows of ``x`` (zero off the disk)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    rho2 = (x**2).sum(axis=1)
    return np.where(rho2 <= 1.0, 0.25 / math.pi + 1.5 * rho2 / math.pi, 0.0)
