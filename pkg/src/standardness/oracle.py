"""Sample-free ground truth for the standardness constant.

The quantity of interest is ``min_x nu(B(x, r)) / (omega_d r**d)`` over the
support. It is approximated by a minimum over a finite probe set: a dense
sweep of the boundary, an interior lattice, and a few rounds of compass
search around the best probe. For uniform laws every ball mass is exact, so
the only error is the probe spacing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .geometry import UNKNOWN, Ball, ConvexPolygon, contains, unit_ball_volume
from .sampling import DEFAULT_SEED, Distribution, RadialCombination, nu_ball_many, support

# Omega below these is indistinguishable from zero: the exact-geometry path
# only carries rounding error, Monte Carlo ball masses carry 3 standard errors.
EXACT_NOISE_FLOOR = 1e-9
MC_NOISE_SIGMAS = 3.0


class OracleRangeError(ValueError):
    """The radius is not below the support diameter."""


@dataclass(frozen=True)
class OracleConfig:
    boundary_grid: int = 2000
    interior_grid: int = 50
    refine_iters: int = 3
    mc_budget: int = 1_000_000
    noise_floor: Optional[float] = None
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.boundary_grid < 100:
            raise ValueError("boundary_grid must be >= 100")
        if self.interior_grid < 20:
            raise ValueError("interior_grid must be >= 20")
        if self.refine_iters < 0:
            raise ValueError("refine_iters must be >= 0")
        if self.mc_budget < 10_000:
            raise ValueError("mc_budget must be >= 10000")


@dataclass(frozen=True)
class OracleResult:
    value: float
    argmin: np.ndarray
    stderr: float = 0.0

    def interval(self, k: float = 3.0) -> tuple[float, float]:
        return self.value - k * self.stderr, self.value + k * self.stderr


@dataclass
class OmegaCurve:
    radii: list[float]
    omega_values: list[float]
    argmins: list[np.ndarray]
    slope: object = UNKNOWN
    noise_floor: list[float] = field(default_factory=list)
    values: list[float] = field(default_factory=list)
    # the argmin trajectory is reported, never checked against a limit point
    trajectory_checked: bool = field(default=False)

    def __post_init__(self):
        if not (len(self.radii) == len(self.omega_values) == len(self.argmins)):
            raise ValueError("radii, omega_values and argmins must have equal length")
        if any(b >= a for a, b in zip(self.radii, self.radii[1:])):
            raise ValueError("radii must be strictly decreasing")


# -- probe sets -------------------------------------------------------------


def _polygon_boundary(poly: ConvexPolygon, m: int) -> np.ndarray:
    v = poly.vertices
    e = poly.edges
    lengths = np.linalg.norm(e, axis=1)
    pts = [v]
    total = lengths.sum()
    for i in range(len(v)):
        k = max(1, int(round(m * lengths[i] / total)))
        t = np.arange(1, k) / k
        pts.append(v[i] + t[:, None] * e[i])
    return np.vstack(pts)


def _sphere_directions(d: int, m: int, seed: int) -> np.ndarray:
    if d == 1:
        return np.array([[-1.0], [1.0]])
    if d == 2:
        ang = 2.0 * np.pi * np.arange(m) / m
        return np.column_stack([np.cos(ang), np.sin(ang)])
    if d == 3:
        # Fibonacci lattice
        i = np.arange(m) + 0.5
        z = 1.0 - 2.0 * i / m
        phi = np.pi * (1.0 + 5.0**0.5) * i
        rho = np.sqrt(1.0 - z * z)
        dirs = np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])
    else:
        g = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(d, m))).standard_normal((m, d))
        dirs = g / np.linalg.norm(g, axis=1)[:, None]
    axes = np.vstack([np.eye(d), -np.eye(d)])
    return np.vstack([axes, dirs])


def _interior_lattice(shape, k: int) -> np.ndarray:
    lo, hi = shape.bounding_box()
    d = len(lo)
    # keep the lattice near k*k points whatever the dimension
    per_axis = k if d <= 2 else max(3, int(round(k ** (2.0 / d))))
    axes = [np.linspace(lo[i], hi[i], per_axis) for i in range(d)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    return grid[contains(shape, grid)]


def probe_set(shape, cfg: OracleConfig) -> np.ndarray:
    if isinstance(shape, ConvexPolygon):
        boundary = _polygon_boundary(shape, cfg.boundary_grid)
    elif isinstance(shape, Ball):
        boundary = shape.center + shape.radius * _sphere_directions(shape.dim, cfg.boundary_grid, cfg.seed)
    else:
        raise TypeError(f"not a shape: {shape!r}")
    return np.vstack([boundary, _interior_lattice(shape, cfg.interior_grid)])


def _project(shape, pts: np.ndarray) -> np.ndarray:
    """Closest points of ``shape`` to each row of ``pts``."""
    if isinstance(shape, Ball):
        rel = pts - shape.center
        norm = np.linalg.norm(rel, axis=1)
        scale = np.where(norm > shape.radius, shape.radius / np.where(norm > 0, norm, 1.0), 1.0)
        return shape.center + rel * scale[:, None]
    inside = contains(shape, pts, tol=0.0)
    out = pts.copy()
    v = shape.vertices
    e = shape.edges
    for i in np.flatnonzero(~inside):
        rel = pts[i] - v
        t = np.clip(np.einsum("ij,ij->i", rel, e) / np.einsum("ij,ij->i", e, e), 0.0, 1.0)
        cand = v + t[:, None] * e
        out[i] = cand[np.argmin(((cand - pts[i]) ** 2).sum(axis=1))]
    return out


def _argmin_lex(values: np.ndarray, pts: np.ndarray) -> int:
    # smallest value, ties broken toward the lexicographically smallest point
    keys = [pts[:, k] for k in range(pts.shape[1] - 1, -1, -1)] + [values]
    return int(np.lexsort(keys)[0])


# -- oracle operations ------------------------------------------------------


def _fractions(dist, pts, r, cfg, norm):
    vals, errs = nu_ball_many(dist, pts, r, cfg.mc_budget, cfg.seed)
    return vals / norm, errs / norm


def min_ball_fraction(dist: Distribution, r: float, cfg: Optional[OracleConfig] = None) -> OracleResult:
    """Smallest ``nu(B(x, r)) / (omega_d r**d)`` over the probe set."""
    cfg = cfg or OracleConfig()
    shape = support(dist)
    if not r > 0:
        raise ValueError("radius must be positive")
    if r >= shape.diameter():
        raise OracleRangeError(f"r={r} is not below the support diameter {shape.diameter()}")
    d = shape.dim
    norm = unit_ball_volume(d) * r**d
    pts = probe_set(shape, cfg)
    vals, errs = _fractions(dist, pts, r, cfg, norm)
    best = _argmin_lex(vals, pts)
    x, fx, ex = pts[best], vals[best], errs[best]

    step = min(r, shape.diameter() / cfg.boundary_grid * 4.0)
    dirs = np.vstack([np.eye(d), -np.eye(d)])
    for _ in range(cfg.refine_iters):
        improved = True
        while improved:
            cand = _project(shape, x + step * dirs)
            cv, ce = _fractions(dist, cand, r, cfg, norm)
            j = _argmin_lex(cv, cand)
            improved = cv[j] < fx
            if improved:
                x, fx, ex = cand[j], cv[j], ce[j]
        step *= 0.5
    return OracleResult(float(fx), np.asarray(x, dtype=float), float(ex))


def omega(dist: Distribution, r: float, upsilon_true: float, cfg: Optional[OracleConfig] = None) -> float:
    """Gap between the minimal ball fraction at radius ``r`` and the true constant."""
    return abs(min_ball_fraction(dist, r, cfg).value - float(upsilon_true))


def loglog_slope(radii: Sequence[float], omegas: Sequence[float], floor=EXACT_NOISE_FLOOR):
    """Least-squares slope of ``log omega`` against ``log r`` over points above ``floor``.

    ``floor`` is a scalar or one value per radius. Returns ``UNKNOWN`` with
    fewer than three usable points.
    """
    r = np.asarray(radii, dtype=float)
    w = np.asarray(omegas, dtype=float)
    keep = w > np.broadcast_to(np.asarray(floor, dtype=float), w.shape)
    if keep.sum() < 3:
        return UNKNOWN
    slope, _ = np.polyfit(np.log(r[keep]), np.log(w[keep]), 1)
    return float(slope)


def omega_curve(
    dist: Distribution, radii: Sequence[float], upsilon_true: float, cfg: Optional[OracleConfig] = None
) -> OmegaCurve:
    cfg = cfg or OracleConfig()
    radii = [float(r) for r in radii]
    if any(b >= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly decreasing")
    results = [min_ball_fraction(dist, r, cfg) for r in radii]
    omegas = [abs(res.value - float(upsilon_true)) for res in results]
    if cfg.noise_floor is not None:
        floor = [cfg.noise_floor] * len(radii)
    else:
        floor = [max(EXACT_NOISE_FLOOR, MC_NOISE_SIGMAS * res.stderr) for res in results]
    return OmegaCurve(
        radii=radii,
        omega_values=omegas,
        argmins=[res.argmin for res in results],
        slope=loglog_slope(radii, omegas, floor),
        noise_floor=floor,
        values=[res.value for res in results],
    )
