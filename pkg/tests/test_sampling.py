import math

import numpy as np
import pytest
from scipy import stats

from standardness.geometry import Ball, ConvexPolygon, contains, make_regular_polygon, unit_square
from standardness.sampling import (
    MIN_MC_BUDGET,
    RadialCombination,
    SeedSpec,
    UniformOnShape,
    distribution_from_json,
    distribution_to_json,
    nu_ball,
    nu_ball_many,
    radial_density,
    sample,
    sample_points,
    support,
)

LAWS = {
    "triangle": UniformOnShape(make_regular_polygon(3, 1.0)),
    "square": UniformOnShape(unit_square()),
    "hexagon": UniformOnShape(make_regular_polygon(6, 1.0)),
    "disk": UniformOnShape(Ball.with_volume(2, 1.0)),
    "ball3": UniformOnShape(Ball.with_volume(3, 1.0)),
    "ball4": UniformOnShape(Ball.with_volume(4, 1.0)),
    "radial": RadialCombination(),
}


def radial_cdf(rho):
    # P(|Y| <= rho) for the radial law: a quarter uniform (rho^2), three quarters rho^4
    return 0.25 * rho**2 + 0.75 * rho**4


# -- seeds and determinism --------------------------------------------------


def test_seed_streams_are_distinct_and_reproducible():
    seeds = SeedSpec(11)
    draws = {(c, k): seeds.stream(c, k).random(4).tobytes() for c in range(3) for k in range(3)}
    assert len(set(draws.values())) == 9
    assert seeds.stream(2, 1).random(4).tobytes() == draws[(2, 1)]
    # the stream does not depend on which streams were drawn before it
    assert SeedSpec(11).stream(2, 1).random(4).tobytes() == draws[(2, 1)]


def test_seed_range():
    with pytest.raises(ValueError):
        SeedSpec(-1)
    with pytest.raises(ValueError):
        SeedSpec(2**64)
    SeedSpec(2**64 - 1)


@pytest.mark.parametrize("law", list(LAWS))
def test_sampling_is_deterministic(law):
    a = sample(LAWS[law], 500, SeedSpec(3).stream(1, 2))
    b = sample(LAWS[law], 500, SeedSpec(3).stream(1, 2))
    assert a.points.tobytes() == b.points.tobytes()


@pytest.mark.parametrize("law", list(LAWS))
def test_support_containment(law):
    dist = LAWS[law]
    pts = sample_points(dist, 20000, SeedSpec(5).stream())
    assert pts.shape == (20000, dist.dim)
    assert np.all(contains(support(dist), pts))


def test_sample_size_must_be_positive():
    with pytest.raises(ValueError):
        sample_points(LAWS["square"], 0, 1)
    with pytest.raises(ValueError):
        sample_points(LAWS["square"], 2.5, 1)


def test_support_examples():
    sq = unit_square()
    assert support(UniformOnShape(sq)) == sq
    assert support(RadialCombination()) == Ball(2, (0.0, 0.0), 1.0)
    disk = Ball(2, (0.0, 0.0), 1 / math.sqrt(math.pi))
    assert support(UniformOnShape(disk)) == disk


@pytest.mark.parametrize("law", list(LAWS))
def test_distribution_json_roundtrip(law):
    dist = LAWS[law]
    assert distribution_from_json(distribution_to_json(dist)) == dist
    with pytest.raises(ValueError):
        distribution_from_json({"type": "gaussian"})


# -- distributional checks ---------------------------------------------------


def test_square_mean():
    pts = sample_points(LAWS["square"], 100_000, SeedSpec(1).stream())
    assert np.all(np.abs(pts.mean(axis=0) - 0.5) < 0.005)


def test_ball3_inner_mass():
    dist = LAWS["ball3"]
    pts = sample_points(dist, 100_000, SeedSpec(2).stream())
    frac = np.mean(np.linalg.norm(pts, axis=1) <= dist.shape.radius / 2)
    assert abs(frac - 1 / 8) < 0.005


def test_radial_points_in_unit_disk():
    pts = sample_points(RadialCombination(), 100_000, SeedSpec(3).stream())
    assert np.all(np.linalg.norm(pts, axis=1) <= 1.0)


def _clip(poly, axis, value, keep_below):
    """Intersection of a convex polygon (vertex array) with a half-plane."""
    out = []
    for a, b in zip(poly, np.roll(poly, -1, axis=0)):
        ina = (a[axis] <= value) == keep_below
        inb = (b[axis] <= value) == keep_below
        if ina:
            out.append(a)
        if ina != inb:
            t = (value - a[axis]) / (b[axis] - a[axis])
            out.append(a + t * (b - a))
    return np.array(out)


def _shoelace(poly):
    if len(poly) < 3:
        return 0.0
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _equal_area_cuts(poly, axis, k):
    """Cut values along ``axis`` splitting ``poly`` into ``k`` equal-area slabs (bisection)."""
    total = _shoelace(poly)
    lo, hi = poly[:, axis].min(), poly[:, axis].max()
    cuts = []
    for j in range(1, k):
        a, b = lo, hi
        for _ in range(100):
            m = 0.5 * (a + b)
            if _shoelace(_clip(poly, axis, m, True)) < total * j / k:
                a = m
            else:
                b = m
        cuts.append(0.5 * (a + b))
    return cuts


def _polygon_cells(poly: ConvexPolygon, pts):
    """Cell label in a 4x4 equal-area partition: 4 vertical slabs, each cut into 4 horizontal pieces."""
    v = poly.vertices
    xcuts = _equal_area_cuts(v, 0, 4)
    col = np.searchsorted(xcuts, pts[:, 0])
    label = np.empty(len(pts), dtype=int)
    edges = [-np.inf, *xcuts, np.inf]
    for c in range(4):
        slab = v
        if c > 0:
            slab = _clip(slab, 0, edges[c], False)
        if c < 3:
            slab = _clip(slab, 0, edges[c + 1], True)
        ycuts = _equal_area_cuts(slab, 1, 4)
        sel = col == c
        label[sel] = 4 * c + np.searchsorted(ycuts, pts[sel, 1])
    return label


def _ball_cells(ball: Ball, pts):
    """4 equal-volume shells times the 4 sign quadrants of the first two coordinates."""
    rel = pts - ball.center
    u = (np.linalg.norm(rel, axis=1) / ball.radius) ** ball.dim
    shell = np.minimum((u * 4).astype(int), 3)
    quad = 2 * (rel[:, 0] >= 0) + (rel[:, 1] >= 0)
    return 4 * shell + quad


@pytest.mark.parametrize("law", ["triangle", "square", "hexagon", "disk", "ball3", "ball4"])
def test_uniformity_chi_square(law):
    dist = LAWS[law]
    pts = sample_points(dist, 100_000, SeedSpec(17).stream())
    if isinstance(dist.shape, ConvexPolygon):
        labels = _polygon_cells(dist.shape, pts)
    else:
        labels = _ball_cells(dist.shape, pts)
    observed = np.bincount(labels, minlength=16)
    assert len(observed) == 16
    assert stats.chisquare(observed).pvalue > 1e-4


def test_partition_helper_is_equal_area():
    # the slab construction itself: each of the 16 pieces of the triangle has area 1/16
    poly = make_regular_polygon(3, 1.0)
    pts = np.random.default_rng(0).random((400_000, 2)) * 3 - 1.5
    inside = pts[contains(poly, pts)]
    counts = np.bincount(_polygon_cells(poly, inside), minlength=16)
    box_area = 9.0
    areas = counts / len(pts) * box_area
    assert np.allclose(areas, 1 / 16, atol=3e-3)


def test_radial_law_distribution():
    pts = sample_points(RadialCombination(), 100_000, SeedSpec(19).stream())
    rho = np.linalg.norm(pts, axis=1)
    theta = np.arctan2(pts[:, 1], pts[:, 0])
    assert stats.kstest(radial_cdf(rho), "uniform").pvalue > 1e-4
    assert stats.kstest((theta + math.pi) / (2 * math.pi), "uniform").pvalue > 1e-4
    # radius and angle are independent: 4 radial quartiles x 4 angular quadrants
    labels = 4 * np.minimum((radial_cdf(rho) * 4).astype(int), 3) + ((theta + math.pi) // (math.pi / 2)).astype(int)
    assert stats.chisquare(np.bincount(labels, minlength=16)).pvalue > 1e-4


def test_radial_density_integrates_to_one():
    from scipy import integrate

    total, _ = integrate.quad(lambda rho: radial_density([[rho, 0.0]])[0] * 2 * math.pi * rho, 0, 1)
    assert total == pytest.approx(1.0, rel=1e-12)
    assert radial_density([[0.0, 0.0]])[0] == pytest.approx(1 / (4 * math.pi), rel=1e-15)
    assert radial_density([[1.5, 0.0]])[0] == 0.0


# -- ball masses ------------------------------------------------------------


def test_nu_ball_examples():
    assert nu_ball(LAWS["square"], (0.0, 0.0), 0.1).value == pytest.approx(math.pi * 0.01 / 4, rel=1e-12)
    disk = UniformOnShape(Ball(2, (0.0, 0.0), 1 / math.sqrt(math.pi)))
    mass = nu_ball(disk, (0.0, 0.0), 0.1)
    assert mass.value == pytest.approx(math.pi * 0.01, rel=1e-12)
    assert mass.stderr == 0.0


@pytest.mark.parametrize("law", ["triangle", "hexagon", "disk", "ball3", "ball4"])
def test_nu_ball_monotone_and_saturates(law):
    dist = LAWS[law]
    x = sample_points(dist, 1, SeedSpec(4).stream())[0]
    radii = np.linspace(0.01, 1.5 * dist.shape.diameter(), 40)
    masses = [nu_ball(dist, x, r).value for r in radii]
    assert all(b >= a - 1e-15 for a, b in zip(masses, masses[1:]))
    assert masses[-1] == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("sides", [3, 4, 6])
def test_vertex_limit(sides):
    poly = make_regular_polygon(sides, 1.0)
    dist = UniformOnShape(poly)
    r = 1e-3
    for vertex, theta in zip(poly.vertices, poly.interior_angles()):
        frac = nu_ball(dist, vertex, r).value / (math.pi * r**2)
        assert frac == pytest.approx(theta / (2 * math.pi), abs=1e-6)


def test_radial_budget_floor():
    with pytest.raises(ValueError):
        nu_ball(RadialCombination(), (0.0, 0.0), 0.3, mc_budget=MIN_MC_BUDGET - 1)


def test_radial_mass_matches_closed_form():
    # mass of B(0, 0.3): a quarter of 0.3^2 plus three quarters of 0.3^4
    exact = radial_cdf(0.3)
    assert exact == pytest.approx(0.028575, rel=1e-12)
    mass = nu_ball(RadialCombination(), (0.0, 0.0), 0.3, mc_budget=1_000_000)
    assert mass.stderr > 0
    assert abs(mass.value - exact) <= 3 * mass.stderr


def test_radial_mass_matches_large_independent_run():
    # 10^7 draws from a separate stream, counted in chunks
    rng = SeedSpec(99).stream(7, 7)
    x, r = np.array([0.4, -0.2]), 0.3
    hits, total = 0, 10_000_000
    for _ in range(10):
        pts = sample_points(RadialCombination(), total // 10, rng)
        hits += int(np.count_nonzero(((pts - x) ** 2).sum(axis=1) <= r * r))
    reference = hits / total
    mass = nu_ball(RadialCombination(), x, r, mc_budget=1_000_000)
    ref_se = math.sqrt(reference * (1 - reference) / total)
    assert abs(mass.value - reference) <= 3 * math.hypot(mass.stderr, ref_se)


def test_nu_ball_many_matches_single_queries():
    dist = LAWS["hexagon"]
    xs = sample_points(dist, 25, SeedSpec(6).stream())
    vals, errs = nu_ball_many(dist, xs, 0.2)
    assert np.all(errs == 0)
    assert vals.tolist() == [nu_ball(dist, x, 0.2).value for x in xs]
