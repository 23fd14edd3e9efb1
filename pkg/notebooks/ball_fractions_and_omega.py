"""
Sample-free ground truth: minimal ball fractions
================================================

For a uniform law the mass of any ball can be computed exactly, so the
smallest normalised ball mass ``min_x nu(B(x, r)) / (omega_d r^d)`` can be
found without sampling. Its gap ``Omega(r)`` to the true constant governs
how fast the estimators converge.
"""

from standardness import Ball, UniformOnShape, analytic_upsilon, make_regular_polygon
from standardness.oracle import min_ball_fraction, omega_curve

laws = {
    "triangle": UniformOnShape(make_regular_polygon(3, 1.0)),
    "hexagon": UniformOnShape(make_regular_polygon(6, 1.0)),
    "disk": UniformOnShape(Ball.with_volume(2, 1.0)),
    "3-ball": UniformOnShape(Ball.with_volume(3, 1.0)),
}

# %%
# At a small radius the minimal fraction is already close to the closed form:
# the sharpest vertex angle over 2 pi for polygons, one half for balls.
for name, law in laws.items():
    res = min_ball_fraction(law, 1e-3)
    print(f"{name:9s} oracle {res.value:.6f}  closed form {analytic_upsilon(law):.6f}  at {res.argmin.round(3)}")

# %%
# For polygons a small ball centred at the sharpest vertex sees exactly the
# vertex sector, so Omega vanishes once r is small. For the disk the boundary
# curves away and Omega shrinks linearly in r.
radii = [0.1, 0.05, 0.025, 0.0125]
for name in ("hexagon", "disk"):
    law = laws[name]
    curve = omega_curve(law, radii, analytic_upsilon(law))
    values = ", ".join(f"{w:.2e}" for w in curve.omega_values)
    print(f"{name:8s} Omega = [{values}]  log-log slope: {curve.slope}")
