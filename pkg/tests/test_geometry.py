from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conewave.errors import ParameterError
from conewave.geometry import (
    TOL_HIT,
    build_cone,
    fold_angle,
    geodesic,
    hits_boundary,
    near_miss_limit,
    pi_relation,
    sphere_distance,
)

TWO_PI = 2 * math.pi


class TestBuildCone:
    def test_trivial_flags(self):
        assert build_cone("circle", TWO_PI, 1.0).trivial
        assert build_cone("sphere", 1.0, 1.0).trivial
        assert not build_cone("circle", 1.5 * math.pi, 1.0).trivial
        assert not build_cone("sphere", 2.0, 1.0).trivial

    def test_dimensions(self):
        assert build_cone("circle", 1.0, 1.0).n == 2
        assert build_cone("sphere", 1.0, 1.0).n == 3

    @pytest.mark.parametrize("kind, param, R", [("circle", 0, 1), ("circle", -1, 1), ("sphere", 0, 1), ("circle", 1, 0), ("sphere", 1, -2)])
    def test_nonpositive_rejected(self, kind, param, R):
        with pytest.raises(ParameterError):
            build_cone(kind, param, R)

    def test_unknown_kind(self):
        with pytest.raises(ParameterError):
            build_cone("torus", 1.0, 1.0)

    def test_custom_needs_dimension(self, tmp_path):
        p = tmp_path / "s.txt"
        p.write_text("0 1\n1 2\n")
        with pytest.raises(ParameterError):
            build_cone("custom", p, 1.0)
        model = build_cone("custom", p, 1.0, n=4)
        assert model.n == 4 and len(model.spectrum(0)) == 2

    def test_description_round_trip(self):
        for model in (build_cone("circle", 1.5 * math.pi, 0.8), build_cone("sphere", 2.0, 1.0)):
            assert type(model).from_description(model.describe()) == model


class TestGeodesic:
    def test_radial_inward(self):
        model = build_cone("circle", 1.5 * math.pi, 1.0)
        seg = geodesic(model, (0.7, 1.0), (-1.0, 0.0))
        s = np.linspace(0, 0.7, 11)
        assert np.allclose(seg.radius(s), 0.7 - s, atol=1e-12)
        assert seg.radius(0.7) == pytest.approx(0.0, abs=1e-12)

    def test_zero_direction(self):
        with pytest.raises(ParameterError):
            geodesic(build_cone("circle", 1.0, 1.0), (0.5, 0.0), (0.0, 0.0))

    def test_start_at_tip(self):
        with pytest.raises(ParameterError):
            geodesic(build_cone("circle", 1.0, 1.0), (0.0, 0.0), (1.0, 0.0))

    @given(
        st.floats(0.1, 3.0),
        st.floats(0.05, 2.0),
        st.floats(0.0, 2 * math.pi),
        st.floats(-1.0, 1.0).filter(lambda v: abs(v) > 1e-3),
        st.floats(-1.0, 1.0),
    )
    def test_unit_speed_and_pythagoras(self, rho_over_pi, r0, y0, vr, vt):
        model = build_cone("circle", rho_over_pi * math.pi, 1.0)
        seg = geodesic(model, (r0, y0), (vr, vt))
        s = np.linspace(-3.0, 3.0, 41)
        radial, tangential = seg.velocity(s)
        off_tip = seg.radius(s) > 0
        assert np.max(np.abs(radial**2 + tangential**2 - 1)[off_tip]) < 1e-12
        r = seg.radius(s)
        b = r0 * math.sin(seg.alpha)
        assert np.max(np.abs(r**2 - b**2 - (s + r0 * math.cos(seg.alpha)) ** 2)) < 1e-12
        # finite-difference speed of the closed-form path, |r'|^2 + r^2 |s'|^2;
        # the stencil error grows like (h / r)^4, so stay away from the tip
        h = 1e-3
        pts = s[seg.radius(s) > 0.2]
        dr = (-seg.radius(pts + 2 * h) + 8 * seg.radius(pts + h) - 8 * seg.radius(pts - h) + seg.radius(pts - 2 * h)) / (12 * h)
        tu = np.unwrap(np.stack([seg.turning(pts + k * h) for k in (-2, -1, 1, 2)]), axis=0)
        dth = (-tu[3] + 8 * tu[2] - 8 * tu[1] + tu[0]) / (12 * h)
        speed = dr**2 + seg.radius(pts) ** 2 * dth**2
        assert np.max(np.abs(speed - 1)) < 1e-8

    def test_velocity_undefined_at_tip(self):
        seg = geodesic(build_cone("circle", math.pi, 1.0), (0.75, 0.0), (1.0, 0.0))
        radial, tangential = seg.velocity(np.array([-0.75, 0.0]))
        assert np.isnan(radial[0]) and np.isnan(tangential[0])
        assert radial[1] == 1.0 and tangential[1] == 0.0

    def test_turning_tends_to_pi(self):
        model = build_cone("circle", 1.5 * math.pi, 1.0)
        prev = None
        for b in (0.1, 0.01, 0.001, 1e-6):
            seg = geodesic(model, (1.0, 0.0), (-math.sqrt(1 - b * b), b))
            gap = math.pi - seg.exit_turning()
            assert gap > 0 and (prev is None or gap < prev)
            prev = gap
        assert prev < 2e-6
        assert seg.total_turning() == math.pi

    @given(st.floats(0.05, 0.99), st.floats(0.0, 2 * math.pi))
    def test_plane_paths_do_not_wrap(self, b, y0):
        # total turning pi < 2 pi, and the boundary angle moves monotonically
        seg = geodesic(build_cone("circle", TWO_PI, 1.0), (1.0, y0), (-math.sqrt(1 - b * b), b))
        s = np.linspace(-50, 50, 2001)
        th = seg.turning(s)
        assert np.all(np.diff(th) > 0)
        assert th[-1] - th[0] < TWO_PI

    def test_plane_is_straight_line(self):
        model = build_cone("circle", TWO_PI, 1.0)
        seg = geodesic(model, (0.8, 0.3), (-0.6, 0.8))
        s = np.linspace(-1, 2, 13)
        ang = seg.boundary_point(s)
        pts = np.c_[seg.radius(s) * np.cos(ang), seg.radius(s) * np.sin(ang)]
        d = pts[1:] - pts[:-1]
        cross = d[:-1, 0] * d[1:, 1] - d[:-1, 1] * d[1:, 0]
        assert np.max(np.abs(cross)) < 1e-12
        assert np.allclose(np.linalg.norm(d, axis=1), 0.25, atol=1e-12)


class TestHitsBoundary:
    def test_radial(self):
        seg = geodesic(build_cone("circle", 1.5 * math.pi, 1.0), (0.6, 1.2), (-1.0, 0.0))
        assert hits_boundary(seg) == pytest.approx((0.6, 1.2))

    def test_miss(self):
        r0 = 0.6
        seg = geodesic(build_cone("circle", 1.5 * math.pi, 1.0), (r0, 0.0), (-math.sqrt(0.99), 0.1))
        assert seg.impact == pytest.approx(0.1 * r0)
        assert hits_boundary(seg) is None

    def test_outgoing_radial_misses(self):
        seg = geodesic(build_cone("circle", 1.0, 1.0), (0.6, 0.0), (1.0, 0.0))
        assert hits_boundary(seg) is None

    def test_sphere_meridian(self):
        seg = geodesic(build_cone("sphere", 2.0, 1.0), (0.4, (0.7, 0.0)), (-1.0, 0.0))
        t_bar, foot = hits_boundary(seg)
        assert t_bar == pytest.approx(0.4)
        assert foot == (0.7, 0.0)

    def test_tolerance(self):
        model = build_cone("circle", 1.0, 1.0)
        b = 0.5 * TOL_HIT
        seg = geodesic(model, (1.0, 0.0), (-math.sqrt(1 - b * b), b))
        assert hits_boundary(seg) is not None


class TestPiRelation:
    def test_plane_antipode(self):
        rel = pi_relation(build_cone("circle", TWO_PI, 1.0), 0.0)
        assert rel.points == pytest.approx((math.pi,))

    def test_three_pi(self):
        rel = pi_relation(build_cone("circle", 3 * math.pi, 1.0), 0.0)
        assert rel.points == pytest.approx((math.pi, 2 * math.pi))

    def test_wedge(self):
        rho = 1.5 * math.pi
        rel = pi_relation(build_cone("circle", rho, 1.0), 0.0)
        assert rel.points == pytest.approx((0.5 * math.pi, math.pi))

    def test_unit_sphere_antipodal(self):
        rel = pi_relation(build_cone("sphere", 1.0, 1.0), 0.3)
        assert rel.distance == pytest.approx(math.pi)
        assert rel.contains((math.pi - 0.3, math.pi))

    def test_sphere_c2_equator(self):
        rel = pi_relation(build_cone("sphere", 2.0, 1.0), 0.0)
        assert rel.distance == pytest.approx(math.pi / 2)
        assert rel.contains((math.pi / 2, 1.234))
        assert not rel.contains((1.0, 0.0))

    @given(st.floats(0.1, 10))
    def test_fold_is_triangle_wave(self, d):
        f = float(fold_angle(d))
        assert 0 <= f <= math.pi
        assert math.isclose(math.cos(f), math.cos(d), abs_tol=1e-12)


class TestNearMiss:
    IMPACTS = 2.0 ** -np.arange(4, 16)

    def test_plane(self):
        lim = near_miss_limit(build_cone("circle", TWO_PI, 1.0), 0.4, self.IMPACTS)
        for foot in lim.feet:
            assert foot == pytest.approx(0.4 + math.pi, abs=1e-6)
        assert lim.rate > 0.9

    def test_wedge(self):
        rho = 1.5 * math.pi
        model = build_cone("circle", rho, 1.0)
        lim = near_miss_limit(model, 0.0, self.IMPACTS)
        rel = pi_relation(model, 0.0)
        assert sorted(lim.feet) == pytest.approx(sorted(rel.points), abs=1e-6)

    def test_sphere_c2(self):
        lim = near_miss_limit(build_cone("sphere", 2.0, 1.0), 0.0, self.IMPACTS)
        for beta, _ in lim.feet:
            assert beta == pytest.approx(math.pi / 2, abs=1e-6)

    @pytest.mark.parametrize("bad", [[0.1, 0.2], [0.1, 0.1], [0.1, -0.01], [0.1]])
    def test_bad_impacts(self, bad):
        with pytest.raises(ParameterError):
            near_miss_limit(build_cone("circle", 1.0, 1.0), 0.0, bad)

    def test_random_feet_inside_relation(self, rng):
        for _ in range(100):
            if rng.random() < 0.5:
                model = build_cone("circle", rng.uniform(0.3, 4.0) * math.pi, 1.0)
                p = rng.uniform(0, model.boundary.rho)
                lim = near_miss_limit(model, p, self.IMPACTS, direction=rng.choice([-1.0, 1.0]))
            else:
                model = build_cone("sphere", rng.uniform(0.3, 3.0), 1.0)
                p = (rng.uniform(0, math.pi), rng.uniform(0, TWO_PI))
                lim = near_miss_limit(model, p, self.IMPACTS, direction=rng.uniform(0, TWO_PI))
            rel = pi_relation(model, p)
            for foot in lim.feet:
                assert rel.contains(foot, tol=1e-6)

    def test_sphere_distance_symmetric(self):
        a, b = (0.3, 1.0), (2.0, 4.0)
        assert sphere_distance(a, b) == pytest.approx(sphere_distance(b, a))
