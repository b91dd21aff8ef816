from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate

from conewave import build_basis, build_cone
from conewave.errors import ParameterError
from conewave.harness.oracles import (
    OracleSpec,
    PlaneProfile,
    free_plane_profile,
    free_space_3d_radial,
    oracle_compare,
)
from conewave.propagator import PointPole, WaveState, evolve, initial_state, project


def gaussian_2d(d, sigma):
    return np.exp(-0.5 * (np.asarray(d) / sigma) ** 2) / (2 * math.pi * sigma**2)


class TestFreePlane:
    def test_short_time_limit(self):
        # sin(t sqrt(Delta)) / sqrt(Delta) g = t g + t^3 / 6 Delta g + ...
        sigma, t = 0.05, 1e-2
        d = np.linspace(0, 0.2, 9)
        g = gaussian_2d(d, sigma)
        lap = g * (d**2 / sigma**4 - 2 / sigma**2)
        u = free_plane_profile(d, t, sigma, tol=1e-10)
        # remainder is the t^5 / 120 Delta^2 g term; Delta^2 g peaks at d = 0 with 8 g(0) / sigma^4
        rest = t**5 / 120 * 8 / sigma**4 * g[0]
        assert np.max(np.abs(u - t * g - t**3 / 6 * lap)) < 1.5 * rest < 2e-2 * t**3 / 6 * np.max(np.abs(lap))

    def test_wave_equation(self):
        # u_tt = u_dd + u_d / d checked by centred differences
        sigma, t, h = 0.05, 0.3, 2e-3
        d = np.array([0.1, 0.2, 0.3, 0.35])
        f = lambda dd, tt: free_plane_profile(dd, tt, sigma, tol=1e-9)
        utt = (f(d, t + h) - 2 * f(d, t) + f(d, t - h)) / h**2
        udd = (f(d + h, t) - 2 * f(d, t) + f(d - h, t)) / h**2
        ud = (f(d + h, t) - f(d - h, t)) / (2 * h)
        scale = np.max(np.abs(utt))
        assert np.max(np.abs(utt - udd - ud / d)) < 2e-3 * scale

    def test_direct_double_integral(self):
        # Poisson kernel 1 / (2 pi sqrt(t^2 - s^2)) against the Gaussian, integrated by scipy
        sigma, t, d = 0.05, 0.2, 0.15

        def inner(s):
            ang = integrate.quad(lambda th: gaussian_2d(math.sqrt(d * d + s * s - 2 * d * s * math.cos(th)), sigma), 0, 2 * math.pi, limit=200)[0]
            return s * ang

        # s = t sin(psi) removes the edge singularity
        val = integrate.quad(lambda psi: inner(t * math.sin(psi)) / (2 * math.pi), 0, math.pi / 2, limit=200)[0]
        assert free_plane_profile([d], t, sigma)[0] == pytest.approx(val, rel=1e-6)

    def test_spline_table(self):
        prof = PlaneProfile(0.2, 0.05, 0.6)
        d = np.linspace(0, 0.6, 37) + 0.003
        assert np.allclose(prof(d), free_plane_profile(d, 0.2, 0.05), atol=1e-5 * np.max(np.abs(prof.u)))
        assert prof(5.0) == 0.0

    def test_validation(self):
        with pytest.raises(ParameterError):
            free_plane_profile([0.1], 0.0, 0.05)


class TestFreeSpace3D:
    def test_initial_velocity(self):
        r = np.linspace(0, 0.5, 11)
        w, h = 0.05, 1e-5
        assert np.allclose(free_space_3d_radial(r, h, w) / h, np.exp(-(r**2) / (2 * w * w)), atol=1e-6)
        assert np.all(free_space_3d_radial(r, 0.0, w) == 0.0)

    def test_wave_equation(self):
        w, t, h = 0.05, 0.3, 1e-3
        r = np.array([0.05, 0.2, 0.3, 0.4])
        f = free_space_3d_radial
        utt = (f(r, t + h, w) - 2 * f(r, t, w) + f(r, t - h, w)) / h**2
        urr = (f(r + h, t, w) - 2 * f(r, t, w) + f(r - h, t, w)) / h**2
        ur = (f(r + h, t, w) - f(r - h, t, w)) / (2 * h)
        assert np.max(np.abs(utt - urr - 2 * ur / r)) < 1e-3 * np.max(np.abs(utt))

    def test_axis_limit_continuous(self):
        assert free_space_3d_radial([1e-9], 0.2, 0.05)[0] == pytest.approx(free_space_3d_radial([1e-6], 0.2, 0.05)[0], rel=1e-6)


@pytest.fixture(scope="module")
def plane_state():
    sigma = 0.05
    basis = build_basis(build_cone("circle", 2 * math.pi, 1.0), 50, 60)
    return initial_state(basis, PointPole(0.3, 0.0, sigma))


class TestCompare:
    def test_plane(self, plane_state):
        err = oracle_compare(evolve(plane_state, 0.3), OracleSpec("FreePlane2D", r_max=0.9), (0.3, 0.0))
        assert err < 1e-3

    def test_images_three(self):
        basis = build_basis(build_cone("circle", 2 * math.pi / 3, 1.0), 20, 60)
        st = initial_state(basis, PointPole(0.3, 0.5, 0.05))
        assert oracle_compare(evolve(st, 0.3), OracleSpec("ImagesQuotient", N=3), (0.3, 0.5)) < 1e-3

    def test_space_3d(self):
        basis = build_basis(build_cone("sphere", 1.0, 1.0), 0, 80)
        w = 0.05
        b = project(basis, lambda r, y: np.exp(-(r**2) / (2 * w * w)) + 0 * y)
        st = WaveState(0.0, np.zeros_like(b), b, basis, 8 * w)
        assert oracle_compare(evolve(st, 0.3), OracleSpec("FreeSpace3DRadial", width=w)) < 1e-3

    def test_wrong_time_fails(self, plane_state):
        # the oracle is sensitive: comparing against a slightly different time is far off
        moved = evolve(plane_state, 0.3)
        moved = WaveState(0.32, moved.a, moved.b, moved.basis, moved.support, moved.sigma)
        assert oracle_compare(moved, OracleSpec("FreePlane2D", r_max=0.9), (0.3, 0.0)) > 1e-2

    def test_spec_validation(self, plane_state):
        with pytest.raises(ParameterError):
            OracleSpec("Nope")
        with pytest.raises(ParameterError):
            OracleSpec("ImagesQuotient")
        with pytest.raises(ParameterError):
            oracle_compare(plane_state, OracleSpec("ImagesQuotient", N=2), (0.3, 0.0))
        with pytest.raises(ParameterError):
            oracle_compare(plane_state, OracleSpec("FreeSpace3DRadial", width=0.05))
        with pytest.raises(ParameterError):
            oracle_compare(plane_state, OracleSpec("FreePlane2D"))
