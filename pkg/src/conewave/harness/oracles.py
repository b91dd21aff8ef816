"""Closed-form free-space solutions used to validate the spectral propagator.

These are computed independently of the Fourier-Bessel machinery: the
planar oracle is a direct quadrature of the free-space kernel against the
Gaussian mollifier, and the 3D oracle is the spherical-means formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .._numerics import composite_gauss_legendre
from ..errors import NumericError, ParameterError, WallShadowError
from ..geometry import Circle, ScaledSphere
from ..propagator import WaveState, synthesize_many

ORACLE_NAMES = ("FreePlane2D", "FreeSpace3DRadial", "ImagesQuotient")


def _plane_profile_at(d: float, t: float, sigma: float, n: int) -> float:
    # u(d) = (1 / 2 pi sigma^2) int_0^{pi/2} s exp(-(d - s)^2 / 2 sigma^2) I0e(d s / sigma^2) dpsi,
    # with s = t sin(psi); the substitution removes the 1/sqrt(t^2 - s^2) edge
    lo = max(0.0, d - 9.0 * sigma)
    hi = min(t, d + 9.0 * sigma)
    if hi <= lo:
        return 0.0
    s_breaks = np.linspace(lo, hi, 25)
    psi_breaks = np.unique(np.concatenate([[0.0], np.arcsin(np.clip(s_breaks / t, 0.0, 1.0)), [0.5 * math.pi]]))
    psi, w = composite_gauss_legendre(psi_breaks, n)
    s = t * np.sin(psi)
    f = s * np.exp(-0.5 * ((d - s) / sigma) ** 2) * special.i0e(d * s / sigma**2)
    return float(w @ f) / (2.0 * math.pi * sigma**2)


def free_plane_profile(d, t: float, sigma: float, tol: float = 1e-5) -> np.ndarray:
    """Mollified free-plane solution as a function of distance ``d`` to the pole.

    ``sin(t sqrt(Delta)) / sqrt(Delta)`` applied to a Gaussian of standard
    deviation ``sigma``; each value is refined until two successive rules
    agree to ``tol`` relative to the profile maximum.
    """
    if t <= 0 or sigma <= 0:
        raise ParameterError("time and mollification width must be positive")
    d = np.atleast_1d(np.asarray(d, dtype=float))
    coarse = np.array([_plane_profile_at(x, t, sigma, 12) for x in d])
    fine = np.array([_plane_profile_at(x, t, sigma, 24) for x in d])
    scale = max(np.max(np.abs(fine)), 1e-300)
    if np.max(np.abs(fine - coarse)) > tol * scale:
        finer = np.array([_plane_profile_at(x, t, sigma, 48) for x in d])
        if np.max(np.abs(finer - fine)) > tol * scale:
            raise NumericError("free-plane quadrature did not stabilise")
        fine = finer
    return fine


class PlaneProfile:
    """Tabulated free-plane profile, interpolated with a cubic spline in ``d``."""

    def __init__(self, t: float, sigma: float, d_max: float, step: float | None = None):
        from scipy.interpolate import CubicSpline

        step = sigma / 8.0 if step is None else step
        self.d = np.arange(0.0, d_max + 2 * step, step)
        self.u = free_plane_profile(self.d, t, sigma)
        self._spline = CubicSpline(self.d, self.u)
        self.d_max = self.d[-1]

    def __call__(self, d):
        d = np.asarray(d, dtype=float)
        return np.where(d <= self.d_max, self._spline(np.minimum(d, self.d_max)), 0.0)


def free_space_3d_radial(r, t: float, width: float) -> np.ndarray:
    """Spherical-means solution with ``u = 0`` and Gaussian ``du/dt = exp(-r^2 / 2 w^2)``.

    ``u(t, r) = (1 / 2r) int_{|r-t|}^{r+t} s g(s) ds`` in closed form, with
    the ``r -> 0`` limit ``t g(t)``.
    """
    r = np.asarray(r, dtype=float)
    w2 = width * width
    out = np.empty_like(r)
    small = r < 1e-8
    rr = r[~small]
    out[~small] = (w2 / (2.0 * rr)) * (np.exp(-((rr - t) ** 2) / (2 * w2)) - np.exp(-((rr + t) ** 2) / (2 * w2)))
    out[small] = t * np.exp(-t * t / (2 * w2))
    return out


@dataclass(frozen=True)
class OracleSpec:
    """Which closed form to compare against, on which region, at what tolerance."""

    kind: str
    r_max: float = 0.9
    tol: float = 1e-3
    N: int | None = None
    width: float | None = None

    def __post_init__(self):
        if self.kind not in ORACLE_NAMES:
            raise ParameterError(f"unknown oracle {self.kind!r}; choose from {', '.join(ORACLE_NAMES)}")
        if self.kind == "ImagesQuotient" and (self.N is None or self.N < 1):
            raise ParameterError("ImagesQuotient needs a positive image count N")


def _check_oracle_model(state: WaveState, spec: OracleSpec) -> None:
    boundary = state.model.boundary
    if spec.kind == "FreePlane2D":
        if not (isinstance(boundary, Circle) and abs(boundary.rho - 2 * math.pi) < 1e-12):
            raise ParameterError("FreePlane2D requires the trivial 2D cone (rho = 2 pi)")
    elif spec.kind == "ImagesQuotient":
        if not (isinstance(boundary, Circle) and abs(boundary.rho * spec.N - 2 * math.pi) < 1e-12):
            raise ParameterError(f"ImagesQuotient({spec.N}) requires rho = 2 pi / {spec.N}")
    elif not (isinstance(boundary, ScaledSphere) and abs(boundary.c - 1.0) < 1e-12):
        raise ParameterError("FreeSpace3DRadial requires the trivial 3D cone (c = 1)")


def comparison_grid(state: WaveState, r_max: float, nr: int | None = None, ny: int | None = None):
    """Radial Gauss panels on ``[0, r_max]`` and a boundary rule, with combined weights."""
    sigma = state.sigma if state.sigma > 0 else 0.01
    nr_panels = nr or int(math.ceil(r_max / (2.0 * sigma)))
    r, wr = composite_gauss_legendre(np.linspace(0.0, r_max, nr_panels + 1), 8)
    wr = wr * r ** (state.model.n - 1)
    if isinstance(state.model.boundary, ScaledSphere):
        ny = ny or 64
    else:
        # the trapezoid rule is exact for |u - ref|^2 once ny exceeds twice the top mode
        top = int(np.max(np.abs(state.basis.spectrum.index)))
        ny = ny or 2 ** int(math.ceil(math.log2(4 * top + 2)))
    y, wy = state.basis.spectrum.quadrature(ny)
    return r, wr, y, wy


def oracle_field(state: WaveState, spec: OracleSpec, pole, r, y) -> np.ndarray:
    """Oracle values on the tensor grid ``r x y``."""
    t = state.t
    if spec.kind == "FreeSpace3DRadial":
        if spec.width is None:
            raise ParameterError("FreeSpace3DRadial needs the Gaussian width of the data")
        return np.broadcast_to(free_space_3d_radial(r, t, spec.width)[:, None], (len(r), len(y)))
    xbar, p = pole
    sigma = state.sigma
    profile = PlaneProfile(t, sigma, np.max(r) + xbar + t)
    count = 1 if spec.kind == "FreePlane2D" else spec.N
    step = 2 * math.pi / count
    x = r[:, None] * np.cos(y)[None, :]
    z = r[:, None] * np.sin(y)[None, :]
    out = np.zeros((len(r), len(y)))
    for k in range(count):
        ang = float(p) + k * step
        d = np.hypot(x - xbar * math.cos(ang), z - xbar * math.sin(ang))
        out += profile(d)
    return out


def oracle_compare(state: WaveState, spec: OracleSpec, pole=None) -> float:
    """Relative L2 error of the synthesized ``u`` against the oracle on ``r <= spec.r_max``."""
    _check_oracle_model(state, spec)
    if state.support is not None and spec.r_max > state.basis.R:
        raise WallShadowError("comparison region extends past the truncation radius")
    if spec.kind != "FreeSpace3DRadial" and pole is None:
        raise ParameterError("planar oracles need the pole (xbar, p)")
    r, wr, y, wy = comparison_grid(state, spec.r_max)
    ref = oracle_field(state, spec, pole, r, y)
    u = synthesize_many([state], r, y)[0]
    w = wr[:, None] * wy[None, :]
    ref_norm = math.sqrt(float(np.sum(w * ref**2)))
    err = math.sqrt(float(np.sum(w * (u - ref) ** 2)))
    if ref_norm == 0.0:
        return 0.0 if err == 0.0 else math.inf
    return err / ref_norm
