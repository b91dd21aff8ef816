"""Product cones, their geodesics, and the length-pi boundary relation.

A product cone carries the metric ``dr^2 + r^2 h0`` where ``h0`` is a
fixed metric on the cross-section: a circle of circumference ``rho``
(``n = 2``) or a round sphere of radius ``c`` (``n = 3``).  Every geodesic
that misses the tip lies in the 2D cone over one boundary geodesic, and
that 2D cone develops isometrically onto a plane sector, so all paths here
are closed-form straight lines in developed coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import ParameterError
from .spectrum import BoundarySpectrum, bessel_order, circle_spectrum, load_spectrum, sphere_axisym_spectrum

TWO_PI = 2.0 * math.pi

#: impact parameters below ``TOL_HIT * r0`` count as hitting the tip
TOL_HIT = 1e-9


@dataclass(frozen=True)
class Circle:
    rho: float

    def __post_init__(self):
        if not (math.isfinite(self.rho) and self.rho > 0):
            raise ParameterError(f"circle circumference must be positive, got {self.rho}")


@dataclass(frozen=True)
class ScaledSphere:
    c: float

    def __post_init__(self):
        if not (math.isfinite(self.c) and self.c > 0):
            raise ParameterError(f"sphere radius must be positive, got {self.c}")


@dataclass(frozen=True)
class CustomSpectrum:
    path: str


Boundary = Union[Circle, ScaledSphere, CustomSpectrum]


@dataclass(frozen=True)
class ConeModel:
    """Truncated product cone ``(0, R] x boundary``."""

    n: int
    boundary: Boundary
    R: float

    def __post_init__(self):
        if not (math.isfinite(self.R) and self.R > 0):
            raise ParameterError(f"truncation radius must be positive, got {self.R}")
        if isinstance(self.boundary, Circle) and self.n != 2:
            raise ParameterError("a circle cross-section gives n = 2")
        if isinstance(self.boundary, ScaledSphere) and self.n != 3:
            raise ParameterError("a sphere cross-section gives n = 3")
        if isinstance(self.boundary, CustomSpectrum) and self.n < 2:
            raise ParameterError("dimension must be >= 2")

    @property
    def trivial(self) -> bool:
        """True for the flat cones: the plane (rho = 2pi) or 3-space (c = 1)."""
        b = self.boundary
        if isinstance(b, Circle):
            return math.isclose(b.rho, TWO_PI, rel_tol=1e-14, abs_tol=0.0)
        if isinstance(b, ScaledSphere):
            return math.isclose(b.c, 1.0, rel_tol=1e-14, abs_tol=0.0)
        return False

    @property
    def kind(self) -> str:
        return {Circle: "circle", ScaledSphere: "sphere", CustomSpectrum: "custom"}[type(self.boundary)]

    @property
    def boundary_length(self) -> float:
        """Length of the cross-section geodesics: rho, or 2 pi c."""
        b = self.boundary
        if isinstance(b, Circle):
            return b.rho
        if isinstance(b, ScaledSphere):
            return TWO_PI * b.c
        raise ParameterError("custom spectra carry no boundary geometry")

    def spectrum(self, size: int) -> BoundarySpectrum:
        """Boundary modes: ``|j| <= size`` (circle), ``l <= size`` (sphere), or the file."""
        b = self.boundary
        if isinstance(b, Circle):
            return circle_spectrum(b.rho, size)
        if isinstance(b, ScaledSphere):
            return sphere_axisym_spectrum(b.c, size)
        return load_spectrum(b.path)

    def orders(self, spectrum: BoundarySpectrum) -> np.ndarray:
        return np.atleast_1d(bessel_order(spectrum.mu, self.n))

    def describe(self) -> dict:
        b = self.boundary
        d = {"n": self.n, "kind": self.kind, "R": self.R}
        if isinstance(b, Circle):
            d["rho"] = b.rho
        elif isinstance(b, ScaledSphere):
            d["c"] = b.c
        else:
            d["path"] = b.path
        return d

    @classmethod
    def from_description(cls, d: dict) -> "ConeModel":
        kind = d["kind"]
        params = {"circle": "rho", "sphere": "c", "custom": "path"}[kind]
        return build_cone(kind, d[params], d["R"], n=d.get("n"))


def build_cone(kind: str, param, R: float, n: int | None = None) -> ConeModel:
    """Validated cone model.

    ``kind`` is ``"circle"`` (``param`` = circumference), ``"sphere"``
    (``param`` = radius of the cross-section sphere) or ``"custom"``
    (``param`` = path to a spectrum file, ``n`` required).
    """
    kind = kind.lower()
    if kind == "circle":
        return ConeModel(2, Circle(float(param)), float(R))
    if kind in ("sphere", "scaledsphere"):
        return ConeModel(3, ScaledSphere(float(param)), float(R))
    if kind == "custom":
        if n is None:
            raise ParameterError("custom spectra need an explicit dimension n")
        return ConeModel(int(n), CustomSpectrum(str(Path(param))), float(R))
    raise ParameterError(f"unknown boundary kind {kind!r}")


def fold_angle(delta):
    """Great-circle distance between the ends of an arc of angular length ``delta``."""
    return np.abs(np.mod(np.asarray(delta, dtype=float) + math.pi, TWO_PI) - math.pi)


# -- sphere helpers ---------------------------------------------------------

def sphere_point(y) -> np.ndarray:
    """Unit vector for a colatitude ``beta`` or a ``(beta, phi)`` pair."""
    beta, phi = (float(y), 0.0) if np.ndim(y) == 0 else (float(y[0]), float(y[1]))
    return np.array([math.sin(beta) * math.cos(phi), math.sin(beta) * math.sin(phi), math.cos(beta)])


def sphere_frame(y) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal tangent vectors ``(e_beta, e_phi)`` at a boundary point."""
    beta, phi = (float(y), 0.0) if np.ndim(y) == 0 else (float(y[0]), float(y[1]))
    e_beta = np.array([math.cos(beta) * math.cos(phi), math.cos(beta) * math.sin(phi), -math.sin(beta)])
    e_phi = np.array([-math.sin(phi), math.cos(phi), 0.0])
    return e_beta, e_phi


def sphere_coords(v: np.ndarray) -> tuple[float, float]:
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    return math.acos(max(-1.0, min(1.0, v[2]))), math.atan2(v[1], v[0]) % TWO_PI


def sphere_distance(a, b) -> float:
    """Angular distance on the unit sphere between two boundary points."""
    va, vb = sphere_point(a), sphere_point(b)
    return math.atan2(np.linalg.norm(np.cross(va, vb)), float(va @ vb))


# -- geodesics --------------------------------------------------------------

@dataclass(frozen=True)
class GeodesicSegment:
    """Unit-speed geodesic ``sigma -> (r(sigma), y(sigma))``.

    ``alpha`` is the angle between the initial direction and the outward
    radial vector, ``b = r0 sin(alpha)`` the impact parameter.  Boundary
    motion is measured by ``turning(sigma)``, the h0-arclength travelled
    along the underlying cross-section geodesic.
    """

    model: ConeModel
    r0: float
    y0: object
    alpha: float
    tangent: object  # +-1 on a circle, unit 3-vector on a sphere

    @property
    def impact(self) -> float:
        return self.r0 * math.sin(self.alpha)

    def radius(self, sigma):
        s = np.asarray(sigma, dtype=float)
        return np.hypot(self.impact, s + self.r0 * math.cos(self.alpha))

    def turning(self, sigma):
        s = np.asarray(sigma, dtype=float)
        return np.arctan2(s * math.sin(self.alpha), self.r0 + s * math.cos(self.alpha))

    def exit_turning(self) -> float:
        """Turning accumulated as ``sigma -> +inf``; tends to pi as the impact shrinks."""
        return self.alpha

    def total_turning(self) -> float:
        """Turning over the whole line, ``sigma`` from -inf to +inf."""
        return math.pi

    def velocity(self, sigma):
        """Orthonormal-frame components ``(dr/dsigma, r * ds/dsigma / ...)``.

        Returns ``(radial, tangential)`` where tangential speed is ``r``
        times the rate of h0-arclength.  Both are NaN where a radial line
        passes through the tip, since the frame is undefined there.
        """
        s = np.asarray(sigma, dtype=float)
        r = self.radius(s)
        with np.errstate(divide="ignore", invalid="ignore"):
            return (s + self.r0 * math.cos(self.alpha)) / r, self.impact / r

    def boundary_point(self, sigma):
        """Cross-section point reached at ``sigma``: an angle, or ``(beta, phi)``."""
        arc = self.turning(sigma)
        return self._boundary_at(arc)

    def _boundary_at(self, arc):
        b = self.model.boundary
        if isinstance(b, Circle):
            return np.mod(self.y0 + self.tangent * np.asarray(arc), b.rho)
        y0 = sphere_point(self.y0)
        ang = np.asarray(arc, dtype=float) / b.c
        if ang.ndim == 0:
            return sphere_coords(math.cos(ang) * y0 + math.sin(ang) * self.tangent)
        return [sphere_coords(math.cos(a) * y0 + math.sin(a) * self.tangent) for a in ang]

    def exit_foot(self):
        """Foot of the radial ray the geodesic becomes asymptotic to."""
        return self._boundary_at(self.exit_turning())


def geodesic(model: ConeModel, start, direction) -> GeodesicSegment:
    """Geodesic from ``start = (r0, y0)`` with initial ``direction``.

    ``direction = (v_r, v_t)`` in the orthonormal frame.  On a circle
    ``v_t`` is a scalar (positive = increasing angle); on a sphere it is a
    scalar along ``e_beta`` or a pair ``(v_beta, v_phi)``.  The direction
    is normalised; a zero vector is rejected.
    """
    r0, y0 = float(start[0]), start[1]
    if not r0 > 0:
        raise ParameterError("geodesics must start off the tip (r0 > 0)")
    v_r = float(direction[0])
    v_t = np.atleast_1d(np.asarray(direction[1], dtype=float))
    norm_t = float(np.linalg.norm(v_t))
    speed = math.hypot(v_r, norm_t)
    if speed == 0 or not math.isfinite(speed):
        raise ParameterError("direction must be a nonzero finite vector")
    alpha = math.atan2(norm_t, v_r)
    b = model.boundary
    if isinstance(b, Circle):
        if v_t.size != 1:
            raise ParameterError("circle directions have one tangential component")
        tangent = 1.0 if v_t[0] >= 0 else -1.0
        return GeodesicSegment(model, r0, float(y0) % b.rho, alpha, tangent)
    if isinstance(b, ScaledSphere):
        e_beta, e_phi = sphere_frame(y0)
        if v_t.size == 1:
            vec = v_t[0] * e_beta
        elif v_t.size == 2:
            vec = v_t[0] * e_beta + v_t[1] * e_phi
        else:
            raise ParameterError("sphere directions have one or two tangential components")
        tangent = vec / norm_t if norm_t > 0 else e_beta
        return GeodesicSegment(model, r0, y0, alpha, tangent)
    raise ParameterError("geodesics need a circle or sphere cross-section")


def hits_boundary(segment: GeodesicSegment, tol: float = TOL_HIT):
    """``(t_bar, p)`` if the segment runs into the tip, else ``None``.

    Only forward motion counts: the direction must point inward and the
    impact parameter must be below ``tol * r0``.
    """
    if segment.impact < tol * segment.r0 and math.cos(segment.alpha) < 0:
        t_bar = -segment.r0 * math.cos(segment.alpha)
        return t_bar, segment.y0
    return None


# -- the length-pi relation ---------------------------------------------------

@dataclass(frozen=True)
class PiRelation:
    """Boundary points joined to ``source`` by a cross-section geodesic of length pi.

    Circle: ``points`` holds the (one or two) image angles.  Sphere: the
    image is the circle at angular distance ``distance`` from the source;
    ``points`` lists its intersections with the source meridian.
    """

    model: ConeModel
    source: object
    points: tuple
    distance: float | None = None

    def contains(self, q, tol: float = 1e-9) -> bool:
        b = self.model.boundary
        if isinstance(b, Circle):
            return any(_circle_gap(q, p, b.rho) <= tol for p in self.points)
        return abs(sphere_distance(self.source, q) - self.distance) <= tol


def _circle_gap(a, b, rho):
    d = abs((float(a) - float(b)) % rho)
    return min(d, rho - d)


def pi_relation(model: ConeModel, p) -> PiRelation:
    b = model.boundary
    if isinstance(b, Circle):
        p = float(p) % b.rho
        pts = []
        for q in ((p + math.pi) % b.rho, (p - math.pi) % b.rho):
            if all(_circle_gap(q, o, b.rho) > 1e-12 for o in pts):
                pts.append(q)
        return PiRelation(model, p, tuple(sorted(pts)))
    if isinstance(b, ScaledSphere):
        dist = float(fold_angle(math.pi / b.c))
        beta_p = float(p) if np.ndim(p) == 0 else float(p[0])
        phi_p = 0.0 if np.ndim(p) == 0 else float(p[1])
        pts = []
        for delta in (dist, -dist):
            # walk along the meridian through p, then fold back onto [0, pi]
            beta = beta_p + delta
            phi = phi_p
            beta = beta % TWO_PI
            if beta > math.pi:
                beta, phi = TWO_PI - beta, (phi + math.pi) % TWO_PI
            pt = (beta, phi)
            if all(sphere_distance(pt, o) > 1e-12 for o in pts):
                pts.append(pt)
        return PiRelation(model, p, tuple(pts), dist)
    raise ParameterError("the length-pi relation needs a circle or sphere cross-section")


@dataclass(frozen=True)
class NearMissLimit:
    """Limiting outgoing feet of geodesics that just miss the tip."""

    feet: tuple
    rate: float
    impacts: np.ndarray = field(repr=False)
    errors: np.ndarray = field(repr=False)


def near_miss_limit(model: ConeModel, p, impacts: Sequence[float], r0: float = 1.0, direction=None) -> NearMissLimit:
    """Exit feet of geodesics aimed past the tip with impact ``b_k -> 0``.

    Each geodesic starts at ``(r0, p)`` heading inward with impact
    parameter ``b_k``.  The exit foot sequence is extrapolated to ``b = 0``
    (Richardson, using the two smallest impacts) and ``rate`` is the fitted
    exponent of the error ``|foot(b_k) - limit| ~ b_k**rate``.

    ``direction`` picks the side: a sign on a circle, the azimuth of the
    tangent in the ``(e_beta, e_phi)`` frame on a sphere.  ``None`` uses
    both sides along the circle, or along the meridian through ``p``.
    """
    b = np.asarray(impacts, dtype=float)
    if b.ndim != 1 or b.size < 2:
        raise ParameterError("need at least two impact parameters")
    if np.any(b <= 0) or np.any(np.diff(b) >= 0):
        raise ParameterError("impact parameters must be positive and strictly decreasing")
    if np.any(b >= r0):
        raise ParameterError("impact parameters must be smaller than r0")
    if direction is None:
        sides = [1.0, -1.0]
    else:
        sides = [direction]

    feet, rates, errs = [], [], []
    for side in sides:
        arcs = []
        for bk in b:
            if isinstance(model.boundary, ScaledSphere) and direction is not None:
                v_t = (bk / r0 * math.cos(side), bk / r0 * math.sin(side))
            else:
                v_t = math.copysign(bk / r0, side)
            seg = geodesic(model, (r0, p), (-math.sqrt(1 - (bk / r0) ** 2), v_t))
            arcs.append(seg.exit_turning())
        arcs = np.array(arcs)
        # exit turning is smooth in b, so linear extrapolation in b kills the leading term
        limit = arcs[-1] - (arcs[-2] - arcs[-1]) * b[-1] / (b[-2] - b[-1])
        err = np.abs(arcs - limit)
        ok = err > 0
        rate = float(np.polyfit(np.log(b[ok]), np.log(err[ok]), 1)[0]) if ok.sum() >= 2 else math.inf
        foot = seg._boundary_at(limit)
        feet.append(foot)
        rates.append(rate)
        errs.append(err)
    return NearMissLimit(tuple(feet), min(rates), b, np.array(errs))
