"""Exact wave evolution on a truncated product cone.

Each boundary mode ``phi_i`` with Bessel order ``nu_i`` contributes radial
eigenfunctions

    e_{i,m}(r) = N_{i,m} r^{-(n-2)/2} J_{nu_i}(lam_{i,m} r),   lam = j_{nu,m} / R,

orthonormal for ``r^{n-1} dr`` on ``(0, R)`` with a Dirichlet wall at ``R``.
In this basis the wave group is a 2x2 rotation per ``(i, m)``, so evolution
is exact in time.  The wall is harmless as long as nothing reaches it:
``evolve`` refuses to run past the point where data support plus elapsed
time exceeds ``R``.
"""

from __future__ import annotations

import io
import json
import math
import zipfile
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import special

from ._numerics import CompensatedAccumulator, composite_gauss_legendre, fsum_real, neumaier_sum
from .errors import NumericError, ParameterError, TruncationError, WallShadowError
from .geometry import Circle, ConeModel, ScaledSphere
from .spectrum import BesselTable, BoundarySpectrum, bessel_zeros

SNAPSHOT_VERSION = "conewave-snapshot/1"

#: Gaussian tails beyond this many widths are treated as outside the support
TAIL_WIDTHS = 6.0


@dataclass(frozen=True)
class FourierBesselBasis:
    """Radial Dirichlet eigenbasis for one boundary mode."""

    label: str
    nu: float
    R: float
    n: int
    zeros: np.ndarray = field(repr=False)

    @property
    def M(self) -> int:
        return self.zeros.size

    @property
    def lam(self) -> np.ndarray:
        return self.zeros / self.R

    @property
    def norm(self) -> np.ndarray:
        return math.sqrt(2.0) / (self.R * np.abs(special.jv(self.nu + 1.0, self.zeros)))

    def radial(self, r) -> np.ndarray:
        """``e_m(r)`` as a ``(len(r), M)`` matrix, using the direct Bessel routine."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        vals = special.jv(self.nu, np.outer(r, self.lam))
        return _radial_factor(vals, r, self.lam, self.nu, self.n) * self.norm


def _radial_factor(jvals, r, lam, nu, n):
    """Multiply ``J_nu(lam r)`` by ``r^{-(n-2)/2}``, with the correct limit at ``r = 0``."""
    if n == 2:
        return jvals
    shift = (n - 2) / 2.0
    out = np.empty_like(jvals)
    pos = r > 0
    out[pos] = jvals[pos] * (r[pos] ** -shift)[:, None]
    if np.any(~pos):
        if abs(nu - shift) < 1e-14:
            out[~pos] = lam**shift / (2.0**nu * math.gamma(nu + 1.0))
        else:
            out[~pos] = 0.0
    return out


class BasisSet:
    """Fourier-Bessel bases for every boundary mode of a spectrum.

    Arrays ``lam``, ``norm`` and ``zeros`` have shape ``(n_modes, M)``,
    rows in spectrum order.  Modes sharing an order share their zeros.
    """

    def __init__(self, model: ConeModel, spectrum: BoundarySpectrum, M: int):
        if M < 1:
            raise ParameterError("need at least one radial function per mode")
        self.model = model
        self.spectrum = spectrum
        self.M = int(M)
        self.R = model.R
        self.n = model.n
        self.nu = np.atleast_1d(model.orders(spectrum)).astype(float)
        self.mu = spectrum.mu
        by_order = {nu: bessel_zeros(nu, self.M) for nu in sorted(set(self.nu.tolist()))}
        self.zeros = np.stack([by_order[nu] for nu in self.nu.tolist()])
        self.lam = self.zeros / self.R
        jp1 = np.stack([special.jv(nu + 1.0, by_order[nu]) for nu in self.nu.tolist()])
        self.norm = math.sqrt(2.0) / (self.R * np.abs(jp1))
        self.modes = tuple(
            FourierBesselBasis(m.label or str(m.index), float(nu), self.R, self.n, by_order[float(nu)])
            for m, nu in zip(spectrum, self.nu)
        )
        self._tables: dict[float, BesselTable] = {}

    @property
    def n_modes(self) -> int:
        return len(self.nu)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_modes, self.M)

    @property
    def dtype(self):
        return complex if self.spectrum.is_complex else float

    def __repr__(self) -> str:
        return f"BasisSet({self.model.describe()}, modes={self.n_modes}, M={self.M})"

    def table(self, nu: float) -> BesselTable:
        tab = self._tables.get(nu)
        if tab is None:
            # idempotent: a concurrent rebuild produces an identical table
            tab = BesselTable(nu, float(self.zeros.max()) + 8.0)
            self._tables[nu] = tab
        return tab

    def radial_matrix(self, i: int, r, cols=None) -> np.ndarray:
        """``e_{i,m}(r)`` for radii ``r`` and radial indices ``cols`` (default all)."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        lam = self.lam[i] if cols is None else self.lam[i, cols]
        norm = self.norm[i] if cols is None else self.norm[i, cols]
        nu = float(self.nu[i])
        vals = self.table(nu)(np.outer(r, lam))
        return _radial_factor(vals, r, lam, nu, self.n) * norm


def build_basis(model: ConeModel, modes: BoundarySpectrum | int, M: int) -> BasisSet:
    """Fourier-Bessel bases for ``modes`` (a spectrum, or a truncation size)."""
    if isinstance(modes, (int, np.integer)):
        modes = model.spectrum(int(modes))
    return BasisSet(model, modes, M)


# -- states -----------------------------------------------------------------

@dataclass(frozen=True)
class WaveState:
    """Spectral coefficients of ``(u, du/dt)`` at time ``t``.

    ``support`` bounds the radius of the initial data (``None`` = unknown,
    which disables the wall check); ``sigma`` records the Gaussian spectral
    damping applied to the data.
    """

    t: float
    a: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    basis: BasisSet = field(repr=False)
    support: float | None = None
    sigma: float = 0.0

    @property
    def model(self) -> ConeModel:
        return self.basis.model

    def energy(self) -> float:
        lam = self.basis.lam
        return fsum_real(np.abs(self.b) ** 2 + lam**2 * np.abs(self.a) ** 2)


@dataclass(frozen=True)
class PointPole:
    """Mollified delta at ``(xbar, p)``, placed in ``du/dt``."""

    xbar: float
    p: object
    sigma: float

    def __post_init__(self):
        if not self.xbar > 0:
            raise ParameterError("pole must lie off the tip")
        if not self.sigma > 0:
            raise ParameterError("mollification width must be positive")


@dataclass(frozen=True)
class ConormalRing:
    """Data ``(r - r0)_+^exponent * chi((r - r0) / cutoff) * g(y)``.

    ``chi`` is a smooth step equal to 1 on ``[0, 1/2]`` and 0 beyond 1, so
    the data are singular only across the ring ``r = r0`` and smooth along
    it.  The profile goes into ``u`` (``component="u"``) or ``du/dt``.
    """

    r0: float
    exponent: float = 0.5
    angular: Callable | None = None
    cutoff: float = 0.12
    sigma: float = 0.0
    component: str = "u"

    def __post_init__(self):
        if not self.r0 > 0:
            raise ParameterError("ring radius must be positive")
        if not self.cutoff > 0:
            raise ParameterError("ring cutoff length must be positive")
        if self.exponent <= -1:
            raise ParameterError("ring exponent must exceed -1")
        if self.component not in ("u", "ut"):
            raise ParameterError("component must be 'u' or 'ut'")

    def radial_profile(self, r) -> np.ndarray:
        x = (np.asarray(r, dtype=float) - self.r0) / self.cutoff
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = (x[pos] * self.cutoff) ** self.exponent * smooth_step(x[pos])
        return out


def smooth_step(x) -> np.ndarray:
    """C-infinity step: 1 for ``x <= 1/2``, 0 for ``x >= 1``."""
    x = np.asarray(x, dtype=float)

    def psi(z):
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(z > 0, np.exp(-1.0 / np.where(z > 0, z, 1.0)), 0.0)

    a = psi(1.0 - x)
    b = psi(x - 0.5)
    return a / (a + b)


@dataclass(frozen=True)
class CoefficientList:
    a: np.ndarray
    b: np.ndarray
    support: float | None = None


def mollifier(basis: BasisSet, sigma: float) -> np.ndarray:
    """Spectral Gaussian damping ``exp(-lam^2 sigma^2 / 2)``."""
    return np.exp(-0.5 * (basis.lam * sigma) ** 2)


def _check_model(model, basis):
    if model is not None and model != basis.model:
        raise ParameterError("basis was built for a different cone model")


def _pole_coefficients(basis: BasisSet, xbar: float, p, sigma: float) -> np.ndarray:
    if not xbar < basis.R:
        raise ParameterError("pole must lie inside the truncation radius")
    if isinstance(basis.model.boundary, ScaledSphere):
        beta = float(p) if np.ndim(p) == 0 else float(p[0])
        if min(abs(beta), abs(beta - math.pi)) > 1e-12:
            raise ParameterError("3D poles must sit on the symmetry axis (beta = 0 or pi)")
    phi = basis.spectrum.evaluate([p if np.ndim(p) == 0 else p[0]])[0]
    e = np.stack([basis.radial_matrix(i, [xbar])[0] for i in range(basis.n_modes)])
    return mollifier(basis, sigma) * e * np.conj(phi)[:, None]


def initial_state(basis: BasisSet, data) -> WaveState:
    """State at ``t = 0`` for ``PointPole``, ``ConormalRing`` or ``CoefficientList`` data."""
    zero = np.zeros(basis.shape, dtype=basis.dtype)
    if isinstance(data, PointPole):
        b = _pole_coefficients(basis, data.xbar, data.p, data.sigma).astype(basis.dtype)
        return WaveState(0.0, zero, b, basis, data.xbar + TAIL_WIDTHS * data.sigma, data.sigma)
    if isinstance(data, ConormalRing):
        c = ring_coefficients(basis, data)
        support = data.r0 + data.cutoff + TAIL_WIDTHS * data.sigma
        if data.component == "u":
            return WaveState(0.0, c, zero, basis, support, data.sigma)
        return WaveState(0.0, zero, c, basis, support, data.sigma)
    if isinstance(data, CoefficientList):
        a = np.asarray(data.a, dtype=basis.dtype).reshape(basis.shape)
        b = np.asarray(data.b, dtype=basis.dtype).reshape(basis.shape)
        return WaveState(0.0, a, b, basis, data.support)
    raise ParameterError(f"unsupported initial data {type(data).__name__}")


def ring_coefficients(basis: BasisSet, ring: ConormalRing) -> np.ndarray:
    """Coefficients of conormal ring data, mollified by ``ring.sigma``.

    The radial integral uses Gauss-Jacobi nodes carrying the
    ``(r - r0)^exponent`` factor next to the ring, so the endpoint
    singularity is integrated exactly.
    """
    span = ring.cutoff
    if ring.r0 + span > basis.R:
        raise ParameterError("ring profile does not fit inside the truncation radius")
    panels = 16
    h = span / panels
    # first panel: Gauss-Jacobi nodes absorb the (r - r0)^exponent endpoint factor
    x, w = special.roots_jacobi(64, 0.0, ring.exponent)
    nodes = [ring.r0 + 0.5 * h * (x + 1.0)]
    weights = [w * (0.5 * h) ** (ring.exponent + 1.0) * smooth_step(0.5 * h * (x + 1.0) / span)]
    xg, wg = np.polynomial.legendre.leggauss(64)
    for k in range(1, panels):
        rr = ring.r0 + k * h + 0.5 * h * (xg + 1.0)
        nodes.append(rr)
        weights.append(0.5 * h * wg * ring.radial_profile(rr))
    r = np.concatenate(nodes)
    radial = np.concatenate(weights) * r ** (basis.n - 1)

    ang = _angular_coefficients(basis, ring.angular)
    coef = np.empty(basis.shape, dtype=basis.dtype)
    for i in range(basis.n_modes):
        coef[i] = ang[i] * (radial @ basis.radial_matrix(i, r))
    return coef * mollifier(basis, ring.sigma)


def _angular_coefficients(basis: BasisSet, g) -> np.ndarray:
    spec = basis.spectrum
    if g is None:
        # constant profile: only the constant mode survives
        out = np.zeros(basis.n_modes, dtype=basis.dtype)
        out[np.argmin(spec.mu)] = math.sqrt(spec.measure)
        return out
    nq = 4 * basis.n_modes + 64
    y, wy = spec.quadrature(nq)
    vals = np.asarray(g(y), dtype=float)
    return (wy * vals) @ np.conj(spec.evaluate(y))


def projection_grid(basis: BasisSet, Q: int | None = None, n_boundary: int | None = None, breakpoints=()):
    """Radial and boundary quadrature used by :func:`project`.

    Returns ``(r, wr, y, wy)``; ``wr`` already includes ``r^{n-1}``.
    The radial rule is composite Gauss-Legendre with ``Q`` nodes in total
    (default ``4 M``) and extra panel edges at ``breakpoints``.
    """
    Q = 4 * basis.M if Q is None else int(Q)
    per = 16
    panels = max(1, Q // per)
    edges = np.union1d(np.linspace(0.0, basis.R, panels + 1), [x for x in breakpoints if 0 < x < basis.R])
    r, wr = composite_gauss_legendre(edges, per)
    wr = wr * r ** (basis.n - 1)
    nb = n_boundary or (4 * basis.n_modes + 64)
    y, wy = basis.spectrum.quadrature(nb)
    return r, wr, y, wy


def project(basis: BasisSet, f, *, Q: int | None = None, n_boundary: int | None = None, breakpoints=()) -> np.ndarray:
    """Coefficients ``<f, e_{i,m} phi_i>`` of a function on the cone.

    ``f`` is a callable ``f(r, y)`` (broadcast over a radial column and a
    boundary row) or an array sampled on :func:`projection_grid` with the
    same settings.
    """
    r, wr, y, wy = projection_grid(basis, Q, n_boundary, breakpoints)
    if callable(f):
        F = np.asarray(f(r[:, None], y[None, :]))
        F = np.broadcast_to(F, (r.size, y.size))
    else:
        F = np.asarray(f)
        if F.shape != (r.size, y.size):
            raise ParameterError(f"sampled data must have shape {(r.size, y.size)}, got {F.shape}")
    if not np.all(np.isfinite(F)):
        raise NumericError("function values are not finite on the quadrature grid")
    G = (F * wy[None, :]) @ np.conj(basis.spectrum.evaluate(y))  # (Q, n_modes)
    coef = np.empty(basis.shape, dtype=basis.dtype)
    for i in range(basis.n_modes):
        coef[i] = (wr * G[:, i]) @ basis.radial_matrix(i, r)
    return coef


def l2_norm_squared(basis: BasisSet, f, **kw) -> float:
    """``||f||^2`` on the truncated cone, with the same quadrature as :func:`project`."""
    r, wr, y, wy = projection_grid(basis, **kw)
    F = np.broadcast_to(np.asarray(f(r[:, None], y[None, :])), (r.size, y.size))
    return float(np.sum(wr[:, None] * wy[None, :] * np.abs(F) ** 2))


# -- evolution ---------------------------------------------------------------

def shadow_margin(state: WaveState, t: float) -> float:
    """``R - (support + |t|)``; negative means the wall can be felt."""
    if state.support is None:
        return math.inf
    return state.basis.R - (state.support + abs(t))


def evolve(state: WaveState, dt: float, *, check_shadow: bool = True) -> WaveState:
    """Apply the exact wave group for a time step ``dt``."""
    t_new = state.t + dt
    if check_shadow and shadow_margin(state, t_new) < -1e-12:
        raise WallShadowError(
            f"support {state.support:.4g} plus |t| = {abs(t_new):.4g} exceeds R = {state.basis.R:.4g}; "
            "the Dirichlet wall would contaminate the solution"
        )
    if dt == 0:
        return replace(state, t=t_new)
    lam = state.basis.lam
    c = np.cos(lam * dt)
    s = np.sin(lam * dt)
    a = c * state.a + (s / lam) * state.b
    b = -(lam * s) * state.a + c * state.b
    return replace(state, t=t_new, a=a, b=b)


def fundamental_solution(model: ConeModel | None, basis: BasisSet, pole, sigma: float, t: float, *, check_shadow: bool = True) -> WaveState:
    """``sin(t sqrt(Delta)) / sqrt(Delta)`` applied to a mollified delta at ``pole = (xbar, p)``."""
    _check_model(model, basis)
    xbar, p = pole
    state = initial_state(basis, PointPole(float(xbar), p, float(sigma)))
    return evolve(state, t, check_shadow=check_shadow)


def tangential_smooth(state: WaveState, k: float) -> WaveState:
    """Apply ``(1 + Delta_boundary)^{-k}`` mode by mode."""
    if k < 0:
        raise ParameterError("smoothing order must be nonnegative")
    factor = (1.0 + state.basis.mu) ** (-float(k))
    return replace(state, a=state.a * factor[:, None], b=state.b * factor[:, None])


def band_filter(state: WaveState, lo: float, hi: float, shape: str = "sharp") -> WaveState:
    """Spectral band-pass between ``lo`` and ``hi``.

    ``shape="sharp"`` keeps ``lo <= lam < hi`` exactly.  ``shape="gaussian"``
    applies ``exp(-lam^2 / 2 hi^2) (1 - exp(-lam^2 / 2 lo^2))``, whose
    kernel stays spatially local (no sinc ringing).
    """
    lam = state.basis.lam
    if shape == "sharp":
        factor = ((lam >= lo) & (lam < hi)).astype(float)
    elif shape == "gaussian":
        factor = np.exp(-0.5 * (lam / hi) ** 2) * -np.expm1(-0.5 * (lam / lo) ** 2)
    else:
        raise ParameterError(f"unknown filter shape {shape!r}")
    return replace(state, a=state.a * factor, b=state.b * factor)


def energy_norm(state: WaveState, s: float) -> float:
    """``sum lam^{2s} (|b|^2 / lam^2 + |a|^2)``; ``s = 1`` is the conserved energy.

    Returns ``inf`` when the sum overflows or is dominated by the last
    radial index, i.e. the truncation does not resolve it.
    """
    lam = state.basis.lam
    with np.errstate(over="ignore"):
        terms = lam ** (2.0 * s) * (np.abs(state.b) ** 2 / lam**2 + np.abs(state.a) ** 2)
    if not np.all(np.isfinite(terms)):
        return math.inf
    total = fsum_real(terms)
    if total == 0:
        return 0.0
    populated = np.count_nonzero(np.any(terms > 0, axis=0))
    if populated > 1 and state.basis.M > 1 and fsum_real(terms[:, -1]) > 0.5 * total:
        return math.inf
    return total


def weyl_count(basis: BasisSet, Lam: float) -> int:
    """Number of eigenvalues ``lam <= Lam``, counted with boundary multiplicity."""
    top = basis.lam[:, -1]
    if Lam > top.min():
        raise TruncationError(f"Lam = {Lam} exceeds the radial truncation (min over modes of lam_M = {top.min():.4g})")
    if basis.spectrum.kind != "custom" and Lam >= basis.lam[np.argmax(basis.mu), 0]:
        raise TruncationError("Lam reaches the highest boundary mode; increase the angular truncation")
    counts = np.count_nonzero(basis.lam <= Lam, axis=1)
    return int(round(math.fsum((counts * basis.spectrum.weight).tolist())))


# -- synthesis ---------------------------------------------------------------

def _synthesize_stack(basis: BasisSet, coefs: np.ndarray, r, y) -> np.ndarray:
    """Field values ``sum c_{i,m} e_{i,m}(r) phi_i(y)`` for a stack of coefficient arrays.

    ``coefs`` has shape ``(K, n_modes, M)``; returns the real field with
    shape ``(K, len(r), len(y))``.  Modes sharing a Bessel order share one
    radial matrix.  Radial sums and the final sum over orders are
    compensated and run in a fixed order.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(r < 0) or np.any(r > basis.R * (1 + 1e-12)):
        raise ParameterError("sample radii must lie in [0, R]")
    K = coefs.shape[0]
    scale = float(np.max(np.abs(coefs))) if coefs.size else 0.0
    if scale == 0.0:
        return np.zeros((K, r.size, y.size))
    phi = basis.spectrum.evaluate(y)
    groups: dict[float, list[int]] = {}
    for i, nu in enumerate(basis.nu.tolist()):
        groups.setdefault(nu, []).append(i)
    acc = CompensatedAccumulator()
    for members in groups.values():
        mags = np.max(np.abs(coefs[:, members, :]), axis=(0, 1))
        keep = np.nonzero(mags > 1e-18 * scale)[0]
        if keep.size == 0:
            continue
        E = basis.radial_matrix(members[0], r, cols=keep)
        part = np.zeros((K, r.size, y.size))
        for i in members:
            ck = coefs[:, i, keep]
            radial = np.empty((K, r.size), dtype=coefs.dtype)
            step = max(1, int(4_000_000 // max(1, r.size * keep.size)))
            for s0 in range(0, K, step):
                terms = E[None, :, :] * ck[s0 : s0 + step, None, :]
                radial[s0 : s0 + step] = neumaier_sum(terms, axis=2)
            if np.iscomplexobj(radial) or np.iscomplexobj(phi):
                part += radial.real[:, :, None] * phi[:, i].real - radial.imag[:, :, None] * phi[:, i].imag
            else:
                part += radial[:, :, None] * phi[:, i]
        acc.add(part)
    if acc.total is None:
        return np.zeros((K, r.size, y.size))
    return acc.result()


def synthesize(state: WaveState, r, y) -> tuple[np.ndarray, np.ndarray]:
    """``(u, du/dt)`` sampled on the tensor grid ``r x y``."""
    out = _synthesize_stack(state.basis, np.stack([state.a, state.b]), r, y)
    return out[0], out[1]


def synthesize_many(states: Sequence[WaveState], r, y, which: str = "u") -> np.ndarray:
    """Sample ``u`` (or ``ut``) for several states sharing a basis: ``(K, len(r), len(y))``."""
    if not states:
        return np.zeros((0, np.size(r), np.size(y)))
    basis = states[0].basis
    if any(s.basis is not basis for s in states):
        raise ParameterError("states must share one basis")
    attr = "a" if which == "u" else "b"
    return _synthesize_stack(basis, np.stack([getattr(s, attr) for s in states]), r, y)


# -- snapshots ---------------------------------------------------------------

def save_state(state: WaveState, path) -> Path:
    """Write a versioned ``.npz`` snapshot of a state."""
    path = Path(path)
    spec = state.basis.spectrum
    meta = {
        "version": SNAPSHOT_VERSION,
        "model": state.model.describe(),
        "modes": int(np.max(np.abs(spec.index))) if spec.kind != "custom" else len(spec),
        "M": state.basis.M,
        "t": state.t,
        "support": state.support,
        "sigma": state.sigma,
    }
    arrays = {"meta": np.array(json.dumps(meta, sort_keys=True)), "a": state.a, "b": state.b}
    # np.savez stamps members with the wall clock; a fixed date keeps bundles byte-identical
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_STORED) as zf:
        for name, arr in arrays.items():
            buf = io.BytesIO()
            np.lib.format.write_array(buf, np.array(arr, order="C"), allow_pickle=False)
            zf.writestr(zipfile.ZipInfo(f"{name}.npy", date_time=(1980, 1, 1, 0, 0, 0)), buf.getvalue())
    return path


def load_state(path, basis: BasisSet | None = None) -> WaveState:
    """Read a snapshot; the basis is rebuilt unless a matching one is supplied."""
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["meta"]))
        a, b = data["a"], data["b"]
    if meta.get("version") != SNAPSHOT_VERSION:
        raise ParameterError(f"unsupported snapshot version {meta.get('version')!r}")
    model = ConeModel.from_description(meta["model"])
    if basis is None or basis.model != model or basis.M != meta["M"] or basis.shape != a.shape:
        basis = build_basis(model, meta["modes"], meta["M"])
    return WaveState(meta["t"], a, b, basis, meta["support"], meta["sigma"])
