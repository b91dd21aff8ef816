"""Numerical microlocal diagnostics along radial rays.

Fronts of the simulated waves are spheres ``r = t - tbar`` centred on the
tip, so their transverse regularity is visible on one-dimensional radial
cuts.  The regularity estimator windows a cut around a front, removes the
known Gaussian mollifier from the power spectrum and fits the decay

    <|u^(k)|^2>_shell ~ k^{-2 s - 1},

so a step reports ``s = 1/2``, a delta ``-1/2`` and ``(r - r*)_+^{1/2}``
reports ``1``.  Frequencies ``k`` are angular (radians per unit length).
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy import ndimage, signal

from ._numerics import composite_gauss_legendre, fsum_real
from .errors import EstimatorError, ParameterError
from .propagator import WaveState, _synthesize_stack, band_filter, synthesize_many, tangential_smooth

SCAN_COLUMNS = ("angle", "front_r", "s_hat", "residual", "band_lo", "band_hi")
GAIN_BOUND_NOTE = "nonfocusing gain bound assumed to be (n-1)/2"


@dataclass(frozen=True)
class RaySample:
    """Field values ``u(r)`` on a uniform radial grid along one boundary angle."""

    angle: float
    r: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    t: float = math.nan

    def __post_init__(self):
        if self.r.shape != self.u.shape or self.r.ndim != 1 or self.r.size < 8:
            raise ParameterError("ray samples need matching 1D arrays of at least 8 points")
        steps = np.diff(self.r)
        if np.max(np.abs(steps - steps[0])) > 1e-9 * abs(steps[0]):
            raise ParameterError("ray samples must be uniformly spaced")

    @property
    def dr(self) -> float:
        return float(self.r[1] - self.r[0])


def _sample_grid(state: WaveState, r_max: float | None, dr: float | None):
    sigma = state.sigma if state.sigma > 0 else state.basis.R / 1024.0
    if r_max is None:
        reach = state.basis.R if state.support is None else state.support + abs(state.t)
        r_max = min(state.basis.R, reach)
    target = sigma / 8.0 if dr is None else dr
    n = 1 << int(math.ceil(math.log2(max(8.0, r_max / target))))
    return np.arange(n) * (r_max / n)


def ray_samples(state: WaveState, angles, *, r_max: float | None = None, dr: float | None = None) -> list[RaySample]:
    """Radial cuts of ``u`` at several boundary angles (power-of-two sample counts)."""
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    r = _sample_grid(state, r_max, dr)
    U = synthesize_many([state], r, angles)[0]
    return [RaySample(float(a), r, U[:, k].copy(), state.t) for k, a in enumerate(angles)]


def ray_sample(state: WaveState, angle: float, **kw) -> RaySample:
    return ray_samples(state, [angle], **kw)[0]


# -- estimator configuration -------------------------------------------------

@dataclass(frozen=True)
class EstimatorConfig:
    """Settings for front detection and exponent fitting.

    ``sigma`` is the mollification width of the data.  Defaults: a
    Gaussian window of standard deviation ``6 sigma``, a band from
    ``4 / window`` up to ``pi / sigma`` (half a cycle per ``sigma``) and four
    log-spaced shells.  Near either end of a ray sample the window shrinks
    so that it stays ``clearance`` standard deviations inside; the band's
    lower edge rises with it.
    """

    sigma: float
    window: float | None = None
    band: tuple[float, float] | None = None
    shells: int = 4
    min_shells: int = 4
    deconvolve: bool = True
    threshold: float = 0.01
    match: float | None = None
    clearance: float = 3.5

    def __post_init__(self):
        if not self.sigma > 0:
            raise ParameterError("estimator needs the positive mollification width")
        if self.window is not None and not self.window > 0:
            raise ParameterError("window width must be positive")
        if not 0 < self.threshold < 1:
            raise ParameterError("front threshold must lie in (0, 1)")

    @property
    def window_std(self) -> float:
        return 6.0 * self.sigma if self.window is None else float(self.window)

    @property
    def usable_band(self) -> tuple[float, float]:
        if self.band is not None:
            return (float(self.band[0]), float(self.band[1]))
        return (4.0 / self.window_std, math.pi / self.sigma)

    @property
    def match_radius(self) -> float:
        return 3.0 * self.sigma if self.match is None else float(self.match)

    def fit_window(self, front: float, r_lo: float, r_hi: float) -> tuple[float, tuple[float, float]]:
        """Window width and band for a front at ``front`` on a sample spanning ``[r_lo, r_hi]``."""
        room = min(front - r_lo, r_hi - front) / self.clearance
        w = min(self.window_std, room)
        lo, hi = self.usable_band
        lo = max(lo, 4.0 / w) if w > 0 else math.inf
        if not hi > 1.5 * lo:
            raise EstimatorError(
                f"front at r = {front:.4g} is too close to the end of the ray sample for sigma = {self.sigma:g}"
            )
        return w, (lo, hi)

    def validate(self) -> None:
        lo, hi = self.usable_band
        if self.shells < self.min_shells:
            raise EstimatorError(f"{self.shells} shells requested, at least {self.min_shells} required")
        if lo < 4.0 / self.window_std * (1 - 1e-12):
            raise EstimatorError("band starts below four times the window's fundamental frequency")
        if hi > math.pi / self.sigma * (1 + 1e-12):
            raise EstimatorError("band reaches past the mollifier cutoff pi / sigma")
        if hi <= lo * 1.5:
            raise EstimatorError(
                f"usable band [{lo:.4g}, {hi:.4g}] is too narrow; use a wider window, a larger M or a smaller sigma"
            )

    def to_dict(self) -> dict:
        lo, hi = self.usable_band
        return {
            "sigma": self.sigma,
            "window": self.window_std,
            "band": [lo, hi],
            "shells": self.shells,
            "deconvolve": self.deconvolve,
            "threshold": self.threshold,
            "match": self.match_radius,
            "clearance": self.clearance,
        }


class ExponentFit(NamedTuple):
    s_hat: float
    residual: float
    band: tuple[float, float]


def _envelope(sample: RaySample, sigma: float) -> np.ndarray:
    # multiscale gradient energy: first and second Gaussian derivatives form a
    # local quadrature pair, so steps and spikes both peak at the front
    out = np.zeros_like(sample.u, dtype=float)
    for scale in (sigma, 2.0 * sigma):
        width = max(scale / sample.dr, 1.0)
        d1 = ndimage.gaussian_filter1d(sample.u, width, order=1, mode="nearest") / sample.dr * scale
        d2 = ndimage.gaussian_filter1d(sample.u, width, order=2, mode="nearest") / sample.dr**2 * scale**2
        out += np.sqrt(d1**2 + d2**2)
    return out


def front_extract(sample: RaySample, expected: int = 1, config: EstimatorConfig | None = None) -> list[float]:
    """Front radii along a ray, strongest first.

    Fronts are local maxima of a multiscale gradient-energy envelope that
    exceed ``config.threshold`` times its maximum.  Positions are refined
    by a parabola through the three samples around each maximum.  Finding
    fewer fronts than ``expected`` triggers a warning, not an error.
    """
    sigma = config.sigma if config is not None else 3.0 * sample.dr
    threshold = config.threshold if config is not None else 0.01
    if sample.dr > sigma / 3.0 * (1 + 1e-9):
        raise ParameterError("ray spacing must resolve the mollifier (dr <= sigma / 3)")
    env = _envelope(sample, sigma)
    top = float(env.max()) if env.size else 0.0
    if top <= 0.0 or not np.isfinite(top):
        if expected > 0:
            warnings.warn(f"no fronts found, {expected} expected", stacklevel=2)
        return []
    peaks, props = signal.find_peaks(env, height=threshold * top, distance=max(1, int(2.0 * sigma / sample.dr)))
    order = np.argsort(props["peak_heights"])[::-1]
    radii = []
    for p in peaks[order]:
        shift = 0.0
        if 0 < p < env.size - 1:
            y0, y1, y2 = env[p - 1], env[p], env[p + 1]
            denom = y0 - 2 * y1 + y2
            if denom < 0:
                shift = 0.5 * (y0 - y2) / denom
        radii.append(float(sample.r[p] + shift * sample.dr))
    if len(radii) < expected:
        warnings.warn(f"found {len(radii)} fronts, {expected} expected", stacklevel=2)
    return radii


def _matched_peak(sample: RaySample, env: np.ndarray, radius: float, config: EstimatorConfig, top: float) -> float:
    # a genuine envelope maximum near ``radius`` that clears the threshold, else nan
    if top <= 0:
        return math.nan
    peaks, _ = signal.find_peaks(env, height=config.threshold * top)
    peaks = peaks[np.abs(sample.r[peaks] - radius) <= config.match_radius]
    if peaks.size == 0:
        return math.nan
    return float(sample.r[peaks[np.argmax(env[peaks])]])


def front_strength(sample: RaySample, radius: float, config: EstimatorConfig) -> float:
    """Gradient-energy envelope at ``radius`` (largest value within the match radius)."""
    env = _envelope(sample, config.sigma)
    near = np.abs(sample.r - radius) <= config.match_radius
    return float(env[near].max()) if np.any(near) else 0.0


def shell_energies(sample: RaySample, front: float, config: EstimatorConfig):
    """Shell-averaged, mollifier-corrected power around ``front``.

    Returns ``(k_centres, energies)``.
    """
    w, (lo, hi) = config.fit_window(front, sample.r[0], sample.r[-1])
    g = np.exp(-0.5 * ((sample.r - front) / w) ** 2)
    n = 1 << int(math.ceil(math.log2(4 * sample.r.size)))
    spec = np.fft.rfft(sample.u * g, n) * sample.dr
    k = 2.0 * math.pi * np.fft.rfftfreq(n, sample.dr)
    inside = k <= hi
    k = k[inside]
    power = np.abs(spec[inside]) ** 2
    if config.deconvolve:
        # the window narrows a Gaussian of width sigma to sigma w / sqrt(sigma^2 + w^2)
        s_eff2 = config.sigma**2 * w**2 / (config.sigma**2 + w**2)
        power = power * np.exp(k**2 * s_eff2)
    edges = np.geomspace(lo, hi, config.shells + 1)
    centres, energies = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        sel = (k >= a) & (k < b)
        if np.count_nonzero(sel) < 2:
            raise EstimatorError("frequency shell holds fewer than two samples; lengthen the ray sample")
        centres.append(math.sqrt(a * b))
        energies.append(float(np.mean(power[sel])))
    return np.array(centres), np.array(energies)


def sobolev_exponent(sample: RaySample, front: float, config: EstimatorConfig) -> ExponentFit:
    """Estimated Sobolev exponent of the front at ``front`` (see module docstring)."""
    config.validate()
    if not sample.r[0] <= front <= sample.r[-1]:
        raise ParameterError(f"front radius {front} lies outside the sampled interval")
    if sample.dr > config.sigma / 3.0 * (1 + 1e-9):
        raise ParameterError("ray spacing must resolve the mollifier (dr <= sigma / 3)")
    k, e = shell_energies(sample, front, config)
    band = config.fit_window(front, sample.r[0], sample.r[-1])[1]
    if not np.all(e > 0):
        return ExponentFit(math.inf, 0.0, band)
    x = np.log(k)
    y = np.log(e)
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    return ExponentFit(float(-(slope + 1.0) / 2.0), float(math.sqrt(np.mean(resid**2))), band)


# -- scans -------------------------------------------------------------------

@dataclass(frozen=True)
class RayRecord:
    angle: float
    front_r: float
    s_hat: float
    residual: float
    band_lo: float
    band_hi: float


@dataclass
class RegularityReport:
    """Per-angle regularity estimates at one time."""

    t: float
    model: dict
    sigma: float
    config: dict
    records: list[RayRecord]
    expected_front: float = math.nan
    notes: list[str] = field(default_factory=lambda: [GAIN_BOUND_NOTE])

    @property
    def angles(self) -> np.ndarray:
        return np.array([rec.angle for rec in self.records])

    @property
    def s_hat(self) -> np.ndarray:
        return np.array([rec.s_hat for rec in self.records])

    def min_angle(self) -> float:
        """Angle of the strongest singularity (smallest finite ``s_hat``)."""
        s = self.s_hat
        ok = np.isfinite(s)
        if not np.any(ok):
            return math.nan
        idx = np.flatnonzero(ok)[np.argmin(s[ok])]
        return float(self.records[idx].angle)

    def at(self, angle: float, tol: float = 1e-9) -> RayRecord:
        for rec in self.records:
            if abs(rec.angle - angle) <= tol:
                return rec
        raise KeyError(angle)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(SCAN_COLUMNS)
        for rec in self.records:
            writer.writerow([_fmt(getattr(rec, c)) for c in SCAN_COLUMNS])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text

    def summary(self) -> dict:
        s = self.s_hat
        finite = s[np.isfinite(s)]
        return {
            "t": self.t,
            "model": self.model,
            "sigma": self.sigma,
            "estimator": self.config,
            "expected_front": None if math.isnan(self.expected_front) else self.expected_front,
            "min_angle": _json_float(self.min_angle()),
            "s_hat_min": _json_float(float(finite.min())) if finite.size else None,
            "s_hat_max": _json_float(float(finite.max())) if finite.size else None,
            "rays": len(self.records),
            "rays_without_front": int(np.count_nonzero(~np.isfinite([r.front_r for r in self.records]))),
            "notes": list(self.notes),
        }

    def write_summary(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.summary(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _fmt(x) -> str:
    if isinstance(x, float):
        return "nan" if math.isnan(x) else repr(round(x, 12))
    return str(x)


def _json_float(x):
    return None if x is None or not math.isfinite(x) else x


def wavefront_scan(
    state: WaveState,
    angles,
    config: EstimatorConfig | None = None,
    *,
    t_bar: float,
    samples: Sequence[RaySample] | None = None,
) -> RegularityReport:
    """Estimate the regularity of the outgoing front ``r = t - t_bar`` along each angle.

    A ray counts as carrying the front when its gradient envelope has a
    local maximum within ``config.match_radius`` of the expected radius
    reaching ``config.threshold`` times the strongest envelope on that ray.
    Other rays are reported with ``front_r = nan`` and ``s_hat = nan``.
    """
    config = config or EstimatorConfig(state.sigma)
    config.validate()
    expected = state.t - t_bar
    if expected <= 0:
        raise ParameterError("the outgoing front has not left the tip yet (t <= t_bar)")
    if samples is None:
        samples = ray_samples(state, angles)
    lo, hi = config.usable_band
    records = []
    for sample in samples:
        env = _envelope(sample, config.sigma)
        front_r = _matched_peak(sample, env, expected, config, float(env.max()))
        if math.isnan(front_r):
            records.append(RayRecord(sample.angle, math.nan, math.nan, math.nan, lo, hi))
            continue
        # the estimator is centred on the predicted radius; the detected one is reported
        fit = sobolev_exponent(sample, expected, config)
        records.append(RayRecord(sample.angle, front_r, fit.s_hat, fit.residual, *fit.band))
    return RegularityReport(
        state.t, state.model.describe(), state.sigma, config.to_dict(), records, expected_front=expected
    )


def measure_front(sample: RaySample, radius: float, config: EstimatorConfig) -> RayRecord:
    """Detect a front near ``radius`` on a single ray and estimate its exponent.

    Detection uses the same matching rule as :func:`wavefront_scan`.
    """
    config.validate()
    env = _envelope(sample, config.sigma)
    lo, hi = config.usable_band
    front_r = _matched_peak(sample, env, radius, config, float(env.max()))
    if math.isnan(front_r):
        return RayRecord(sample.angle, math.nan, math.nan, math.nan, lo, hi)
    fit = sobolev_exponent(sample, radius, config)
    return RayRecord(sample.angle, front_r, fit.s_hat, fit.residual, *fit.band)


# -- nonfocusing -------------------------------------------------------------

@dataclass(frozen=True)
class NonfocusingResult:
    passed: bool
    gain: float
    margin: float
    ell: float
    per_state: tuple[tuple[float, float, float], ...]  # (t, s0, sk)
    note: str = GAIN_BOUND_NOTE


def incoming_exponent(state: WaveState, angle: float, t_bar: float, config: EstimatorConfig) -> float:
    """Exponent of the incoming front ``r = t_bar - t`` on the ray at ``angle``."""
    radius = t_bar - state.t
    if radius <= 0:
        raise ParameterError("state is not before the tip-hitting time")
    return sobolev_exponent(ray_sample(state, angle), radius, config).s_hat


def nonfocusing_test(
    states: Sequence[WaveState],
    k: float,
    ell: float,
    config: EstimatorConfig | None = None,
    *,
    angle: float = 0.0,
    t_bar: float,
) -> NonfocusingResult:
    """Check that ``(1 + Delta_0)^{-k}`` raises the incoming-ray exponent by at least ``ell``.

    The gain is the mean over ``states`` (all before ``t_bar``) of the
    exponent change on the incoming ray through the foot ``angle``.
    """
    if not states:
        raise ParameterError("need at least one incoming state")
    if k < 0:
        raise ParameterError("smoothing order must be nonnegative")
    n = states[0].model.n
    if ell >= (n - 1) / 2.0:
        warnings.warn(f"ell = {ell} is not below (n-1)/2 = {(n - 1) / 2}", stacklevel=2)
    config = config or EstimatorConfig(states[0].sigma)
    rows = []
    for st in states:
        if st.t >= t_bar:
            raise ParameterError("nonfocusing states must precede the tip-hitting time")
        s0 = incoming_exponent(st, angle, t_bar, config)
        sk = s0 if k == 0 else incoming_exponent(tangential_smooth(st, k), angle, t_bar, config)
        rows.append((st.t, s0, sk))
    gain = float(np.mean([sk - s0 for _, s0, sk in rows]))
    margin = gain - ell
    return NonfocusingResult(margin >= 0, gain, margin, ell, tuple(rows))


# -- tip emissions -----------------------------------------------------------

@dataclass(frozen=True)
class EmissionTrace:
    """Band-limited energy in the monitor annulus along a trajectory.

    ``energy`` is the annulus energy of the band-passed field as a fraction
    of each state's full (conserved) energy.
    """

    times: np.ndarray
    energy: np.ndarray
    band: tuple[float, float]
    annulus: tuple[float, float]

    def first_above(self, threshold: float) -> float:
        hit = np.flatnonzero(self.energy > threshold)
        return float(self.times[hit[0]]) if hit.size else math.nan


def emission_trace(trajectory: Sequence[WaveState], annulus, *, band=None, n_y: int | None = None) -> EmissionTrace:
    """Top-octave energy in ``annulus`` for each state of a trajectory.

    Each state is passed through a Gaussian band-pass over ``band``
    (default the top octave of the usable band, ``[pi / 2 sigma, pi / sigma]``)
    and the energy density ``u_t^2 + k_c^2 u^2`` (``k_c`` the band centre) is
    integrated over the annulus.
    """
    if not trajectory:
        raise ParameterError("empty trajectory")
    r1, r2 = map(float, annulus)
    if not 0 <= r1 < r2:
        raise ParameterError("annulus must satisfy 0 <= r1 < r2")
    basis = trajectory[0].basis
    if r2 > basis.R:
        raise ParameterError("annulus extends past the truncation radius")
    sigma = trajectory[0].sigma
    if band is None:
        if sigma <= 0:
            raise ParameterError("default band needs mollified data")
        band = (0.5 * math.pi / sigma, math.pi / sigma)
    kc = math.sqrt(band[0] * band[1])
    step = 0.25 * math.pi / band[1]
    panels = max(2, int(math.ceil((r2 - r1) / step)))
    r, wr = composite_gauss_legendre(np.linspace(r1, r2, panels + 1), 4)
    spectrum = basis.spectrum
    if spectrum.kind == "circle":
        n_y = n_y or 2 * int(np.max(np.abs(spectrum.index))) + 2
    else:
        n_y = n_y or len(spectrum) + 8
    y, wy = spectrum.quadrature(n_y)
    w = (wr * r ** (basis.n - 1))[:, None] * wy[None, :]
    for st in trajectory:
        if st.basis is not basis:
            raise ParameterError("trajectory states must share one basis")
    filtered = [band_filter(st, band[0], band[1], shape="gaussian") for st in trajectory]
    # one batched synthesis: the radial matrices are built once for the whole trajectory
    coefs = np.stack([f.a for f in filtered] + [f.b for f in filtered])
    fields = _synthesize_stack(basis, coefs, r, y)
    count = len(trajectory)
    u, ut = fields[:count], fields[count:]
    dens = ut**2 + kc**2 * u**2
    totals = np.array([st.energy() for st in trajectory])
    annulus_energy = np.einsum("kij,ij->k", dens, w)
    energy = np.where(totals > 0, annulus_energy / np.where(totals > 0, totals, 1.0), 0.0)
    times = np.array([st.t for st in trajectory])
    return EmissionTrace(times, energy, (float(band[0]), float(band[1])), (r1, r2))


def tip_emission_monitor(trajectory: Sequence[WaveState], annulus, threshold: float, **kw) -> list[float]:
    """Times at which band-limited energy bursts through the tip annulus.

    Consecutive trajectory times whose annulus energy fraction exceeds
    ``threshold`` form one event.  A front crossing the tip fills the
    annulus symmetrically before and after the hit, so the event time is
    the energy-weighted mean time of the run.
    """
    trace = kw.pop("trace", None) or emission_trace(trajectory, annulus, **kw)
    above = trace.energy > threshold
    events = []
    i = 0
    while i < above.size:
        if not above[i]:
            i += 1
            continue
        j = i
        while j + 1 < above.size and above[j + 1]:
            j += 1
        wts = trace.energy[i : j + 1]
        events.append(float(np.sum(wts * trace.times[i : j + 1]) / np.sum(wts)))
        i = j + 1
    return events


# -- boundary-mode decay -----------------------------------------------------

@dataclass(frozen=True)
class DecayFit:
    """Slope of ``log(mode energy)`` against ``log(1 + mu)``.

    ``degenerate`` means fewer than three populated eigenvalues;
    ``superpolynomial`` flags decay that steepens across the range.
    """

    slope: float
    intercept: float
    residual: float
    populated: int
    degenerate: bool
    superpolynomial: bool


def mode_energies(state: WaveState) -> tuple[np.ndarray, np.ndarray]:
    """Per-eigenvalue ``sum_m |a|^2 + |b|^2 / lam^2``, summed over modes sharing ``mu``."""
    lam = state.basis.lam
    per_mode = np.sum(np.abs(state.a) ** 2 + np.abs(state.b) ** 2 / lam**2, axis=1)
    mu = state.basis.mu
    uniq = np.unique(mu)
    energy = np.array([fsum_real(per_mode[mu == m]) for m in uniq])
    return uniq, energy


def mode_decay_profile(state: WaveState, floor: float = 1e-24) -> DecayFit:
    """Least-squares decay rate of boundary-mode energy over the populated range."""
    mu, energy = mode_energies(state)
    top = float(energy.max()) if energy.size else 0.0
    if top <= 0:
        return DecayFit(math.nan, math.nan, math.nan, 0, True, False)
    keep = energy > floor * top
    # populated range: from the first populated eigenvalue to the last
    idx = np.flatnonzero(keep)
    sel = np.arange(idx[0], idx[-1] + 1)
    sel = sel[energy[sel] > 0]
    if sel.size < 3:
        return DecayFit(math.nan, math.nan, math.nan, int(sel.size), True, False)
    x = np.log1p(mu[sel])
    y = np.log(energy[sel])
    slope, icpt = np.polyfit(x, y, 1)
    resid = float(math.sqrt(np.mean((y - slope * x - icpt) ** 2)))
    superpoly = False
    if sel.size >= 6:
        half = sel.size // 2
        s1 = np.polyfit(x[:half], y[:half], 1)[0]
        s2 = np.polyfit(x[half:], y[half:], 1)[0]
        superpoly = bool(s2 < 1.5 * s1 - 1.0)
    return DecayFit(float(slope), float(icpt), resid, int(sel.size), False, superpoly)
