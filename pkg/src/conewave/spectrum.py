"""Boundary spectra, Bessel orders and the real-order special functions.

The cross-section of a product cone carries its own Laplacian; each of its
eigenmodes turns the cone Laplacian into a Bessel operator whose order is
``nu = sqrt(mu + ((n - 2) / 2)**2)``.  Only the branch regular at the tip is
ever used, which is how the Friedrichs extension shows up mode by mode.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, Sequence

import numpy as np
import scipy.fft
from scipy import special

from .errors import NumericError, ParameterError, SpectrumParseError

__all__ = [
    "BoundaryMode",
    "BoundarySpectrum",
    "BesselTable",
    "bessel_j",
    "bessel_order",
    "bessel_zeros",
    "circle_spectrum",
    "gamma_real",
    "load_spectrum",
    "save_spectrum",
    "sphere_axisym_spectrum",
]


@dataclass(frozen=True)
class BoundaryMode:
    """One eigenmode of the cross-section Laplacian."""

    index: int
    mu: float
    weight: float = 1.0
    label: str = ""
    evaluator: Callable[[np.ndarray], np.ndarray] | None = field(
        default=None, compare=False, repr=False
    )

    def __call__(self, y):
        if self.evaluator is None:
            raise ParameterError(f"mode {self.label or self.index} has no eigenfunction evaluator")
        return self.evaluator(np.asarray(y, dtype=float))


class BoundarySpectrum(Sequence[BoundaryMode]):
    """An ordered list of boundary modes plus vectorised evaluation.

    ``kind`` is ``"circle"``, ``"sphere"`` (axisymmetric sector) or
    ``"custom"``.  Modes are stored in nondecreasing eigenvalue order.
    """

    def __init__(self, kind: str, modes: Sequence[BoundaryMode], *, rho=None, c=None):
        self.kind = kind
        self._modes = tuple(modes)
        self.rho = rho
        self.c = c
        self.mu = np.array([m.mu for m in self._modes], dtype=float)
        self.weight = np.array([m.weight for m in self._modes], dtype=float)
        self.index = np.array([m.index for m in self._modes], dtype=int)

    def __len__(self) -> int:
        return len(self._modes)

    def __getitem__(self, i):
        return self._modes[i]

    def __iter__(self) -> Iterator[BoundaryMode]:
        return iter(self._modes)

    def __repr__(self) -> str:
        return f"BoundarySpectrum(kind={self.kind!r}, modes={len(self)})"

    @property
    def is_complex(self) -> bool:
        return self.kind == "circle"

    @property
    def measure(self) -> float:
        """Total h0-measure of the cross-section."""
        if self.kind == "circle":
            return float(self.rho)
        if self.kind == "sphere":
            return 4.0 * math.pi * self.c**2
        raise ParameterError("custom spectra carry no boundary geometry")

    def evaluate(self, y) -> np.ndarray:
        """Matrix ``phi[k, i] = phi_i(y_k)`` for boundary points ``y``."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if self.kind == "circle":
            return np.exp(2j * np.pi * np.outer(y, self.index) / self.rho) / math.sqrt(self.rho)
        if self.kind == "sphere":
            return _legendre_matrix(np.cos(y), self.index) * (
                np.sqrt((2 * self.index + 1) / (4 * math.pi)) / self.c
            )
        raise ParameterError("custom spectra have no eigenfunction evaluator")

    def quadrature(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Boundary nodes and weights integrating ``phi_i conj(phi_k)`` exactly.

        Circle: ``n`` equispaced angles.  Sphere: ``n`` Gauss-Legendre
        nodes in ``cos(beta)``, weights including the azimuthal ``2 pi c^2``.
        """
        if self.kind == "circle":
            y = np.arange(n) * (self.rho / n)
            return y, np.full(n, self.rho / n)
        if self.kind == "sphere":
            x, w = np.polynomial.legendre.leggauss(n)
            return np.arccos(x[::-1]), w[::-1] * 2.0 * math.pi * self.c**2
        raise ParameterError("custom spectra have no boundary quadrature")


def _legendre_matrix(x: np.ndarray, degrees: np.ndarray) -> np.ndarray:
    lmax = int(degrees.max()) if degrees.size else 0
    p = np.empty((lmax + 1, x.size))
    p[0] = 1.0
    if lmax >= 1:
        p[1] = x
    for l in range(1, lmax):
        p[l + 1] = ((2 * l + 1) * x * p[l] - l * p[l - 1]) / (l + 1)
    return p[degrees].T


def circle_spectrum(rho: float, J: int) -> BoundarySpectrum:
    """Modes ``j = 0, +-1, ..., +-J`` of a circle of circumference ``rho``."""
    if not rho > 0:
        raise ParameterError(f"circumference must be positive, got {rho}")
    if J < 0:
        raise ParameterError("J must be >= 0")
    order = [0]
    for j in range(1, J + 1):
        order += [j, -j]
    modes = []
    for j in order:
        def phi(y, j=j):
            return np.exp(2j * np.pi * j * y / rho) / math.sqrt(rho)

        modes.append(BoundaryMode(j, (2 * math.pi * j / rho) ** 2, 1.0, f"j={j}", phi))
    return BoundarySpectrum("circle", modes, rho=float(rho))


def sphere_axisym_spectrum(c: float, L: int) -> BoundarySpectrum:
    """Axisymmetric modes ``l = 0..L`` of a round sphere of radius ``c``.

    Eigenfunctions are ``sqrt((2l+1)/4pi) P_l(cos beta) / c``, orthonormal
    for the area element ``c^2 sin(beta) dbeta dphi``.  The weight is the
    full multiplicity ``2l + 1``.
    """
    if not c > 0:
        raise ParameterError(f"sphere radius must be positive, got {c}")
    if L < 0:
        raise ParameterError("L must be >= 0")
    modes = []
    for l in range(L + 1):
        def phi(beta, l=l):
            return special.eval_legendre(l, np.cos(beta)) * math.sqrt((2 * l + 1) / (4 * math.pi)) / c

        modes.append(BoundaryMode(l, l * (l + 1) / c**2, float(2 * l + 1), f"l={l}", phi))
    return BoundarySpectrum("sphere", modes, c=float(c))


def save_spectrum(spectrum: Sequence[BoundaryMode], path) -> None:
    lines = ["# mu weight label"]
    for m in spectrum:
        lines.append(f"{m.mu!r} {m.weight!r} {m.label or m.index}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_spectrum(path) -> BoundarySpectrum:
    """Read a ``mu weight label`` spectrum file.

    Blank lines and ``#`` comments are skipped; eigenvalues must be
    nonnegative and nondecreasing, weights positive.
    """
    modes: list[BoundaryMode] = []
    last_mu = -math.inf
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) < 2:
            raise SpectrumParseError(f"expected 'mu weight [label]', got {raw!r}", lineno)
        try:
            mu, weight = float(parts[0]), float(parts[1])
        except ValueError:
            raise SpectrumParseError(f"non-numeric field in {raw!r}", lineno) from None
        if not math.isfinite(mu) or mu < 0:
            raise SpectrumParseError(f"negative or non-finite eigenvalue {parts[0]}", lineno)
        if not (math.isfinite(weight) and weight > 0):
            raise SpectrumParseError(f"weight must be positive, got {parts[1]}", lineno)
        if mu < last_mu:
            raise SpectrumParseError("eigenvalues must be listed in nondecreasing order", lineno)
        last_mu = mu
        label = " ".join(parts[2:]) if len(parts) > 2 else str(len(modes))
        modes.append(BoundaryMode(len(modes), mu, weight, label))
    if not modes:
        raise SpectrumParseError(f"no modes found in {path}")
    return BoundarySpectrum("custom", modes)


def bessel_order(mu, n: int):
    """Bessel order ``sqrt(mu + ((n - 2) / 2)**2)`` of a boundary eigenvalue."""
    if n < 2:
        raise ParameterError("dimension must be >= 2")
    mu = np.asarray(mu, dtype=float)
    if np.any(mu < 0):
        raise ParameterError("eigenvalues must be nonnegative")
    nu = np.sqrt(mu + ((n - 2) / 2.0) ** 2)
    return float(nu) if nu.ndim == 0 else nu


def gamma_real(x: float) -> float:
    """Gamma function for ``x > 0``."""
    if not x > 0:
        raise ParameterError("gamma_real is defined here for x > 0 only")
    return math.gamma(x)


def bessel_j(nu, x):
    """Bessel function of the first kind, real order ``nu >= 0``, ``x >= 0``.

    Values that underflow are returned as zero rather than NaN.
    """
    nu_a = np.asarray(nu, dtype=float)
    x_a = np.asarray(x, dtype=float)
    if np.any(nu_a < 0) or np.any(x_a < 0):
        raise ParameterError("bessel_j needs nu >= 0 and x >= 0")
    out = special.jv(nu_a, x_a)
    out = np.where(np.isnan(out), 0.0, out)
    return float(out) if out.ndim == 0 else out


def _mcmahon(nu: float, m: np.ndarray) -> np.ndarray:
    beta = (m + nu / 2.0 - 0.25) * np.pi
    mu = 4.0 * nu * nu
    b8 = 8.0 * beta
    return (
        beta
        - (mu - 1) / b8
        - 4 * (mu - 1) * (7 * mu - 31) / (3 * b8**3)
        - 32 * (mu - 1) * (83 * mu**2 - 982 * mu + 3779) / (15 * b8**5)
    )


def bessel_zeros(nu: float, M: int) -> np.ndarray:
    """First ``M`` positive zeros of ``J_nu``, strictly increasing.

    Zeros are bracketed by sign changes on a unit-step grid (consecutive
    zeros are always more than 3 apart) and polished by safeguarded Newton
    iterations started from McMahon's expansion wherever that guess falls
    inside the bracket.  Results are cached; the returned array is
    read-only.
    """
    if nu < 0:
        raise ParameterError("order must be >= 0")
    if M < 1:
        raise ParameterError("need at least one zero")
    return _bessel_zeros_cached(float(nu), int(M))


@functools.lru_cache(maxsize=4096)
def _bessel_zeros_cached(nu: float, M: int) -> np.ndarray:
    start = max(nu, 0.5)
    lo_list: list[np.ndarray] = []
    found = 0
    x0 = start
    f0 = special.jv(nu, x0)
    while found < M:
        span = (M - found + 4) * math.pi + 16.0
        grid = x0 + np.arange(1, int(span) + 1, dtype=float)
        vals = special.jv(nu, grid)
        xs = np.concatenate([[x0], grid])
        fs = np.concatenate([[f0], vals])
        change = np.nonzero(fs[:-1] * fs[1:] <= 0)[0]
        # an exact zero on a grid point would otherwise be counted twice
        change = change[fs[change] != 0]
        lo_list.append(xs[change])
        found += change.size
        x0, f0 = xs[-1], fs[-1]
    lo = np.concatenate(lo_list)[:M]
    hi = lo + 1.0
    flo = special.jv(nu, lo)

    m = np.arange(1, M + 1, dtype=float)
    guess = _mcmahon(nu, m)
    x = np.where((guess > lo) & (guess < hi), guess, 0.5 * (lo + hi))
    active = np.arange(M)
    for _ in range(100):
        xa = x[active]
        f = special.jv(nu, xa)
        fp = special.jv(nu - 1.0, xa) - nu / xa * f
        same = np.sign(f) == np.sign(flo[active])
        lo[active] = np.where(same, xa, lo[active])
        flo[active] = np.where(same, f, flo[active])
        hi[active] = np.where(same, hi[active], xa)
        safe = np.where(fp != 0, fp, 1.0)
        xn = xa - f / safe
        bad = ~((xn > lo[active]) & (xn < hi[active])) | (fp == 0)
        xn = np.where(bad, 0.5 * (lo[active] + hi[active]), xn)
        xn = np.where(f == 0, xa, xn)
        done = (np.abs(xn - xa) <= 2e-15 * xa) | (f == 0)
        x[active] = xn
        active = active[~done]
        if active.size == 0:
            break
    else:
        worst = int(active[np.argmax(np.abs(special.jv(nu, x[active])))])
        raise NumericError(
            f"Newton polishing of zeros of J_{nu} did not converge "
            f"(index {worst + 1}, x={x[worst]!r}, residual {special.jv(nu, x[worst])!r})"
        )
    if np.any(np.diff(x) <= 0):
        raise NumericError(f"zeros of J_{nu} are not strictly increasing")
    mids = 0.5 * (x[:-1] + x[1:])
    if mids.size and np.any(np.sign(special.jv(nu, mids[1:])) == np.sign(special.jv(nu, mids[:-1]))):
        raise NumericError(f"a zero of J_{nu} was skipped")
    x.setflags(write=False)
    return x


class BesselTable:
    """Piecewise Chebyshev interpolant of ``J_nu`` on ``[0, x_max]``.

    Bulk synthesis needs ``J_nu`` at millions of points for a handful of
    orders; evaluating through fixed-degree panels is far cheaper than
    calling the general routine pointwise.  The first panel interpolates
    ``J_nu(x) (h/x)^nu``, which is entire, so non-integer orders keep full
    accuracy near the origin.  Absolute accuracy is about 1e-14.
    """

    def __init__(self, nu: float, x_max: float, panel: float = 8.0, degree: int = 24):
        self.nu = float(nu)
        self.h = float(panel)
        self.npanel = max(1, int(math.ceil(x_max / panel)) + 1)
        n = degree + 1
        t = np.cos(np.pi * (np.arange(n) + 0.5) / n)
        left = np.arange(self.npanel)[:, None] * self.h
        xs = left + 0.5 * self.h * (t[None, :] + 1.0)
        vals = np.empty_like(xs)
        vals[1:] = special.jv(self.nu, xs[1:])
        vals[0] = self._scaled_series(xs[0])
        coef = scipy.fft.dct(vals, type=2, axis=1) / n
        coef[:, 0] *= 0.5
        self.coef = coef
        self.x_max = self.npanel * self.h

    def _scaled_series(self, x: np.ndarray) -> np.ndarray:
        nu, h = self.nu, self.h
        log0 = nu * math.log(h / 2.0) - math.lgamma(nu + 1.0)
        term = np.full_like(x, math.exp(log0) if log0 > -700 else 0.0)
        total = term.copy()
        q = -(x / 2.0) ** 2
        for k in range(200):
            term = term * q / ((k + 1) * (nu + k + 1))
            total += term
            if np.all(np.abs(term) <= 1e-18 * np.maximum(np.abs(total), 1e-300)):
                break
        return total

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        out = np.empty_like(flat)
        chunk = 1 << 16
        for s in range(0, flat.size, chunk):
            out[s : s + chunk] = self._eval(flat[s : s + chunk])
        return out.reshape(x.shape)

    def _eval(self, x: np.ndarray) -> np.ndarray:
        idx = np.clip((x // self.h).astype(int), 0, self.npanel - 1)
        t = 2.0 * (x - idx * self.h) / self.h - 1.0
        c = self.coef[idx]
        b1 = np.zeros_like(x)
        b2 = np.zeros_like(x)
        for k in range(c.shape[1] - 1, 0, -1):
            b1, b2 = c[:, k] + 2.0 * t * b1 - b2, b1
        val = c[:, 0] + t * b1 - b2
        first = idx == 0
        if np.any(first):
            xf = x[first]
            with np.errstate(divide="ignore"):
                scale = np.where(xf > 0, np.exp(self.nu * np.log(np.where(xf > 0, xf, 1.0) / self.h)), 0.0)
            if self.nu == 0.0:
                scale = np.ones_like(xf)
            val[first] *= scale
        return val
