"""Small numerical helpers shared across modules."""

from __future__ import annotations

import math

import numpy as np


def neumaier_sum(terms: np.ndarray, axis: int = 0) -> np.ndarray:
    """Compensated (Neumaier) summation of ``terms`` along ``axis``.

    The loop order is fixed, so the result does not depend on how the
    caller chunks or parallelises the surrounding work.
    """
    terms = np.moveaxis(np.asarray(terms), axis, 0)
    if np.iscomplexobj(terms):
        return neumaier_sum(terms.real) + 1j * neumaier_sum(terms.imag)
    if terms.shape[0] == 0:
        return np.zeros(terms.shape[1:], dtype=terms.dtype)
    total = terms[0].astype(float, copy=True)
    comp = np.zeros_like(total)
    for term in terms[1:]:
        t = total + term
        big = np.abs(total) >= np.abs(term)
        comp += np.where(big, (total - t) + term, (term - t) + total)
        total = t
    return total + comp


def fsum_real(values: np.ndarray) -> float:
    """Exactly rounded sum of a real array (thin wrapper over ``math.fsum``)."""
    return math.fsum(np.asarray(values, dtype=float).ravel().tolist())


def gauss_legendre(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on ``[a, b]``."""
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def composite_gauss_legendre(breaks, n_per_panel: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule over consecutive intervals in ``breaks``."""
    breaks = np.asarray(breaks, dtype=float)
    x0, w0 = np.polynomial.legendre.leggauss(n_per_panel)
    nodes, weights = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b <= a:
            continue
        half = 0.5 * (b - a)
        nodes.append(a + half * (x0 + 1.0))
        weights.append(half * w0)
    return np.concatenate(nodes), np.concatenate(weights)


def panel_rule(a: float, b: float, panel_width: float, n_per_panel: int = 24):
    """Composite Gauss-Legendre rule with panels no wider than ``panel_width``."""
    count = max(1, int(math.ceil((b - a) / panel_width)))
    return composite_gauss_legendre(np.linspace(a, b, count + 1), n_per_panel)


class CompensatedAccumulator:
    """Streaming Neumaier sum of same-shaped arrays, added in a fixed order."""

    def __init__(self):
        self.total = None
        self.comp = None

    def add(self, term: np.ndarray) -> None:
        term = np.asarray(term)
        if self.total is None:
            self.total = term.astype(np.result_type(term, float), copy=True)
            self.comp = np.zeros_like(self.total)
            return
        if np.iscomplexobj(term) or np.iscomplexobj(self.total):
            if not np.iscomplexobj(self.total):
                self.total = self.total.astype(complex)
                self.comp = self.comp.astype(complex)
            self._add_parts(term)
            return
        t = self.total + term
        big = np.abs(self.total) >= np.abs(term)
        self.comp += np.where(big, (self.total - t) + term, (term - t) + self.total)
        self.total = t

    def _add_parts(self, term):
        term = term.astype(complex, copy=False)
        for part in ("real", "imag"):
            s, x = getattr(self.total, part), getattr(term, part)
            t = s + x
            c = np.where(np.abs(s) >= np.abs(x), (s - t) + x, (x - t) + s)
            getattr(self.comp, part)[...] += c
            getattr(self.total, part)[...] = t

    def result(self) -> np.ndarray:
        return self.total + self.comp
