"""Truncated power-series algebra for spectral densities on [-1, 1].

A density is a finite coefficient sequence f_0..f_K evaluated as
f(lambda) = sum_k f_k lambda^k.  The regularity factor
alpha(f) = sum_k |f_k| (k+1) controls all the Szego-type bounds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularDensityError

DEFAULT_TRUNCATION = 15  # coefficient count 16: orders 0..15

_CHECK_GRID = np.linspace(-1.0, 1.0, 201)


@dataclass(frozen=True)
class PowerSeries:
    """Finite real coefficient sequence (f_0, ..., f_K)."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a nonempty 1-d sequence")
        if not np.isfinite(c).all():
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coeffs", c)

    @property
    def truncation_order(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, lam):
        return np.polynomial.polynomial.polyval(lam, self.coeffs)

    def truncate(self, order: int) -> "PowerSeries":
        if order >= self.truncation_order:
            return self
        return PowerSeries(self.coeffs[: order + 1])


def series_multiply(f: PowerSeries, g: PowerSeries, order: int | None = None) -> PowerSeries:
    """Cauchy product; exact by default, optionally truncated to the given order."""
    prod = np.convolve(f.coeffs, g.coeffs)
    if order is not None:
        prod = prod[: order + 1]
    return PowerSeries(prod)


def _require_positive(f: PowerSeries, what: str) -> None:
    vals = f(_CHECK_GRID)
    if vals.min() <= 0:
        raise SingularDensityError(
            f"{what} requires a positive density on [-1,1]; min value {vals.min():.3e}")


def series_reciprocal(f: PowerSeries, order: int) -> PowerSeries:
    """Power-series inverse to the given order: f * result = 1 + O(x^(order+1))."""
    c = f.coeffs
    if c[0] == 0.0:
        raise SingularDensityError("cannot invert a series with zero constant term")
    vals = f(_CHECK_GRID)
    if vals.min() <= 0.0 <= vals.max():
        raise SingularDensityError("density has a root or sign change on [-1,1]")
    r = np.zeros(order + 1)
    r[0] = 1.0 / c[0]
    for k in range(1, order + 1):
        hi = min(k, c.size - 1)
        acc = np.dot(c[1:hi + 1], r[k - 1::-1][:hi])
        r[k] = -acc / c[0]
    return PowerSeries(r)


def series_log(f: PowerSeries, order: int) -> PowerSeries:
    """Log-series to the given order: exp(result) = f + O(x^(order+1))."""
    c = f.coeffs
    if c[0] <= 0.0:
        raise SingularDensityError("log requires a positive constant term")
    _require_positive(f, "series_log")
    ell = np.zeros(order + 1)
    ell[0] = np.log(c[0])
    for k in range(1, order + 1):
        fk = c[k] if k < c.size else 0.0
        acc = sum(j * ell[j] * c[k - j] for j in range(1, k) if k - j < c.size)
        ell[k] = (k * fk - acc) / (k * c[0])
    return PowerSeries(ell)


def regularity_factor(f: PowerSeries) -> float:
    """alpha(f) = sum_k |f_k| (k+1)."""
    k = np.arange(f.coeffs.size)
    return float(np.abs(f.coeffs) @ (k + 1))
