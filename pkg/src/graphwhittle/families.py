"""Parametric spectral-density families over a compact parameter interval.

Each family produces, for theta in [theta_min, theta_max], the truncated
series of the density f_theta together with its first two theta-derivatives
(coefficient-wise, so they are the exact derivatives of the truncated model)
and, where available, an exact polynomial reciprocal.

The autoregressive family f_theta(x) = (1 - theta x)^(-2) is the reference
experiment's model: its reciprocal is the degree-2 polynomial (1 - theta x)^2,
so boundary correction runs at radius P = 2.  Its default parameter interval
is [-0.7, 0.7]: beyond |theta| ~ 0.75 the 15-coefficient truncation of the
series loses positivity on [-1, 1] even though the underlying density is
positive for all |theta| < 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidParameterError, SingularDensityError
from .series import DEFAULT_TRUNCATION, PowerSeries, regularity_factor, series_log, series_reciprocal

FAMILY_KINDS = ("ar_squared", "ar1", "ma_poly", "custom")

_LAMBDA_GRID = np.linspace(-1.0, 1.0, 201)
_THETA_GRID_SIZE = 101
_INJECTIVITY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ParametricDensity:
    """theta -> f_theta, with derivatives and optional exact reciprocal."""

    kind: str
    theta_min: float
    theta_max: float
    truncation_order: int
    _series: Callable[[float], PowerSeries]
    _dtheta: Callable[[float], PowerSeries]
    _d2theta: Callable[[float], PowerSeries]
    _inv: Callable[[float], PowerSeries] | None = None
    correction_radius: int | None = None  # P of the AR_P / MA_P structure, if any
    rho: float | None = None

    def __post_init__(self):
        if not self.theta_min < self.theta_max:
            raise InvalidParameterError("parameter interval must be nondegenerate")
        if self.rho is None:
            object.__setattr__(self, "rho", self._default_rho())

    def _default_rho(self) -> float:
        grid = np.linspace(self.theta_min, self.theta_max, _THETA_GRID_SIZE)
        worst = max(regularity_factor(series_log(self.series(t), self.truncation_order))
                    for t in grid)
        return 1.1 * worst

    def check_theta(self, theta: float) -> float:
        if not (self.theta_min <= theta <= self.theta_max):
            raise InvalidParameterError(
                f"theta={theta} outside [{self.theta_min}, {self.theta_max}]")
        return float(theta)

    def series(self, theta: float) -> PowerSeries:
        return self._series(self.check_theta(theta))

    def dtheta_series(self, theta: float) -> PowerSeries:
        return self._dtheta(self.check_theta(theta))

    def d2theta_series(self, theta: float) -> PowerSeries:
        return self._d2theta(self.check_theta(theta))

    def inv_series(self, theta: float) -> PowerSeries:
        """Series of 1/f_theta; exact polynomial for AR families."""
        theta = self.check_theta(theta)
        if self._inv is not None:
            return self._inv(theta)
        return series_reciprocal(self._series(theta), self.truncation_order)

    def validate(self) -> None:
        """Injectivity, positivity, and log-regularity membership on check grids."""
        grid = np.linspace(self.theta_min, self.theta_max, _THETA_GRID_SIZE)
        all_coeffs = []
        for t in grid:
            f = self.series(t)
            vals = f(_LAMBDA_GRID)
            if vals.min() <= 0:
                raise SingularDensityError(
                    f"f_theta not positive on [-1,1] at theta={t:.4f} (min {vals.min():.3e})")
            a = regularity_factor(series_log(f, self.truncation_order))
            if a > self.rho + 1e-12:
                raise InvalidParameterError(
                    f"alpha(log f_theta)={a:.4f} exceeds rho={self.rho:.4f} at theta={t:.4f}")
            all_coeffs.append(f.coeffs)
        width = max(c.size for c in all_coeffs)
        mat = np.zeros((len(all_coeffs), width))
        for r, c in enumerate(all_coeffs):
            mat[r, : c.size] = c
        for a in range(len(grid)):
            for b in range(a + 1, len(grid)):
                if np.max(np.abs(mat[a] - mat[b])) <= _INJECTIVITY_TOL:
                    raise InvalidParameterError(
                        f"family not injective: theta={grid[a]:.4f} and {grid[b]:.4f} "
                        "give the same series")


def ar_squared_family(theta_min: float = -0.7, theta_max: float = 0.7,
                      order: int = DEFAULT_TRUNCATION, rho: float | None = None) -> ParametricDensity:
    """f_theta(x) = (1 - theta x)^(-2), truncated; AR with P = 2."""
    ks = np.arange(order + 1)

    def _f(t):
        return PowerSeries((ks + 1) * t ** ks)

    def _df(t):
        c = np.zeros(order + 1)
        c[1:] = (ks[1:] + 1) * ks[1:] * t ** (ks[1:] - 1)
        return PowerSeries(c)

    def _d2f(t):
        c = np.zeros(order + 1)
        c[2:] = (ks[2:] + 1) * ks[2:] * (ks[2:] - 1) * t ** (ks[2:] - 2)
        return PowerSeries(c)

    def _inv(t):
        return PowerSeries(np.array([1.0, -2.0 * t, t * t]))

    return ParametricDensity(kind="ar_squared", theta_min=theta_min, theta_max=theta_max,
                             truncation_order=order, _series=_f, _dtheta=_df, _d2theta=_d2f,
                             _inv=_inv, correction_radius=2, rho=rho)


def ar1_family(theta_min: float = -0.9, theta_max: float = 0.9,
               order: int = DEFAULT_TRUNCATION, rho: float | None = None) -> ParametricDensity:
    """f_theta(x) = 1 / (1 - theta x); AR with P = 1."""
    ks = np.arange(order + 1)

    def _f(t):
        return PowerSeries(t ** ks)

    def _df(t):
        c = np.zeros(order + 1)
        c[1:] = ks[1:] * t ** (ks[1:] - 1)
        return PowerSeries(c)

    def _d2f(t):
        c = np.zeros(order + 1)
        c[2:] = ks[2:] * (ks[2:] - 1) * t ** (ks[2:] - 2)
        return PowerSeries(c)

    def _inv(t):
        return PowerSeries(np.array([1.0, -t]))

    return ParametricDensity(kind="ar1", theta_min=theta_min, theta_max=theta_max,
                             truncation_order=order, _series=_f, _dtheta=_df, _d2theta=_d2f,
                             _inv=_inv, correction_radius=1, rho=rho)


def ma1_family(theta_min: float = -0.8, theta_max: float = 0.8,
               order: int = DEFAULT_TRUNCATION, rho: float | None = None) -> ParametricDensity:
    """f_theta(x) = 1 + theta x, a degree-1 polynomial density; MA with P = 1."""

    def _f(t):
        return PowerSeries(np.array([1.0, t]))

    def _df(t):
        return PowerSeries(np.array([0.0, 1.0]))

    def _d2f(t):
        return PowerSeries(np.array([0.0]))

    return ParametricDensity(kind="ma_poly", theta_min=theta_min, theta_max=theta_max,
                             truncation_order=order, _series=_f, _dtheta=_df, _d2theta=_d2f,
                             _inv=None, correction_radius=1, rho=rho)


def constant_family(theta_min: float = 0.1, theta_max: float = 4.0,
                    rho: float | None = None) -> ParametricDensity:
    """White noise with unknown variance: f_theta = theta; MA with P = 0."""
    if theta_min <= 0:
        raise InvalidParameterError("constant family needs a positive parameter interval")

    def _f(t):
        return PowerSeries(np.array([t]))

    def _df(t):
        return PowerSeries(np.array([1.0]))

    def _d2f(t):
        return PowerSeries(np.array([0.0]))

    def _inv(t):
        return PowerSeries(np.array([1.0 / t]))

    return ParametricDensity(kind="custom", theta_min=theta_min, theta_max=theta_max,
                             truncation_order=0, _series=_f, _dtheta=_df, _d2theta=_d2f,
                             _inv=_inv, correction_radius=0, rho=rho)


def custom_family(series_fn, dtheta_fn, d2theta_fn, theta_min, theta_max,
                  order: int = DEFAULT_TRUNCATION, inv_fn=None,
                  correction_radius: int | None = None, rho: float | None = None) -> ParametricDensity:
    return ParametricDensity(kind="custom", theta_min=theta_min, theta_max=theta_max,
                             truncation_order=order, _series=series_fn, _dtheta=dtheta_fn,
                             _d2theta=d2theta_fn, _inv=inv_fn,
                             correction_radius=correction_radius, rho=rho)


def family_from_config(kind: str, theta_min: float, theta_max: float,
                       order: int, rho: float | None) -> ParametricDensity:
    if kind == "ar_squared":
        return ar_squared_family(theta_min, theta_max, order, rho)
    if kind == "ar1":
        return ar1_family(theta_min, theta_max, order, rho)
    if kind == "ma_poly":
        return ma1_family(theta_min, theta_max, order, rho)
    if kind == "constant":
        return constant_family(theta_min, theta_max, rho)
    raise InvalidParameterError(f"unknown family kind {kind!r}")
