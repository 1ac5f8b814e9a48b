"""The four Gaussian log-likelihoods, their maximizers, and information
functionals.

Kinds:
  exact     -1/2 ( m log 2pi + log det K_n(f) + X^T K_n(f)^{-1} X )
  bar       log det replaced by m * integral of log f against the spectral
            measure, quadratic form kept exact
  tilde     both replacements: integral term and X^T K_n(1/f) X
  unbiased  tilde with the boundary-corrected form X^T Q_n(1/f) X

The quadratic forms of tilde and unbiased reduce to theta-independent walk
statistics X^T (W^k)|_window X, so likelihood evaluations away from the exact
kind cost a handful of sparse matrix-vector products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import ndtri

from .covariance import CorrectionMatrix, padding_margin, restricted_power_columns
from .errors import (DegenerateInformationError, EstimationFailedError,
                     InvalidParameterError, NotPositiveDefiniteError,
                     SingularDensityError)
from .families import ParametricDensity
from .graphs import Graph
from .measures import SpectralMeasure
from .sampling import GaussianSample
from .series import PowerSeries

LIKELIHOOD_KINDS = ("exact", "bar", "tilde", "unbiased")

_GRID_POINTS = 64
_STACK_MEMORY_CAP = 400 << 20  # bytes of cached restricted powers
_CHOL_MEMORY_CAP = 400 << 20   # bytes of cached Cholesky factors
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _check_kind(kind: str) -> str:
    if kind not in LIKELIHOOD_KINDS:
        raise InvalidParameterError(f"unknown likelihood kind {kind!r}")
    return kind


@dataclass(eq=False)
class EstimationContext:
    """Read-only bundle shared by likelihood evaluations."""

    family: ParametricDensity
    host: Graph
    subset: np.ndarray
    mu: SpectralMeasure | None = None
    correction: CorrectionMatrix | None = None
    warnings: tuple = ()

    def __post_init__(self):
        self.subset = np.asarray(self.subset, dtype=int)
        self.m = self.subset.size
        order = self.family.truncation_order
        warn = list(self.warnings)
        margin = padding_margin(self.host, self.subset)
        if margin <= order:
            warn.append(f"padding margin {margin:.0f} <= truncation order {order}")
        self.warnings = tuple(warn)
        self._stack = None
        self._stack_built = False
        self._delta = None
        # factorization cache sized so the coarse optimizer grid fits; entries
        # are theta-keyed and shared across replicates and threads
        self._chol_cache: dict = {}
        self._chol_cap = max(1, min(80, _CHOL_MEMORY_CAP // (8 * self.m * self.m)))

    # -- restricted powers ------------------------------------------------
    def _power_stack(self):
        if not self._stack_built:
            order = self.family.truncation_order
            nbytes = (order + 1) * self.m * self.m * 8
            if nbytes <= _STACK_MEMORY_CAP:
                stack = np.empty((order + 1, self.m, self.m))
                for k, block in restricted_power_columns(self.host, self.subset, order):
                    stack[k] = block[self.subset, :]
                self._stack = stack
            self._stack_built = True
        return self._stack

    def covariance_at(self, theta: float, symmetrize: bool = True) -> np.ndarray:
        """Dense K_n(f_theta), restriction of f_theta(W) to the window."""
        coeffs = self.family.series(theta).coeffs
        stack = self._power_stack()
        if stack is not None:
            mat = np.tensordot(coeffs, stack[: coeffs.size], axes=1)
        else:
            mat = np.zeros((self.m, self.m))
            for k, block in restricted_power_columns(self.host, self.subset,
                                                     coeffs.size - 1):
                if coeffs[k] != 0.0:
                    mat += coeffs[k] * block[self.subset, :]
        return 0.5 * (mat + mat.T) if symmetrize else mat

    def cholesky_at(self, theta: float):
        """(lower factor, log det) of K_n(f_theta), cached across replicates."""
        key = round(float(theta), 12)
        hit = self._chol_cache.get(key)
        if hit is not None:
            return hit
        mat = self.covariance_at(theta, symmetrize=False)
        try:
            lower = np.linalg.cholesky(mat)
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefiniteError(
                f"K_n(f_theta) not positive definite at theta={theta}") from exc
        entry = (lower, 2.0 * float(np.log(np.diag(lower)).sum()))
        if len(self._chol_cache) < self._chol_cap:
            self._chol_cache[key] = entry
        return entry

    # -- quadratic forms ---------------------------------------------------
    def walk_statistics(self, x: np.ndarray, order: int) -> np.ndarray:
        """t_k = X^T (W^k)|window X for k = 0..order."""
        u = np.zeros(self.host.n_vertices)
        u[self.subset] = x
        out = np.empty(order + 1)
        out[0] = x @ x
        for k in range(1, order + 1):
            u = self.host.weights @ u
            out[k] = x @ u[self.subset]
        return out

    def _delta_tables(self):
        """Correction entries (B-1) on window pairs and their walk powers."""
        if self._delta is None:
            if self.correction is None:
                raise InvalidParameterError("unbiased likelihood needs a correction matrix")
            delta = self.correction.values - 1.0
            rows, cols = np.nonzero(delta)
            order = self.family.truncation_order
            pows = np.empty((order + 1, rows.size))
            for k, block in restricted_power_columns(self.host, self.subset, order):
                pows[k] = block[self.subset[rows], cols]
            self._delta = (rows, cols, delta[rows, cols], pows)
        return self._delta

    def log_integral(self, theta: float) -> float:
        if self.mu is None:
            raise InvalidParameterError("this likelihood kind needs a spectral measure")
        vals = self.family.series(theta)(self.mu.atoms_lambda)
        if vals.min() <= 0:
            raise SingularDensityError(
                f"f_theta not positive on the measure support at theta={theta}")
        return float(self.mu.atoms_weight @ np.log(vals))


def _values(x) -> np.ndarray:
    return x.values if isinstance(x, GaussianSample) else np.asarray(x, dtype=float)


def likelihood_evaluator(kind: str, x, ctx: EstimationContext):
    """theta -> log-likelihood with the per-field statistics computed once."""
    _check_kind(kind)
    xv = _values(x)
    if xv.size != ctx.m:
        raise InvalidParameterError(f"field length {xv.size} != window size {ctx.m}")
    m = ctx.m
    const = m * math.log(2.0 * math.pi)

    if kind in ("exact", "bar"):
        def evaluate(theta: float) -> float:
            theta = ctx.family.check_theta(theta)
            lower, logdet = ctx.cholesky_at(theta)
            y = solve_triangular(lower, xv, lower=True, check_finite=False)
            quad = float(y @ y)
            middle = logdet if kind == "exact" else m * ctx.log_integral(theta)
            return -0.5 * (const + middle + quad)

        return evaluate

    order = max(ctx.family.inv_series(ctx.family.theta_min).truncation_order,
                ctx.family.inv_series(ctx.family.theta_max).truncation_order)
    stats = ctx.walk_statistics(xv, order)
    corrected = kind == "unbiased"
    x_rc = None
    if corrected:
        rows, cols, dvals, pows = ctx._delta_tables()
        if rows.size:
            x_rc = xv[rows] * xv[cols] * dvals

    def evaluate(theta: float) -> float:
        theta = ctx.family.check_theta(theta)
        coeffs = ctx.family.inv_series(theta).coeffs
        if coeffs.size > stats.size:
            raise InvalidParameterError(
                "reciprocal series order varies with theta beyond the endpoints")
        quad = float(coeffs @ stats[: coeffs.size])
        if x_rc is not None:
            quad += float(x_rc @ (coeffs @ pows[: coeffs.size]))
        return -0.5 * (const + m * ctx.log_integral(theta) + quad)

    return evaluate


def log_likelihood(kind: str, theta: float, x, ctx: EstimationContext) -> float:
    """Evaluate the requested log-likelihood at theta for the observed field."""
    return likelihood_evaluator(kind, x, ctx)(theta)


@dataclass(frozen=True)
class EstimationResult:
    kind: str
    theta_hat: float
    loglik_at_max: float
    std_error: float
    n_evals: int
    bracket: tuple
    theta_bounds: tuple
    jitter: float = 0.0
    warnings: tuple = ()

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "theta_hat": self.theta_hat,
            "std_error": self.std_error,
            "loglik": self.loglik_at_max,
            "n_evals": self.n_evals,
            "bracket_lo": self.bracket[0],
            "bracket_hi": self.bracket[1],
            "jitter": self.jitter,
            "warnings": list(self.warnings),
        }


def maximize_likelihood(kind: str, x, ctx: EstimationContext, tol: float = 1e-5) -> EstimationResult:
    """Deterministic 64-point grid scan plus golden-section refinement."""
    _check_kind(kind)
    if tol <= 0:
        raise InvalidParameterError("tolerance must be positive")
    lo, hi = ctx.family.theta_min, ctx.family.theta_max
    evaluate = likelihood_evaluator(kind, x, ctx)
    grid = np.linspace(lo, hi, _GRID_POINTS)
    vals = np.full(_GRID_POINTS, -np.inf)
    n_evals = 0
    first_error = None
    for idx, t in enumerate(grid):
        try:
            vals[idx] = evaluate(t)
            n_evals += 1
        except Exception as exc:  # failed evaluations leave -inf
            if first_error is None:
                first_error = exc
    if not np.isfinite(vals).any():
        raise EstimationFailedError(
            f"all grid evaluations failed for kind={kind}") from first_error

    best = int(np.argmax(vals))
    a = grid[max(best - 1, 0)]
    b = grid[min(best + 1, _GRID_POINTS - 1)]
    best_theta, best_val = float(grid[best]), float(vals[best])

    # golden-section maximization on [a, b]
    dist = b - a
    if dist > tol:
        c = b - _INV_PHI * dist
        d = a + _INV_PHI * dist
        fc = evaluate(c)
        fd = evaluate(d)
        n_evals += 2
        for t, v in ((c, fc), (d, fd)):
            if v > best_val:
                best_theta, best_val = float(t), float(v)
        while (b - a) > tol:
            if fc >= fd:
                b, d, fd = d, c, fc
                c = b - _INV_PHI * (b - a)
                fc = evaluate(c)
                n_evals += 1
                if fc > best_val:
                    best_theta, best_val = float(c), float(fc)
            else:
                a, c, fc = c, d, fd
                d = a + _INV_PHI * (b - a)
                fd = evaluate(d)
                n_evals += 1
                if fd > best_val:
                    best_theta, best_val = float(d), float(fd)

    if ctx.mu is not None:
        info = fisher_information(ctx.family, best_theta, ctx.mu)
        se = 1.0 / math.sqrt(ctx.m * info) if info > 0 else math.inf
    else:
        se = math.nan
    jitter = x.factorization_jitter if isinstance(x, GaussianSample) else 0.0
    return EstimationResult(kind=kind, theta_hat=best_theta, loglik_at_max=best_val,
                            std_error=se, n_evals=n_evals, bracket=(float(a), float(b)),
                            theta_bounds=(lo, hi), jitter=jitter, warnings=ctx.warnings)


def fisher_information(family: ParametricDensity, theta: float, mu: SpectralMeasure) -> float:
    """J(theta) = 1/2 * integral of (f'_theta / f_theta)^2 against the measure."""
    lam = mu.atoms_lambda
    f = family.series(theta)(lam)
    df = family.dtheta_series(theta)(lam)
    return 0.5 * float(mu.atoms_weight @ (df / f) ** 2)


def kullback_information(f0: PowerSeries, f: PowerSeries, mu: SpectralMeasure) -> float:
    """Asymptotic per-vertex Kullback divergence between the two field laws."""
    lam = mu.atoms_lambda
    v0, v1 = f0(lam), f(lam)
    if v0.min() <= 0 or v1.min() <= 0:
        raise SingularDensityError("densities must be positive on the measure support")
    ratio = v0 / v1
    return 0.5 * float(mu.atoms_weight @ (-np.log(ratio) - 1.0 + ratio))


@dataclass(frozen=True)
class ConfidenceInterval:
    lo: float
    hi: float
    level: float
    clipped: bool


def confidence_interval(res: EstimationResult, level: float = 0.95) -> ConfidenceInterval:
    """theta_hat +/- z * std_error, clipped to the parameter interval."""
    if not (0.0 < level < 1.0):
        raise InvalidParameterError(f"level must be in (0,1), got {level}")
    if not (np.isfinite(res.std_error) and res.std_error > 0):
        raise DegenerateInformationError(
            f"cannot build an interval with std_error={res.std_error}")
    z = float(ndtri(0.5 * (1.0 + level)))
    lo = res.theta_hat - z * res.std_error
    hi = res.theta_hat + z * res.std_error
    blo, bhi = res.theta_bounds
    clipped = lo < blo or hi > bhi
    return ConfidenceInterval(lo=max(lo, blo), hi=min(hi, bhi), level=level, clipped=clipped)
