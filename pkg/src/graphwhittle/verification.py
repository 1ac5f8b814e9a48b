"""Numerical certificates for the Szego-type bounds behind the estimators.

Each check produces a LemmaReport with the measured quantity, the closed-form
bound recomputed from regularity factors (or a tolerance), and a pass flag.
Reports serialize as JSON lines with stable field order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .covariance import (CorrectionMatrix, covariance_matrix, pair_classes,
                         correction_matrix, product_covariance, restricted_power_columns,
                         unbiased_matrix)
from .errors import InvalidParameterError
from .families import ParametricDensity
from .graphs import Graph, NestedSubgraphs, boundary_size
from .measures import SpectralMeasure, integrate
from .sampling import factorize_covariance, sample_field
from .series import PowerSeries, regularity_factor

_PASS_SLACK = 1e-9

LEMMA_IDS = ("hom", "det", "unbiased_trace", "correction", "porosity", "concentration")

QUADRATIC_FORMS = ("k_inv_density", "inv_k", "unbiased")


@dataclass(frozen=True)
class LemmaReport:
    lemma_id: str
    instance: str
    measured: float
    bound: float
    passed: bool

    def __post_init__(self):
        object.__setattr__(self, "measured", float(self.measured))
        object.__setattr__(self, "bound", float(self.bound))
        object.__setattr__(self, "passed", bool(self.passed))

    def to_json_line(self) -> str:
        return json.dumps({"lemma_id": self.lemma_id, "instance": self.instance,
                           "measured": self.measured, "bound": self.bound,
                           "passed": self.passed})


def save_reports_jsonl(reports, path) -> None:
    with open(path, "w") as fh:
        for rep in reports:
            fh.write(rep.to_json_line() + "\n")


def block_norm(mat: np.ndarray, delta_n: int) -> float:
    """b_N(B) = (1/delta_N) * sum of |entries| over the subset block."""
    if delta_n < 1:
        raise InvalidParameterError("block norm needs a positive boundary size")
    return float(np.abs(mat).sum() / delta_n)


def szego_defect(densities, host: Graph, subset) -> LemmaReport:
    """Block-norm defect of K_n(g_1)...K_n(g_k) - K_n(g_1...g_k) vs its bound."""
    densities = list(densities)
    k = len(densities)
    if k < 2:
        raise InvalidParameterError("need at least two densities")
    subset = np.asarray(subset, dtype=int)
    mats = [covariance_matrix(g, host, subset, check_padding=False).values
            for g in densities]
    prod = mats[0]
    for mat in mats[1:]:
        prod = prod @ mat
    target = product_covariance(densities, host, subset, check_padding=False).values
    delta_n = boundary_size(host, subset)
    measured = block_norm(prod - target, delta_n)
    bound = 0.5 * (k - 1) * float(np.prod([regularity_factor(g) for g in densities]))
    return LemmaReport(lemma_id="hom",
                       instance=f"k={k} m={subset.size} delta={delta_n}",
                       measured=measured, bound=bound,
                       passed=measured <= bound + _PASS_SLACK)


def logdet_gap(f: PowerSeries, host: Graph, subsets: NestedSubgraphs,
               mu: SpectralMeasure) -> list[LemmaReport]:
    """Per-level |(1/m) log det K_n(f) - integral log f dmu|.

    The per-level bound column carries delta_n/m_n, the rate scale.  A final
    aggregate report passes when the gap shrinks from the first to the last
    level and the log-log slope of gap against delta_n/m_n is positive.
    """
    log_target = integrate(mu, lambda lam: np.log(f(lam)))
    reports = []
    gaps, ratios = [], []
    for lev, m, d in zip(subsets.levels, subsets.volumes, subsets.boundaries):
        mat = covariance_matrix(f, host, lev, check_padding=False).values
        sign, logdet = np.linalg.slogdet(mat)
        if sign <= 0:
            raise InvalidParameterError("covariance must be positive definite")
        gap = abs(logdet / m - log_target)
        ratio = d / m
        gaps.append(gap)
        ratios.append(ratio)
        reports.append(LemmaReport(lemma_id="det", instance=f"m={m} delta={d}",
                                   measured=gap, bound=ratio, passed=True))
    slope = 0.0
    if len(gaps) >= 2:
        slope = np.polyfit(np.log(ratios), np.log(np.maximum(gaps, 1e-300)), 1)[0]
    trend_ok = gaps[-1] < gaps[0] and (len(gaps) < 3 or slope > 0)
    reports.append(LemmaReport(lemma_id="det",
                               instance=f"trend over {len(gaps)} levels, slope={slope:.3f}",
                               measured=gaps[-1], bound=gaps[0], passed=bool(trend_ok)))
    return reports


def exact_correction_residual(f: PowerSeries, g: PowerSeries, host: Graph, subset,
                              b: CorrectionMatrix) -> LemmaReport:
    """Relative residual of Tr(K_n(f) Q_n(g)) = Tr(K_n(f g))."""
    subset = np.asarray(subset, dtype=int)
    kf = covariance_matrix(f, host, subset, check_padding=False).values
    kg = covariance_matrix(g, host, subset, check_padding=False).values
    qg = unbiased_matrix(kg, b)
    lhs = float((kf * qg).sum())  # Tr(A B) for symmetric A, B
    rhs = float(np.trace(product_covariance([f, g], host, subset,
                                            check_padding=False).values))
    measured = abs(lhs - rhs) / max(1.0, abs(rhs))
    return LemmaReport(lemma_id="correction",
                       instance=f"m={subset.size} deg_f={f.truncation_order}",
                       measured=measured, bound=1e-8, passed=measured <= 1e-8)


def porosity_factor(host: Graph, subsets: NestedSubgraphs, h: int) -> LemmaReport:
    """Delta_h = max over levels of boundary-normalized weight of escaping walks."""
    if h < 0:
        raise InvalidParameterError("walk length must be nonnegative")
    from .covariance import padding_margin
    margin = min(padding_margin(host, lev) for lev in subsets.levels)
    if margin < h:
        raise InvalidParameterError(
            f"host margin {margin:.0f} < walk length {h}; escaping walks would be missed")
    worst = 0.0
    for lev, d in zip(subsets.levels, subsets.boundaries):
        if d == 0:
            continue
        outside = np.setdiff1d(np.arange(host.n_vertices), lev)
        if h == 0:
            total = 0.0
        else:
            block = None
            for k, blk in restricted_power_columns(host, lev, h):
                block = blk
            total = float(np.abs(block[outside, :]).sum())
        worst = max(worst, total / d)
    return LemmaReport(lemma_id="porosity", instance=f"h={h} levels={len(subsets.levels)}",
                       measured=worst, bound=float(h + 1),
                       passed=worst <= h + 1 + _PASS_SLACK)


def unbiased_trace_gap(f: PowerSeries, g: PowerSeries, host: Graph, subset,
                       b: CorrectionMatrix, p: int) -> LemmaReport:
    """|(1/m) Tr((K_n(f)K_n(g))^p - (K_n(f)Q_n(g))^p)| against 2^p u_n alpha^p alpha^p."""
    subset = np.asarray(subset, dtype=int)
    kf = covariance_matrix(f, host, subset, check_padding=False).values
    kg = covariance_matrix(g, host, subset, check_padding=False).values
    qg = unbiased_matrix(kg, b)
    plain = np.linalg.matrix_power(kf @ kg, p)
    corrected = np.linalg.matrix_power(kf @ qg, p)
    measured = abs(np.trace(plain) - np.trace(corrected)) / subset.size
    bound = (2.0 ** p) * b.u_n * regularity_factor(f) ** p * regularity_factor(g) ** p
    return LemmaReport(lemma_id="unbiased_trace", instance=f"p={p} m={subset.size}",
                       measured=measured, bound=bound,
                       passed=measured <= bound + _PASS_SLACK)


def quadratic_form_limit(family: ParametricDensity, theta0: float, theta: float,
                         host: Graph, subsets: NestedSubgraphs, mu: SpectralMeasure,
                         form: str, replicates: int = 300, seed: int = 0) -> LemmaReport:
    """Monte-Carlo check of (1/m) X^T Lambda X -> integral f_theta0/f_theta dmu."""
    if form not in QUADRATIC_FORMS:
        raise InvalidParameterError(f"unknown quadratic form {form!r}")
    if replicates < 100:
        raise InvalidParameterError("need at least 100 replicates")
    lev = subsets.levels[-1]
    m = lev.size
    f0 = family.series(theta0)
    k0 = covariance_matrix(f0, host, lev, check_padding=False)
    factor = factorize_covariance(k0)

    inv = family.inv_series(theta)
    f_theta = family.series(theta)
    target = integrate(mu, lambda lam: f0(lam) * inv(lam))
    if form == "k_inv_density":
        lam_mat = covariance_matrix(inv, host, lev, check_padding=False).values
    elif form == "inv_k":
        k_theta = covariance_matrix(f_theta, host, lev, check_padding=False).values
        lam_mat = np.linalg.inv(k_theta)
        target = integrate(mu, lambda lam: f0(lam) / f_theta(lam))
    else:
        radius = family.correction_radius
        if radius is None:
            raise InvalidParameterError("unbiased form needs an AR/MA correction radius")
        classes = pair_classes(host, lev, radius)
        b = correction_matrix(classes)
        lam_mat = unbiased_matrix(covariance_matrix(inv, host, lev, check_padding=False),
                                  b)

    vals = np.empty(replicates)
    for s in sample_field(factor, seed, replicates, theta0=theta0):
        vals[s.replicate] = s.values @ (lam_mat @ s.values) / m
    measured = abs(float(vals.mean()) - target)
    stderr = float(vals.std(ddof=1)) / np.sqrt(replicates)
    return LemmaReport(lemma_id="concentration",
                       instance=f"form={form} m={m} R={replicates} theta={theta}",
                       measured=measured, bound=3.0 * stderr,
                       passed=measured <= 3.0 * stderr + _PASS_SLACK)
