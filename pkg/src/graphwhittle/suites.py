"""Canonical verification instances used by the CLI verify command and the
acceptance suite.

Sizing notes: products of k truncated series have degree k*(order); walks
between window vertices stray at most half that far outside the window, so
hosts carry a margin of ceil(k*order/2) + 1 around the largest window.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .covariance import correction_matrix, covariance_matrix, pair_classes
from .families import ar_squared_family
from .graphs import build_graph, nested_subgraphs, normalize_weights
from .measures import empirical_spectral_measure
from .series import PowerSeries
from .verification import (LemmaReport, exact_correction_residual, logdet_gap,
                           porosity_factor, quadratic_form_limit, szego_defect)

REFERENCE_THETA = 0.5


def _padded_grid(box_sides, margin):
    side = max(box_sides) + 2 * margin
    host = normalize_weights(build_graph("grid2d", side=side))
    subs = nested_subgraphs(host, "box", sides=list(box_sides))
    return host, subs


def _padded_path(window, margin):
    host = normalize_weights(build_graph("path", length=window + 2 * margin))
    subset = np.arange(margin, margin + window)
    return host, subset


def correction_instance(order: int = 15):
    """8x8 box inside a 24x24 grid, P = 2, f = x^2, g = (1 - x/2)^(-2)."""
    host, subs = _padded_grid([8], 8)
    window = subs.levels[0]
    f = PowerSeries([0.0, 0.0, 1.0])
    g = ar_squared_family(order=order).series(REFERENCE_THETA)
    classes = pair_classes(host, window, radius=2)
    b = correction_matrix(classes)
    return host, window, f, g, b


def suite_exact_correction() -> LemmaReport:
    host, window, f, g, b = correction_instance()
    return exact_correction_residual(f, g, host, window, b)


def suite_exact_correction_corrupted() -> LemmaReport:
    """Negative control: one corrected entry reset to 1 must break the identity."""
    host, window, f, g, b = correction_instance()
    kf = covariance_matrix(f, host, window, check_padding=False).values
    values = b.values.copy()
    # corrupt a pair the polynomial factor can see, else the trace is blind to it
    rows, cols = np.nonzero((np.abs(values - 1.0) > 1e-12) & (np.abs(kf) > 1e-12))
    values[rows[0], cols[0]] = 1.0
    corrupted = dataclasses.replace(b, values=values,
                                    u_n=float(np.abs(values - 1.0).max()))
    return exact_correction_residual(f, g, host, window, corrupted)


def suite_szego(order: int = 15) -> list[LemmaReport]:
    """k = 2 and k = 3 block-norm defects on a 100-path and grid boxes 4..12."""
    fam = ar_squared_family(order=order)
    g1 = fam.series(0.5)
    g2 = fam.series(0.3)
    reports = []

    host, subset = _padded_path(100, 24)
    reports.append(szego_defect([g1, g2], host, subset))
    reports.append(szego_defect([g1, g2, g1], host, subset))

    host, subs = _padded_grid([4, 8, 12], 24)
    for lev in subs.levels:
        reports.append(szego_defect([g1, g2], host, lev))
        reports.append(szego_defect([g1, g2, g1], host, lev))
    return reports


def suite_logdet(order: int = 15) -> list[LemmaReport]:
    """Log-det gap on grid boxes 4, 8, 12 against the torus spectral measure."""
    f = ar_squared_family(order=order).series(REFERENCE_THETA)
    host, subs = _padded_grid([4, 8, 12], 16)
    proxy = normalize_weights(build_graph("torus2d", side=48))
    mu = empirical_spectral_measure(proxy, np.arange(proxy.n_vertices))
    return logdet_gap(f, host, subs, mu)


def suite_porosity(max_h: int = 6) -> list[LemmaReport]:
    """Delta_h <= h + 1 for h = 0..max_h on path intervals and grid boxes."""
    reports = []
    path = normalize_weights(build_graph("path", length=200))
    subs = nested_subgraphs(path, "ball", center=100, radii=[20, 40, 60])
    for h in range(max_h + 1):
        reports.append(porosity_factor(path, subs, h))
    grid, subs = _padded_grid([4, 8, 12], 8)
    for h in range(max_h + 1):
        reports.append(porosity_factor(grid, subs, h))
    return reports


def suite_concentration(seed: int = 20260811, replicates: int = 300,
                        order: int = 15) -> list[LemmaReport]:
    """Quadratic forms at theta0 = 0.5, theta = 0.3 on a ~400-vertex chain ball."""
    fam = ar_squared_family(order=order)
    host = normalize_weights(build_graph("rhombus_chain", k=120))
    subs = nested_subgraphs(host, "ball", center=240, radii=[150])
    proxy = normalize_weights(build_graph("rhombus_chain", k=2500))
    mu = empirical_spectral_measure(proxy, np.arange(proxy.n_vertices))
    return [quadratic_form_limit(fam, 0.5, 0.3, host, subs, mu, form,
                                 replicates=replicates, seed=seed)
            for form in ("k_inv_density", "inv_k", "unbiased")]


def standard_suite(seed: int = 20260811) -> list[LemmaReport]:
    reports = [suite_exact_correction()]
    reports += suite_szego()
    reports += suite_logdet()
    reports += suite_porosity()
    reports += suite_concentration(seed=seed)
    return reports
