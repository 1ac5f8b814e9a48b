"""Empirical spectral measures of restricted adjacency operators.

Two routes to a discrete probability measure on [-1, 1]:

  eigen    eigenvalues of the operator restricted to the subset, each with
           weight 1/m.  Submatrices with small bandwidth (chains of patterns
           in construction order) go through the banded eigensolver, which
           makes ~10^4-vertex proxies cheap.

  moments  the moment sequence (1/m) sum_{i in S} (W^k)_{ii}, k = 0..M, with
           powers taken on the full host, realized as a nonnegative discrete
           measure on Chebyshev nodes fitted by nonnegative least squares.
           The fit runs in the Chebyshev basis (stable), which dominates the
           power-moment error because monomials have unit coefficient mass in
           that basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.optimize import nnls

from .errors import InvalidParameterError, NumericalError
from .graphs import Graph, distances_from
from .series import PowerSeries

_LOCATION_SLACK = 1e-9
_BANDED_MAX_BANDWIDTH = 16
_DENSE_EIGEN_CAP = 8192


@dataclass(frozen=True)
class SpectralMeasure:
    """Discrete probability measure: sorted atom locations and positive weights."""

    atoms_lambda: np.ndarray
    atoms_weight: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.atoms_lambda, dtype=float)
        w = np.asarray(self.atoms_weight, dtype=float)
        if lam.shape != w.shape or lam.ndim != 1:
            raise InvalidParameterError("atoms and weights must be 1-d and matching")
        order = np.argsort(lam, kind="stable")
        lam, w = lam[order], w[order]
        if (w <= 0).any():
            raise InvalidParameterError("weights must be positive")
        if abs(w.sum() - 1.0) > 1e-9:
            raise InvalidParameterError(f"weights must sum to 1, got {w.sum()!r}")
        if lam.min() < -1 - _LOCATION_SLACK or lam.max() > 1 + _LOCATION_SLACK:
            raise InvalidParameterError("atom locations must lie in [-1,1] (up to 1e-9)")
        object.__setattr__(self, "atoms_lambda", lam)
        object.__setattr__(self, "atoms_weight", w)

    @property
    def n_atoms(self) -> int:
        return self.atoms_lambda.size

    def moment(self, k: int) -> float:
        return float(self.atoms_weight @ self.atoms_lambda ** k)

    def save_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("lambda,weight\n")
            for lam, w in zip(self.atoms_lambda, self.atoms_weight):
                fh.write(f"{lam:.17g},{w:.17g}\n")


def load_measure_csv(path) -> SpectralMeasure:
    rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return SpectralMeasure(rows[:, 0], rows[:, 1])


def integrate(mu: SpectralMeasure, f) -> float:
    """Integral of a PowerSeries or plain callable against the measure."""
    vals = f(mu.atoms_lambda)
    return float(mu.atoms_weight @ vals)


def _bandwidth(sub) -> int:
    coo = sub.tocoo()
    if coo.nnz == 0:
        return 0
    return int(np.abs(coo.row - coo.col).max())


def _eigenvalues_restricted(host: Graph, subset: np.ndarray) -> np.ndarray:
    sub = host.weights[subset][:, subset]
    m = subset.size
    bw = _bandwidth(sub)
    try:
        if bw <= _BANDED_MAX_BANDWIDTH and m > 512:
            band = np.zeros((bw + 1, m))
            coo = sub.tocoo()
            lower = coo.row >= coo.col
            band[coo.row[lower] - coo.col[lower], coo.col[lower]] = coo.data[lower]
            return sla.eig_banded(band, lower=True, eigvals_only=True)
        if m > _DENSE_EIGEN_CAP:
            raise NumericalError(
                f"dense eigensolve of size {m} exceeds cap {_DENSE_EIGEN_CAP}; "
                "use the moments method or a smaller proxy")
        return np.linalg.eigvalsh(sub.toarray())
    except (np.linalg.LinAlgError, sla.LinAlgError) as exc:
        a = np.abs(sub).sum(axis=1).max() if sub.nnz else 0.0
        raise NumericalError(
            f"eigensolver failed on {m}x{m} restriction (max row sum {a}): {exc}") from exc


def _moment_block(host: Graph, subset: np.ndarray, order: int):
    """Power and Chebyshev diagonal moments of the restricted powers, host-exact."""
    n, m = host.n_vertices, subset.size
    if n * m * 8 * 3 > 2 << 30:
        raise NumericalError("moment block too large; reduce subset or host size")
    w = host.weights
    sel = np.zeros((n, m))
    sel[subset, np.arange(m)] = 1.0
    p_prev = sel
    p_mom = [1.0]
    t_prev, t_cur = sel, w @ sel
    c_mom = [1.0, float(t_cur[subset, np.arange(m)].mean())]
    cur = None
    for k in range(1, order + 1):
        cur = w @ p_prev
        p_mom.append(float(cur[subset, np.arange(m)].mean()))
        p_prev = cur
        if k >= 2:
            t_nxt = 2.0 * (w @ t_cur) - t_prev
            c_mom.append(float(t_nxt[subset, np.arange(m)].mean()))
            t_prev, t_cur = t_cur, t_nxt
    return np.array(p_mom), np.array(c_mom[: order + 1])


def _fit_chebyshev_nodes(cheb_moments: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = cheb_moments.size - 1
    n_nodes = max(64 * (order + 1), 1024)
    angles = np.pi * (np.arange(n_nodes) + 0.5) / n_nodes
    nodes = np.cos(angles)
    a = np.cos(np.outer(np.arange(order + 1), angles))
    # weight low moments: the integrands of interest have geometric coefficients
    scale = 1.0 / (1.0 + np.arange(order + 1))
    weights, residual = nnls((a * scale[:, None]), cheb_moments * scale, maxiter=10 * n_nodes)
    if residual > 3e-4:
        raise NumericalError(f"moment fit residual {residual:.3e} too large")
    keep = weights > 0
    return nodes[keep], weights[keep]


def empirical_spectral_measure(host: Graph, subset, method: str = "eigen",
                               moment_order: int = 40) -> SpectralMeasure:
    """Spectral measure of the host restricted to the subset."""
    subset = np.asarray(sorted(set(np.atleast_1d(subset).tolist())), dtype=int)
    if subset.size == 0:
        raise InvalidParameterError("subset must be nonempty")
    if subset.min() < 0 or subset.max() >= host.n_vertices:
        raise InvalidParameterError("subset outside host vertex range")

    if method == "eigen":
        lam = _eigenvalues_restricted(host, subset)
        lam = np.clip(lam, -1.0 - _LOCATION_SLACK, 1.0 + _LOCATION_SLACK)
        return SpectralMeasure(lam, np.full(subset.size, 1.0 / subset.size))

    if method == "moments":
        if moment_order < 1:
            raise InvalidParameterError("moment order must be >= 1")
        if host.frontier.size:
            margin = distances_from(host, host.frontier)[subset].min()
            if margin <= moment_order // 2:
                raise InvalidParameterError(
                    f"host margin {margin} too small for moment order {moment_order}; "
                    "walks would leave the host")
        _, cheb = _moment_block(host, subset, moment_order)
        nodes, weights = _fit_chebyshev_nodes(cheb)
        return SpectralMeasure(nodes, weights / weights.sum())

    raise InvalidParameterError(f"unknown spectral-measure method {method!r}")


def restricted_moment_sequence(host: Graph, subset, order: int) -> np.ndarray:
    """(1/m) sum_{i in S} (W^k)_{ii} for k = 0..order, powers on the full host."""
    subset = np.asarray(subset, dtype=int)
    p_mom, _ = _moment_block(host, subset, order)
    return p_mom


def measure_from_series(mu: SpectralMeasure, f: PowerSeries) -> float:
    return integrate(mu, f)
