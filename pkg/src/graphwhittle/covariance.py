"""Covariance matrices as restrictions of f(W), local-measure classes, and
the boundary-correction matrix.

Entry (i, j) of a covariance matrix is sum_k f_k (W^k)_{ij} with the powers
taken on the full host graph, then rows and columns restricted to the
observation window: the restriction of f(W), never f of the restricted W.

Pairs of vertices at distance <= P are grouped into classes by the signature
((W^m)_{ij})_{m=0..M}; two pairs share a class exactly when their local
measures agree on the first M+1 moments.  The correction matrix rescales each
class by

    count of matching pairs with one end anywhere in the host
    ------------------------------------------------------------
    count of matching pairs with both ends in the window

which is >= 1 and makes the trace identity
Tr(K_n(f) Q_n(g)) = Tr(K_n(f g)) exact for polynomial f of degree <= P.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AssumptionViolationError, InvalidParameterError
from .graphs import Graph, distances_from
from .series import PowerSeries, series_multiply

_SIGNATURE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    """Dense symmetric restriction of f(W) to a vertex subset."""

    values: np.ndarray
    density: PowerSeries
    subset: np.ndarray
    padding_radius: int
    padding_ok: bool = True
    warnings: tuple = ()

    @property
    def size(self) -> int:
        return self.values.shape[0]

    def save_csv(self, path) -> None:
        np.savetxt(path, self.values, delimiter=",", fmt="%.17g")


def padding_margin(host: Graph, subset: np.ndarray) -> float:
    """Hop distance from the subset to the host frontier; inf for a closed host."""
    if host.frontier.size == 0:
        return np.inf
    d = distances_from(host, host.frontier)[subset]
    d = d[d >= 0]
    return float(d.min()) if d.size else np.inf


def restricted_power_columns(host: Graph, subset: np.ndarray, order: int):
    """Yield (k, P_k) with P_k = (W^k) e_S as a dense (n, m) block, k = 0..order."""
    n, m = host.n_vertices, subset.size
    block = np.zeros((n, m))
    block[subset, np.arange(m)] = 1.0
    yield 0, block
    w = host.weights
    for k in range(1, order + 1):
        block = w @ block
        yield k, block


def covariance_matrix(f: PowerSeries, host: Graph, subset,
                      check_padding: bool = True) -> CovarianceMatrix:
    """Restriction of f(W) to the subset, powers on the full host."""
    subset = np.asarray(subset, dtype=int)
    if subset.size == 0:
        raise InvalidParameterError("subset must be nonempty")
    if not np.isfinite(f.coeffs).all():
        raise InvalidParameterError("density coefficients must be finite")
    order = f.truncation_order
    warnings: list[str] = []
    pad_ok = True
    if check_padding:
        margin = padding_margin(host, subset)
        if margin <= order:
            pad_ok = False
            warnings.append(
                f"padding margin {margin:.0f} <= truncation order {order}; "
                "walks may leave the host")
    acc = np.zeros((subset.size, subset.size))
    for k, block in restricted_power_columns(host, subset, order):
        if f.coeffs[k] != 0.0:
            acc += f.coeffs[k] * block[subset, :]
    acc = 0.5 * (acc + acc.T)
    return CovarianceMatrix(values=acc, density=f, subset=subset,
                            padding_radius=order, padding_ok=pad_ok,
                            warnings=tuple(warnings))


def local_signature(host: Graph, i: int, j: int, order: int) -> np.ndarray:
    """((W^m)_{ij})_{m=0..order}, walks counted on the full host."""
    n = host.n_vertices
    if not (0 <= i < n and 0 <= j < n):
        raise InvalidParameterError("vertices outside host")
    vec = np.zeros(n)
    vec[j] = 1.0
    out = np.empty(order + 1)
    out[0] = vec[i]
    for m in range(1, order + 1):
        vec = host.weights @ vec
        out[m] = vec[i]
    return out


@dataclass(frozen=True, eq=False)
class LocalMeasureClasses:
    """Partition of the near-diagonal pairs (i in window, j in host, d <= P)."""

    radius: int
    signature_order: int
    subset: np.ndarray
    pair_i: np.ndarray        # positions within the subset
    pair_j: np.ndarray        # host vertex ids
    class_ids: np.ndarray
    representatives: np.ndarray  # (n_classes, order+1) canonical signatures

    @property
    def n_classes(self) -> int:
        return self.representatives.shape[0]


def pair_classes(host: Graph, subset, radius: int, signature_order: int | None = None) -> LocalMeasureClasses:
    """Group all pairs (i in subset, j in host, d(i,j) <= radius) by signature."""
    subset = np.asarray(subset, dtype=int)
    p = int(radius)
    order = 2 * p + 4 if signature_order is None else int(signature_order)
    if order < 2 * p:
        raise InvalidParameterError(f"signature order {order} must be >= 2*radius = {2 * p}")

    n, m = host.n_vertices, subset.size
    # distances to the subset bound pair distances from below; per-source BFS
    # to depth p gives the exact d(i, j) <= p pairs
    indptr, indices = host.weights.indptr, host.weights.indices
    pair_i, pair_j = [], []
    for col, i in enumerate(subset):
        seen = {int(i)}
        frontier = [int(i)]
        pair_i.append(col)
        pair_j.append(int(i))
        for _ in range(p):
            nxt = []
            for u in frontier:
                for v in indices[indptr[u]:indptr[u + 1]]:
                    v = int(v)
                    if v not in seen:
                        seen.add(v)
                        nxt.append(v)
                        pair_i.append(col)
                        pair_j.append(v)
            frontier = nxt
    pair_i = np.asarray(pair_i, dtype=int)
    pair_j = np.asarray(pair_j, dtype=int)

    # signatures for all pairs from one block iteration
    sigs = np.empty((pair_i.size, order + 1))
    for k, block in restricted_power_columns(host, subset, order):
        sigs[:, k] = block[pair_j, pair_i]

    # group by rounded key, then merge groups whose representatives are within
    # tolerance (rounding alone could split values straddling a decimal cell)
    keys = np.round(sigs / _SIGNATURE_TOL).astype(np.int64)
    uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
    reps = np.vstack([sigs[inverse == g][0] for g in range(uniq.shape[0])])
    parent = list(range(uniq.shape[0]))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a in range(uniq.shape[0]):
        for b in range(a + 1, uniq.shape[0]):
            if np.max(np.abs(reps[a] - reps[b])) <= _SIGNATURE_TOL:
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
    roots = np.array([find(g) for g in range(uniq.shape[0])])
    class_of_group = {}
    canon = []
    merged_ids = np.empty(pair_i.size, dtype=int)
    for g in np.unique(roots):
        members = np.flatnonzero(roots == g)
        cand = reps[members]
        best = members[np.lexsort(cand.T[::-1])[0]]
        class_of_group[g] = len(canon)
        canon.append(reps[best])
    for g in range(uniq.shape[0]):
        merged_ids[inverse == g] = class_of_group[roots[g]]

    return LocalMeasureClasses(radius=p, signature_order=order, subset=subset,
                               pair_i=pair_i, pair_j=pair_j, class_ids=merged_ids,
                               representatives=np.vstack(canon))


@dataclass(frozen=True, eq=False)
class CorrectionMatrix:
    """Entrywise boundary-correction factors; 1 outside the classified pairs."""

    values: np.ndarray
    u_n: float
    class_factors: np.ndarray

    @property
    def size(self) -> int:
        return self.values.shape[0]


def correction_matrix(classes: LocalMeasureClasses, subset=None) -> CorrectionMatrix:
    """Per-class ratio of host-pair counts to window-pair counts."""
    subset = classes.subset if subset is None else np.asarray(subset, dtype=int)
    if subset.size != classes.subset.size or not np.array_equal(subset, classes.subset):
        raise InvalidParameterError("subset must match the one used for the classes")
    m = subset.size
    in_window = np.zeros_like(classes.pair_j, dtype=bool)
    lookup = {int(v): idx for idx, v in enumerate(subset)}
    for t, j in enumerate(classes.pair_j):
        in_window[t] = int(j) in lookup
    n_classes = classes.n_classes
    numer = np.bincount(classes.class_ids, minlength=n_classes).astype(float)
    denom = np.bincount(classes.class_ids[in_window], minlength=n_classes).astype(float)
    if (denom == 0).any():
        bad = int(np.flatnonzero(denom == 0)[0])
        raise AssumptionViolationError(
            f"local-measure class {bad} (signature {classes.representatives[bad]}) "
            "has no representative pair inside the window")
    factors = numer / denom
    values = np.ones((m, m))
    inside = np.flatnonzero(in_window)
    rows = classes.pair_i[inside]
    cols = np.array([lookup[int(j)] for j in classes.pair_j[inside]])
    values[rows, cols] = factors[classes.class_ids[inside]]
    u_n = float(np.abs(values - 1.0).max())
    return CorrectionMatrix(values=values, u_n=u_n, class_factors=factors)


def unbiased_matrix(f_or_k, b: CorrectionMatrix, host: Graph | None = None,
                    subset=None) -> np.ndarray:
    """Hadamard product B (.) K_n(f); accepts a prebuilt covariance or a series."""
    if isinstance(f_or_k, CovarianceMatrix):
        k = f_or_k.values
    elif isinstance(f_or_k, np.ndarray):
        k = f_or_k
    else:
        k = covariance_matrix(f_or_k, host, subset).values
    if k.shape != b.values.shape:
        raise InvalidParameterError(
            f"shape mismatch: covariance {k.shape} vs correction {b.values.shape}")
    return b.values * k


def product_covariance(fs: list[PowerSeries], host: Graph, subset,
                       check_padding: bool = True) -> CovarianceMatrix:
    """K_n(f_1 ... f_k) with the exact product series."""
    prod = fs[0]
    for g in fs[1:]:
        prod = series_multiply(prod, g)
    return covariance_matrix(prod, host, subset, check_padding=check_padding)
