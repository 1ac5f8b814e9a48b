"""Reproducible sampling of centered Gaussian fields X ~ N(0, K_n(f)).

Standard normals come from a counter-based generator (Philox) keyed by
(seed, replicate), mapped through the inverse normal CDF, so replicate r is
bit-identical whether generated alone, in a batch, or from parallel workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .covariance import CovarianceMatrix
from .errors import NotPositiveDefiniteError

_JITTER_START = 1e-12
_JITTER_CEILING = 1e-6


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower-triangular L with L L^T = K + jitter * Id."""

    lower: np.ndarray
    jitter: float

    @property
    def size(self) -> int:
        return self.lower.shape[0]


@dataclass(frozen=True)
class GaussianSample:
    """One field realization over the observation window."""

    values: np.ndarray
    seed: int
    replicate: int
    theta0: float | None = None
    factorization_jitter: float = 0.0

    def __len__(self) -> int:
        return self.values.size


def factorize_covariance(k) -> CholeskyFactor:
    """Cholesky with an escalating jitter ladder relative to the mean diagonal."""
    mat = k.values if isinstance(k, CovarianceMatrix) else np.asarray(k, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise NotPositiveDefiniteError("covariance must be square")
    if not np.allclose(mat, mat.T, atol=1e-10):
        raise NotPositiveDefiniteError("covariance must be symmetric")
    scale = np.trace(mat) / mat.shape[0]
    if not scale > 0:
        scale = max(float(np.abs(mat).max()), 1.0)
    jitter = 0.0
    while True:
        try:
            lower = np.linalg.cholesky(mat + jitter * np.eye(mat.shape[0]) if jitter else mat)
            return CholeskyFactor(lower=lower, jitter=jitter)
        except np.linalg.LinAlgError:
            jitter = scale * _JITTER_START if jitter == 0.0 else jitter * 10.0
            if jitter > scale * _JITTER_CEILING:
                min_eig = float(np.linalg.eigvalsh(mat)[0])
                raise NotPositiveDefiniteError(
                    f"factorization failed at jitter ceiling; min eigenvalue {min_eig:.6e}",
                    min_eigenvalue=min_eig) from None


def standard_normals(seed: int, replicate: int, size: int) -> np.ndarray:
    """Inverse-CDF normals from Philox raw 64-bit output keyed by (seed, replicate)."""
    key = np.array([np.uint64(seed), np.uint64(replicate)], dtype=np.uint64)
    bits = np.random.Philox(key=key).random_raw(size)
    u = (bits >> np.uint64(11)).astype(np.float64) * 2.0 ** -53 + 2.0 ** -54
    return ndtri(u)


def sample_field(factor: CholeskyFactor, seed: int, count: int,
                 first_replicate: int = 0, theta0: float | None = None) -> list[GaussianSample]:
    """Draw replicates first..first+count-1 of L z with keyed standard normals."""
    out = []
    for r in range(first_replicate, first_replicate + count):
        z = standard_normals(seed, r, factor.size)
        out.append(GaussianSample(values=factor.lower @ z, seed=seed, replicate=r,
                                  theta0=theta0, factorization_jitter=factor.jitter))
    return out


def save_samples_csv(samples: list[GaussianSample], subset, path) -> None:
    """One row per replicate, columns are vertex ids."""
    with open(path, "w") as fh:
        fh.write("replicate," + ",".join(str(int(v)) for v in subset) + "\n")
        for s in samples:
            fh.write(f"{s.replicate}," + ",".join(f"{x:.17g}" for x in s.values) + "\n")
