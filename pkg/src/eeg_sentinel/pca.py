"""SVD-based principal component analysis and loading-plane correlation.

The matrix decomposes as values = U diag(sigma) V^T with singular values
in nonincreasing order. Columns of U diag(sigma) are the component
scores; rows of V place each channel in component space. Taking two
components gives every channel a plane vector, and the cosine between
two channels' vectors is their loading-plane correlation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ComponentIndexError, ConvergenceError, NonFiniteInputError
from .preprocess import FeatureMatrix

DEGENERATE_NORM = 1e-12


@dataclass
class PcaResult:
    left_vectors: np.ndarray       # time x k, orthonormal columns
    singular_values: np.ndarray    # k, nonincreasing, nonnegative
    loadings: np.ndarray           # channel x k, orthonormal columns
    scores: np.ndarray             # time x k, equals left_vectors * singular_values
    variance_fractions: np.ndarray
    channel_names: list[str]


@dataclass
class CorrelationMap:
    """Symmetric channel-by-channel cosine matrix in [-1, 1].

    Channels whose plane vector has norm below 1e-12 are degenerate:
    their row, column, and diagonal entry are zero.
    """

    values: np.ndarray
    channel_names: list[str]
    degenerate_channels: list[str]

    def restrict(self, names: Sequence[str]) -> "CorrelationMap":
        """Submatrix over the given channels, in the given order."""
        index = {name: i for i, name in enumerate(self.channel_names)}
        missing = [n for n in names if n not in index]
        if missing:
            raise KeyError(f"channels not in map: {missing}")
        idx = np.array([index[n] for n in names], dtype=int)
        keep = set(names)
        return CorrelationMap(
            values=self.values[np.ix_(idx, idx)],
            channel_names=list(names),
            degenerate_channels=[n for n in self.degenerate_channels if n in keep],
        )


def _jacobi_svd(values: np.ndarray, max_sweeps: int = 60) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One-sided Jacobi SVD fallback. Raises ConvergenceError past the sweep cap."""
    a = np.array(values, dtype=np.float64)
    transposed = a.shape[0] < a.shape[1]
    if transposed:
        a = a.T.copy()
    m, n = a.shape
    u = a
    v = np.eye(n)
    tol = 1e-12
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = float(u[:, p] @ u[:, p])
                beta = float(u[:, q] @ u[:, q])
                gamma = float(u[:, p] @ u[:, q])
                if abs(gamma) <= tol * math.sqrt(alpha * beta) or gamma == 0.0:
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.hypot(1.0, zeta))
                c = 1.0 / math.hypot(1.0, t)
                s = c * t
                up = u[:, p].copy()
                u[:, p] = c * up - s * u[:, q]
                u[:, q] = s * up + c * u[:, q]
                vp = v[:, p].copy()
                v[:, p] = c * vp - s * v[:, q]
                v[:, q] = s * vp + c * v[:, q]
        if not rotated:
            break
    else:
        raise ConvergenceError(f"one-sided Jacobi SVD did not settle within {max_sweeps} sweeps")

    sigma = np.linalg.norm(u, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    u = u[:, order]
    v = v[:, order]
    nonzero = sigma > 0
    u[:, nonzero] = u[:, nonzero] / sigma[nonzero]
    if transposed:
        return v, sigma, u.T
    return u, sigma, v.T


def svd_decompose(
    matrix: FeatureMatrix | np.ndarray,
    channel_names: Sequence[str] | None = None,
    max_fallback_sweeps: int = 60,
) -> PcaResult:
    """Decompose a time-by-channel matrix.

    Accepts a FeatureMatrix or a plain 2-D array (at least 2x2, finite).
    Loading signs are fixed so each column's largest-magnitude entry is
    positive, which makes the decomposition deterministic. If LAPACK
    fails to converge a one-sided Jacobi fallback runs under a sweep cap
    (ConvergenceError when exceeded). For an all-zero matrix every
    singular value is zero and variance_fractions is all zeros.
    """
    if isinstance(matrix, FeatureMatrix):
        values = matrix.values
        names = list(matrix.channel_names) if channel_names is None else list(channel_names)
    else:
        values = np.asarray(matrix, dtype=np.float64)
        names = (
            list(channel_names)
            if channel_names is not None
            else [f"c{i}" for i in range(values.shape[1] if values.ndim == 2 else 0)]
        )
    if values.ndim != 2 or values.shape[0] < 2 or values.shape[1] < 2:
        raise ValueError(f"need a matrix of at least 2x2, got shape {values.shape}")
    if len(names) != values.shape[1]:
        raise ValueError("channel_names length must match the column count")
    if not np.all(np.isfinite(values)):
        raise NonFiniteInputError("matrix contains NaN or infinite entries")

    try:
        u, sigma, vt = np.linalg.svd(values, full_matrices=False)
    except np.linalg.LinAlgError:
        u, sigma, vt = _jacobi_svd(values, max_sweeps=max_fallback_sweeps)
    v = vt.T.copy()
    u = u.copy()

    k = sigma.size
    peak = np.argmax(np.abs(v), axis=0)
    signs = np.sign(v[peak, np.arange(k)])
    signs[signs == 0] = 1.0
    v *= signs
    u *= signs

    power = sigma * sigma
    total = float(power.sum())
    fractions = power / total if total > 0.0 else np.zeros_like(power)

    return PcaResult(
        left_vectors=u,
        singular_values=sigma,
        loadings=v,
        scores=u * sigma,
        variance_fractions=fractions,
        channel_names=names,
    )


def loading_plane_vectors(
    result: PcaResult, components: tuple[int, int] = (0, 1)
) -> np.ndarray:
    """Per-channel 2-vectors from the chosen component pair (default: the
    two largest-variance components). Shape (n_channels, 2)."""
    k = result.singular_values.size
    for c in components:
        if int(c) != c or c < 0 or c >= k:
            raise ComponentIndexError(f"component index {c} outside [0, {k})")
    i, j = int(components[0]), int(components[1])
    return np.column_stack((result.loadings[:, i], result.loadings[:, j]))


def correlation_map(vectors: np.ndarray, channel_names: Sequence[str]) -> CorrelationMap:
    """Cosine of the angle between every pair of channel plane vectors."""
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim != 2 or vectors.shape[1] != 2:
        raise ValueError(f"expected an (n, 2) array, got shape {vectors.shape}")
    if len(channel_names) != vectors.shape[0]:
        raise ValueError("channel_names length must match the vector count")
    norms = np.linalg.norm(vectors, axis=1)
    degenerate = norms < DEGENERATE_NORM
    unit = np.zeros_like(vectors)
    unit[~degenerate] = vectors[~degenerate] / norms[~degenerate, None]
    values = unit @ unit.T
    values = np.clip((values + values.T) / 2.0, -1.0, 1.0)
    np.fill_diagonal(values, 1.0)
    values[degenerate, :] = 0.0
    values[:, degenerate] = 0.0
    return CorrelationMap(
        values=values,
        channel_names=list(channel_names),
        degenerate_channels=[n for n, d in zip(channel_names, degenerate) if d],
    )
