"""Dense linear-algebra kernels: Cholesky factorization with positive-definiteness
repair, and correlated Gaussian sampling.

Matrices are plain 2-D float64 numpy arrays. Shadowing correlation matrices become
numerically rank-deficient when devices sit almost on top of each other, so the
factorization retries with a small diagonal jitter before giving up.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Smallest-first diagonal loadings tried when the plain factorization fails.
JITTER_LADDER = (0.0, 1e-12, 1e-10, 1e-8, 1e-6)

SYMMETRY_RTOL = 1e-12


class NotSymmetricError(ValueError):
    """Matrix is not symmetric within tolerance."""


class NotPositiveDefiniteError(ValueError):
    """Matrix stayed indefinite through the whole jitter ladder."""


@dataclass(frozen=True)
class CholeskyResult:
    """Lower-triangular factor plus the diagonal jitter that made it factorizable."""

    factor: np.ndarray
    jitter_applied: float

    @property
    def n(self) -> int:
        return self.factor.shape[0]


def cholesky(m, max_jitter: float = JITTER_LADDER[-1]) -> CholeskyResult:
    """Factor a symmetric matrix as L L^T with L lower triangular.

    If the plain factorization fails, retries with the smallest diagonal jitter
    from ``JITTER_LADDER`` (capped at ``max_jitter``) that succeeds, so that
    ``L L^T = m + jitter * I``.

    Raises:
        NotSymmetricError: input is not square-symmetric within 1e-12 relative.
        NotPositiveDefiniteError: every allowed jitter still fails.
    """
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSymmetricError(f"expected a square matrix, got shape {a.shape}")
    scale = np.abs(a).max() if a.size else 0.0
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    if np.abs(a - a.T).max(initial=0.0) > SYMMETRY_RTOL * max(scale, 1.0):
        raise NotSymmetricError("matrix is not symmetric within 1e-12 relative tolerance")

    eye = np.eye(a.shape[0])
    for jitter in JITTER_LADDER:
        if jitter > max_jitter:
            break
        try:
            factor = np.linalg.cholesky(a + jitter * eye if jitter else a)
        except np.linalg.LinAlgError:
            continue
        return CholeskyResult(factor=factor, jitter_applied=jitter)
    raise NotPositiveDefiniteError(
        f"matrix is not positive definite even with jitter up to {max_jitter:g}"
    )


def correlated_gaussian(chol: CholeskyResult, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Draw one vector sigma * L @ x with x i.i.d. standard normal.

    Entry i then has standard deviation sigma * sqrt(R_ii + jitter) where R is
    the matrix that was factored.
    """
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    x = rng.standard_normal(chol.n)
    return sigma * (chol.factor @ x)
