"""Path loss, spatially correlated shadowing, and pairwise channel gains.

The channel gain (carrier-to-noise ratio) of a link in dB is the sum of the
two endpoints' shadowing values and the distance path loss:

    gain_db[i, j] = z_i + z_j - 10 * alpha * log10(d_ij / r0)

Shadowing z is a zero-mean Gaussian vector whose correlation halves every
decorrelation distance: R_ij = exp(-(d_ij / d_cor) * ln 2). The diagonal of
the gain matrix is a +inf sentinel and is never read; pairs beyond an optional
hard distance cutoff get a -inf sentinel (no link).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .scenario import Scenario, distance_matrix

_LN2 = np.log(2.0)


class DegenerateGeometryError(ValueError):
    """Two distinct devices share a position; the channel model is undefined there."""


@dataclass(frozen=True)
class ChannelParams:
    """Propagation and threshold parameters.

    alpha: path-loss exponent.
    r0_m: path-loss normalization distance (meters).
    d_cor_m: shadowing decorrelation distance (meters).
    sigma_sh_db: per-device shadowing standard deviation (dB).
    gamma_db: connectivity threshold (dB).
    delta_db: rate threshold (dB); None means "same as gamma_db".
    d_min_m: optional hard distance cutoff (meters); pairs at or beyond it
        are never connected regardless of gain.
    """

    alpha: float = 2.0
    r0_m: float = 31.62
    d_cor_m: float = 20.0
    sigma_sh_db: float = 8.0
    gamma_db: float = -10.0
    delta_db: float | None = None
    d_min_m: float | None = None

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be > 0")
        if self.r0_m <= 0:
            raise ValueError("r0_m must be > 0")
        if self.d_cor_m <= 0:
            raise ValueError("d_cor_m must be > 0")
        if self.sigma_sh_db < 0:
            raise ValueError("sigma_sh_db must be >= 0")
        if self.d_min_m is not None and self.d_min_m <= 0:
            raise ValueError("d_min_m must be > 0 when set")

    @property
    def rate_threshold_db(self) -> float:
        return self.gamma_db if self.delta_db is None else self.delta_db


@dataclass(frozen=True)
class ChannelRealization:
    """One channel draw: symmetric gain matrix (dB), the shadowing behind it,
    and the distances it was computed from."""

    gain_db: np.ndarray
    shadowing_db: np.ndarray
    distances: np.ndarray

    @property
    def n(self) -> int:
        return self.gain_db.shape[0]


def path_loss_db(d, r0_m: float, alpha: float):
    """Distance path loss in dB: -10 * alpha * log10(d / r0). Scalar or array."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distances must be > 0")
    if r0_m <= 0:
        raise ValueError("r0_m must be > 0")
    out = -10.0 * alpha * np.log10(d / r0_m)
    return float(out) if out.ndim == 0 else out


def correlation_matrix(distances: np.ndarray, d_cor_m: float) -> np.ndarray:
    """Shadowing correlation R_ij = exp(-(d_ij / d_cor) * ln 2)."""
    if d_cor_m <= 0:
        raise ValueError("d_cor_m must be > 0")
    d = np.asarray(distances, dtype=float)
    return np.exp(-(d / d_cor_m) * _LN2)


def gain_linear(gain_db):
    """dB gain to linear ratio; the -inf sentinel maps to 0."""
    g = np.asarray(gain_db, dtype=float)
    out = np.power(10.0, g / 10.0)
    return float(out) if out.ndim == 0 else out


def realize_channel(
    s: Scenario,
    p: ChannelParams,
    rng: np.random.Generator,
) -> ChannelRealization:
    """Draw one correlated-shadowing realization for every device pair.

    Raises DegenerateGeometryError if two distinct devices coincide.
    """
    d = distance_matrix(s)
    n = s.n
    off = ~np.eye(n, dtype=bool)
    if n > 1 and d[off].min() <= 0.0:
        raise DegenerateGeometryError("two distinct devices share the same position")

    chol = linalg.cholesky(correlation_matrix(d, p.d_cor_m))
    z = linalg.correlated_gaussian(chol, p.sigma_sh_db, rng)

    gain = z[:, None] + z[None, :]
    if n > 1:
        gain[off] += path_loss_db(d[off], p.r0_m, p.alpha)
    np.fill_diagonal(gain, np.inf)
    if p.d_min_m is not None:
        gain[off & (d >= p.d_min_m)] = -np.inf
    return ChannelRealization(gain_db=gain, shadowing_db=z, distances=d)
