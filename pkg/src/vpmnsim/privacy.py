"""Localization-error metrics: what an untrusted operator can infer.

Single gateway: the operator's best guess for any member UE is the gateway
position, so the error is the mean distance to it.

Two gateways: the operator watches the flow ratio beta = inflow_1 / inflow_2
and estimates a UE's line coordinate as the conditional mean E[p | beta],
read off an empirical 2-D histogram of (p, beta). beta is unbounded (and
infinite when gateway 2 receives nothing), so the histogram bins the
compressed fraction beta / (1 + beta) in [0, 1]; infinity lands in the top
bin. A UE that delivers nothing to either gateway carries no signal at all
and is excluded (flow_ratio returns NaN for it).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scenario import Point2D

#: inflows below this are treated as "no traffic" on that gateway
TRAFFIC_EPS = 1e-12


class UndefinedMetricError(ValueError):
    """A metric was requested over an empty sample set."""


class EmptyRatioBinError(LookupError):
    """No training mass in the ratio bin containing the queried beta."""


@dataclass(frozen=True)
class LocalizationSample:
    """One (true position, flow ratio) observation, optionally with the
    estimate filled in. Positions are line coordinates (floats) in the line
    scenario, or Point2D in the plane."""

    true_position: float | Point2D
    estimated_position: float | Point2D | None = None
    beta: float | None = None
    trial: int = 0


def flow_ratio(sol) -> float:
    """beta = inflow_1 / inflow_2 for a two-gateway routing result.

    Returns inf when only gateway 1 sees traffic ("undefined" direction of
    the ratio, all mass at the top of the compressed scale) and NaN when
    neither gateway does (no traffic: the sample carries no information and
    is excluded downstream).
    """
    inflows = np.asarray(sol.inflows, dtype=float)
    if inflows.shape != (2,):
        raise ValueError("flow_ratio needs exactly two gateways")
    num, den = inflows
    if den < TRAFFIC_EPS:
        return math.nan if num < TRAFFIC_EPS else math.inf
    return float(num / den)


def ratio_fraction(beta: float) -> float:
    """Compress beta in [0, inf] to beta/(1+beta) in [0, 1]."""
    if math.isnan(beta):
        raise ValueError("no-traffic samples have no ratio fraction")
    if math.isinf(beta):
        return 1.0
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    return beta / (1.0 + beta)


def _as_xy(p) -> np.ndarray:
    return np.atleast_1d(np.asarray(p, dtype=float))


def single_gateway_error(samples) -> float:
    """Mean Euclidean distance between member UE positions and the gateway.

    ``samples`` is a sequence of (ue_position, gateway_position) pairs;
    membership filtering happens upstream.
    """
    samples = list(samples)
    if not samples:
        raise UndefinedMetricError("no member UEs to average over")
    dists = [float(np.linalg.norm(_as_xy(p) - _as_xy(g))) for p, g in samples]
    return float(np.mean(dists))


@dataclass(frozen=True)
class JointHistogram:
    """Counts over (position, compressed flow ratio) cells."""

    pos_edges: np.ndarray
    ratio_edges: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        pe = np.asarray(self.pos_edges, dtype=float)
        re = np.asarray(self.ratio_edges, dtype=float)
        c = np.asarray(self.counts, dtype=float)
        if pe.ndim != 1 or re.ndim != 1 or np.any(np.diff(pe) <= 0) or np.any(np.diff(re) <= 0):
            raise ValueError("bin edges must be strictly increasing 1-D arrays")
        if c.shape != (pe.size - 1, re.size - 1):
            raise ValueError("counts shape must match the bin grid")
        if np.any(c < 0):
            raise ValueError("counts must be nonnegative")
        for name, val in (("pos_edges", pe), ("ratio_edges", re), ("counts", c)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def pos_centers(self) -> np.ndarray:
        return 0.5 * (self.pos_edges[:-1] + self.pos_edges[1:])

    @property
    def ratio_centers(self) -> np.ndarray:
        return 0.5 * (self.ratio_edges[:-1] + self.ratio_edges[1:])

    def total(self) -> float:
        return float(self.counts.sum())

    def position_marginal(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def global_mean_position(self) -> float:
        marg = self.position_marginal()
        return float((self.pos_centers * marg).sum() / marg.sum())

    def merge(self, other: "JointHistogram") -> "JointHistogram":
        if not (
            np.array_equal(self.pos_edges, other.pos_edges)
            and np.array_equal(self.ratio_edges, other.ratio_edges)
        ):
            raise ValueError("histograms must share bin edges to merge")
        return JointHistogram(self.pos_edges, self.ratio_edges, self.counts + other.counts)


def build_joint_histogram(
    samples,
    pos_bins: int = 40,
    ratio_bins: int = 20,
    pos_range: tuple[float, float] | None = None,
) -> JointHistogram:
    """Histogram the (p, beta/(1+beta)) pairs of valid samples.

    NaN-beta (no traffic) samples are skipped; infinite beta goes to the top
    ratio bin. ``pos_range`` should be the line extent; it defaults to the
    sample min/max.
    """
    if pos_bins < 2 or ratio_bins < 2:
        raise ValueError("need at least 2 bins per axis")
    pos = []
    frac = []
    for s in samples:
        if s.beta is None or math.isnan(s.beta):
            continue
        pos.append(float(s.true_position))
        frac.append(ratio_fraction(s.beta))
    if not pos:
        raise UndefinedMetricError("no samples with a defined flow ratio")
    pos = np.asarray(pos)
    frac = np.asarray(frac)
    if pos_range is None:
        lo, hi = float(pos.min()), float(pos.max())
        if lo == hi:
            lo, hi = lo - 0.5, hi + 0.5
        pos_range = (lo, hi)
    counts, pe, re = np.histogram2d(
        pos, frac, bins=(pos_bins, ratio_bins), range=(pos_range, (0.0, 1.0))
    )
    return JointHistogram(pos_edges=pe, ratio_edges=re, counts=counts)


def _ratio_bin(h: JointHistogram, beta: float) -> int:
    frac = ratio_fraction(beta)
    idx = int(np.searchsorted(h.ratio_edges, frac, side="right") - 1)
    return min(max(idx, 0), h.ratio_edges.size - 2)


def conditional_mean_estimate(h: JointHistogram, beta: float) -> float:
    """E[p | beta]: count-weighted mean position within beta's ratio bin."""
    col = h.counts[:, _ratio_bin(h, beta)]
    weight = col.sum()
    if weight <= 0:
        raise EmptyRatioBinError(f"no training samples share a bin with beta={beta!r}")
    return float((h.pos_centers * col).sum() / weight)


def estimate_position(h: JointHistogram, beta: float) -> float:
    """Conditional mean with the documented fallback: an empty ratio bin
    answers with the global mean position (the estimator must always answer)."""
    try:
        return conditional_mean_estimate(h, beta)
    except EmptyRatioBinError:
        return h.global_mean_position()


def average_localization_error(samples) -> float:
    """Mean |p - p_hat| (line) or mean Euclidean error (plane) over samples
    that carry an estimate."""
    errors = []
    for s in samples:
        if s.estimated_position is None:
            continue
        errors.append(
            float(np.linalg.norm(_as_xy(s.true_position) - _as_xy(s.estimated_position)))
        )
    if not errors:
        raise UndefinedMetricError("no samples carry an estimate")
    return float(np.mean(errors))


@dataclass(frozen=True)
class HoldoutResult:
    """Held-out estimator evaluation: mean error, its standard error, how
    many samples were scored, and the training histogram."""

    mean_error: float
    stderr: float
    n_scored: int
    histogram: JointHistogram


def holdout_localization_error(
    samples,
    pos_bins: int = 40,
    ratio_bins: int = 20,
    pos_range: tuple[float, float] | None = None,
) -> HoldoutResult:
    """Held-out evaluation of the ratio-based estimator.

    Samples from even trials train the (p, beta) histogram; samples from odd
    trials are scored with it (estimating the density in-sample would bias
    the error low). No-traffic samples (NaN beta) are excluded on both sides.
    """
    train = [s for s in samples if s.trial % 2 == 0]
    test = [
        s
        for s in samples
        if s.trial % 2 == 1 and s.beta is not None and not math.isnan(s.beta)
    ]
    hist = build_joint_histogram(train, pos_bins, ratio_bins, pos_range)
    if not test:
        raise UndefinedMetricError("held-out half contains no usable samples")
    errors = np.array(
        [
            abs(float(s.true_position) - estimate_position(hist, s.beta))
            for s in test
        ]
    )
    stderr = float(errors.std(ddof=1) / np.sqrt(errors.size)) if errors.size > 1 else 0.0
    return HoldoutResult(
        mean_error=float(errors.mean()),
        stderr=stderr,
        n_scored=errors.size,
        histogram=hist,
    )
