"""Monte Carlo experiment harness.

Every experiment maps a deterministic per-trial worker over the trial indices
and reduces the results into a MetricsReport. Trial t draws all of its
randomness from a substream seeded by (base_seed, t), so results do not depend
on execution order or on how many worker processes ran the trials; reductions
only ever combine per-trial values in trial order.

Sweeps share random realizations wherever they can (common random numbers):
a gamma sweep reuses one channel draw per trial, and a device-count sweep
slices prefixes of one max-size draw. The prefix slice is exact because a
leading block of a Cholesky factor is itself the Cholesky factor of the
leading correlation block, so the first n devices of a big draw are
distributed exactly like an n-device draw.
"""

from __future__ import annotations

import dataclasses
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np

from ._version import __version__
from .channel import ChannelParams, realize_channel
from .connectivity import all_connected_dense, component_labels_dense
from .privacy import HoldoutResult, JointHistogram, UndefinedMetricError
from .routing import Algorithm, RoutingMode, ppmf, rate_matrix, rates_from_gains, umf_all
from .scenario import Scenario, place_line, place_uniform_square

THREADS_ENV_VAR = "VPMN_SIM_THREADS"


def worker_count() -> int:
    """Trial parallelism: VPMN_SIM_THREADS when set, else the CPU count."""
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is None or not raw.strip():
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError(f"{THREADS_ENV_VAR} must be an integer, got {raw!r}") from exc
    return max(1, n)


def trial_rng(base_seed: int, trial: int) -> np.random.Generator:
    """The random stream for one trial, independent of every other trial's."""
    return np.random.default_rng(np.random.SeedSequence((base_seed, trial)))


@dataclass(frozen=True)
class ExperimentConfig:
    """Geometry, channel, sweep, and sampling knobs for one experiment run.

    Not every field matters to every experiment: the connectivity study reads
    ``device_list``, the localization studies read ``ue_list`` and the line_*
    fields, the rate study reads ``ue_list`` x ``gateway_list``. Sweep lists
    must be nonempty.
    """

    channel: ChannelParams = ChannelParams()
    trials: int = 1000
    base_seed: int = 0

    # square deployments (devices i.i.d. uniform on a centered square)
    area_side_m: float = 100.0

    # line deployments (gateways at (0, +/-offset), UEs on the same axis)
    line_num_ues: int = 28
    line_gateway_offset_m: float = 20.0
    line_extent_m: float = 100.0

    # sweeps.  The default threshold grid stops at -5 dB: with the default
    # 8 dB shadowing, thresholds at 0 dB and above leave connection odds so
    # poor that adding devices *lowers* the all-connected probability (each
    # newcomer is one more node whose links can all be shadowed out), so the
    # usual more-devices-help reading no longer applies there.
    gamma_list_db: tuple[float, ...] = (-30.0, -25.0, -20.0, -15.0, -10.0, -5.0)
    device_list: tuple[int, ...] = (5, 10, 20)
    ue_list: tuple[int, ...] = (30, 52, 75, 97, 120)
    gateway_list: tuple[int, ...] = (1, 2, 3)
    modes: tuple[RoutingMode, ...] = (RoutingMode.SINGLE_HOP, RoutingMode.MULTI_HOP)
    algorithms: tuple[Algorithm, ...] = (Algorithm.UMF, Algorithm.PPMF)

    # ratio-based position estimator
    pos_bins: int = 40
    ratio_bins: int = 20

    # pin the device layout instead of drawing it (connectivity study only);
    # the channel is still redrawn every trial
    explicit_positions: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 <= int(self.base_seed) < 2**64:
            raise ValueError("base_seed must be a nonnegative 64-bit integer")
        if self.area_side_m <= 0:
            raise ValueError("area_side_m must be > 0")
        if self.line_num_ues < 1:
            raise ValueError("line_num_ues must be >= 1")
        if self.line_gateway_offset_m <= 0:
            raise ValueError("line_gateway_offset_m must be > 0")
        if self.line_extent_m < 0:
            raise ValueError("line_extent_m must be >= 0")
        if self.pos_bins < 2 or self.ratio_bins < 2:
            raise ValueError("pos_bins and ratio_bins must be >= 2")

        gammas = tuple(float(g) for g in self.gamma_list_db)
        if not gammas or not all(np.isfinite(gammas)):
            raise ValueError("gamma_list_db must be a nonempty list of finite dB values")
        object.__setattr__(self, "gamma_list_db", gammas)

        for name in ("device_list", "ue_list", "gateway_list"):
            values = tuple(int(v) for v in getattr(self, name))
            if not values or min(values) < 1:
                raise ValueError(f"{name} must be a nonempty list of positive counts")
            object.__setattr__(self, name, values)

        modes = tuple(RoutingMode(m) for m in self.modes)
        algorithms = tuple(Algorithm(a) for a in self.algorithms)
        if not modes or not algorithms:
            raise ValueError("modes and algorithms must be nonempty")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "algorithms", algorithms)
        object.__setattr__(self, "base_seed", int(self.base_seed))

        if self.explicit_positions is not None:
            pts = tuple((float(x), float(y)) for x, y in self.explicit_positions)
            if not pts:
                raise ValueError("explicit_positions must be nonempty when given")
            object.__setattr__(self, "explicit_positions", pts)


@dataclass(frozen=True)
class MetricsReport:
    """One experiment's tabular output plus run metadata.

    ``rows`` is a tuple of dicts, one per sweep point, each with exactly the
    keys in ``columns``. ``metadata`` echoes the effective config, the base
    seed, and the code version.
    """

    metric: str
    columns: tuple[str, ...]
    rows: tuple[dict, ...]
    metadata: dict

    def __post_init__(self):
        columns = tuple(str(c) for c in self.columns)
        rows = tuple(dict(r) for r in self.rows)
        for r in rows:
            if set(r) != set(columns):
                raise ValueError(
                    f"row keys {sorted(r)} do not match columns {sorted(columns)}"
                )
        for key in ("config", "base_seed", "version"):
            if key not in self.metadata:
                raise ValueError(f"metadata is missing {key!r}")
        object.__setattr__(self, "columns", columns)
        object.__setattr__(self, "rows", rows)

    def column(self, name: str) -> list:
        if name not in self.columns:
            raise KeyError(name)
        return [r[name] for r in self.rows]


def config_to_dict(cfg: ExperimentConfig) -> dict:
    """JSON-ready flat dict (tuples become lists, enums become their values)."""
    d = dataclasses.asdict(cfg)
    d["modes"] = [m.value for m in cfg.modes]
    d["algorithms"] = [a.value for a in cfg.algorithms]
    for key, value in d.items():
        if isinstance(value, tuple):
            d[key] = [list(v) if isinstance(v, tuple) else v for v in value]
    return d


def config_from_dict(data: dict) -> ExperimentConfig:
    """Inverse of config_to_dict; unknown keys raise TypeError."""
    data = dict(data)
    if "channel" in data and not isinstance(data["channel"], ChannelParams):
        data["channel"] = ChannelParams(**data["channel"])
    return ExperimentConfig(**data)


def _metadata(cfg: ExperimentConfig) -> dict:
    return {
        "config": config_to_dict(cfg),
        "base_seed": cfg.base_seed,
        "version": __version__,
    }


def _run_trials(fn, cfg: ExperimentConfig) -> list:
    """Map ``fn`` over trial indices, in order, possibly in a process pool.

    ``fn`` must be picklable (a module-level function or a partial of one).
    """
    workers = worker_count()
    if workers <= 1 or cfg.trials == 1:
        return [fn(t) for t in range(cfg.trials)]
    chunk = max(1, min(256, cfg.trials // (workers * 4)))
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, range(cfg.trials), chunksize=chunk))


# ---------------------------------------------------------------------------
# connectivity probability
# ---------------------------------------------------------------------------


def _p_conn_trial(cfg: ExperimentConfig, trial: int) -> np.ndarray:
    """(n_gamma, n_devices) boolean table: is the whole drop one component?"""
    rng = trial_rng(cfg.base_seed, trial)
    if cfg.explicit_positions is not None:
        scen = Scenario(positions=np.asarray(cfg.explicit_positions, dtype=float), num_gateways=1)
    else:
        scen = place_uniform_square(max(cfg.device_list), 1, cfg.area_side_m, rng)
    ch = realize_channel(scen, cfg.channel, rng)
    out = np.zeros((len(cfg.gamma_list_db), len(cfg.device_list)), dtype=bool)
    for ni, n in enumerate(cfg.device_list):
        gain = ch.gain_db[:n, :n]
        for gi, gamma in enumerate(cfg.gamma_list_db):
            out[gi, ni] = all_connected_dense(gain > gamma)
    return out


def estimate_p_conn(cfg: ExperimentConfig) -> MetricsReport:
    """Probability that all dropped devices form one connected component.

    One channel draw per trial serves every (gamma, device count) cell: the
    gamma sweep rereads the same gain matrix and the device sweep slices its
    leading blocks, so per-trial the indicator is exactly nonincreasing in
    gamma.
    """
    if cfg.explicit_positions is not None and len(cfg.explicit_positions) < max(cfg.device_list):
        raise ValueError("explicit_positions has fewer devices than device_list needs")
    stack = np.stack(_run_trials(partial(_p_conn_trial, cfg), cfg))
    t = cfg.trials
    k = stack.sum(axis=0, dtype=np.int64)
    p = k / t
    if t > 1:
        stderr = np.sqrt(p * (1.0 - p) / (t - 1))
    else:
        stderr = np.zeros_like(p)
    rows = []
    for ni, n in enumerate(cfg.device_list):
        for gi, gamma in enumerate(cfg.gamma_list_db):
            rows.append(
                {
                    "gamma_db": gamma,
                    "n": n,
                    "p_conn": float(p[gi, ni]),
                    "stderr": float(stderr[gi, ni]),
                    "trials": t,
                }
            )
    return MetricsReport(
        metric="p_conn",
        columns=("gamma_db", "n", "p_conn", "stderr", "trials"),
        rows=tuple(rows),
        metadata=_metadata(cfg),
    )


# ---------------------------------------------------------------------------
# single-gateway localization error
# ---------------------------------------------------------------------------


def _localization_trial(cfg: ExperimentConfig, trial: int) -> np.ndarray:
    """(n_modes, n_ue_counts, n_gamma) per-trial mean member distance (NaN if
    no UE is a member)."""
    rng = trial_rng(cfg.base_seed, trial)
    scen = place_uniform_square(
        1 + max(cfg.ue_list), 1, cfg.area_side_m, rng, gateway_at_center=True
    )
    ch = realize_channel(scen, cfg.channel, rng)
    gw_dist = ch.distances[0]
    out = np.full((len(cfg.modes), len(cfg.ue_list), len(cfg.gamma_list_db)), np.nan)
    for ui, m in enumerate(cfg.ue_list):
        n = 1 + m
        gain = ch.gain_db[:n, :n]
        dist = gw_dist[1:n]
        for gi, gamma in enumerate(cfg.gamma_list_db):
            labels = None
            for mi, mode in enumerate(cfg.modes):
                if mode is RoutingMode.SINGLE_HOP:
                    member = gain[0, 1:] > gamma
                else:
                    if labels is None:
                        labels = component_labels_dense(gain > gamma)
                    member = labels[1:] == labels[0]
                if member.any():
                    out[mi, ui, gi] = float(dist[member].mean())
    return out


def localization_experiment_single_gateway(cfg: ExperimentConfig) -> MetricsReport:
    """Mean distance from the central gateway to the UEs it can see.

    Single hop counts a UE as visible iff it has a direct link to the
    gateway; multihop iff it shares the gateway's connected component. Trials
    where no UE is visible contribute no distance sample; their frequency is
    reported as 1 - member_rate.
    """
    stack = np.stack(_run_trials(partial(_localization_trial, cfg), cfg))
    t = cfg.trials
    rows = []
    for mi, mode in enumerate(cfg.modes):
        for ui, m in enumerate(cfg.ue_list):
            for gi, gamma in enumerate(cfg.gamma_list_db):
                vals = stack[:, mi, ui, gi]
                vals = vals[~np.isnan(vals)]
                if vals.size:
                    mean = float(vals.mean())
                    stderr = (
                        float(vals.std(ddof=1) / np.sqrt(vals.size)) if vals.size > 1 else 0.0
                    )
                else:
                    mean = float("nan")
                    stderr = float("nan")
                rows.append(
                    {
                        "mode": mode.value,
                        "m": m,
                        "gamma_db": gamma,
                        "u_bar_m": mean,
                        "stderr": stderr,
                        "member_rate": vals.size / t,
                        "trials": t,
                    }
                )
    return MetricsReport(
        metric="localization_error",
        columns=("mode", "m", "gamma_db", "u_bar_m", "stderr", "member_rate", "trials"),
        rows=tuple(rows),
        metadata=_metadata(cfg),
    )


# ---------------------------------------------------------------------------
# two-gateway line scenario: flow-ratio side channel
# ---------------------------------------------------------------------------


def _flow_ratio_raw(inflows: np.ndarray) -> float:
    # privacy.flow_ratio without the RoutingResult wrapper (hot loop)
    num, den = float(inflows[0]), float(inflows[1])
    if den < 1e-12:
        return float("nan") if num < 1e-12 else float("inf")
    return num / den


def _line_trial(cfg: ExperimentConfig, trial: int) -> dict:
    """{(mode_value, algorithm_value): (positions, betas)} for one drop."""
    rng = trial_rng(cfg.base_seed, trial)
    scen = place_line(cfg.line_num_ues, cfg.line_gateway_offset_m, cfg.line_extent_m, rng)
    ch = realize_channel(scen, cfg.channel, rng)
    ue_pos = scen.positions[2:, 1].copy()
    out = {}
    for mode in cfg.modes:
        rates = rate_matrix(ch, cfg.channel, mode, num_gateways=2)
        for alg in cfg.algorithms:
            if alg is Algorithm.UMF:
                results = umf_all(rates)
            else:
                results = [ppmf(rates, v) for v in rates.ue_indices]
            betas = np.array([_flow_ratio_raw(r.inflows) for r in results])
            out[(mode.value, alg.value)] = (ue_pos, betas)
    return out


def _ratio_fractions(beta: np.ndarray) -> np.ndarray:
    """Vectorized beta -> beta/(1+beta); inf maps to 1. NaN must be pre-filtered."""
    frac = np.empty_like(beta)
    inf = np.isinf(beta)
    frac[inf] = 1.0
    frac[~inf] = beta[~inf] / (1.0 + beta[~inf])
    return frac


def _histogram_from_arrays(
    pos: np.ndarray,
    beta: np.ndarray,
    pos_bins: int,
    ratio_bins: int,
    pos_range: tuple[float, float],
) -> JointHistogram:
    """Array twin of privacy.build_joint_histogram (bit-identical counts)."""
    valid = ~np.isnan(beta)
    pos, beta = pos[valid], beta[valid]
    if pos.size == 0:
        raise UndefinedMetricError("no samples with a defined flow ratio")
    counts, pe, re_ = np.histogram2d(
        pos, _ratio_fractions(beta), bins=(pos_bins, ratio_bins), range=(pos_range, (0.0, 1.0))
    )
    return JointHistogram(pos_edges=pe, ratio_edges=re_, counts=counts)


def _bin_estimates(h: JointHistogram) -> np.ndarray:
    """Estimator answer per ratio bin: conditional mean position, or the
    global mean where the bin holds no training mass."""
    fallback = h.global_mean_position()
    centers = h.pos_centers
    out = np.empty(h.ratio_edges.size - 1)
    for j in range(out.size):
        col = h.counts[:, j]
        weight = col.sum()
        out[j] = (centers * col).sum() / weight if weight > 0 else fallback
    return out


def _holdout_from_arrays(
    pos: np.ndarray,
    beta: np.ndarray,
    trial: np.ndarray,
    pos_bins: int,
    ratio_bins: int,
    pos_range: tuple[float, float],
) -> HoldoutResult:
    """Array twin of privacy.holdout_localization_error: even trials train
    the histogram, odd trials are scored against it."""
    train = trial % 2 == 0
    test = ~train & ~np.isnan(beta)
    hist = _histogram_from_arrays(pos[train], beta[train], pos_bins, ratio_bins, pos_range)
    if not test.any():
        raise UndefinedMetricError("held-out half contains no usable samples")
    frac = _ratio_fractions(beta[test])
    bins = np.clip(
        np.searchsorted(hist.ratio_edges, frac, side="right") - 1, 0, hist.ratio_edges.size - 2
    )
    errors = np.abs(pos[test] - _bin_estimates(hist)[bins])
    stderr = float(errors.std(ddof=1) / np.sqrt(errors.size)) if errors.size > 1 else 0.0
    return HoldoutResult(
        mean_error=float(errors.mean()),
        stderr=stderr,
        n_scored=int(errors.size),
        histogram=hist,
    )


def line_scenario_experiment(
    cfg: ExperimentConfig,
) -> tuple[dict[tuple[RoutingMode, Algorithm], JointHistogram], MetricsReport]:
    """Flow-ratio localization attack on the two-gateway line deployment.

    Per trial and UE, route uplink traffic and record (true position, flow
    ratio). Returns one full-sample (position, ratio) histogram per
    (mode, algorithm), plus a report of held-out estimator errors: the
    histogram trained on even trials is scored on odd trials.
    """
    results = _run_trials(partial(_line_trial, cfg), cfg)
    pos_range = (-cfg.line_extent_m / 2.0, cfg.line_extent_m / 2.0)
    histograms: dict[tuple[RoutingMode, Algorithm], JointHistogram] = {}
    rows = []
    for mode in cfg.modes:
        for alg in cfg.algorithms:
            key = (mode.value, alg.value)
            pos = np.concatenate([r[key][0] for r in results])
            beta = np.concatenate([r[key][1] for r in results])
            trial_idx = np.concatenate(
                [np.full(r[key][0].size, t, dtype=np.int64) for t, r in enumerate(results)]
            )
            held = _holdout_from_arrays(
                pos, beta, trial_idx, cfg.pos_bins, cfg.ratio_bins, pos_range
            )
            histograms[(mode, alg)] = _histogram_from_arrays(
                pos, beta, cfg.pos_bins, cfg.ratio_bins, pos_range
            )
            rows.append(
                {
                    "mode": mode.value,
                    "algorithm": alg.value,
                    "u_bar_m": held.mean_error,
                    "stderr": held.stderr,
                    "n_scored": held.n_scored,
                    "n_samples": int(pos.size),
                    "trials": cfg.trials,
                }
            )
    report = MetricsReport(
        metric="line_localization_error",
        columns=("mode", "algorithm", "u_bar_m", "stderr", "n_scored", "n_samples", "trials"),
        rows=tuple(rows),
        metadata=_metadata(cfg),
    )
    return histograms, report


# ---------------------------------------------------------------------------
# total uplink rate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RateTrialResult:
    """Routed rates for one (trial, gateway count, UE count, mode, algorithm)
    cell: the sum over UEs, the per-UE values, and each UE's direct-link rates
    to the gateways (for membership checks)."""

    trial: int
    num_gateways: int
    num_ues: int
    mode: RoutingMode
    algorithm: Algorithm
    total: float
    per_ue: np.ndarray
    direct_rates: np.ndarray

    @property
    def key(self) -> tuple:
        return (self.num_gateways, self.num_ues, self.mode, self.algorithm)


def _rate_trial(cfg: ExperimentConfig, trial: int) -> list[RateTrialResult]:
    rng = trial_rng(cfg.base_seed, trial)
    scen = place_uniform_square(
        max(cfg.gateway_list) + max(cfg.ue_list), 1, cfg.area_side_m, rng
    )
    ch = realize_channel(scen, cfg.channel, rng)
    out = []
    for s_count in cfg.gateway_list:
        for m in cfg.ue_list:
            n = s_count + m
            gain = ch.gain_db[:n, :n]
            for mode in cfg.modes:
                rates = rates_from_gains(
                    gain, cfg.channel.rate_threshold_db, s_count, mode
                )
                for alg in cfg.algorithms:
                    if alg is Algorithm.UMF:
                        results = umf_all(rates)
                    else:
                        results = [ppmf(rates, v) for v in rates.ue_indices]
                    per_ue = np.array([r.c_v for r in results])
                    out.append(
                        RateTrialResult(
                            trial=trial,
                            num_gateways=s_count,
                            num_ues=m,
                            mode=mode,
                            algorithm=alg,
                            total=float(per_ue.sum()),
                            per_ue=per_ue,
                            direct_rates=rates.rho[s_count:n, :s_count].copy(),
                        )
                    )
    return out


def rate_trials(cfg: ExperimentConfig) -> list[RateTrialResult]:
    """Every per-trial routing outcome, flattened in (trial, sweep) order.

    One channel draw per trial covers the whole (gateway count, UE count)
    grid by slicing leading blocks, so within a trial the cells differ only
    in configuration — mode and algorithm comparisons are exact.
    """
    per_trial = _run_trials(partial(_rate_trial, cfg), cfg)
    return [r for chunk in per_trial for r in chunk]


def rate_experiment(cfg: ExperimentConfig) -> MetricsReport:
    """Mean total uplink rate (sum over UEs) per sweep cell."""
    records = rate_trials(cfg)
    by_cell: dict[tuple, list[float]] = {}
    for r in records:
        by_cell.setdefault(r.key, []).append(r.total)
    rows = []
    for s_count in cfg.gateway_list:
        for m in cfg.ue_list:
            for mode in cfg.modes:
                for alg in cfg.algorithms:
                    totals = np.array(by_cell[(s_count, m, mode, alg)])
                    stderr = (
                        float(totals.std(ddof=1) / np.sqrt(totals.size))
                        if totals.size > 1
                        else 0.0
                    )
                    rows.append(
                        {
                            "s": s_count,
                            "m": m,
                            "mode": mode.value,
                            "algorithm": alg.value,
                            "c_tot": float(totals.mean()),
                            "stderr": stderr,
                            "trials": cfg.trials,
                        }
                    )
    return MetricsReport(
        metric="total_rate",
        columns=("s", "m", "mode", "algorithm", "c_tot", "stderr", "trials"),
        rows=tuple(rows),
        metadata=_metadata(cfg),
    )
