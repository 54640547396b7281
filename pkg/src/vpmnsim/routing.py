"""Uplink routing: rate matrices, max-flow routing (UMF), and the
privacy-preserving variant (PPMF) that forces equal per-gateway rates.

A link's rate is log2(1 + Gamma_linear) when its gain clears the rate
threshold, else zero. In single-hop mode only UE -> gateway links carry rate;
in multihop mode every above-threshold link does (symmetrically). Each UE is
routed independently -- one flow problem per UE, matching a slotted system
where one UE transmits at a time.

UMF maximizes the UE's total rate into the gateways (augmenting-path max
flow). PPMF maximizes the same objective subject to every gateway receiving
the *same* rate, so the per-gateway split leaks nothing about the UE's
position; it is solved as a linear program. PPMF never exceeds UMF (its
feasible set is a subset), and with a single gateway the two coincide.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .channel import ChannelParams, ChannelRealization, gain_linear
from .flow import build_uplink_network, max_flow, max_flow_from
from .simplex import OPTIMAL, LpProblem, LpSolution, solve


class RoutingMode(str, enum.Enum):
    SINGLE_HOP = "single_hop"
    MULTI_HOP = "multi_hop"


class Algorithm(str, enum.Enum):
    UMF = "umf"
    PPMF = "ppmf"


@dataclass(frozen=True)
class RateMatrix:
    """Per-link achievable rates (bit/s/Hz), zero where no usable link."""

    rho: np.ndarray
    num_gateways: int
    mode: RoutingMode

    def __post_init__(self):
        rho = np.ascontiguousarray(np.asarray(self.rho, dtype=float))
        n = rho.shape[0]
        if rho.ndim != 2 or rho.shape != (n, n):
            raise ValueError("rho must be square")
        if np.any(rho < 0) or not np.all(np.isfinite(rho)):
            raise ValueError("rates must be finite and nonnegative")
        if np.any(np.diag(rho) != 0):
            raise ValueError("diagonal rates must be zero")
        if not 1 <= self.num_gateways <= n:
            raise ValueError("need 1 <= num_gateways <= n")
        mode = RoutingMode(self.mode)
        if mode is RoutingMode.SINGLE_HOP:
            masked = rho.copy()
            masked[self.num_gateways :, : self.num_gateways] = 0.0
            if np.any(masked != 0):
                raise ValueError("single-hop rates must be UE -> gateway only")
        else:
            if not np.array_equal(rho, rho.T):
                raise ValueError("multihop rates must be symmetric")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "mode", mode)

    @property
    def n(self) -> int:
        return self.rho.shape[0]

    @property
    def ue_indices(self) -> range:
        return range(self.num_gateways, self.n)


@dataclass(frozen=True)
class RoutingResult:
    """One UE's routed rate: C(v), its per-gateway split, and which algorithm
    produced it."""

    ue: int
    c_v: float
    inflows: np.ndarray
    algorithm: Algorithm


def rate_matrix(
    ch: ChannelRealization, params: ChannelParams, mode, *, num_gateways: int = 1
) -> RateMatrix:
    """Rates from a channel realization: log2(1 + linear gain) above the
    rate threshold. The gateway count comes from the scenario."""
    return rates_from_gains(ch.gain_db, params.rate_threshold_db, num_gateways, mode)


def rates_from_gains(
    gain_db: np.ndarray, rate_threshold_db: float, num_gateways: int, mode
) -> RateMatrix:
    """Rate matrix straight from a gain matrix (dB) and a threshold."""
    rho = np.log2(1.0 + gain_linear(gain_db))
    rho[~(gain_db > rate_threshold_db)] = 0.0
    np.fill_diagonal(rho, 0.0)
    mode = RoutingMode(mode)
    if mode is RoutingMode.SINGLE_HOP:
        keep = np.zeros(rho.shape, dtype=bool)
        keep[num_gateways:, :num_gateways] = True
        rho[~keep] = 0.0
    return RateMatrix(rho=rho, num_gateways=num_gateways, mode=mode)


def umf(rates: RateMatrix, v: int) -> RoutingResult:
    """Unconstrained max-flow routing for UE v."""
    net = build_uplink_network(rates.rho, source_ue=v, num_gateways=rates.num_gateways)
    sol = max_flow(net)
    return RoutingResult(
        ue=v, c_v=sol.total, inflows=sol.gateway_inflows, algorithm=Algorithm.UMF
    )


def umf_all(rates: RateMatrix) -> list[RoutingResult]:
    """UMF for every UE, sharing one super-sink network build.

    The capacity matrix is identical for all UEs (only the source moves), so
    per-UE solves just reset the residual.
    """
    ues = list(rates.ue_indices)
    if not ues:
        return []
    net = build_uplink_network(rates.rho, source_ue=ues[0], num_gateways=rates.num_gateways)
    out = []
    for v in ues:
        sol = max_flow_from(net, v)
        out.append(
            RoutingResult(ue=v, c_v=sol.total, inflows=sol.gateway_inflows, algorithm=Algorithm.UMF)
        )
    return out


def _directed_edges(rates: RateMatrix) -> list[tuple[int, int]]:
    """Every nonzero-rate directed edge except those leaving a gateway
    (gateways are pure sinks in the uplink problem)."""
    s = rates.num_gateways
    rows, cols = np.nonzero(rates.rho)
    return [(int(i), int(j)) for i, j in zip(rows, cols) if i >= s]


def ppmf_lp(rates: RateMatrix, v: int) -> tuple[LpProblem, list[tuple[int, int]]]:
    """The equal-gateway-rate LP for UE v, plus its edge-variable ordering.

    Variables: one flow per usable directed edge. Rows: per-edge capacity;
    "outgoing <= incoming" at every UE except the source v; equal total
    inflow at consecutive gateway pairs. Objective: total flow into gateways.
    """
    s = rates.num_gateways
    if not s <= v < rates.n:
        raise ValueError(f"v={v} is not a UE index")
    edges = _directed_edges(rates)
    n_e = len(edges)
    rho = rates.rho

    coeffs = []
    rels = []
    rhs = []
    # capacity rows
    for k, (i, j) in enumerate(edges):
        row = np.zeros(n_e)
        row[k] = 1.0
        coeffs.append(row)
        rels.append("<=")
        rhs.append(rho[i, j])
    # conservation at intermediate UEs: out - in <= 0
    for k in rates.ue_indices:
        if k == v:
            continue
        row = np.zeros(n_e)
        touched = False
        for e, (i, j) in enumerate(edges):
            if i == k:
                row[e] += 1.0
                touched = True
            if j == k:
                row[e] -= 1.0
                touched = True
        if touched:
            coeffs.append(row)
            rels.append("<=")
            rhs.append(0.0)
    # equal inflow across gateways (chained pairs)
    inflow_rows = np.zeros((s, n_e))
    for e, (_, j) in enumerate(edges):
        if j < s:
            inflow_rows[j, e] = 1.0
    if n_e:
        for g in range(s - 1):
            coeffs.append(inflow_rows[g] - inflow_rows[g + 1])
            rels.append("=")
            rhs.append(0.0)

    objective = inflow_rows.sum(axis=0)
    problem = LpProblem(
        objective=objective,
        coeffs=np.array(coeffs).reshape(len(rhs), n_e),
        relations=tuple(rels),
        rhs=np.array(rhs),
    )
    return problem, edges


def ppmf(rates: RateMatrix, v: int) -> RoutingResult:
    """Privacy-preserving max flow: maximize total rate under equal
    per-gateway inflows. Zero flow is always feasible, so the LP can never
    be infeasible or unbounded."""
    s = rates.num_gateways
    problem, edges = ppmf_lp(rates, v)
    if not edges:
        return RoutingResult(
            ue=v, c_v=0.0, inflows=np.zeros(s), algorithm=Algorithm.PPMF
        )
    sol = solve(problem)
    if sol.status != OPTIMAL:
        raise RuntimeError(
            f"equal-rate LP reported {sol.status}; zero flow is feasible, so "
            "this indicates a solver defect"
        )
    inflows = np.zeros(s)
    for e, (_, j) in enumerate(edges):
        if j < s:
            inflows[j] += sol.x[e]
    return RoutingResult(ue=v, c_v=float(sol.objective), inflows=inflows, algorithm=Algorithm.PPMF)


def total_rate(rates: RateMatrix, algorithm) -> float:
    """Sum of C(v) over all UEs (one independent flow problem per UE)."""
    algorithm = Algorithm(algorithm)
    route = umf if algorithm is Algorithm.UMF else ppmf
    return float(sum(route(rates, v).c_v for v in rates.ue_indices))


def multi_source_flow_lp(
    capacities: np.ndarray,
    source_caps: dict[int, float],
    sinks,
) -> LpSolution:
    """Generalized max flow as an LP: several sources, each with its own
    generation capacity, and one or more sinks (reduced to one via a
    super-sink).

    Conservation is strict everywhere except at sources, where generation
    relaxes it to "outgoing - incoming <= c_n". The objective is total flow
    into the (super-)sink. Edge variables are ordered lexicographically by
    (i, j) over nonzero-capacity entries.
    """
    cap = np.asarray(capacities, dtype=float)
    n = cap.shape[0]
    if cap.ndim != 2 or cap.shape != (n, n):
        raise ValueError("capacities must be square")
    if np.any(cap < 0) or not np.all(np.isfinite(cap)):
        raise ValueError("capacities must be finite and nonnegative")
    sinks = sorted(int(t) for t in sinks)
    sources = {int(k): float(c) for k, c in source_caps.items()}
    if any(c < 0 for c in sources.values()):
        raise ValueError("source capacities must be nonnegative")
    if not sinks or not sources:
        raise ValueError("need at least one source and one sink")
    if set(sources) & set(sinks):
        raise ValueError("a node cannot be both source and sink")

    if len(sinks) > 1:
        full = np.zeros((n + 1, n + 1))
        full[:n, :n] = cap
        full[sinks, n] = cap.sum() + sum(sources.values()) + 1.0
        cap = full
        final_sink = n
        n = n + 1
    else:
        final_sink = sinks[0]

    rows_i, cols_j = np.nonzero(cap)
    edges = [(int(i), int(j)) for i, j in zip(rows_i, cols_j)]
    n_e = len(edges)
    if n_e == 0:
        return LpSolution(OPTIMAL, np.zeros(0), 0.0)

    coeffs = []
    rels = []
    rhs = []
    for e, (i, j) in enumerate(edges):
        row = np.zeros(n_e)
        row[e] = 1.0
        coeffs.append(row)
        rels.append("<=")
        rhs.append(cap[i, j])
    balance = np.zeros((n, n_e))
    for e, (i, j) in enumerate(edges):
        balance[i, e] += 1.0  # outgoing
        balance[j, e] -= 1.0  # incoming
    for k in range(n):
        if k == final_sink:
            continue
        if k in sources:
            coeffs.append(balance[k])
            rels.append("<=")
            rhs.append(sources[k])
        else:
            coeffs.append(balance[k])
            rels.append("=")
            rhs.append(0.0)

    objective = -balance[final_sink]  # incoming minus outgoing at the sink
    problem = LpProblem(
        objective=objective,
        coeffs=np.array(coeffs),
        relations=tuple(rels),
        rhs=np.array(rhs),
    )
    sol = solve(problem)
    if sol.status != OPTIMAL:
        raise RuntimeError(f"flow LP reported {sol.status}; zero flow is feasible")
    return sol
