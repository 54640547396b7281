"""Maximum flow on small dense networks, plus the multi-gateway super-sink build.

The solver is shortest-augmenting-path (breadth-first residual search). Using
the shortest path each time keeps the number of augmentations bounded for
real-valued capacities, where naive augmenting-path choices need not
terminate. The BFS scans neighbors in ascending node index, so the per-gateway
flow split is reproducible run to run.

Augmentation stops when the bottleneck drops below EPS = 1e-9 (rates are O(1)
bit/s/Hz, so anything smaller is numerical dust).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EPS = 1e-9


def _edmonds_karp(residual, source, sink):
    """Run augmenting-path max flow in place on a dense residual matrix.

    Written in plain loops so it can be JIT-compiled; the pure-Python form is
    the fallback when no compiler is available.
    """
    n = residual.shape[0]
    parent = np.empty(n, np.int64)
    queue = np.empty(n, np.int64)
    total = 0.0
    while True:
        parent[:] = -1
        parent[source] = source
        queue[0] = source
        head = 0
        tail = 1
        while head < tail and parent[sink] == -1:
            u = queue[head]
            head += 1
            for v in range(n):
                if parent[v] == -1 and residual[u, v] > EPS:
                    parent[v] = u
                    queue[tail] = v
                    tail += 1
                    if v == sink:
                        break
        if parent[sink] == -1:
            break
        bottleneck = np.inf
        v = sink
        while v != source:
            u = parent[v]
            if residual[u, v] < bottleneck:
                bottleneck = residual[u, v]
            v = u
        v = sink
        while v != source:
            u = parent[v]
            residual[u, v] -= bottleneck
            residual[v, u] += bottleneck
            v = u
        total += bottleneck
    return total


try:
    from numba import njit

    _edmonds_karp_jit = njit(cache=True)(_edmonds_karp)
except ImportError:  # pragma: no cover - exercised only without numba
    _edmonds_karp_jit = _edmonds_karp


@dataclass(frozen=True)
class FlowNetwork:
    """Dense directed flow network: capacity[i, j] is the i->j edge capacity
    (zero = no edge). Gateways, when present, are tracked so their inflows
    into the super-sink can be read back off the solution."""

    capacity: np.ndarray
    source: int
    sink: int
    gateway_nodes: tuple[int, ...] = ()

    def __post_init__(self):
        cap = np.ascontiguousarray(np.asarray(self.capacity, dtype=float))
        if cap.ndim != 2 or cap.shape[0] != cap.shape[1]:
            raise ValueError("capacity must be a square matrix")
        n = cap.shape[0]
        if not np.all(np.isfinite(cap)):
            raise ValueError("capacities must be finite")
        if np.any(cap < 0):
            raise ValueError("capacities must be nonnegative")
        np.fill_diagonal(cap, 0.0)
        cap.setflags(write=False)
        object.__setattr__(self, "capacity", cap)
        for name in ("source", "sink"):
            idx = getattr(self, name)
            if not 0 <= idx < n:
                raise ValueError(f"{name} index {idx} out of range")
        if self.source == self.sink:
            raise ValueError("source and sink must differ")
        if any(not 0 <= g < n for g in self.gateway_nodes):
            raise ValueError("gateway node index out of range")

    @property
    def n_nodes(self) -> int:
        return self.capacity.shape[0]


@dataclass(frozen=True)
class FlowSolution:
    """Net flows per directed edge, the total s->t value, and (when the
    network tracks gateways) the per-gateway share entering the sink."""

    flows: np.ndarray
    total: float
    gateway_inflows: np.ndarray | None = None


def max_flow(net: FlowNetwork) -> FlowSolution:
    return max_flow_from(net, net.source)


def max_flow_from(net: FlowNetwork, source: int) -> FlowSolution:
    """Max flow on net's capacities with the source overridden.

    Sweeping the source over many UEs reuses one network build instead of
    reconstructing an identical capacity matrix per UE.
    """
    if not 0 <= source < net.n_nodes or source == net.sink:
        raise ValueError(f"invalid source override {source}")
    residual = net.capacity.copy()
    total = float(_edmonds_karp_jit(residual, source, net.sink))
    flows = np.maximum(net.capacity - residual, 0.0)
    inflows = None
    if net.gateway_nodes:
        inflows = flows[list(net.gateway_nodes), net.sink]
    return FlowSolution(flows=flows, total=total, gateway_inflows=inflows)


def build_uplink_network(rates, source_ue: int, num_gateways: int) -> FlowNetwork:
    """Device graph plus a super-sink behind the gateways.

    ``rates`` is an (n, n) rate matrix (or anything exposing ``.rho``);
    gateways are nodes 0..num_gateways-1. Every nonzero rate becomes a
    directed edge with that capacity. Each gateway feeds the super-sink
    through an edge whose capacity is the sum of all finite capacities plus
    one -- finite, but provably never the binding constraint.
    """
    rho = np.asarray(getattr(rates, "rho", rates), dtype=float)
    n = rho.shape[0]
    if not 1 <= num_gateways <= n:
        raise ValueError("need 1 <= num_gateways <= n")
    if not 0 <= source_ue < n:
        raise ValueError(f"source index {source_ue} out of range")
    if source_ue < num_gateways:
        raise ValueError(f"source {source_ue} is a gateway, not a UE")
    cap = np.zeros((n + 1, n + 1))
    cap[:n, :n] = rho
    unbounded = rho.sum() + 1.0
    cap[:num_gateways, n] = unbounded
    return FlowNetwork(
        capacity=cap,
        source=source_ue,
        sink=n,
        gateway_nodes=tuple(range(num_gateways)),
    )


def min_cut_value(net: FlowNetwork) -> float:
    """Minimum s/t cut by exhaustive partition enumeration (test oracle)."""
    n = net.n_nodes
    if n > 20:
        raise ValueError("exhaustive min-cut is limited to 20 nodes")
    others = [v for v in range(n) if v not in (net.source, net.sink)]
    cap = net.capacity
    best = np.inf
    for mask in range(1 << len(others)):
        side_s = np.zeros(n, dtype=bool)
        side_s[net.source] = True
        for bit, v in enumerate(others):
            if mask >> bit & 1:
                side_s[v] = True
        cut = cap[side_s][:, ~side_s].sum()
        if cut < best:
            best = cut
    return float(best)
