"""Flow-level CSMA/CA abstraction.

AP interfaces that share spectrum and hear each other above the CCA threshold
contend for airtime. Served airtime is the fixed point of

    S_a = min(D_a, max(0, 1 - sum_{b in N(a)} S_b))

reached by damped synchronous iteration from ``S = min(D, 1)``. Saturated
mutual contenders split the channel evenly; a node flanked by two busy nodes
that cannot hear each other is starved (flow-in-the-middle).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numba
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .spectrum import LinkBudgetParams, channels_overlap, path_loss, rx_power

N_INTERFACES = 3

DAMPING = 0.5
TOLERANCE = 1e-9
MAX_ITER = 10_000
# cap on damping * (1 + spectral radius) so the top contention mode contracts
_STABILITY = 1.5


def node_index(ap_id: int, interface: int) -> int:
    return ap_id * N_INTERFACES + interface


@dataclass
class ContentionGraph:
    adjacency: np.ndarray  # (n, n) bool, symmetric, zero diagonal
    labels: tuple = ()  # (ap_id, interface) per node
    damping: Optional[np.ndarray] = None  # per-node damping factor

    def __post_init__(self):
        self.adjacency = np.asarray(self.adjacency, dtype=bool)
        n = self.adjacency.shape[0]
        if self.adjacency.shape != (n, n):
            raise ValueError("adjacency must be square")
        if not self.labels:
            self.labels = tuple(divmod(i, N_INTERFACES) for i in range(n))
        self._weights = self.adjacency.astype(float)
        csr = csr_matrix(self.adjacency)
        self._indptr = csr.indptr.astype(np.int64)
        self._indices = csr.indices.astype(np.int64)
        if self.damping is None:
            self.damping = component_damping(self.adjacency)

    @property
    def n_nodes(self) -> int:
        return self.adjacency.shape[0]

    def neighbors(self, node: int) -> np.ndarray:
        return np.flatnonzero(self.adjacency[node])

    def edges(self) -> list:
        i, j = np.nonzero(np.triu(self.adjacency, 1))
        return [(self.labels[a], self.labels[b]) for a, b in zip(i, j)]

    def contention(self, served: np.ndarray) -> np.ndarray:
        """Sum of neighbours' served airtime, per node."""
        return self._weights @ served


def component_damping(adjacency: np.ndarray, base: float = DAMPING) -> np.ndarray:
    """Per-node damping: ``base``, reduced on components whose spectral radius makes it unstable."""
    n = adjacency.shape[0]
    lam = np.full(n, base)
    if n == 0 or not adjacency.any():
        return lam
    n_comp, comp = connected_components(adjacency, directed=False)
    for c in range(n_comp):
        members = np.flatnonzero(comp == c)
        if members.size < 3:
            continue
        sub = adjacency[np.ix_(members, members)].astype(float)
        radius = float(np.max(np.abs(np.linalg.eigvalsh(sub))))
        lam[members] = min(base, _STABILITY / (1.0 + radius))
    return lam


def build_graph(scenario, params: LinkBudgetParams = LinkBudgetParams()) -> ContentionGraph:
    """AP-to-AP contention edges, one node per (AP, interface)."""
    n = len(scenario.aps) * N_INTERFACES
    adj = np.zeros((n, n), dtype=bool)
    aps = scenario.aps
    for i, a in enumerate(aps):
        for b in aps[i + 1:]:
            d = math.dist(a.position, b.position)
            for k, ca in enumerate(a.channels):
                for m, cb in enumerate(b.channels):
                    if not channels_overlap(ca, cb):
                        continue
                    # the edge is kept symmetric by accepting either direction
                    pl_ab = path_loss(cb.fc_ghz, d, params) if d > 0 else 0.0
                    pl_ba = path_loss(ca.fc_ghz, d, params) if d > 0 else 0.0
                    g = 2 * params.antenna_gain
                    if (rx_power(b.tx_power, pl_ab, g) >= params.cca_threshold
                            or rx_power(a.tx_power, pl_ba, g) >= params.cca_threshold):
                        u, v = node_index(a.id, k), node_index(b.id, m)
                        adj[u, v] = adj[v, u] = True
    labels = tuple((ap.id, k) for ap in aps for k in range(N_INTERFACES))
    return ContentionGraph(adj, labels)


@dataclass
class AirtimeSolution:
    served: np.ndarray
    converged: bool
    iterations: int
    residuals: list = field(default_factory=list)


def fair_share_map(graph: ContentionGraph, demands: np.ndarray, served: np.ndarray) -> np.ndarray:
    return np.minimum(demands, np.maximum(0.0, 1.0 - graph.contention(served)))


@numba.njit(cache=True)
def _damped_iteration(indptr, indices, demands, lam, tol, max_iter, residuals):
    n = demands.shape[0]
    served = np.minimum(demands, 1.0)
    step = np.empty(n)
    record = residuals.shape[0] > 0
    for it in range(1, max_iter + 1):
        delta = 0.0
        for a in range(n):
            busy = 0.0
            for p in range(indptr[a], indptr[a + 1]):
                busy += served[indices[p]]
            target = min(demands[a], max(0.0, 1.0 - busy))
            step[a] = lam[a] * (target - served[a])
            if abs(step[a]) > delta:
                delta = abs(step[a])
        # synchronous update: every node saw the previous iterate
        for a in range(n):
            served[a] += step[a]
        if record:
            residuals[it - 1] = delta
        if delta < tol:
            return served, True, it
    return served, False, max_iter


def solve_airtime(graph: ContentionGraph, demands, tol: float = TOLERANCE, max_iter: int = MAX_ITER,
                  damping=None, trace: bool = False) -> AirtimeSolution:
    """Damped fixed-point iteration for the served airtime of every node.

    ``damping`` defaults to the graph's per-node factors (0.5 unless the
    component is dense enough for 0.5 to oscillate). On hitting ``max_iter``
    the last iterate is returned with ``converged=False``.
    """
    demands = np.asarray(demands, dtype=float)
    if demands.shape != (graph.n_nodes,):
        raise ValueError(f"expected {graph.n_nodes} demands, got shape {demands.shape}")
    if np.any(demands < 0):
        raise ValueError("demands must be non-negative")
    if not graph.adjacency.any():
        return AirtimeSolution(np.minimum(demands, 1.0), True, 0, [])
    lam = graph.damping if damping is None else np.broadcast_to(np.asarray(damping, float), demands.shape)
    residuals = np.zeros(max_iter if trace else 0)
    served, converged, it = _damped_iteration(graph._indptr, graph._indices, demands,
                                              np.ascontiguousarray(lam, dtype=float), float(tol), int(max_iter),
                                              residuals)
    return AirtimeSolution(served, bool(converged), int(it), residuals[:it].tolist())


def occupancy(graph: ContentionGraph, served: np.ndarray) -> np.ndarray:
    return np.minimum(1.0, served + graph.contention(served))


def free_airtime(graph: ContentionGraph, served: np.ndarray, node: Optional[int] = None):
    """Free airtime ``max(0, 1 - occupancy)``, for one node or all of them."""
    rho = np.maximum(0.0, 1.0 - occupancy(graph, served))
    return rho if node is None else float(rho[node])


def service_ratio(demands: np.ndarray, served: np.ndarray) -> np.ndarray:
    """Fraction of requested airtime each node actually gets (0 where idle)."""
    ratio = np.zeros_like(served)
    busy = demands > 0
    ratio[busy] = served[busy] / demands[busy]
    return ratio


def per_flow_service(demand: float, served: float, sub_flows, per: float = 0.1) -> list:
    """Proportional share of one interface's served airtime among its sub-flows.

    ``sub_flows`` holds ``(required_airtime, rate)`` pairs; returns
    ``(served_airtime, throughput)`` pairs.
    """
    if demand <= 0:
        return [(0.0, 0.0) for _ in sub_flows]
    ratio = served / demand
    return [(tau * ratio, tau * ratio * rate * (1.0 - per)) for tau, rate in sub_flows]
