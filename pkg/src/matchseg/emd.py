"""Exact earth mover's distance between weighted feature supports.

The solver is a transportation simplex: northwest-corner start, dual
(u, v) pricing, stepping-stone pivots. Entering arcs follow Dantzig's
rule (most negative reduced cost) and fall back to Bland's smallest-
index rule if an unusual degenerate instance stalls, which guarantees
termination. Exact for supports up to 512 x 512; the engine keeps
supports below that via seeded subsampling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FeatureMap, sorted_patches
from .errors import EmptySupport, InfeasibleWeights
from .rng import Xoshiro256StarStar
from .similarity import cosine_sim_matrix

WEIGHT_SUM_TOL = 1e-9
MAX_SUPPORT = 512
_PRICE_TOL = 1e-10


@dataclass(frozen=True)
class TransportProblem:
    """Supply/demand weights (each summing to 1) and a cost matrix in [0, 1]."""

    supply: np.ndarray
    demand: np.ndarray
    cost: np.ndarray

    def __post_init__(self):
        supply = np.asarray(self.supply, dtype=np.float64)
        demand = np.asarray(self.demand, dtype=np.float64)
        cost = np.asarray(self.cost, dtype=np.float64)
        if supply.ndim != 1 or demand.ndim != 1:
            raise ValueError("supply and demand must be 1-D")
        if cost.shape != (supply.size, demand.size):
            raise ValueError(
                f"cost shape {cost.shape} does not match ({supply.size}, {demand.size})"
            )
        if supply.size < 1 or demand.size < 1:
            raise EmptySupport("transport problem needs nonempty supports")
        if (supply < 0).any() or (demand < 0).any():
            raise InfeasibleWeights("negative weight")
        if abs(float(supply.sum()) - 1.0) > WEIGHT_SUM_TOL:
            raise InfeasibleWeights(f"supply sums to {supply.sum()!r}, expected 1")
        if abs(float(demand.sum()) - 1.0) > WEIGHT_SUM_TOL:
            raise InfeasibleWeights(f"demand sums to {demand.sum()!r}, expected 1")
        if cost.min() < -1e-9 or cost.max() > 1.0 + 1e-9:
            raise ValueError("cost entries must lie in [0, 1]")
        if max(supply.size, demand.size) > MAX_SUPPORT:
            raise ValueError(f"support larger than {MAX_SUPPORT}; subsample first")
        for name, arr in (("supply", supply), ("demand", demand), ("cost", cost)):
            arr = np.ascontiguousarray(arr)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def _northwest_corner(supply: np.ndarray, demand: np.ndarray):
    """Initial basis of exactly n + m - 1 cells (degenerate zeros allowed)."""
    n, m = supply.size, demand.size
    a = supply.copy()
    b = demand.copy()
    cells: list[tuple[int, int]] = []
    flows: list[float] = []
    i = j = 0
    while True:
        f = min(a[i], b[j])
        cells.append((i, j))
        flows.append(f)
        a[i] -= f
        b[j] -= f
        if i == n - 1 and j == m - 1:
            break
        if i < n - 1 and (a[i] <= 0.0 or j == m - 1):
            i += 1
        else:
            j += 1
    return cells, flows


def _compute_duals(cells, cost, n, m):
    """Solve u_i + v_j = c_ij over the basis tree (u_0 anchored at 0)."""
    adj: list[list[tuple[int, int, int]]] = [[] for _ in range(n + m)]
    for (i, j) in cells:
        adj[i].append((n + j, i, j))
        adj[n + j].append((i, i, j))
    u = np.zeros(n)
    v = np.zeros(m)
    seen = [False] * (n + m)
    stack = [0]
    seen[0] = True
    while stack:
        node = stack.pop()
        for other, ci, cj in adj[node]:
            if seen[other]:
                continue
            seen[other] = True
            if other >= n:
                v[other - n] = cost[ci, cj] - u[ci]
            else:
                u[other] = cost[ci, cj] - v[cj]
            stack.append(other)
    return u, v, adj


def _cycle_path(adj, start_row: int, end_col_node: int, n: int):
    """Tree path from a row node to a column node as a list of basis cells."""
    parent = {start_row: (None, None)}
    stack = [start_row]
    while stack:
        node = stack.pop()
        if node == end_col_node:
            break
        for other, ci, cj in adj[node]:
            if other not in parent:
                parent[other] = (node, (ci, cj))
                stack.append(other)
    path = []
    node = end_col_node
    while parent[node][0] is not None:
        node, cell = parent[node]
        path.append(cell)
    path.reverse()
    return path


def solve_transport(supply: np.ndarray, demand: np.ndarray, cost: np.ndarray,
                    max_pivots: int | None = None) -> tuple[float, dict]:
    """Minimize <flow, cost> subject to row/column marginals.

    Returns (optimal cost, {cell: flow}). Supply and demand must balance;
    a sub-1e-9 imbalance is absorbed by rescaling the demand side.
    """
    supply = np.asarray(supply, dtype=np.float64)
    demand = np.asarray(demand, dtype=np.float64)
    cost = np.asarray(cost, dtype=np.float64)
    n, m = supply.size, demand.size
    total = float(supply.sum())
    demand = demand * (total / float(demand.sum()))

    cells, flows = _northwest_corner(supply, demand)
    pos = {cell: k for k, cell in enumerate(cells)}
    if max_pivots is None:
        max_pivots = 2000 + 40 * (n + m) * max(n, m)
    dantzig_limit = max_pivots // 2

    pivots = 0
    while True:
        u, v, adj = _compute_duals(cells, cost, n, m)
        reduced = cost - u[:, None] - v[None, :]
        for (i, j) in cells:
            reduced[i, j] = 0.0

        if pivots < dantzig_limit:
            flat = int(np.argmin(reduced))
            ei, ej = divmod(flat, m)
            if reduced[ei, ej] >= -_PRICE_TOL:
                break
        else:
            # Bland fallback: smallest improving index, cycle-free by construction
            candidates = np.flatnonzero(reduced.reshape(-1) < -_PRICE_TOL)
            if candidates.size == 0:
                break
            ei, ej = divmod(int(candidates[0]), m)

        path = _cycle_path(adj, ei, n + ej, n)
        minus_idx = [pos[c] for c in path[0::2]]  # cells losing flow on the cycle
        delta = min(flows[k] for k in minus_idx)
        leave_pos = min(
            (k for k in minus_idx if flows[k] <= delta),
            key=lambda k: cells[k],
        )

        sign = -1.0
        for cell in path:
            flows[pos[cell]] += sign * delta
            sign = -sign
        del pos[cells[leave_pos]]
        cells[leave_pos] = (ei, ej)
        flows[leave_pos] = delta
        pos[(ei, ej)] = leave_pos

        pivots += 1
        if pivots >= max_pivots:
            raise RuntimeError(f"transport simplex did not converge in {max_pivots} pivots")

    value = float(sum(f * cost[i, j] for (i, j), f in zip(cells, flows)))
    plan = {cell: f for cell, f in zip(cells, flows) if f > 0.0}
    return value, plan


def emd(problem: TransportProblem) -> float:
    """Optimal transport cost of the problem (within 1e-6 of the LP optimum)."""
    value, _ = solve_transport(problem.supply, problem.demand, problem.cost)
    return value


def _subsample(points, cap: int, rng: Xoshiro256StarStar):
    if len(points) <= cap:
        return points
    return sorted_patches(rng.sample(points, cap))


def proposal_emd(
    ref: FeatureMap,
    target: FeatureMap,
    ref_patches,
    prop_patches,
    cap: int = 256,
    seed: int = 0,
) -> float:
    """EMD between the features inside the reference mask and inside a
    proposal, uniform weights, cost = (1 - cosine) / 2.

    Sets larger than cap are subsampled uniformly with the given seed.
    """
    ref_pts = sorted_patches(ref_patches)
    prop_pts = sorted_patches(prop_patches)
    if not ref_pts or not prop_pts:
        raise EmptySupport("both patch sets must be nonempty")
    rng = Xoshiro256StarStar(seed)
    ref_pts = _subsample(ref_pts, cap, rng)
    prop_pts = _subsample(prop_pts, cap, rng)

    sims = cosine_sim_matrix(ref.features_at(ref_pts), target.features_at(prop_pts))
    cost = 0.5 * (1.0 - sims.values)
    problem = TransportProblem(
        supply=np.full(len(ref_pts), 1.0 / len(ref_pts)),
        demand=np.full(len(prop_pts), 1.0 / len(prop_pts)),
        cost=cost,
    )
    return emd(problem)
