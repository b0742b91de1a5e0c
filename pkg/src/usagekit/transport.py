"""Exact solver for small dense transportation problems.

Implements the classic transportation simplex (northwest-corner start,
u/v potentials, cycle pivoting). Instances here are tiny (word-level
problems, rarely beyond 50x50), so an exact combinatorial solve is both
fast and oracle-testable; no entropic approximation is involved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation

_TOL = 1e-12
_MAX_PIVOTS = 10_000


@dataclass
class TransportProblem:
    """min <plan, cost> s.t. plan rows sum to source_weights, columns to
    sink_weights, plan >= 0. Both weight vectors are probability vectors."""

    source_weights: np.ndarray
    sink_weights: np.ndarray
    cost_matrix: np.ndarray

    def __post_init__(self):
        self.source_weights = np.asarray(self.source_weights, dtype=float)
        self.sink_weights = np.asarray(self.sink_weights, dtype=float)
        self.cost_matrix = np.asarray(self.cost_matrix, dtype=float)
        a, b, c = self.source_weights, self.sink_weights, self.cost_matrix
        if a.ndim != 1 or b.ndim != 1 or c.shape != (a.size, b.size):
            raise ContractViolation(
                f"cost matrix shape {c.shape} does not match weights ({a.size}, {b.size})"
            )
        if a.size == 0 or b.size == 0:
            raise ContractViolation("transport problem needs at least one source and one sink")
        if (a <= 0.0).any() or (b <= 0.0).any():
            raise ContractViolation("transport weights must be strictly positive")
        if abs(a.sum() - 1.0) > 1e-9 or abs(b.sum() - 1.0) > 1e-9:
            raise ContractViolation("transport weights must each sum to 1")
        if not np.isfinite(c).all() or (c < 0.0).any():
            raise ContractViolation("transport costs must be finite and non-negative")


def _northwest_corner(a: np.ndarray, b: np.ndarray):
    m, n = a.size, b.size
    plan = np.zeros((m, n))
    basis = []
    ra, rb = a.copy(), b.copy()
    i = j = 0
    while True:
        plan[i, j] = min(ra[i], rb[j])
        basis.append((i, j))
        if ra[i] <= rb[j]:
            rb[j] -= ra[i]
            ra[i] = 0.0
        else:
            ra[i] -= rb[j]
            rb[j] = 0.0
        if i == m - 1 and j == n - 1:
            break
        # move down when the row is exhausted, right otherwise; one index
        # per step yields exactly m + n - 1 basic cells
        if ra[i] == 0.0 and i < m - 1:
            i += 1
        elif j < n - 1:
            j += 1
        else:
            i += 1
    return plan, basis


def _potentials(basis, cost, m, n):
    u = np.full(m, np.nan)
    v = np.full(n, np.nan)
    u[0] = 0.0
    rows = [[] for _ in range(m)]
    cols = [[] for _ in range(n)]
    for (i, j) in basis:
        rows[i].append(j)
        cols[j].append(i)
    stack = [(True, 0)]
    while stack:
        is_row, k = stack.pop()
        if is_row:
            for j in rows[k]:
                if np.isnan(v[j]):
                    v[j] = cost[k, j] - u[k]
                    stack.append((False, j))
        else:
            for i in cols[k]:
                if np.isnan(u[i]):
                    u[i] = cost[i, k] - v[k]
                    stack.append((True, i))
    return u, v


def _find_cycle(basis, entering):
    # Prune leaves of the bipartite incidence graph until only the unique
    # cycle through the entering cell remains, then order it.
    cells = set(basis)
    cells.add(entering)
    while True:
        row_count: dict[int, int] = {}
        col_count: dict[int, int] = {}
        for (i, j) in cells:
            row_count[i] = row_count.get(i, 0) + 1
            col_count[j] = col_count.get(j, 0) + 1
        leaves = {
            cell
            for cell in cells
            if cell != entering and (row_count[cell[0]] == 1 or col_count[cell[1]] == 1)
        }
        if not leaves:
            break
        cells -= leaves
    ordered = [entering]
    used = {entering}
    along_row = True
    while len(ordered) < len(cells):
        ci, cj = ordered[-1]
        nxt = None
        for cell in sorted(cells):
            if cell in used:
                continue
            if along_row and cell[0] == ci:
                nxt = cell
                break
            if not along_row and cell[1] == cj:
                nxt = cell
                break
        if nxt is None:  # pragma: no cover - the cycle is always closed
            raise RuntimeError("transport basis lost its spanning-tree structure")
        ordered.append(nxt)
        used.add(nxt)
        along_row = not along_row
    return ordered


def solve_transport(problem: TransportProblem):
    """Solve to optimality; returns (plan, objective).

    The entering variable is the most negative reduced cost; after a long
    streak of degenerate pivots the rule switches to smallest-index (Bland)
    which rules out cycling.
    """
    a = problem.source_weights.copy()
    c = problem.cost_matrix
    m, n = c.shape
    # absorb the rounding gap between the two totals so the last northwest
    # step closes exactly
    b = problem.sink_weights * (a.sum() / problem.sink_weights.sum())

    plan, basis = _northwest_corner(a, b)
    bland = False
    degenerate_streak = 0
    for _ in range(_MAX_PIVOTS):
        u, v = _potentials(basis, c, m, n)
        if np.isnan(u).any() or np.isnan(v).any():  # pragma: no cover
            raise RuntimeError("transport basis lost its spanning-tree structure")
        reduced = c - u[:, None] - v[None, :]
        for (i, j) in basis:
            reduced[i, j] = np.inf
        if bland:
            candidates = np.argwhere(reduced < -_TOL)
            if candidates.size == 0:
                break
            entering = min(map(tuple, candidates))
        else:
            flat = int(np.argmin(reduced))
            entering = (flat // n, flat % n)
            if reduced[entering] >= -_TOL:
                break
        cycle = _find_cycle(basis, entering)
        givers = cycle[1::2]
        leaving = min(givers, key=lambda cell: (plan[cell], cell))
        theta = plan[leaving]
        for k, cell in enumerate(cycle):
            if k % 2 == 0:
                plan[cell] += theta
            else:
                plan[cell] -= theta
        plan[leaving] = 0.0
        basis.remove(leaving)
        basis.append(entering)
        if theta <= _TOL:
            degenerate_streak += 1
            if degenerate_streak > m * n:
                bland = True
        else:
            degenerate_streak = 0
    else:  # pragma: no cover - pivot bound is far beyond tiny instances
        raise RuntimeError("transportation simplex exceeded its pivot budget")
    return plan, float((plan * c).sum())
