"""Exact earth mover's distance between two uniform word distributions.

The balanced transportation problem is solved with the transportation
simplex: a northwest-corner start followed by MODI (u-v potential) pivots
along stepping-stone cycles. Supplies and demands are scaled to integers
(each of the m rows ships n units, each of the n columns receives m) so the
flows stay exact and degenerate pivots are handled without tolerances.
"""

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

_RC_TOL = 1e-12


@dataclass(frozen=True)
class TransportPlan:
    flow: np.ndarray
    objective: float


def _northwest_corner(supply, demand):
    m, n = len(supply), len(demand)
    s, d = list(supply), list(demand)
    x = [[0] * n for _ in range(m)]
    basis = []
    i = j = 0
    while i < m and j < n:
        q = min(s[i], d[j])
        x[i][j] = q
        basis.append((i, j))
        s[i] -= q
        d[j] -= q
        if s[i] == 0 and i < m - 1:
            i += 1
        else:
            j += 1
    return x, basis


def _potentials(cost, basis, m, n):
    rows_adj = [[] for _ in range(m)]
    cols_adj = [[] for _ in range(n)]
    for i, j in basis:
        rows_adj[i].append(j)
        cols_adj[j].append(i)
    u = [None] * m
    v = [None] * n
    u[0] = 0.0
    queue = deque([("r", 0)])
    while queue:
        kind, k = queue.popleft()
        if kind == "r":
            for j in rows_adj[k]:
                if v[j] is None:
                    v[j] = cost[k][j] - u[k]
                    queue.append(("c", j))
        else:
            for i in cols_adj[k]:
                if u[i] is None:
                    u[i] = cost[i][k] - v[k]
                    queue.append(("r", i))
    return u, v, rows_adj, cols_adj


def _cycle(rows_adj, cols_adj, i0, j0):
    """Cells of the basis-tree path from column j0 back to row i0."""
    # BFS over the bipartite tree starting at column j0
    parent = {("c", j0): None}
    queue = deque([("c", j0)])
    target = ("r", i0)
    while queue:
        node = queue.popleft()
        if node == target:
            break
        kind, k = node
        nbrs = [("r", i) for i in cols_adj[k]] if kind == "c" else [("c", j) for j in rows_adj[k]]
        for nb in nbrs:
            if nb not in parent:
                parent[nb] = node
                queue.append(nb)
    path = []
    node = target
    while node is not None:
        path.append(node)
        node = parent[node]
    path.reverse()  # c_j0, r_a, c_b, ..., r_i0
    cells = []
    for a, b in zip(path, path[1:]):
        if a[0] == "c":
            cells.append((b[1], a[1]))
        else:
            cells.append((a[1], b[1]))
    return cells


def transportation_simplex(cost, supply, demand, max_iter=None):
    """Minimise sum(cost * x) subject to integer row supplies and column demands.

    Returns the integer flow as a list of lists. Dantzig pricing is used
    first; if it has not converged after ``max_iter`` pivots the solver
    switches to Bland's rule, which cannot cycle.
    """
    m, n = len(supply), len(demand)
    if sum(supply) != sum(demand):
        raise ValueError("transportation problem is unbalanced")
    x, basis = _northwest_corner(supply, demand)
    in_basis = set(basis)
    budget = max_iter if max_iter is not None else 20 * (m + n) * (m + n)
    pivots = 0
    while True:
        u, v, rows_adj, cols_adj = _potentials(cost, basis, m, n)
        bland = pivots >= budget
        enter = None
        best = -_RC_TOL
        for i in range(m):
            for j in range(n):
                if (i, j) in in_basis:
                    continue
                rc = cost[i][j] - u[i] - v[j]
                if rc < best:
                    enter, best = (i, j), rc
                    if bland:
                        break
            if bland and enter is not None:
                break
        if enter is None:
            return x
        i0, j0 = enter
        path = _cycle(rows_adj, cols_adj, i0, j0)
        minus = path[0::2]
        plus = path[1::2]
        theta = min(x[i][j] for i, j in minus)
        if bland:
            leave = min(c for c in minus if x[c[0]][c[1]] == theta)
        else:
            leave = next(c for c in minus if x[c[0]][c[1]] == theta)
        for i, j in minus:
            x[i][j] -= theta
        for i, j in plus:
            x[i][j] += theta
        x[i0][j0] += theta
        basis[basis.index(leave)] = enter
        in_basis.discard(leave)
        in_basis.add(enter)
        pivots += 1
        if pivots > 50 * budget + 1000:
            raise RuntimeError("transportation simplex failed to converge")


def emd(distances) -> TransportPlan:
    """EMD between uniform distributions on the rows and columns of ``distances``.

    Row sums of the returned flow are 1/rows and column sums 1/cols.
    """
    d = np.asarray(distances, dtype=float)
    if d.ndim != 2 or d.shape[0] == 0 or d.shape[1] == 0:
        raise ValueError("distance matrix must be a non-empty 2-D array")
    if not np.all(np.isfinite(d)):
        raise ValueError("distance matrix has non-finite entries")
    m, n = d.shape
    if m == 1 or n == 1:
        flow = np.full((m, n), 1.0 / (m * n))
        return TransportPlan(flow, math.fsum((flow * d).ravel()))
    cost = d.tolist()
    x = transportation_simplex(cost, [n] * m, [m] * n)
    total = m * n
    flow = np.array(x, dtype=float) / total
    objective = math.fsum(x[i][j] * cost[i][j] for i in range(m) for j in range(n) if x[i][j]) / total
    return TransportPlan(flow, objective)
