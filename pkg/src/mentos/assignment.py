"""Hungarian algorithm for rectangular cost matrices with forbidden cells.

The core is the O(n^3) shortest-augmenting-path variant with row/column
potentials. Among optimal matchings the lexicographically smallest
(row, col) sequence is returned; it is found by walking rows in order over
the tight-edge graph defined by the optimal potentials.
"""
from __future__ import annotations

import math

import numpy as np


def _hungarian_square(cost: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (row_to_col, u, v) for a square matrix of non-negative costs."""
    n = cost.shape[0]
    inf = math.inf
    u = [0.0] * (n + 1)
    v = [0.0] * (n + 1)
    p = [0] * (n + 1)  # p[j]: row (1-based) matched to column j
    way = [0] * (n + 1)
    c = cost.tolist()
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [inf] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            row = c[i0 - 1]
            ui0 = u[i0]
            delta = inf
            j1 = 0
            for j in range(1, n + 1):
                if not used[j]:
                    cur = row[j - 1] - ui0 - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    row_to_col = np.empty(n, dtype=int)
    for j in range(1, n + 1):
        row_to_col[p[j] - 1] = j - 1
    return row_to_col, np.array(u[1:]), np.array(v[1:])


def _lex_smallest(tight: np.ndarray, row_to_col: np.ndarray) -> np.ndarray:
    """Lexicographically smallest perfect matching within the tight graph."""
    n = tight.shape[0]
    r2c = row_to_col.copy()
    c2r = np.empty(n, dtype=int)
    c2r[r2c] = np.arange(n)
    adj = [np.flatnonzero(tight[i]).tolist() for i in range(n)]

    for i in range(n):
        for j in adj[i]:
            if j == r2c[i]:
                break
            if c2r[j] < i:
                continue
            # Can the row holding j move elsewhere so that i takes j? Search an
            # alternating path from that row ending at i's current column.
            target = r2c[i]
            start = c2r[j]
            parent = {start: None}
            via = {}
            stack = [start]
            found = None
            while stack and found is None:
                r = stack.pop()
                for col in adj[r]:
                    if col == j:
                        continue
                    if col == target:
                        via[r] = col
                        found = r
                        break
                    nr = c2r[col]
                    if nr <= i or nr in parent:
                        continue
                    parent[nr] = r
                    via[nr] = col
                    stack.append(nr)
            if found is None:
                continue
            # Shift columns back along the path: each row takes the column
            # that led to it being visited.
            r = found
            col = via[r]
            while r is not None:
                prev_col = r2c[r]
                r2c[r] = col
                c2r[col] = r
                col = prev_col
                r = parent[r]
            r2c[i] = j
            c2r[j] = i
            break
    return r2c


def solve_assignment(costs, forbidden=None) -> list[tuple[int, int]]:
    """Minimum-cost matching of size min(rows, cols) over allowed cells.

    ``forbidden`` is an optional boolean mask of the same shape. When the
    forbidden cells rule out a full matching, the largest matching that
    exists is returned (minimum cost among those). Pairs are sorted by row.
    """
    c = np.asarray(costs, dtype=float)
    if c.ndim != 2 or c.shape[0] == 0 or c.shape[1] == 0:
        raise ValueError(f"cost matrix must be non-empty 2-D, got shape {c.shape}")
    rows, cols = c.shape
    allowed = np.ones_like(c, dtype=bool)
    if forbidden is not None:
        allowed &= ~np.asarray(forbidden, dtype=bool)
    if not allowed.any():
        return []
    if not np.all(np.isfinite(c[allowed])):
        raise ValueError("allowed costs must be finite")

    lo = c[allowed].min()
    span = c[allowed].max() - lo
    k = min(rows, cols)
    sentinel = span * k + 2.0
    n = max(rows, cols)
    square = np.full((n, n), sentinel)
    square[:rows, :cols] = np.where(allowed, c - lo, sentinel)

    row_to_col, u, v = _hungarian_square(square)
    reduced = square - u[:, None] - v[None, :]
    eps = 1e-9 * max(1.0, sentinel)
    row_to_col = _lex_smallest(reduced <= eps, row_to_col)

    return [
        (i, int(j))
        for i, j in enumerate(row_to_col)
        if i < rows and j < cols and allowed[i, j]
    ]


def assignment_cost(costs, pairs) -> float:
    c = np.asarray(costs, dtype=float)
    return math.fsum(c[i, j] for i, j in pairs)
