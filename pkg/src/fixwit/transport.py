"""Exact minimum-cost transportation (optimal coupling of two distributions).

Transportation simplex over ``fractions.Fraction`` with Bland's rule
(first negative reduced cost enters, lexicographically least eligible cell
leaves), which guarantees termination also under degeneracy.  Returns the
optimal value, an optimal coupling, and the dual potentials of the final
basis; the caller can use the potentials to build optimal "price functions".
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import IntegrityError, StructuralError

ZERO = Fraction(0)


@dataclass(frozen=True)
class TransportResult:
    value: Fraction
    coupling: dict[tuple[int, int], Fraction]
    row_duals: tuple[Fraction, ...]
    col_duals: tuple[Fraction, ...]


def transport(
    cost: Sequence[Sequence[Fraction]],
    supply: Sequence[Fraction],
    demand: Sequence[Fraction],
    max_pivots: int = 100_000,
) -> TransportResult:
    m, n = len(supply), len(demand)
    if m == 0 or n == 0:
        raise StructuralError("transport requires nonempty supply and demand")
    if any(s <= 0 for s in supply) or any(d <= 0 for d in demand):
        raise StructuralError("supplies and demands must be strictly positive (trim zeros first)")
    if sum(supply) != sum(demand):
        raise StructuralError("unbalanced transportation problem")

    # initial basic feasible solution: northwest corner, m+n-1 basic cells
    alloc: dict[tuple[int, int], Fraction] = {}
    rem_s = list(supply)
    rem_d = list(demand)
    i = j = 0
    while True:
        t = min(rem_s[i], rem_d[j])
        alloc[(i, j)] = t
        rem_s[i] -= t
        rem_d[j] -= t
        if i == m - 1 and j == n - 1:
            break
        if rem_s[i] == 0 and i < m - 1:
            i += 1
        else:
            j += 1

    def duals() -> tuple[list[Fraction], list[Fraction]]:
        u: list[Fraction | None] = [None] * m
        v: list[Fraction | None] = [None] * n
        u[0] = ZERO
        # propagate along the basis tree
        pending = set(alloc)
        changed = True
        while pending and changed:
            changed = False
            for (a, b) in list(pending):
                if u[a] is not None and v[b] is None:
                    v[b] = cost[a][b] - u[a]
                elif v[b] is not None and u[a] is None:
                    u[a] = cost[a][b] - v[b]
                elif u[a] is None and v[b] is None:
                    continue
                pending.discard((a, b))
                changed = True
        if pending or any(x is None for x in u) or any(x is None for x in v):
            raise IntegrityError("basis is not a spanning tree")
        return u, v  # type: ignore[return-value]

    def cycle_for(entering: tuple[int, int]) -> list[tuple[int, int]]:
        # path between the endpoints of the entering cell through the basis tree
        start = ("r", entering[0])
        goal = ("c", entering[1])
        adj: dict[tuple, list[tuple]] = {}
        for (a, b) in alloc:
            adj.setdefault(("r", a), []).append(("c", b))
            adj.setdefault(("c", b), []).append(("r", a))
        parent: dict[tuple, tuple | None] = {start: None}
        queue = [start]
        while queue:
            node = queue.pop(0)
            if node == goal:
                break
            for nxt in adj.get(node, []):
                if nxt not in parent:
                    parent[nxt] = node
                    queue.append(nxt)
        if goal not in parent:
            raise IntegrityError("entering cell endpoints are disconnected in the basis")
        nodes = [goal]
        while parent[nodes[-1]] is not None:
            nodes.append(parent[nodes[-1]])  # type: ignore[arg-type]
        nodes.reverse()  # start .. goal
        edges = []
        for a, b in zip(nodes, nodes[1:]):
            cell = (a[1], b[1]) if a[0] == "r" else (b[1], a[1])
            edges.append(cell)
        edges.reverse()  # walk from goal back to start, closing the cycle
        return [entering] + edges

    pivots = 0
    while True:
        u, v = duals()
        entering = None
        for a in range(m):
            if entering is not None:
                break
            for b in range(n):
                if (a, b) not in alloc and cost[a][b] - u[a] - v[b] < 0:
                    entering = (a, b)
                    break
        if entering is None:
            break
        cycle = cycle_for(entering)
        minus = cycle[1::2]
        theta = min(alloc[c] for c in minus)
        leaving = min(c for c in minus if alloc[c] == theta)
        for idx, cell in enumerate(cycle):
            delta = theta if idx % 2 == 0 else -theta
            alloc[cell] = alloc.get(cell, ZERO) + delta
        del alloc[leaving]
        pivots += 1
        if pivots > max_pivots:
            raise IntegrityError("transportation simplex exceeded its pivot budget")

    u, v = duals()
    coupling = {cell: q for cell, q in alloc.items() if q > 0}
    value = sum((q * cost[a][b] for (a, b), q in coupling.items()), ZERO)

    # re-check the marginals of the certificate coupling
    for a in range(m):
        row = sum((q for (x, _), q in coupling.items() if x == a), ZERO)
        if row != supply[a]:
            raise IntegrityError(f"coupling row {a} sums to {row}, expected {supply[a]}")
    for b in range(n):
        col = sum((q for (_, y), q in coupling.items() if y == b), ZERO)
        if col != demand[b]:
            raise IntegrityError(f"coupling column {b} sums to {col}, expected {demand[b]}")

    return TransportResult(value, coupling, tuple(u), tuple(v))
