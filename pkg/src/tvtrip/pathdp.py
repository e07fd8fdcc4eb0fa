"""Exact DP for one-dimensional lines and the half-frozen reduced problem.

A grid with every other row (or column) frozen decomposes into independent
free lines coupled only through the shared step budget. Serializing the
free lines into one sequence, suppressing the TV term across line breaks,
and adding per-cell penalties for jumps to frozen neighbors turns the
reduced problem into a single resource-constrained line problem, solved
exactly by DP over (position, value, used budget).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import _kernels
from .instance import TripInstance, as_fraction, as_matrix, is_feasible, objective_ip

__all__ = ["LineProblem", "solve_line", "solve_red_ip", "PATTERNS", "frozen_mask"]

PATTERNS = ("odd_cols", "even_cols", "odd_rows", "even_rows")


@dataclass(frozen=True)
class LineProblem:
    """A serialized line with per-edge TV weights and frozen-jump penalties.

    ``edge_weight[k]`` weighs the jump between cells ``k`` and ``k+1`` (zero
    across line breaks). ``penalty[k][v]`` is the additive cost of putting
    cell ``k`` at the value with index ``v`` (0-based from ``xi_lo``),
    typically the weighted jumps to frozen neighbors. The budget caps the
    total absolute step.
    """

    cost: tuple[Fraction, ...]
    prev: tuple[int, ...]
    edge_weight: tuple[Fraction, ...]
    penalty: tuple[tuple[Fraction, ...], ...]
    budget: int
    xi_lo: int
    xi_hi: int

    def __post_init__(self):
        n = len(self.cost)
        if len(self.prev) != n or len(self.penalty) != n:
            raise ValueError("line arrays disagree in length")
        if n and len(self.edge_weight) != n - 1:
            raise ValueError("need one edge weight per adjacent pair")
        if self.budget < 0:
            raise ValueError("budget must be nonnegative")
        if self.xi_lo > self.xi_hi:
            raise ValueError("empty value range")
        n_vals = self.xi_hi - self.xi_lo + 1
        for row in self.penalty:
            if len(row) != n_vals:
                raise ValueError("penalty table must cover every value")
            if any(p < 0 for p in row):
                raise ValueError("penalties must be nonnegative")

    @property
    def length(self) -> int:
        return len(self.cost)

    @property
    def n_vals(self) -> int:
        return self.xi_hi - self.xi_lo + 1


def solve_line(lp: LineProblem) -> tuple[tuple[int, ...], Fraction]:
    """Exact optimum of the line problem: (values per cell, objective).

    Values are the moved controls ``prev + d``. Ties prefer smaller steps,
    making the result deterministic.
    """
    if lp.length == 0:
        return (), Fraction(0)
    L = 1
    for f in lp.cost:
        L = L * f.denominator // math.gcd(L, f.denominator)
    for f in lp.edge_weight:
        L = L * f.denominator // math.gcd(L, f.denominator)
    for row in lp.penalty:
        for f in row:
            L = L * f.denominator // math.gcd(L, f.denominator)

    n_vals = lp.n_vals
    node_cost = []
    abs_step = []
    for k in range(lp.length):
        ck = lp.cost[k] * L
        row_cost = []
        row_abs = []
        for v in range(n_vals):
            val = lp.xi_lo + v
            d = val - lp.prev[k]
            row_cost.append(int(ck * d + lp.penalty[k][v] * L))
            row_abs.append(abs(d))
        node_cost.append(row_cost)
        abs_step.append(row_abs)
    edge_w = [int(w * L) for w in lp.edge_weight]

    span = lp.xi_hi - lp.xi_lo
    bound = sum(max(abs(c) for c in row) for row in node_cost)
    bound += sum(abs(w) for w in edge_w) * max(span, 1)
    impl = _kernels.backend_for(bound + 1)
    best, choices = impl.line_dp(lp.length, n_vals, node_cost, abs_step, edge_w, lp.budget)
    values = tuple(lp.xi_lo + v for v in choices)
    return values, Fraction(best, L)


def frozen_mask(pattern: str, n_rows: int, n_cols: int) -> list[list[bool]]:
    """Cells frozen by the pattern; parities refer to 1-based indices."""
    if pattern not in PATTERNS:
        raise ValueError(f"unknown pattern {pattern!r}")
    mask = [[False] * n_cols for _ in range(n_rows)]
    if pattern.endswith("cols"):
        want_odd = pattern.startswith("odd")
        for j in range(n_cols):
            if ((j + 1) % 2 == 1) == want_odd:
                for i in range(n_rows):
                    mask[i][j] = True
    else:
        want_odd = pattern.startswith("odd")
        for i in range(n_rows):
            if ((i + 1) % 2 == 1) == want_odd:
                for j in range(n_cols):
                    mask[i][j] = True
    return mask


def _free_lines(pattern: str, n_rows: int, n_cols: int, mask) -> list[list[tuple[int, int]]]:
    """Free cells grouped into serialized lines (whole rows or columns)."""
    lines = []
    if pattern.endswith("cols"):
        for j in range(n_cols):
            if not mask[0][j]:
                lines.append([(i, j) for i in range(n_rows)])
    else:
        for i in range(n_rows):
            if not mask[i][0]:
                lines.append([(i, j) for j in range(n_cols)])
    return lines


def solve_red_ip(inst: TripInstance, d_tilde, pattern: str):
    """Best step agreeing with ``d_tilde`` on the pattern's frozen cells.

    The free cells form whole lines; one DP over their serialization with
    the leftover budget yields the exact optimum of the reduced problem.
    The result never has a worse objective than ``d_tilde``.
    """
    dt = as_matrix(d_tilde, inst.n_rows, inst.n_cols)
    rep = is_feasible(inst, dt)
    if not rep.feasible:
        raise ValueError("warm-start step is infeasible")
    dt_int = tuple(tuple(int(v) for v in row) for row in dt)

    mask = frozen_mask(pattern, inst.n_rows, inst.n_cols)
    lines = _free_lines(pattern, inst.n_rows, inst.n_cols, mask)
    if not lines:
        return dt_int

    moved = [
        [inst.prev[i][j] + dt_int[i][j] for j in range(inst.n_cols)]
        for i in range(inst.n_rows)
    ]
    frozen_used = sum(
        abs(dt_int[i][j])
        for i in range(inst.n_rows)
        for j in range(inst.n_cols)
        if mask[i][j]
    )
    budget = math.floor(inst.delta_cap) - frozen_used
    n_vals = inst.n_values

    cost = []
    prev = []
    edge_w = []
    penalty = []
    order = []
    for line in lines:
        for pos, (i, j) in enumerate(line):
            order.append((i, j))
            cost.append(inst.cost[i][j])
            prev.append(inst.prev[i][j])
            pens = []
            for v in range(n_vals):
                val = inst.xi_lo + v
                p = Fraction(0)
                for a, b in ((i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)):
                    if 0 <= a < inst.n_rows and 0 <= b < inst.n_cols and mask[a][b]:
                        p += inst.alpha * abs(val - moved[a][b])
                pens.append(p)
            penalty.append(tuple(pens))
            if pos + 1 < len(line):
                edge_w.append(inst.alpha)
            elif len(order) < sum(len(li) for li in lines):
                edge_w.append(Fraction(0))  # line break

    line_problem = LineProblem(
        cost=tuple(cost), prev=tuple(prev), edge_weight=tuple(edge_w),
        penalty=tuple(penalty), budget=budget, xi_lo=inst.xi_lo, xi_hi=inst.xi_hi,
    )
    values, _ = solve_line(line_problem)

    new_d = [list(row) for row in dt_int]
    for (i, j), val in zip(order, values):
        new_d[i][j] = val - inst.prev[i][j]
    result = tuple(tuple(row) for row in new_d)
    if objective_ip(inst, result) > objective_ip(inst, dt_int):
        raise AssertionError("reduced solve worsened the objective")
    return result
