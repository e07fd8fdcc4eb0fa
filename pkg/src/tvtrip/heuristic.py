"""Primal improvement by cycling the four freeze patterns.

Each pass freezes alternating columns or rows and re-optimizes the rest
exactly; the objective never increases. The loop stops after a full cycle
without strict improvement, which happens after finitely many cycles since
every strict improvement moves to a new feasible point.
"""

from __future__ import annotations

import math

from .instance import TripInstance, as_matrix, is_feasible, objective_ip
from .pathdp import PATTERNS, solve_red_ip

__all__ = ["improve"]


def improve(inst: TripInstance, d0):
    """Pattern-cycling descent from a feasible step; returns a fixed point."""
    d = as_matrix(d0, inst.n_rows, inst.n_cols)
    if not is_feasible(inst, d).feasible:
        raise ValueError("warm-start step is infeasible")
    current = tuple(tuple(int(v) for v in row) for row in d)
    current_obj = objective_ip(inst, current)

    cells = inst.n_rows * inst.n_cols
    guard = cells * inst.n_values * max(1, math.ceil(inst.delta_cap))
    for _ in range(guard):
        improved = False
        for pattern in PATTERNS:
            candidate = solve_red_ip(inst, current, pattern)
            candidate_obj = objective_ip(inst, candidate)
            if candidate_obj < current_obj:
                current, current_obj = candidate, candidate_obj
                improved = True
        if not improved:
            return current
    raise RuntimeError("improvement loop exceeded its finiteness guard")
