"""Exhaustive reference computations for desk-scale validation.

Everything here enumerates, uses exact rational arithmetic (scaled integers
or Fractions), and carries explicit size guards. These routines are the
ground truth the solver modules are tested against; they must stay
independent of the code paths they check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from . import _kernels
from .instance import TripInstance

__all__ = [
    "InstanceTooLargeError",
    "BruteForceResult",
    "brute_force_ip",
    "brute_min_cut_ratio",
    "brute_box_cut",
    "brute_bisection_width",
    "validate_cut",
]

_ENUM_CAP_IP = 2**24
_ENUM_CAP_CUT = 2**20


class InstanceTooLargeError(ValueError):
    """Enumeration would exceed the oracle's size guard."""


def _pruned_count_bound(cells: int, n_vals: int, budget: int) -> int:
    """Upper bound on the number of capacity-feasible assignments."""
    if n_vals <= 1:
        return 1
    total = 0
    for k in range(min(cells, budget) + 1):
        total += math.comb(cells, k) * (n_vals - 1) ** k
        if total > 2**62:
            return total
    return total

def _enumeration_guard(inst: TripInstance, cap: int) -> int:
    cells = inst.n_rows * inst.n_cols
    budget = math.floor(inst.delta_cap)
    raw = inst.n_values**cells
    pruned = _pruned_count_bound(cells, inst.n_values, budget)
    if min(raw, pruned) > cap:
        raise InstanceTooLargeError(
            f"instance too large for enumeration: bound {min(raw, pruned)} exceeds {cap}"
        )
    return budget


def _feasible_assignments(inst: TripInstance, cap: int) -> np.ndarray:
    """All integer controls in the value range within the step budget.

    Rows are value indices (0-based from xi_lo), one column per cell in
    row-major order.
    """
    budget = _enumeration_guard(inst, cap)
    prev_idx = [inst.prev[i][j] - inst.xi_lo for i, j in inst.cells()]
    cells = inst.n_rows * inst.n_cols
    impl = _kernels.backend_for(budget + 1)
    return impl.enumerate_feasible(cells, inst.n_values, prev_idx, budget, cap)


def _edge_index_pairs(inst: TripInstance):
    """Flat cell indices for vertical and horizontal edges."""
    m = inst.n_cols
    vert = [
        (i * m + j, (i + 1) * m + j)
        for i in range(inst.n_rows - 1)
        for j in range(inst.n_cols)
    ]
    horiz = [
        (i * m + j, i * m + j + 1)
        for i in range(inst.n_rows)
        for j in range(inst.n_cols - 1)
    ]
    return vert, horiz


def _scaled_cost(inst: TripInstance) -> tuple[int, list[int], int]:
    """Common denominator L with integer costs and alpha (exact)."""
    L = inst.alpha.denominator
    for row in inst.cost:
        for c in row:
            L = L * c.denominator // math.gcd(L, c.denominator)
    cost_int = [int(c * L) for row in inst.cost for c in row]
    alpha_int = int(inst.alpha * L)
    return L, cost_int, alpha_int


@dataclass(frozen=True)
class BruteForceResult:
    objective: Fraction
    optimal_steps: tuple[tuple[tuple[int, ...], ...], ...]

    @property
    def n_optimal(self) -> int:
        return len(self.optimal_steps)


def brute_force_ip(inst: TripInstance) -> BruteForceResult:
    """Exact optimum of the integer problem with the full tie set."""
    Y = _feasible_assignments(inst, _ENUM_CAP_IP)
    L, cost_int, alpha_int = _scaled_cost(inst)
    cells = inst.n_rows * inst.n_cols
    prev_flat = np.array([inst.prev[i][j] for i, j in inst.cells()], dtype=np.int64)

    # overflow check for the vectorized int64 path
    max_c = max((abs(c) for c in cost_int), default=0)
    span = inst.xi_hi - inst.xi_lo
    bound = cells * max_c * max(span, 1) + alpha_int * 2 * cells * max(span, 1)
    vert, horiz = _edge_index_pairs(inst)
    if bound < 2**62:
        Yv = Y.astype(np.int64) + inst.xi_lo
        D = Yv - prev_flat[None, :]
        obj = D @ np.array(cost_int, dtype=np.int64)
        for a, b in vert + horiz:
            obj += alpha_int * np.abs(Yv[:, a] - Yv[:, b])
        best = int(obj.min())
        rows = np.nonzero(obj == best)[0]
        steps = tuple(
            tuple(tuple(int(v) for v in D[r].reshape(inst.n_rows, inst.n_cols)[i]) for i in range(inst.n_rows))
            for r in rows
        )
        return BruteForceResult(objective=Fraction(best, L), optimal_steps=steps)

    # big-integer fallback, row by row
    best_val = None
    arg = []
    for r in range(Y.shape[0]):
        y = [int(v) + inst.xi_lo for v in Y[r]]
        val = sum(cost_int[k] * (y[k] - int(prev_flat[k])) for k in range(cells))
        val += alpha_int * sum(abs(y[a] - y[b]) for a, b in vert + horiz)
        if best_val is None or val < best_val:
            best_val = val
            arg = [y]
        elif val == best_val:
            arg.append(y)
    steps = tuple(
        tuple(
            tuple(y[i * inst.n_cols + j] - inst.prev[i][j] for j in range(inst.n_cols))
            for i in range(inst.n_rows)
        )
        for y in arg
    )
    return BruteForceResult(objective=Fraction(best_val, L), optimal_steps=steps)


def _component_edges(cells: frozenset) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    out = []
    for (i, j) in cells:
        if (i + 1, j) in cells:
            out.append(((i, j), (i + 1, j)))
        if (i, j + 1) in cells:
            out.append(((i, j), (i, j + 1)))
    return out


def brute_min_cut_ratio(component, delta_r) -> Fraction:
    """Exact minimum of (cut edges)/|U| over subsets U with 0 < |U| <= delta_r."""
    cells = frozenset((int(i), int(j)) for i, j in component)
    if len(cells) > 20:
        raise InstanceTooLargeError("component too large for subset enumeration")
    kmax = min(len(cells), math.floor(Fraction(delta_r)))
    if kmax < 1:
        raise ValueError("delta_r admits no nonempty subset")
    edges = _component_edges(cells)
    order = sorted(cells)
    best = None
    for k in range(1, kmax + 1):
        for sub in combinations(order, k):
            inside = set(sub)
            cut = sum(1 for a, b in edges if (a in inside) != (b in inside))
            ratio = Fraction(cut, k)
            if best is None or ratio < best:
                best = ratio
    return best


def brute_box_cut(K: int, n: int, m: int) -> int:
    """Exact minimum cut-edge count over all K-subsets of an n x m grid."""
    if n * m > 16:
        raise InstanceTooLargeError("grid too large for subset enumeration")
    if not (0 <= K <= n * m):
        raise ValueError("K out of range")
    if K == 0 or K == n * m:
        return 0
    idx = [(i, j) for i in range(n) for j in range(m)]
    edges = []
    for i in range(n):
        for j in range(m):
            if i + 1 < n:
                edges.append((i * m + j, (i + 1) * m + j))
            if j + 1 < m:
                edges.append((i * m + j, i * m + j + 1))
    best = None
    for sub in combinations(range(n * m), K):
        inside = frozenset(sub)
        cut = sum(1 for a, b in edges if (a in inside) != (b in inside))
        if best is None or cut < best:
            best = cut
    return best


def brute_bisection_width(nodes) -> int:
    """Exact minimum bisection width of a subgraph of the integer grid."""
    node_list = sorted(set((int(p), int(q)) for p, q in nodes))
    n = len(node_list)
    if n > 20:
        raise InstanceTooLargeError("graph too large for bisection enumeration")
    if n < 2:
        return 0
    cells = frozenset(node_list)
    edges = _component_edges(cells)
    half_hi = (n + 1) // 2
    half_lo = n - half_hi
    best = None
    for k in range(half_lo, half_hi + 1):
        if k == 0 or k == n:
            continue
        for sub in combinations(node_list, k):
            inside = set(sub)
            cut = sum(1 for a, b in edges if (a in inside) != (b in inside))
            if best is None or cut < best:
                best = cut
    return best


def validate_cut(inst: TripInstance, cut) -> bool:
    """True iff no feasible integer point (minimally completed) violates the cut.

    ``cut`` needs ``coeffs`` (mapping (role, i, j) -> rational over the
    delta/beta/gamma variables), ``rhs`` and ``sense`` ('>=').
    """
    if cut.sense != ">=":
        raise ValueError("only >= cuts are supported")
    Y = _feasible_assignments(inst, _ENUM_CAP_CUT).astype(np.int64) + inst.xi_lo
    m = inst.n_cols
    prev_flat = np.array([inst.prev[i][j] for i, j in inst.cells()], dtype=np.int64)

    Lc = 1
    for v in cut.coeffs.values():
        f = Fraction(v)
        Lc = Lc * f.denominator // math.gcd(Lc, f.denominator)
    rhs_f = Fraction(cut.rhs)
    Lc = Lc * rhs_f.denominator // math.gcd(Lc, rhs_f.denominator)

    margin = np.full(Y.shape[0], -int(rhs_f * Lc), dtype=np.int64)
    for (role, i, j), coef in cut.coeffs.items():
        ci = int(Fraction(coef) * Lc)
        if ci == 0:
            continue
        if role == "delta":
            term = np.abs(Y[:, i * m + j] - prev_flat[i * m + j])
        elif role == "beta":
            term = np.abs(Y[:, (i + 1) * m + j] - Y[:, i * m + j])
        elif role == "gamma":
            term = np.abs(Y[:, i * m + j + 1] - Y[:, i * m + j])
        else:
            raise ValueError(f"cut references unsupported variable role {role!r}")
        margin += ci * term
    return bool((margin >= 0).all())
