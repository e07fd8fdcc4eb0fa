"""LP relaxation: model builder, bounded-variable revised simplex, and
fractional-structure analysis of vertex solutions.

The solver is a dense two-phase revised simplex over bounded variables.
It always returns a basic solution, so optimal points are vertices of the
feasible polyhedron; the polyhedral structure results the cut generators
rely on apply to exactly these points. Dantzig pricing with a Bland
fallback after a degeneracy streak keeps it cycle-free.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .instance import TripInstance

__all__ = [
    "LinearProgram",
    "LpSolution",
    "FractionalAnalysis",
    "build_lp",
    "solve_lp",
    "extract_components",
    "lp_to_text",
]

ROLE_D = "d"
ROLE_DELTA = "delta"
ROLE_BETA = "beta"
ROLE_GAMMA = "gamma"

_NB_LOWER = 0
_NB_UPPER = 1
_BASIC = 2


@dataclass(frozen=True)
class Variable:
    role: str
    i: int
    j: int
    lower: float
    upper: float
    objective: float


@dataclass(frozen=True)
class Row:
    coeffs: tuple[tuple[int, float], ...]  # (variable index, coefficient)
    rhs: float
    label: str


@dataclass(frozen=True)
class LinearProgram:
    """Immutable LP in `min c'x  s.t.  Ax <= b, lo <= x <= hi` form."""

    n_rows_grid: int
    n_cols_grid: int
    variables: tuple[Variable, ...]
    rows: tuple[Row, ...]
    index: dict = field(hash=False, compare=False, default_factory=dict)

    @property
    def n_vars(self) -> int:
        return len(self.variables)


def _var_key(role: str, i: int, j: int) -> tuple:
    return (role, i, j)


def build_lp(inst: TripInstance, extra_rows: Iterable = (), d_bounds=None) -> LinearProgram:
    """Model the relaxation over the step polyhedron plus extra constraints.

    ``extra_rows`` accepts cut-like objects (``coeffs`` mapping
    ``(role, i, j)`` to a coefficient, ``sense`` and ``rhs``).  ``d_bounds``
    optionally tightens the bounds of individual step variables (branching);
    the defining rows themselves always encode the original value range.
    """
    n, m = inst.n_rows, inst.n_cols
    x = inst.prev
    variables: list[Variable] = []
    index: dict[tuple, int] = {}

    def add_var(role, i, j, lower, upper, obj):
        index[_var_key(role, i, j)] = len(variables)
        variables.append(Variable(role, i, j, lower, upper, obj))

    for i in range(n):
        for j in range(m):
            lo = float(inst.xi_lo - x[i][j])
            hi = float(inst.xi_hi - x[i][j])
            if d_bounds is not None:
                blo, bhi = d_bounds[i][j]
                lo, hi = max(lo, float(blo)), min(hi, float(bhi))
            if lo > hi:
                raise ValueError(f"empty step bounds at cell ({i}, {j})")
            add_var(ROLE_D, i, j, lo, hi, float(inst.cost[i][j]))
    for i in range(n):
        for j in range(m):
            add_var(ROLE_DELTA, i, j, 0.0, np.inf, 0.0)
    alpha = float(inst.alpha)
    for i in range(n - 1):
        for j in range(m):
            add_var(ROLE_BETA, i, j, 0.0, np.inf, alpha)
    for i in range(n):
        for j in range(m - 1):
            add_var(ROLE_GAMMA, i, j, 0.0, np.inf, alpha)

    rows: list[Row] = []

    def d_idx(i, j):
        return index[(ROLE_D, i, j)]

    # value-range rows (the branching bounds live on the variables instead)
    for i in range(n):
        for j in range(m):
            lo0 = float(inst.xi_lo - x[i][j])
            hi0 = float(inst.xi_hi - x[i][j])
            rows.append(Row(((d_idx(i, j), -1.0),), -lo0, f"range_lo[{i},{j}]"))
            rows.append(Row(((d_idx(i, j), 1.0),), hi0, f"range_hi[{i},{j}]"))
    # vertical jump rows
    for i in range(n - 1):
        for j in range(m):
            b = index[(ROLE_BETA, i, j)]
            dx = float(x[i][j] - x[i + 1][j])
            rows.append(Row(((d_idx(i + 1, j), 1.0), (d_idx(i, j), -1.0), (b, -1.0)), dx, f"beta_pos[{i},{j}]"))
            rows.append(Row(((d_idx(i + 1, j), -1.0), (d_idx(i, j), 1.0), (b, -1.0)), -dx, f"beta_neg[{i},{j}]"))
    # horizontal jump rows
    for i in range(n):
        for j in range(m - 1):
            g = index[(ROLE_GAMMA, i, j)]
            dx = float(x[i][j] - x[i][j + 1])
            rows.append(Row(((d_idx(i, j + 1), 1.0), (d_idx(i, j), -1.0), (g, -1.0)), dx, f"gamma_pos[{i},{j}]"))
            rows.append(Row(((d_idx(i, j + 1), -1.0), (d_idx(i, j), 1.0), (g, -1.0)), -dx, f"gamma_neg[{i},{j}]"))
    # |d| rows
    for i in range(n):
        for j in range(m):
            s = index[(ROLE_DELTA, i, j)]
            rows.append(Row(((d_idx(i, j), 1.0), (s, -1.0)), 0.0, f"abs_pos[{i},{j}]"))
            rows.append(Row(((d_idx(i, j), -1.0), (s, -1.0)), 0.0, f"abs_neg[{i},{j}]"))
    # shared step budget
    cap = tuple((index[(ROLE_DELTA, i, j)], 1.0) for i in range(n) for j in range(m))
    rows.append(Row(cap, float(inst.delta_cap), "capacity"))

    for k, cut in enumerate(extra_rows):
        coeffs = []
        for key, coef in cut.coeffs.items():
            if key not in index:
                raise ValueError(f"extra row references unknown variable {key}")
            coeffs.append((index[key], float(coef)))
        rhs = float(cut.rhs)
        if cut.sense == ">=":
            coeffs = [(idx, -c) for idx, c in coeffs]
            rhs = -rhs
        elif cut.sense != "<=":
            raise ValueError(f"unsupported row sense {cut.sense!r}")
        rows.append(Row(tuple(coeffs), rhs, f"extra[{k}]"))

    return LinearProgram(
        n_rows_grid=n, n_cols_grid=m,
        variables=tuple(variables), rows=tuple(rows), index=index,
    )


@dataclass
class LpSolution:
    status: str                       # optimal | infeasible | unbounded | numerical_error
    objective: float
    values: np.ndarray                # structural variable values
    basis: tuple[int, ...]            # basic column indices (structurals + slacks)
    at_upper: tuple[int, ...]         # nonbasic columns sitting at their upper bound
    iterations: int
    message: str = ""

    def value_of(self, lp: LinearProgram, role: str, i: int, j: int) -> float:
        return float(self.values[lp.index[(role, i, j)]])

    def grid(self, lp: LinearProgram, role: str) -> np.ndarray:
        n, m = lp.n_rows_grid, lp.n_cols_grid
        shapes = {
            ROLE_D: (n, m), ROLE_DELTA: (n, m),
            ROLE_BETA: (n - 1, m), ROLE_GAMMA: (n, m - 1),
        }
        rows, cols = shapes[role]
        out = np.zeros((rows, cols))
        for i in range(rows):
            for j in range(cols):
                out[i, j] = self.values[lp.index[(role, i, j)]]
        return out


class _Simplex:
    """Two-phase revised simplex over bounded columns, dense algebra."""

    REFACTOR_EVERY = 100
    BLAND_AFTER = 50

    def __init__(self, lp: LinearProgram, tol_feas: float, tol_opt: float):
        self.lp = lp
        self.tol_feas = tol_feas
        self.tol_opt = tol_opt
        m = len(lp.rows)
        ns = lp.n_vars
        self.m = m
        self.ns = ns
        A = np.zeros((m, ns + m))
        b = np.empty(m)
        for r, row in enumerate(lp.rows):
            for idx, coef in row.coeffs:
                A[r, idx] += coef
            A[r, ns + r] = 1.0
            b[r] = row.rhs
        self.A = A
        self.b = b
        lo = np.array([v.lower for v in lp.variables] + [0.0] * m)
        hi = np.array([v.upper for v in lp.variables] + [np.inf] * m)
        self.lo, self.hi = lo, hi
        self.c = np.array([v.objective for v in lp.variables] + [0.0] * m)
        self.iterations = 0

    # -- state helpers ---------------------------------------------------

    def _nonbasic_value(self, j):
        return self.hi[j] if self.state[j] == _NB_UPPER else self.lo[j]

    def _recompute_basics(self):
        xn = np.array([
            0.0 if self.state[j] == _BASIC else self._nonbasic_value(j)
            for j in range(self.A.shape[1])
        ])
        rhs = self.b - self.A @ xn
        xb = self.Binv @ rhs
        self.x = xn
        self.x[self.basis] = xb

    def _refactor(self) -> bool:
        B = self.A[:, self.basis]
        try:
            self.Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError:
            return False
        self._recompute_basics()
        return True

    # -- core pivoting ---------------------------------------------------

    def _pivot_loop(self, costs: np.ndarray, max_iter: int) -> str:
        """Runs simplex pivots until optimality for the given costs."""
        degenerate_streak = 0
        since_refactor = 0
        while True:
            if self.iterations >= max_iter:
                return "iteration_limit"
            y = costs[self.basis] @ self.Binv
            red = costs - y @ self.A
            bland = degenerate_streak >= self.BLAND_AFTER

            movable = self.lo != self.hi
            viol = np.where(
                (self.state == _NB_LOWER) & movable & (red < -self.tol_opt), -red, 0.0
            )
            viol += np.where(
                (self.state == _NB_UPPER) & movable & (red > self.tol_opt), red, 0.0
            )
            candidates = np.nonzero(viol > 0.0)[0]
            if candidates.size == 0:
                return "optimal"
            if bland:
                enter = int(candidates[0])
            else:
                enter = int(candidates[np.argmax(viol[candidates])])
            direction = 1 if self.state[enter] == _NB_LOWER else -1

            w = self.Binv @ self.A[:, enter]
            # ratio test: basic variables block, or the entering column flips bound
            cols_b = np.asarray(self.basis)
            rate = direction * w
            xb = self.x[cols_b]
            t_arr = np.full(self.m, np.inf)
            pos = rate > 1e-11
            if pos.any():
                t_arr[pos] = (xb[pos] - self.lo[cols_b][pos]) / rate[pos]
            neg = (rate < -1e-11) & ~np.isinf(self.hi[cols_b])
            if neg.any():
                t_arr[neg] = (self.hi[cols_b][neg] - xb[neg]) / (-rate[neg])
            np.maximum(t_arr, 0.0, out=t_arr)
            tmin = float(t_arr.min()) if self.m else np.inf
            t_limit = self.hi[enter] - self.lo[enter]

            if tmin < t_limit - 1e-13:
                ties = np.nonzero(t_arr <= tmin + 1e-13)[0]
                leave_pos = int(ties[np.argmin(cols_b[ties])])
                leave_to_upper = rate[leave_pos] < 0
                t_best = tmin
            else:
                leave_pos = -1
                leave_to_upper = False
                t_best = t_limit
            if np.isinf(t_best):
                return "unbounded"

            self.iterations += 1
            since_refactor += 1
            if t_best <= 1e-11:
                degenerate_streak += 1
            else:
                degenerate_streak = 0

            # apply the step
            if t_best > 0:
                self.x[enter] += direction * t_best
                self.x[self.basis] -= direction * t_best * w
            if leave_pos < 0:
                # bound flip, basis unchanged
                self.state[enter] = _NB_UPPER if self.state[enter] == _NB_LOWER else _NB_LOWER
                self.x[enter] = self._nonbasic_value(enter)
            else:
                out_col = self.basis[leave_pos]
                self.state[out_col] = _NB_UPPER if leave_to_upper else _NB_LOWER
                self.x[out_col] = self._nonbasic_value(out_col)
                self.state[enter] = _BASIC
                self.basis[leave_pos] = enter
                piv = w[leave_pos]
                if abs(piv) < 1e-11:
                    if not self._refactor():
                        return "singular"
                    since_refactor = 0
                    continue
                # product-form update of the basis inverse
                self.Binv[leave_pos, :] /= piv
                for p in range(self.m):
                    if p != leave_pos and w[p] != 0.0:
                        self.Binv[p, :] -= w[p] * self.Binv[leave_pos, :]
            if since_refactor >= self.REFACTOR_EVERY:
                if not self._refactor():
                    return "singular"
                since_refactor = 0

    # -- driver ----------------------------------------------------------

    def solve(self, start_basis=None, start_at_upper=None) -> LpSolution:
        ncols = self.A.shape[1]
        self.state = np.full(ncols, _NB_LOWER, dtype=np.int8)

        if start_basis is not None:
            basis = list(start_basis)
            if len(basis) != self.m or len(set(basis)) != self.m:
                return self._fail("bad warm-start basis")
            self.basis = basis
            for j in start_at_upper or ():
                self.state[j] = _NB_UPPER
            for j in basis:
                self.state[j] = _BASIC
            if not self._refactor():
                return self._fail("warm-start basis is singular")
            # warm basis may be infeasible after bound changes; fall back
            if (self.x < self.lo - 1e-7).any() or (self.x > np.where(np.isinf(self.hi), np.inf, self.hi) + 1e-7).any():
                return self.solve()
        else:
            # slack basis; nonbasic structurals at their (finite) lower bound
            self.basis = list(range(self.ns, self.ns + self.m))
            self.state[self.ns:] = _BASIC
            self.Binv = np.eye(self.m)
            self._recompute_basics()

        # phase 1 with artificials on violated rows
        viol = [p for p in range(self.m) if self.x[self.basis[p]] < self.lo[self.basis[p]] - 1e-12]
        if viol:
            n_art = len(viol)
            art_cols = np.zeros((self.m, n_art))
            art_lo = np.zeros(n_art)
            art_hi = np.full(n_art, np.inf)
            for k, p in enumerate(viol):
                art_cols[p, k] = -1.0
            self.A = np.hstack([self.A, art_cols])
            self.lo = np.concatenate([self.lo, art_lo])
            self.hi = np.concatenate([self.hi, art_hi])
            self.c = np.concatenate([self.c, np.zeros(n_art)])
            self.state = np.concatenate([self.state, np.full(n_art, _NB_LOWER, dtype=np.int8)])
            ncols_full = self.A.shape[1]
            phase1_costs = np.zeros(ncols_full)
            for k, p in enumerate(viol):
                col = ncols_full - n_art + k
                out = self.basis[p]
                self.state[out] = _NB_LOWER  # slack leaves at its lower bound
                self.basis[p] = col
                self.state[col] = _BASIC
                phase1_costs[col] = 1.0
            if not self._refactor():
                return self._fail("phase 1 basis is singular")
            outcome = self._pivot_loop(phase1_costs, max_iter=20000 + 60 * self.m)
            if outcome in ("singular", "iteration_limit"):
                return self._fail(f"phase 1 {outcome}")
            art_value = float(phase1_costs @ np.maximum(self.x, 0.0))
            if art_value > 1e-7:
                return LpSolution(
                    status="infeasible", objective=np.nan,
                    values=self.x[: self.ns].copy(), basis=tuple(self.basis),
                    at_upper=(), iterations=self.iterations,
                )
            # freeze the artificials at zero for phase 2
            for k in range(n_art):
                col = self.A.shape[1] - n_art + k
                self.hi[col] = 0.0
                if self.state[col] != _BASIC:
                    self.state[col] = _NB_LOWER
                self.x[col] = 0.0

        costs = np.concatenate([self.c, np.zeros(self.A.shape[1] - len(self.c))]) \
            if self.A.shape[1] > len(self.c) else self.c
        outcome = self._pivot_loop(costs, max_iter=40000 + 60 * self.m)
        if outcome in ("singular", "iteration_limit"):
            return self._fail(f"phase 2 {outcome}")
        if outcome == "unbounded":
            return LpSolution(
                status="unbounded", objective=-np.inf,
                values=self.x[: self.ns].copy(), basis=tuple(self.basis),
                at_upper=(), iterations=self.iterations,
            )
        if not self._refactor():
            return self._fail("final refactorization failed")
        # final feasibility audit
        resid = self.A @ self.x - self.b
        scale = 1.0 + np.abs(self.b).max(initial=0.0)
        if np.abs(resid).max(initial=0.0) > 1e-6 * scale:
            return self._fail("residual check failed")
        lo_viol = float(np.max(self.lo - self.x, initial=0.0))
        hi_gap = np.where(np.isinf(self.hi), np.inf, self.hi) - self.x
        hi_viol = float(max(-np.min(hi_gap, initial=0.0), 0.0))
        if max(lo_viol, hi_viol) > 1e-6:
            return self._fail("bound check failed")
        obj = float(costs @ self.x)
        at_upper = tuple(int(j) for j in range(self.ns) if self.state[j] == _NB_UPPER)
        return LpSolution(
            status="optimal", objective=obj,
            values=self.x[: self.ns].copy(),
            basis=tuple(int(j) for j in self.basis),
            at_upper=at_upper,
            iterations=self.iterations,
        )

    def _fail(self, message: str) -> LpSolution:
        return LpSolution(
            status="numerical_error", objective=np.nan,
            values=np.zeros(self.ns), basis=(), at_upper=(),
            iterations=self.iterations, message=message,
        )


def solve_lp(lp: LinearProgram, tol_feas: float = 1e-9, tol_opt: float = 1e-9,
             start_basis=None, start_at_upper=None) -> LpSolution:
    """Solve to a basic (vertex) optimum, or report infeasible/unbounded.

    Numerical trouble is reported as the distinct ``numerical_error`` status
    with a diagnostic message, never as a silently wrong answer.
    """
    solver = _Simplex(lp, tol_feas, tol_opt)
    return solver.solve(start_basis=start_basis, start_at_upper=start_at_upper)


# -- fractional structure ---------------------------------------------------


@dataclass(frozen=True)
class FractionalAnalysis:
    """Fractional structure of an LP vertex solution.

    ``fractional_cells`` holds cells whose moved control is non-integer;
    ``components`` groups them by 4-adjacency and equal value;
    ``uniform_component`` is the largest component part with identical
    previous control; ``moved_integral_cells`` are integral cells that used
    capacity. ``delta_out`` is the capacity used outside the fractional set
    and ``delta_r`` the remainder of the budget.
    """

    values: np.ndarray
    d: np.ndarray
    delta: np.ndarray
    fractional_cells: frozenset
    components: tuple[frozenset, ...]
    uniform_component: frozenset
    moved_integral_cells: frozenset
    delta_out: float
    delta_r: float
    is_integral: bool


def extract_components(inst: TripInstance, lp: LinearProgram, sol: LpSolution,
                       tol_int: float = 1e-6, tol_eq: float = 1e-7) -> FractionalAnalysis:
    if sol.status != "optimal":
        raise ValueError("fractional analysis requires an optimal solution")
    n, m = inst.n_rows, inst.n_cols
    d = sol.grid(lp, ROLE_D)
    delta = sol.grid(lp, ROLE_DELTA)
    values = np.array(inst.prev, dtype=float) + d

    frac = {
        (i, j)
        for i in range(n)
        for j in range(m)
        if abs(values[i, j] - round(values[i, j])) > tol_int
    }

    components = []
    seen = set()
    for cell in sorted(frac):
        if cell in seen:
            continue
        comp = {cell}
        stack = [cell]
        while stack:
            ci, cj = stack.pop()
            for a, b in ((ci - 1, cj), (ci + 1, cj), (ci, cj - 1), (ci, cj + 1)):
                if (a, b) in frac and (a, b) not in comp \
                        and abs(values[a, b] - values[ci, cj]) <= tol_eq:
                    comp.add((a, b))
                    stack.append((a, b))
        seen |= comp
        components.append(frozenset(comp))

    # largest connected part with identical previous control
    uniform = frozenset()
    for comp in components:
        remaining = set(comp)
        while remaining:
            cell = min(remaining)
            part = {cell}
            stack = [cell]
            x0 = inst.prev[cell[0]][cell[1]]
            while stack:
                ci, cj = stack.pop()
                for a, b in ((ci - 1, cj), (ci + 1, cj), (ci, cj - 1), (ci, cj + 1)):
                    if (a, b) in remaining and (a, b) not in part and inst.prev[a][b] == x0:
                        part.add((a, b))
                        stack.append((a, b))
            remaining -= part
            if len(part) > len(uniform) or (len(part) == len(uniform) and uniform and min(part) < min(uniform)):
                uniform = frozenset(part)

    moved = frozenset(
        (i, j)
        for i in range(n)
        for j in range(m)
        if (i, j) not in frac and delta[i, j] > tol_int
    )
    delta_out = float(sum(delta[i, j] for i in range(n) for j in range(m) if (i, j) not in frac))
    return FractionalAnalysis(
        values=values, d=d, delta=delta,
        fractional_cells=frozenset(frac),
        components=tuple(components),
        uniform_component=uniform,
        moved_integral_cells=moved,
        delta_out=delta_out,
        delta_r=float(inst.delta_cap) - delta_out,
        is_integral=not frac,
    )


def lp_to_text(lp: LinearProgram) -> str:
    """Human-readable dump in a conventional LP layout, for cross-checking."""
    def vname(v: Variable) -> str:
        return f"{v.role}[{v.i},{v.j}]"

    lines = ["minimize"]
    terms = [
        f"{v.objective:+g} {vname(v)}" for v in lp.variables if v.objective != 0.0
    ]
    lines.append("  " + " ".join(terms))
    lines.append("subject to")
    for row in lp.rows:
        expr = " ".join(
            f"{coef:+g} {vname(lp.variables[idx])}" for idx, coef in row.coeffs
        )
        lines.append(f"  {row.label}: {expr} <= {row.rhs:g}")
    lines.append("bounds")
    for v in lp.variables:
        up = "inf" if np.isinf(v.upper) else f"{v.upper:g}"
        lines.append(f"  {v.lower:g} <= {vname(v)} <= {up}")
    return "\n".join(lines) + "\n"
