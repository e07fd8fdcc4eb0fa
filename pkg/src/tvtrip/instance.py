"""Problem data for TV-regularized integer step problems on 2D grids.

An instance asks for an integer step ``d`` on an ``N x M`` grid minimizing

    sum c[i,j] * d[i,j]  +  alpha * (total variation of ``prev + d``)

subject to ``prev + d`` staying inside the contiguous integer range
``[xi_lo, xi_hi]`` and the step budget ``sum |d[i,j]| <= delta_cap``.

All data is kept as exact rationals; evaluators return ``Fraction`` so that
reference computations never involve tolerances.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "InstanceError",
    "InstanceFormatError",
    "TripInstance",
    "CompletedPoint",
    "FeasibilityReport",
    "MbfhReduction",
    "as_fraction",
    "as_matrix",
    "complete",
    "tv_omega",
    "tv_const",
    "objective_ip",
    "objective_og",
    "is_feasible",
    "capacity_used",
    "read_instance",
    "write_instance",
    "gen_random",
    "reduce_mbfh",
]


class InstanceError(ValueError):
    """Invalid instance data."""


class InstanceFormatError(InstanceError):
    """Malformed instance text."""


def as_fraction(value) -> Fraction:
    """Exact conversion; floats convert via their binary expansion."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, (float, np.floating)):
        return Fraction(float(value))
    raise TypeError(f"cannot convert {type(value).__name__} to Fraction")


def as_matrix(data, n_rows: int, n_cols: int) -> tuple[tuple[Fraction, ...], ...]:
    """Normalize a nested sequence or ndarray to a tuple matrix of Fractions."""
    rows = list(data)
    if len(rows) != n_rows:
        raise InstanceError(f"expected {n_rows} rows, got {len(rows)}")
    out = []
    for r in rows:
        row = [as_fraction(x) for x in r]
        if len(row) != n_cols:
            raise InstanceError(f"expected {n_cols} columns, got {len(row)}")
        out.append(tuple(row))
    return tuple(out)


@dataclass(frozen=True)
class TripInstance:
    """Grid problem data; immutable after construction."""

    n_rows: int
    n_cols: int
    alpha: Fraction
    delta_cap: Fraction
    xi_lo: int
    xi_hi: int
    cost: tuple[tuple[Fraction, ...], ...]
    prev: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.n_rows < 1 or self.n_cols < 1:
            raise InstanceError("grid dimensions must be positive")
        object.__setattr__(self, "alpha", as_fraction(self.alpha))
        object.__setattr__(self, "delta_cap", as_fraction(self.delta_cap))
        if self.alpha <= 0:
            raise InstanceError("alpha must be positive")
        if self.delta_cap < 0:
            raise InstanceError("delta_cap must be nonnegative")
        if self.xi_lo > self.xi_hi:
            raise InstanceError("value range is empty (xi_lo > xi_hi)")
        object.__setattr__(self, "cost", as_matrix(self.cost, self.n_rows, self.n_cols))
        prev_rows = []
        for r in self.prev:
            row = []
            for x in r:
                xi = int(x)
                if xi != x:
                    raise InstanceError("prev entries must be integers")
                if not (self.xi_lo <= xi <= self.xi_hi):
                    raise InstanceError("prev outside Xi")
                row.append(xi)
            prev_rows.append(tuple(row))
        if len(prev_rows) != self.n_rows or any(len(r) != self.n_cols for r in prev_rows):
            raise InstanceError("prev has wrong shape")
        object.__setattr__(self, "prev", tuple(prev_rows))

    # -- convenient views ------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_rows, self.n_cols)

    @property
    def n_values(self) -> int:
        return self.xi_hi - self.xi_lo + 1

    @property
    def is_binary(self) -> bool:
        return self.xi_lo == 0 and self.xi_hi == 1

    def cells(self):
        for i in range(self.n_rows):
            for j in range(self.n_cols):
                yield (i, j)

    def vertical_edges(self):
        """Pairs ((i, j), (i+1, j)); one per vertical jump term."""
        for i in range(self.n_rows - 1):
            for j in range(self.n_cols):
                yield ((i, j), (i + 1, j))

    def horizontal_edges(self):
        """Pairs ((i, j), (i, j+1)); one per horizontal jump term."""
        for i in range(self.n_rows):
            for j in range(self.n_cols - 1):
                yield ((i, j), (i, j + 1))

    def cost_floats(self) -> np.ndarray:
        return np.array([[float(c) for c in row] for row in self.cost], dtype=float)

    def prev_array(self) -> np.ndarray:
        return np.array(self.prev, dtype=np.int64)


def _shape_check(inst: TripInstance, d) -> tuple[tuple[Fraction, ...], ...]:
    return as_matrix(d, inst.n_rows, inst.n_cols)


@dataclass(frozen=True)
class CompletedPoint:
    """A step together with its minimal auxiliary values.

    ``delta`` holds |d| per cell, ``beta`` / ``gamma`` hold the absolute
    vertical / horizontal jumps of ``prev + d``; this is the only completion
    an optimal point can carry.
    """

    d: tuple[tuple[Fraction, ...], ...]
    delta: tuple[tuple[Fraction, ...], ...]
    beta: tuple[tuple[Fraction, ...], ...]
    gamma: tuple[tuple[Fraction, ...], ...]


def complete(inst: TripInstance, d) -> CompletedPoint:
    """Minimal completion (|d|, vertical jumps, horizontal jumps) of a step."""
    dm = _shape_check(inst, d)
    x = inst.prev
    delta = tuple(tuple(abs(v) for v in row) for row in dm)
    beta = tuple(
        tuple(abs(x[i + 1][j] + dm[i + 1][j] - x[i][j] - dm[i][j]) for j in range(inst.n_cols))
        for i in range(inst.n_rows - 1)
    )
    gamma = tuple(
        tuple(abs(x[i][j + 1] + dm[i][j + 1] - x[i][j] - dm[i][j]) for j in range(inst.n_cols - 1))
        for i in range(inst.n_rows)
    )
    return CompletedPoint(d=dm, delta=delta, beta=beta, gamma=gamma)


def tv_omega(inst: TripInstance, d) -> Fraction:
    """alpha-weighted total variation of ``prev + d`` (both directions)."""
    cp = complete(inst, d)
    jumps = sum(sum(row) for row in cp.beta) + sum(sum(row) for row in cp.gamma)
    return inst.alpha * jumps


def tv_const(inst: TripInstance) -> Fraction:
    """alpha-weighted total variation of ``prev`` itself."""
    zero = [[0] * inst.n_cols for _ in range(inst.n_rows)]
    return tv_omega(inst, zero)


def objective_ip(inst: TripInstance, d) -> Fraction:
    """Linear cost plus weighted total variation of the moved control."""
    dm = _shape_check(inst, d)
    lin = sum(
        inst.cost[i][j] * dm[i][j] for i in range(inst.n_rows) for j in range(inst.n_cols)
    )
    return lin + tv_omega(inst, dm)


def objective_og(inst: TripInstance, d) -> Fraction:
    """Objective with the constant TV of ``prev`` removed; 0 at the zero step."""
    return objective_ip(inst, d) - tv_const(inst)


def capacity_used(inst: TripInstance, d) -> Fraction:
    dm = _shape_check(inst, d)
    return sum(abs(v) for row in dm for v in row)


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    capacity_used: Fraction


def is_feasible(inst: TripInstance, d) -> FeasibilityReport:
    """Integrality of ``prev + d`` in the value range plus the step budget."""
    dm = _shape_check(inst, d)
    cap = sum(abs(v) for row in dm for v in row)
    ok = cap <= inst.delta_cap
    if ok:
        for i, j in inst.cells():
            v = inst.prev[i][j] + dm[i][j]
            if v.denominator != 1 or not (inst.xi_lo <= v <= inst.xi_hi):
                ok = False
                break
    return FeasibilityReport(feasible=ok, capacity_used=cap)


# -- text format ----------------------------------------------------------

_MAGIC = "TRIP"
_VERSION = "1"


def _decimal_str(x: Fraction) -> str:
    """Shortest exact decimal text for a rational with 2- and 5-smooth denominator."""
    den = x.denominator
    e2 = e5 = 0
    d = den
    while d % 2 == 0:
        d //= 2
        e2 += 1
    while d % 5 == 0:
        d //= 5
        e5 += 1
    if d != 1:
        raise InstanceFormatError(
            f"{x} has no finite decimal representation; cannot serialize"
        )
    k = max(e2, e5)
    digits = abs(x.numerator) * (2 ** (k - e2)) * (5 ** (k - e5))
    sign = "-" if x < 0 else ""
    if k == 0:
        return f"{sign}{digits}"
    s = str(digits).rjust(k + 1, "0")
    intpart, fracpart = s[:-k], s[-k:]
    fracpart = fracpart.rstrip("0")
    if not fracpart:
        return f"{sign}{intpart}"
    return f"{sign}{intpart}.{fracpart}"


def write_instance(inst: TripInstance) -> str:
    lines = [
        f"{_MAGIC} {_VERSION}",
        f"{inst.n_rows} {inst.n_cols}",
        _decimal_str(inst.alpha),
        _decimal_str(inst.delta_cap),
        f"{inst.xi_lo} {inst.xi_hi}",
    ]
    for row in inst.cost:
        lines.append(" ".join(_decimal_str(c) for c in row))
    for row in inst.prev:
        lines.append(" ".join(str(x) for x in row))
    return "\n".join(lines) + "\n"


class _Tokens:
    def __init__(self, text: str):
        self._toks = text.split()
        self._pos = 0

    def next(self, what: str) -> str:
        if self._pos >= len(self._toks):
            raise InstanceFormatError(f"unexpected end of input while reading {what}")
        t = self._toks[self._pos]
        self._pos += 1
        return t

    def next_int(self, what: str) -> int:
        t = self.next(what)
        try:
            return int(t)
        except ValueError:
            raise InstanceFormatError(f"expected integer for {what}, got {t!r}") from None

    def next_fraction(self, what: str) -> Fraction:
        t = self.next(what)
        try:
            return Fraction(t)
        except (ValueError, ZeroDivisionError):
            raise InstanceFormatError(f"expected number for {what}, got {t!r}") from None

    def finished(self) -> bool:
        return self._pos == len(self._toks)


def read_instance(text: str) -> TripInstance:
    toks = _Tokens(text)
    if toks.next("magic") != _MAGIC or toks.next("version") != _VERSION:
        raise InstanceFormatError("malformed header, expected 'TRIP 1'")
    n = toks.next_int("row count")
    m = toks.next_int("column count")
    if n < 1 or m < 1:
        raise InstanceFormatError("grid dimensions must be positive")
    alpha = toks.next_fraction("alpha")
    if alpha <= 0:
        raise InstanceFormatError("alpha must be positive")
    delta = toks.next_fraction("delta")
    if delta < 0:
        raise InstanceFormatError("delta must be nonnegative")
    xi_lo = toks.next_int("xi_lo")
    xi_hi = toks.next_int("xi_hi")
    if xi_lo > xi_hi:
        raise InstanceFormatError("non-contiguous value set (xi_lo > xi_hi)")
    cost = [[toks.next_fraction("cost entry") for _ in range(m)] for _ in range(n)]
    prev = []
    for _ in range(n):
        row = []
        for _ in range(m):
            v = toks.next_int("prev entry")
            if not (xi_lo <= v <= xi_hi):
                raise InstanceFormatError("prev outside Xi")
            row.append(v)
        prev.append(row)
    if not toks.finished():
        raise InstanceFormatError("trailing tokens after instance data")
    return TripInstance(
        n_rows=n, n_cols=m, alpha=alpha, delta_cap=delta,
        xi_lo=xi_lo, xi_hi=xi_hi, cost=cost, prev=prev,
    )


# -- generators -----------------------------------------------------------

def gen_random(
    seed: int,
    n_rows: int,
    n_cols: int,
    xi_lo: int,
    xi_hi: int,
    delta_cap: int,
    cost_scale=1,
) -> TripInstance:
    """Deterministic random instance.

    Costs are uniform rationals on a 1/100 lattice inside
    ``[-cost_scale, cost_scale]`` (exact arithmetic stays cheap and the text
    format round-trips), previous controls are uniform in the value range.
    """
    if n_rows < 1 or n_cols < 1:
        raise InstanceError("grid dimensions must be positive")
    scale = as_fraction(cost_scale)
    kmax = math.floor(scale * 100)
    rng = random.Random(seed)
    cost = [
        [Fraction(rng.randint(-kmax, kmax), 100) for _ in range(n_cols)]
        for _ in range(n_rows)
    ]
    prev = [[rng.randint(xi_lo, xi_hi) for _ in range(n_cols)] for _ in range(n_rows)]
    return TripInstance(
        n_rows=n_rows, n_cols=n_cols, alpha=Fraction(1), delta_cap=as_fraction(delta_cap),
        xi_lo=xi_lo, xi_hi=xi_hi, cost=cost, prev=prev,
    )


# -- reduction from grid-graph bisection ----------------------------------

ROLE_SQUARE = "square"
ROLE_LINK = "link"
ROLE_FILLER = "filler"


@dataclass(frozen=True)
class MbfhReduction:
    """Instance encoding a minimum-bisection question about a grid subgraph.

    ``roles[i][j]`` is one of the role constants; ``square_id[i][j]`` is the
    input-node index for square cells and -1 otherwise. The optimal objective
    of ``instance`` plus ``objective_offset`` equals the bisection width of
    the input graph.
    """

    instance: TripInstance
    roles: tuple[tuple[str, ...], ...]
    square_id: tuple[tuple[int, ...], ...]
    objective_offset: Fraction


def reduce_mbfh(nodes: Iterable[tuple[int, int]], max_n: int = 6) -> MbfhReduction:
    """Build the bisection-encoding instance for a subgraph of the integer grid.

    Every input node becomes an ``n^2 x n^2`` square of cells; squares of
    grid-adjacent nodes are joined by a single link cell; the rest of the
    (padded, square) grid is filler. Costs make it optimal to raise exactly
    half of the squares and the links between raised squares, so the optimum
    counts cut edges of a minimum bisection, shifted by ``-5n/2``.

    The construction grows like ``n^5`` cells, so ``n`` is capped (default 6);
    exceeding the cap is an error, not a truncation.
    """
    raw = [(int(p), int(q)) for p, q in nodes]
    node_list = sorted(set(raw))
    n = len(node_list)
    if n != len(raw):
        raise InstanceError("duplicate nodes in subgraph")
    if n % 2 != 0:
        raise InstanceError("subgraph must have an even number of nodes")
    if n < 4:
        raise InstanceError("subgraph must have at least 4 nodes")
    if n > max_n:
        raise InstanceError(f"subgraph size {n} exceeds the cap {max_n}")

    node_index = {v: k for k, v in enumerate(node_list)}
    p0 = min(p for p, _ in node_list)
    q0 = min(q for _, q in node_list)
    p_span = max(p for p, _ in node_list) - p0 + 1
    q_span = max(q for _, q in node_list) - q0 + 1

    s = n * n                 # square side length
    stride = s + 1            # square plus one gap line
    height = p_span * s + (p_span - 1) + 2
    width = q_span * s + (q_span - 1) + 2
    side = max(height, width)

    roles = [[ROLE_FILLER] * side for _ in range(side)]
    square_id = [[-1] * side for _ in range(side)]

    def block_origin(p: int, q: int) -> tuple[int, int]:
        return (1 + (p - p0) * stride, 1 + (q - q0) * stride)

    for (p, q), k in node_index.items():
        r0, c0 = block_origin(p, q)
        for r in range(r0, r0 + s):
            for c in range(c0, c0 + s):
                roles[r][c] = ROLE_SQUARE
                square_id[r][c] = k

    mid = s // 2 - 1          # middle of a side, tie toward the smaller index
    n_links = 0
    for (p, q) in node_list:
        r0, c0 = block_origin(p, q)
        if (p, q + 1) in node_index:          # neighbor to the right
            roles[r0 + mid][c0 + s] = ROLE_LINK
            n_links += 1
        if (p + 1, q) in node_index:          # neighbor below
            roles[r0 + s][c0 + mid] = ROLE_LINK
            n_links += 1

    def neighbors(r: int, c: int):
        if r > 0:
            yield (r - 1, c)
        if r + 1 < side:
            yield (r + 1, c)
        if c > 0:
            yield (r, c - 1)
        if c + 1 < side:
            yield (r, c + 1)

    n4 = Fraction(n**4)
    cost = [[Fraction(0)] * side for _ in range(side)]
    for r in range(side):
        for c in range(side):
            role = roles[r][c]
            if role == ROLE_FILLER:
                cost[r][c] = Fraction(5)
                continue
            filler_neighbors = sum(
                1 for (a, b) in neighbors(r, c) if roles[a][b] == ROLE_FILLER
            )
            if role == ROLE_SQUARE:
                degree = sum(1 for _ in neighbors(r, c))
                if degree != 4:
                    raise InstanceError("square cell on the grid boundary")
                cost[r][c] = Fraction(-5) / n4 - filler_neighbors
            else:
                if filler_neighbors != 2:
                    raise InstanceError("link cell must touch exactly two filler cells")
                cost[r][c] = Fraction(-2)

    delta = Fraction(n**5, 2) + 4 * n
    inst = TripInstance(
        n_rows=side, n_cols=side, alpha=Fraction(1), delta_cap=delta,
        xi_lo=0, xi_hi=1,
        cost=cost, prev=[[0] * side for _ in range(side)],
    )
    return MbfhReduction(
        instance=inst,
        roles=tuple(tuple(r) for r in roles),
        square_id=tuple(tuple(r) for r in square_id),
        objective_offset=Fraction(5 * n, 2),
    )
