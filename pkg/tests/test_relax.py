import itertools
from fractions import Fraction

import pytest

from tvtrip.instance import (
    TripInstance,
    capacity_used,
    gen_random,
    is_feasible,
    objective_ip,
    objective_og,
    tv_const,
)
from tvtrip.oracle import brute_force_ip
from tvtrip.relax import (
    build_flow_network,
    lp_to_lr,
    lr_to_lp,
    papprox_certificate,
    solve_lr,
    solve_lr_inner,
    threshold,
)
from tvtrip.simplex import build_lp, extract_components, solve_lp


def binary_instances(count, n=4, m=4, delta=3, scale=1):
    return [gen_random(seed, n, m, 0, 1, delta, cost_scale=scale) for seed in range(count)]


def exhaustive_inner(inst, mu):
    """Reference minimization of the penalized objective over all steps.

    Vectorized over all 2^(N*M) binary controls with exact scaled integers.
    """
    import math

    import numpy as np

    mu = Fraction(mu)
    L = inst.alpha.denominator * mu.denominator // math.gcd(
        inst.alpha.denominator, mu.denominator
    )
    for row in inst.cost:
        for c in row:
            L = L * c.denominator // math.gcd(L, c.denominator)
    cells = inst.n_rows * inst.n_cols
    Y = ((np.arange(2**cells)[:, None] >> np.arange(cells)[None, :]) & 1).astype(np.int64)
    X = np.array([inst.prev[i][j] for i, j in inst.cells()], dtype=np.int64)
    D = Y - X[None, :]
    cint = np.array([int(c * L) for row in inst.cost for c in row], dtype=np.int64)
    val = D @ cint
    m = inst.n_cols
    alpha_int = int(inst.alpha * L)
    for i in range(inst.n_rows - 1):
        for j in range(m):
            val += alpha_int * np.abs(Y[:, (i + 1) * m + j] - Y[:, i * m + j])
    for i in range(inst.n_rows):
        for j in range(m - 1):
            val += alpha_int * np.abs(Y[:, i * m + j + 1] - Y[:, i * m + j])
    val += int(mu * L) * np.abs(D).sum(axis=1)
    return Fraction(int(val.min()), L) - mu * inst.delta_cap


def test_network_capacities_nonnegative(ex2):
    for mu in (Fraction(0), Fraction(1, 3), Fraction(5)):
        net = build_flow_network(ex2, mu)
        assert all(c >= 0 for _, _, c in net.arcs)


def test_inner_dominant_penalty():
    inst = gen_random(0, 4, 4, 0, 1, 3, cost_scale=2)
    mu = max(abs(c) for row in inst.cost for c in row) + 4 * inst.alpha
    d, _ = solve_lr_inner(inst, mu)
    assert all(v == 0 for row in d for v in row)


def test_inner_everything_flips():
    inst = TripInstance(
        n_rows=3, n_cols=3, alpha=1, delta_cap=9, xi_lo=0, xi_hi=1,
        cost=[[Fraction(-9, 2)] * 3] * 3, prev=[[0] * 3] * 3,
    )
    d, _ = solve_lr_inner(inst, Fraction(0))
    assert all(v == 1 for row in d for v in row)


def test_inner_matches_enumeration():
    for inst in binary_instances(6):
        for mu in (Fraction(0), Fraction(1, 10), Fraction(1)):
            _, val = solve_lr_inner(inst, mu)
            assert val == exhaustive_inner(inst, mu)


def test_inner_rejects_nonbinary(ex1):
    with pytest.raises(ValueError, match="binary"):
        solve_lr_inner(ex1, Fraction(0))


def test_capacity_monotone_and_value_concave():
    inst = gen_random(11, 4, 4, 0, 1, 4, cost_scale=1)
    grid = [Fraction(k, 10) for k in range(11)]
    caps = []
    vals = []
    for mu in grid:
        d, val = solve_lr_inner(inst, mu)
        caps.append(capacity_used(inst, d))
        vals.append(val)
    assert all(a >= b for a, b in zip(caps, caps[1:]))
    for k in range(1, len(grid) - 1):
        assert vals[k] >= (vals[k - 1] + vals[k + 1]) / 2


def test_solve_lr_small_binary(ex2):
    lr = solve_lr(ex2)
    assert lr.mu_star == Fraction(1, 2)
    assert all(v == 0 for row in lr.d_low for v in row)
    assert capacity_used(ex2, lr.d_high) >= 1
    assert lr.value == Fraction(-1, 2)


def test_solve_lr_integral_case():
    inst = TripInstance(
        n_rows=2, n_cols=2, alpha=1, delta_cap=4, xi_lo=0, xi_hi=1,
        cost=[[-9, -9], [-9, -9]], prev=[[0, 0], [0, 0]],
    )
    lr = solve_lr(inst)
    assert lr.mu_star == 0
    assert lr.d_low == lr.d_high
    assert all(v == 1 for row in lr.d_low for v in row)


def test_lr_equals_lp_bound():
    for inst in binary_instances(12, delta=3):
        lr = solve_lr(inst)
        sol = solve_lp(build_lp(inst))
        assert sol.status == "optimal"
        assert abs(float(lr.value) - sol.objective) <= 1e-6


def test_lr_to_lp_objective(ex2):
    lr = solve_lr(ex2)
    point = lr_to_lp(ex2, lr)
    assert point.objective == lr.value == Fraction(-1, 2)
    assert sum(sum(r) for r in point.delta) == ex2.delta_cap


def test_lr_to_lp_random_suite():
    for inst in binary_instances(8, delta=4):
        lr = solve_lr(inst)
        point = lr_to_lp(inst, lr)
        sol = solve_lp(build_lp(inst))
        assert abs(float(point.objective) - sol.objective) <= 1e-6
        if lr.d_low != lr.d_high:
            assert sum(sum(r) for r in point.delta) == inst.delta_cap


def test_lp_to_lr_small_binary(ex2):
    d, mu = lp_to_lr(ex2, [[Fraction(1, 4)] * 2] * 2)
    assert all(v == 0 for row in d for v in row)
    assert mu == Fraction(1, 2)


def test_lp_to_lr_integral_identity(ex2):
    d, mu = lp_to_lr(ex2, [[0, 0], [0, 0]])
    assert mu == 0
    assert all(v == 0 for row in d for v in row)


def test_lp_to_lr_value_matches_lp():
    for inst in binary_instances(8, delta=3):
        lp = build_lp(inst)
        sol = solve_lp(lp)
        d_vals = [[Fraction(sol.value_of(lp, "d", i, j)).limit_denominator(10**9)
                   for j in range(inst.n_cols)] for i in range(inst.n_rows)]
        d, mu = lp_to_lr(inst, d_vals)
        assert mu >= 0
        lr_val = objective_ip(inst, d) + mu * (capacity_used(inst, d) - inst.delta_cap)
        assert abs(float(lr_val) - sol.objective) <= 1e-6


def test_threshold_small_binary(ex2):
    quarter = [[Fraction(1, 4)] * 2] * 2
    assert threshold(ex2, quarter, Fraction(1, 2)) == ((0, 0), (0, 0))
    assert threshold(ex2, quarter, Fraction(1, 10)) == ((1, 1), (1, 1))
    with pytest.raises(ValueError):
        threshold(ex2, quarter, 1)


def test_thresholded_points_attain_inner_optimum():
    for inst in binary_instances(8, delta=3):
        lp = build_lp(inst)
        sol = solve_lp(lp)
        ana = extract_components(inst, lp, sol)
        if ana.is_integral:
            continue
        lr = solve_lr(inst)
        inner_best = exhaustive_inner(inst, lr.mu_star)
        for t in (Fraction(1, 10), Fraction(1, 2), Fraction(9, 10)):
            d_vals = [[Fraction(sol.value_of(lp, "d", i, j)).limit_denominator(10**9)
                       for j in range(inst.n_cols)] for i in range(inst.n_rows)]
            dt = threshold(inst, d_vals, t)
            val = objective_ip(inst, dt) + lr.mu_star * (
                capacity_used(inst, dt) - inst.delta_cap
            )
            assert val == inner_best


def test_papprox_zero_step(ex2):
    lr = solve_lr(ex2)
    cert = papprox_certificate(ex2, lr)
    assert cert.p == 0 and not cert.guaranteed


def test_papprox_full_budget_is_optimal():
    # strong negative costs: the low step saturates the budget
    inst = TripInstance(
        n_rows=2, n_cols=2, alpha=Fraction(1, 10), delta_cap=2, xi_lo=0, xi_hi=1,
        cost=[[-2, -1], [Fraction(-1, 2), Fraction(1, 10)]], prev=[[0, 0], [0, 0]],
    )
    lr = solve_lr(inst)
    cert = papprox_certificate(inst, lr)
    if cert.p == 1:
        assert objective_ip(inst, lr.d_low) == brute_force_ip(inst).objective


def test_papprox_zero_budget():
    inst = gen_random(2, 2, 2, 0, 1, 0)
    lr = solve_lr(inst)
    cert = papprox_certificate(inst, lr)
    assert not cert.guaranteed


def test_papprox_inequality_against_oracle():
    hits = 0
    for seed in range(30):
        inst = gen_random(seed, 3, 3, 0, 1, 2, cost_scale=1)
        lr = solve_lr(inst)
        cert = papprox_certificate(inst, lr)
        if not cert.guaranteed or cert.p < Fraction(1, 2):
            continue
        hits += 1
        res = brute_force_ip(inst)
        og_best = res.objective - tv_const(inst)
        left = objective_og(inst, lr.d_low)
        assert is_feasible(inst, lr.d_low).feasible
        assert left <= cert.p * og_best
    assert hits >= 1  # the suite must actually exercise the certificate
