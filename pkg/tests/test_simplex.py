import numpy as np
import pytest

from tvtrip.instance import gen_random
from tvtrip.oracle import brute_force_ip
from tvtrip.simplex import build_lp, extract_components, lp_to_text, solve_lp

try:
    from scipy.optimize import linprog

    HAVE_SCIPY = True
except ImportError:  # pragma: no cover
    HAVE_SCIPY = False


def scipy_reference(lp):
    m, ns = len(lp.rows), lp.n_vars
    A = np.zeros((m, ns))
    b = np.zeros(m)
    for r, row in enumerate(lp.rows):
        for idx, c in row.coeffs:
            A[r, idx] += c
        b[r] = row.rhs
    c = np.array([v.objective for v in lp.variables])
    bounds = [(v.lower, None if np.isinf(v.upper) else v.upper) for v in lp.variables]
    return linprog(c, A_ub=A, b_ub=b, bounds=bounds, method="highs")


def test_build_lp_counts(ex2):
    lp = build_lp(ex2)
    assert lp.n_vars == 12  # 4 d + 4 delta + 2 beta + 2 gamma
    assert len(lp.rows) == 25
    cap = [r for r in lp.rows if r.label == "capacity"]
    assert len(cap) == 1
    idxs = {i for i, c in cap[0].coeffs}
    assert idxs == {lp.index[("delta", i, j)] for i in range(2) for j in range(2)}
    assert all(c == 1.0 for _, c in cap[0].coeffs)
    assert cap[0].rhs == 1.0


def test_build_lp_extra_row_and_bounds(ex2):
    class FakeCut:
        coeffs = {("delta", 0, 0): 1.0}
        sense = ">="
        rhs = 0.0

    lp0 = build_lp(ex2)
    lp1 = build_lp(ex2, extra_rows=[FakeCut()])
    assert len(lp1.rows) == len(lp0.rows) + 1
    assert lp1.n_vars == lp0.n_vars

    db = [[(0.0, 1.0), (1.0, 1.0)], [(0.0, 1.0), (0.0, 1.0)]]
    lp2 = build_lp(ex2, d_bounds=db)
    v = lp2.variables[lp2.index[("d", 0, 1)]]
    assert (v.lower, v.upper) == (1.0, 1.0)


def test_solve_small_binary(ex2):
    lp = build_lp(ex2)
    sol = solve_lp(lp)
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(-0.5, abs=1e-9)
    assert np.allclose(sol.grid(lp, "d"), 0.25, atol=1e-9)
    cap_used = sol.grid(lp, "delta").sum()
    assert cap_used == pytest.approx(1.0, abs=1e-7)


def test_solve_zero_budget(ex1):
    lp = build_lp(ex1.__class__(**{**ex1.__dict__, "delta_cap": 0}))
    sol = solve_lp(lp)
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(0.0, abs=1e-9)
    assert np.allclose(sol.grid(lp, "d"), 0.0, atol=1e-9)


def test_lp_bounds_oracle():
    for seed in range(10):
        inst = gen_random(seed, 4, 4, 0, 1, 3)
        sol = solve_lp(build_lp(inst))
        assert sol.status == "optimal"
        assert sol.objective <= float(brute_force_ip(inst).objective) + 1e-7


def test_resolve_from_basis(ex2):
    for seed in (3, 4):
        inst = gen_random(seed, 3, 5, 0, 2, 4)
        lp = build_lp(inst)
        sol = solve_lp(lp)
        again = solve_lp(lp, start_basis=sol.basis, start_at_upper=sol.at_upper)
        assert again.status == "optimal"
        assert again.objective == pytest.approx(sol.objective, abs=1e-9)
        assert again.iterations == 0


def test_infeasible_bounds_detected(ex2):
    db = [[(1.0, 1.0), (1.0, 1.0)], [(1.0, 1.0), (1.0, 1.0)]]  # needs capacity 4 > 1
    lp = build_lp(ex2, d_bounds=db)
    sol = solve_lp(lp)
    assert sol.status == "infeasible"


@pytest.mark.skipif(not HAVE_SCIPY, reason="scipy unavailable")
def test_matches_external_solver():
    import random

    rng = random.Random(17)
    for trial in range(25):
        n, m = rng.randint(2, 5), rng.randint(2, 5)
        inst = gen_random(trial, n, m, 0, rng.choice([1, 2]), rng.randint(0, 6), cost_scale=2)
        lp = build_lp(inst)
        sol = solve_lp(lp)
        ref = scipy_reference(lp)
        assert sol.status == "optimal" and ref.status == 0
        assert sol.objective == pytest.approx(ref.fun, abs=1e-6)


def test_extract_components_small_binary(ex2):
    lp = build_lp(ex2)
    sol = solve_lp(lp)
    ana = extract_components(ex2, lp, sol)
    assert not ana.is_integral
    assert len(ana.components) == 1
    assert len(ana.components[0]) == 4
    assert ana.uniform_component == ana.components[0]
    assert ana.moved_integral_cells == frozenset()
    assert ana.delta_out == pytest.approx(0.0, abs=1e-9)
    assert ana.delta_r == pytest.approx(1.0, abs=1e-9)


def test_extract_components_integral(ex1):
    import dataclasses

    inst = dataclasses.replace(ex1, delta_cap=0)
    lp = build_lp(inst)
    sol = solve_lp(lp)
    ana = extract_components(inst, lp, sol)
    assert ana.is_integral
    assert ana.fractional_cells == frozenset()


def test_vertex_properties_random_suite():
    """<=1 fractional component, and integral or tight capacity row."""
    checked = 0
    for seed in range(120):
        n = 2 + seed % 5
        m = 2 + (seed // 5) % 5
        xi_hi = 1 if seed % 2 == 0 else 2
        inst = gen_random(seed, n, m, 0, xi_hi, (seed % (n * m)) + 1)
        lp = build_lp(inst)
        sol = solve_lp(lp)
        assert sol.status == "optimal"
        ana = extract_components(inst, lp, sol)
        assert len(ana.components) <= 1
        if not ana.is_integral:
            assert abs(ana.delta.sum() - float(inst.delta_cap)) <= 1e-7
        checked += 1
    assert checked == 120


def test_lp_dump(ex2):
    text = lp_to_text(build_lp(ex2))
    assert "minimize" in text and "capacity" in text and "bounds" in text
