from fractions import Fraction

import pytest

from tvtrip import instance as inst_mod
from tvtrip.instance import (
    InstanceError,
    InstanceFormatError,
    TripInstance,
    complete,
    gen_random,
    is_feasible,
    objective_ip,
    objective_og,
    read_instance,
    reduce_mbfh,
    tv_const,
    tv_omega,
    write_instance,
)


def test_complete_zero_step(ex2):
    cp = complete(ex2, [[0, 0], [0, 0]])
    assert all(v == 0 for row in cp.delta for v in row)
    assert all(v == 0 for row in cp.beta for v in row)
    assert all(v == 0 for row in cp.gamma for v in row)


def test_complete_worked_example(ex1, ex1_d):
    cp = complete(ex1, ex1_d)
    assert cp.delta == tuple(tuple(abs(v) for v in row) for row in ex1_d)
    jumps = sum(sum(r) for r in cp.beta) + sum(sum(r) for r in cp.gamma)
    assert jumps == 5


def test_complete_negative_entry():
    inst = TripInstance(
        n_rows=1, n_cols=2, alpha=1, delta_cap=2, xi_lo=-1, xi_hi=1,
        cost=[[0, 0]], prev=[[1, 0]],
    )
    cp = complete(inst, [[-2, 0]])
    assert cp.delta[0][0] == 2
    assert cp.gamma[0][0] == abs((0 + 0) - (1 - 2)) == 1


def test_objective_worked_example(ex1, ex1_d):
    assert objective_ip(ex1, ex1_d) == Fraction("-1.1")


def test_objective_zero_step(ex2):
    zero = [[0, 0], [0, 0]]
    assert objective_ip(ex2, zero) == 0
    assert tv_const(ex2) == 0
    assert objective_og(ex2, zero) == 0


def test_objective_convex_combination(ex1):
    d1 = [[Fraction(1, 2), 0, 2], [Fraction(1, 2), 0, 0], [0, 0, 0]]
    d2 = [[Fraction(3, 2), 0, 0], [Fraction(3, 2), 0, 0], [0, 0, 0]]
    o1 = objective_ip(ex1, d1)
    o2 = objective_ip(ex1, d2)
    assert o1 == Fraction("-0.7")
    assert o2 == Fraction("-1.5")
    mid = [[(a + b) / 2 for a, b in zip(r1, r2)] for r1, r2 in zip(d1, d2)]
    assert objective_ip(ex1, mid) == (o1 + o2) / 2 == Fraction("-1.1")


def test_objective_og_zero_for_random_instances():
    for seed in range(5):
        inst = gen_random(seed, 3, 4, 0, 2, 3)
        zero = [[0] * 4 for _ in range(3)]
        assert objective_og(inst, zero) == 0


def test_complete_idempotent(ex1, ex1_d):
    cp = complete(ex1, ex1_d)
    cp2 = complete(ex1, cp.d)
    assert (cp2.delta, cp2.beta, cp2.gamma) == (cp.delta, cp.beta, cp.gamma)


def test_is_feasible(ex1, ex1_d, ex2):
    rep = is_feasible(ex1, ex1_d)
    assert rep.feasible and rep.capacity_used == 3
    rep = is_feasible(ex2, [[Fraction(1, 4)] * 2] * 2)
    assert not rep.feasible and rep.capacity_used == 1
    over = [[1, 1], [0, 0]]
    rep = is_feasible(ex2, over)
    assert not rep.feasible and rep.capacity_used == 2


def test_prev_outside_xi_rejected():
    with pytest.raises(InstanceError, match="prev outside Xi"):
        TripInstance(
            n_rows=1, n_cols=1, alpha=1, delta_cap=1, xi_lo=0, xi_hi=1,
            cost=[[0]], prev=[[3]],
        )


def test_roundtrip(ex1, ex2):
    for inst in (ex1, ex2):
        assert read_instance(write_instance(inst)) == inst


def test_roundtrip_generated():
    for seed in (0, 1, 2):
        inst = gen_random(seed, 4, 3, -1, 2, 5, cost_scale=Fraction(3, 2))
        assert read_instance(write_instance(inst)) == inst


def test_read_errors(ex2):
    good = write_instance(ex2)
    with pytest.raises(InstanceFormatError, match="header"):
        read_instance(good.replace("TRIP", "TRAP"))
    with pytest.raises(InstanceFormatError, match="prev outside Xi"):
        read_instance(good.replace("0 1\n", "0 1\n").rsplit("\n", 3)[0] + "\n3 0\n")
    bad_delta = good.split("\n")
    bad_delta[3] = "-1"
    with pytest.raises(InstanceFormatError, match="delta"):
        read_instance("\n".join(bad_delta))
    bad_xi = good.split("\n")
    bad_xi[4] = "1 0"
    with pytest.raises(InstanceFormatError, match="non-contiguous"):
        read_instance("\n".join(bad_xi))


def test_decimal_writer_exact():
    assert inst_mod._decimal_str(Fraction(1, 4)) == "0.25"
    assert inst_mod._decimal_str(Fraction(-21, 10)) == "-2.1"
    assert inst_mod._decimal_str(Fraction(5)) == "5"
    assert inst_mod._decimal_str(Fraction(5, 256)) == "0.01953125"
    with pytest.raises(InstanceFormatError):
        inst_mod._decimal_str(Fraction(1, 3))


def test_gen_random_deterministic():
    a = gen_random(42, 4, 4, 0, 1, 4)
    b = gen_random(42, 4, 4, 0, 1, 4)
    assert a == b
    c = gen_random(43, 4, 4, 0, 1, 4)
    assert a != c
    for row in a.cost:
        for v in row:
            assert -1 <= v <= 1
            assert v.denominator in (1, 2, 4, 5, 10, 20, 25, 50, 100)


def test_gen_random_golden(tmp_path):
    import pathlib

    golden_dir = pathlib.Path(__file__).parent / "data"
    for seed in (101, 202, 303):
        text = write_instance(gen_random(seed, 3, 3, 0, 1, 2))
        golden = golden_dir / f"random_seed{seed}.trip"
        if not golden.exists():
            golden.write_text(text)
        assert text == golden.read_text()


def test_reduce_mbfh_small_square():
    red = reduce_mbfh([(0, 0), (0, 1), (1, 0), (1, 1)])
    inst = red.instance
    n = 4
    side = 2 * 16 + 1 + 2
    assert inst.shape == (side, side)
    assert inst.delta_cap == Fraction(n**5, 2) + 4 * n
    assert red.objective_offset == Fraction(5 * n, 2)
    assert inst.alpha == 1 and (inst.xi_lo, inst.xi_hi) == (0, 1)
    link_costs = [
        inst.cost[i][j]
        for i in range(side)
        for j in range(side)
        if red.roles[i][j] == "link"
    ]
    assert len(link_costs) == 4  # one per edge of the 2x2 grid graph
    assert all(c == -2 for c in link_costs)
    # interior square cells pay only the small per-cell amount
    interior = [
        inst.cost[i][j]
        for i in range(side)
        for j in range(side)
        if red.roles[i][j] == "square"
        and all(red.roles[a][b] == "square" for a, b in ((i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)))
    ]
    assert all(c == Fraction(-5, n**4) for c in interior)
    # boundary square cells subtract one unit per filler neighbor
    corner_like = [
        inst.cost[i][j]
        for i in range(side)
        for j in range(side)
        if red.roles[i][j] == "square" and inst.cost[i][j] not in (Fraction(-5, n**4),)
    ]
    for c in corner_like:
        assert (c - Fraction(-5, n**4)) in (-1, -2)
    filler = sum(
        1 for i in range(side) for j in range(side) if red.roles[i][j] == "filler"
    )
    assert filler == side * side - 4 * n**4 - 4


def test_reduce_mbfh_path_has_uniform_link_costs():
    red = reduce_mbfh([(0, 0), (0, 1), (0, 2), (0, 3)])
    side = red.instance.n_rows
    links = [
        red.instance.cost[i][j]
        for i in range(side)
        for j in range(side)
        if red.roles[i][j] == "link"
    ]
    assert len(links) == 3
    assert all(c == -2 for c in links)


def test_reduce_mbfh_errors():
    with pytest.raises(InstanceError, match="even"):
        reduce_mbfh([(0, 0), (0, 1), (0, 2)])
    with pytest.raises(InstanceError, match="at least 4"):
        reduce_mbfh([(0, 0), (0, 1)])
    with pytest.raises(InstanceError, match="cap"):
        reduce_mbfh([(0, j) for j in range(8)])
