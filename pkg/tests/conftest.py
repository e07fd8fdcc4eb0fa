from fractions import Fraction

import pytest

from tvtrip.instance import TripInstance


@pytest.fixture
def ex1() -> TripInstance:
    """3x3 ternary example with a non-vertex integer optimum."""
    return TripInstance(
        n_rows=3, n_cols=3, alpha=Fraction(1), delta_cap=Fraction(3),
        xi_lo=0, xi_hi=2,
        cost=[
            [Fraction(-2), Fraction(100), Fraction("-2.1")],
            [Fraction(-2), Fraction(100), Fraction(100)],
            [Fraction(100), Fraction(100), Fraction(100)],
        ],
        prev=[[0, 0, 0], [0, 0, 0], [0, 0, 0]],
    )


EX1_D = ((1, 0, 1), (1, 0, 0), (0, 0, 0))


@pytest.fixture
def ex1_d():
    return EX1_D


@pytest.fixture
def ex2() -> TripInstance:
    """2x2 binary example where the decomposition bound beats the LP bound."""
    return TripInstance(
        n_rows=2, n_cols=2, alpha=Fraction(1), delta_cap=Fraction(1),
        xi_lo=0, xi_hi=1,
        cost=[[Fraction(-1, 2), Fraction(-1, 2)], [Fraction(-1, 2), Fraction(-1, 2)]],
        prev=[[0, 0], [0, 0]],
    )
