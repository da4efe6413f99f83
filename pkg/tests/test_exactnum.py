from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from rudlab.exactnum import (
    QSum,
    SQRT2,
    le_times_square,
    qsum_interval,
    split_square,
    sqrt_exact,
)


def test_split_square():
    assert split_square(1) == (1, 1)
    assert split_square(8) == (2, 2)
    assert split_square(12) == (2, 3)
    assert split_square(49) == (7, 1)
    # large square factors may stay in the core (semi-canonical), but the
    # value-level comparison must still detect the collision
    assert (QSum.root(2 * 101 * 101) - QSum.root(2, F(101))).sign() == 0


def test_sqrt_identities():
    assert (SQRT2 * SQRT2).as_fraction() == 2
    assert (sqrt_exact(8) - 2 * SQRT2).sign() == 0
    assert (sqrt_exact(F(9, 4)) - F(3, 2)).sign() == 0
    r = sqrt_exact(F(2, 3))
    assert ((r * r) - F(2, 3)).sign() == 0


def test_ordering():
    assert SQRT2 + 1 > F(12, 5)
    assert SQRT2 + 1 < F(5, 2)
    # sqrt(2) + sqrt(3) vs sqrt(5 + 2*sqrt(6)): equal after squaring
    s = SQRT2 + QSum.root(3)
    assert (s * s - (5 + 2 * QSum.root(6))).sign() == 0
    assert abs(QSum.root(3) - QSum.root(2)) > 0


def test_division():
    x = QSum.root(2, F(3))  # 3*sqrt(2)
    assert ((x / SQRT2) - 3).sign() == 0
    assert ((1 / SQRT2) - QSum({2: F(1, 2)})).sign() == 0
    with pytest.raises(TypeError):
        (SQRT2 + 1) / (SQRT2 + QSum.root(3))


def test_interval_and_square_compare():
    lo, hi = qsum_interval(SQRT2, 40)
    assert lo <= F(14142135623730951, 10**16) <= hi
    assert le_times_square(F(2), F(2), 1)          # 2 <= 2*1
    assert not le_times_square(F(3), F(2), 1)      # 3 > 2
    assert le_times_square(4, F(2), SQRT2)         # 4 <= 2*2


def test_float_and_repr():
    assert abs(float(SQRT2) - 2**0.5) < 1e-15
    assert not QSum()
    assert QSum.of(F(3, 2)).as_fraction() == F(3, 2)


@given(st.integers(1, 400), st.integers(1, 400))
@settings(max_examples=60, deadline=None)
def test_sqrt_multiplicative(a, b):
    assert (sqrt_exact(a) * sqrt_exact(b) - sqrt_exact(a * b)).sign() == 0


@given(st.fractions(min_value=0, max_value=100))
@settings(max_examples=60, deadline=None)
def test_sqrt_square_roundtrip(q):
    r = sqrt_exact(q)
    assert (r * r - q).sign() == 0
    assert r.sign() >= 0


def test_float_mixing_rejected():
    """Exact scalars refuse silent mixing with binary floats."""
    with pytest.raises(TypeError):
        SQRT2 + 0.1
    with pytest.raises(TypeError):
        SQRT2 < 1.5
    # explicit conversion is the supported route
    assert float(SQRT2) < 1.5
