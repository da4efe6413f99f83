from fractions import Fraction as F

import numpy as np
import pytest

from rudlab.coeffs import Coeffs, EnumerationCapError
from rudlab.exactnum import QSum, le_times_square
from rudlab.rademacher import (
    expect_exact,
    expect_mc,
    expect_perm,
    expect_second_moment,
    expect_subsets,
    sign_stats,
)
from rudlab.spaces import LpSpace, SummingDualSpace, SummingSpace

l1, l2 = LpSpace(1), LpSpace(2)
s, sd = SummingSpace(), SummingDualSpace()


def test_expect_exact_examples():
    assert expect_exact(l2, Coeffs.from_values([3, 4])).value == 5
    assert expect_exact(s, Coeffs.from_values([1, 1])).value == F(3, 2)
    assert expect_exact(sd, Coeffs.from_values([1, 1])).value == 3
    est = expect_exact(l2, Coeffs.zero())
    assert est.value == 0 and est.bracket == (0, 0)


def test_second_moment_examples():
    assert expect_second_moment(l2, Coeffs.from_values([3, 4])).value == 25
    assert expect_second_moment(l2, Coeffs.from_values([1])).value == 1
    assert expect_second_moment(s, Coeffs.from_values([1, 1])).value == F(5, 2)


def test_subsets_examples():
    assert expect_subsets(l1, Coeffs.from_values([1, 1])).value == 1
    assert expect_subsets(l2, Coeffs.from_values([1])).value == F(1, 2)
    assert expect_subsets(s, Coeffs.zero()).value == 0


def test_perm_examples():
    # both placements of one coefficient across two slots give norm 1
    one = Coeffs.from_pairs([(0, 1)])
    assert expect_perm(l1, one, span=(0, 1)).value == 1
    assert expect_perm(s, one, span=(0, 1)).value == 1
    # both placements of (1,2) have maximal tail 3
    assert expect_perm(s, Coeffs.from_pairs([(0, 1), (1, 2)])).value == 3
    # l1 is permutation-invariant
    assert expect_perm(l1, Coeffs.from_values([1, -2, 3])).value == 6
    a = Coeffs.from_pairs([(0, 1), (2, 1)])  # zero in the middle is permuted too
    est = expect_perm(s, a)
    assert est.method == "permutation"
    single = Coeffs.from_pairs([(5, F(7, 2))])
    assert expect_perm(sd, single).value == sd.norm(single)


def test_cap_errors():
    big = Coeffs.from_values([1] * 30)
    with pytest.raises(EnumerationCapError, match="expect_mc"):
        expect_exact(s, big)


def test_mc_constant_statistic():
    est = expect_mc(l2, Coeffs.from_values([3, 4]), samples=200, seed=9)
    assert est.value == 5.0 and est.bracket == (5.0, 5.0)


def test_mc_bracket_contains_exact():
    est = expect_mc(s, Coeffs.from_values([1, 1]), samples=100_000, seed=42)
    assert 1.45 <= est.value <= 1.55
    assert est.bracket[0] <= 1.5 <= est.bracket[1]


def test_mc_bit_identical():
    a = Coeffs.from_values([1, -2, 3, -1, 2])
    e1 = expect_mc(s, a, samples=5000, seed=123)
    e2 = expect_mc(s, a, samples=5000, seed=123)
    assert e1.value == e2.value and e1.bracket == e2.bracket
    e3 = expect_mc(s, a, samples=5000, seed=124)
    assert e3.value != e1.value


def test_mc_requires_samples():
    from rudlab.coeffs import DomainError

    with pytest.raises(DomainError):
        expect_mc(s, Coeffs.from_values([1]), samples=10)


def test_sandwich_subsets_kk_small():
    rng = np.random.default_rng(0)
    for space in (l1, l2, s, sd):
        for _ in range(10):
            m = int(rng.integers(1, 7))
            vals = rng.integers(-3, 4, size=m)
            a = Coeffs.from_pairs([(i, int(v)) for i, v in enumerate(vals) if v])
            if not a:
                continue
            st = sign_stats(space, a)
            mean = st.mean()
            assert (QSum.of(mean) - QSum.of(st.min())).sign() >= 0
            assert (QSum.of(st.max()) - QSum.of(mean)).sign() >= 0
            assert le_times_square(st.mean_sq(), F(2), mean)


def test_summing_dual_mean_closed_form():
    """Independent oracle: termwise averaged difference formula."""
    rng = np.random.default_rng(1)
    for _ in range(15):
        m = int(rng.integers(1, 8))
        vals = [int(v) for v in rng.integers(-3, 4, size=m)]
        if not any(vals):
            continue
        a = Coeffs.from_values([v for v in vals])
        a = Coeffs.from_pairs([(i, v) for i, v in enumerate(vals) if v])
        if len(a) != m:
            continue  # keep the contiguous-support closed form applicable
        got = expect_exact(sd, a).value
        want = abs(F(vals[0])) + abs(F(vals[-1]))
        for x, y in zip(vals, vals[1:]):
            want += F(1, 2) * (abs(F(x + y)) + abs(F(x - y)))
        assert got == want


def test_chunked_enumeration_matches_full():
    """Splitting the bitmask range into chunks cannot change exact results."""
    import rudlab.rademacher as rad

    a = Coeffs.from_values([1, -2, 3, -1, 2, 1])
    full_mean = rad.expect_exact(s, a).value
    full_sq = rad.expect_second_moment(s, a).value
    full_sub = rad.expect_subsets(s, a).value
    old = rad._FULL_BATCH_BITS, rad._CHUNK
    try:
        rad._FULL_BATCH_BITS = 2
        for chunk in (4, 16, 64):
            rad._CHUNK = chunk
            assert rad.expect_exact(s, a).value == full_mean
            assert rad.expect_second_moment(s, a).value == full_sq
            assert rad.expect_subsets(s, a).value == full_sub
    finally:
        rad._FULL_BATCH_BITS, rad._CHUNK = old


def test_mc_zero_vector():
    est = expect_mc(s, Coeffs.zero(), samples=500, seed=1)
    assert est.value == 0.0 and est.bracket == (0.0, 0.0)
