from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rudlab.coeffs import (
    Coeffs,
    DomainError,
    EnumerationCapError,
    SignPattern,
    apply_signs,
    enumerate_sign_patterns,
    mask_matrix_full,
    pair,
    sign_matrix_full,
)
from rudlab.exactnum import QSum, SQRT2
from rudlab.rng import sign_matrix, sign_vector


def test_apply_signs_examples():
    a = Coeffs.from_values([1, -2])
    e = SignPattern(((0, 1), (1, -1)))
    assert apply_signs(a, e).entries == ((0, 1), (1, 2))
    a = Coeffs.from_values([3])
    assert apply_signs(a, SignPattern(((0, 1),))) == a
    a = Coeffs.from_values([1, 1, 1])
    flipped = apply_signs(a, SignPattern.constant((0, 1, 2), -1))
    assert [v for _, v in flipped.entries] == [-1, -1, -1]


def test_apply_signs_cover_error():
    a = Coeffs.from_values([1, 2])
    with pytest.raises(DomainError, match="sign pattern does not cover support"):
        apply_signs(a, SignPattern(((0, 1),)))


def test_pair_examples():
    phi = Coeffs.from_pairs([(1, 1)])
    assert pair(phi, Coeffs.from_pairs([(1, 5), (2, 7)])) == 5
    w = QSum({2: F(1, 2)})  # 1/sqrt(2)
    phi = Coeffs.from_pairs([(1, w), (2, w)])
    got = pair(phi, Coeffs.from_pairs([(1, 1), (2, 1)]))
    assert (QSum.of(got) - SQRT2).sign() == 0
    assert pair(Coeffs.zero(), Coeffs.from_values([1, 2])) == 0


def test_enumeration():
    pats = list(enumerate_sign_patterns({3}))
    assert [p.signs for p in pats] == [((3, 1),), ((3, -1),)]
    pats = list(enumerate_sign_patterns({1, 2}))
    assert len(pats) == 4 and len({p.signs for p in pats}) == 4
    assert len(list(enumerate_sign_patterns(range(10)))) == 1024
    with pytest.raises(EnumerationCapError, match="Monte-Carlo"):
        list(enumerate_sign_patterns(range(30)))


def test_sign_mask_matrices():
    s = sign_matrix_full(3)
    assert s.shape == (3, 8)
    assert sorted(map(tuple, s.T.tolist())) == sorted(
        [(a, b, c) for a in (1, -1) for b in (1, -1) for c in (1, -1)]
    )
    m = mask_matrix_full(2)
    assert sorted(map(tuple, m.T.tolist())) == [(0, 0), (0, 1), (1, 0), (1, 1)]


coeff_values = st.lists(
    st.integers(-4, 4).filter(lambda x: x != 0), min_size=1, max_size=8
)


@given(coeff_values, st.integers(0, 255))
@settings(max_examples=80, deadline=None)
def test_involution(values, mask):
    a = Coeffs.from_values(values)
    e = SignPattern.from_mask(a.support, mask & ((1 << len(a)) - 1))
    assert apply_signs(apply_signs(a, e), e) == a


@given(coeff_values, coeff_values, coeff_values)
@settings(max_examples=60, deadline=None)
def test_pair_bilinear(ws, xs, ys):
    phi = Coeffs.from_values(ws)
    a, b = Coeffs.from_values(xs), Coeffs.from_values(ys)
    assert pair(phi, a + b) == pair(phi, a) + pair(phi, b)


@given(coeff_values)
@settings(max_examples=40, deadline=None)
def test_enumeration_symmetry(values):
    a = Coeffs.from_values(values)
    total = Coeffs.zero()
    for e in enumerate_sign_patterns(a.support):
        total = total + apply_signs(a, e)
    assert total == Coeffs.zero()


def test_counter_rng_scalar_matches_numpy():
    for seed in (0, 1, 0xC0FFEE):
        mat = sign_matrix(seed, 70, 5, start=3)
        for j in range(5):
            assert sign_vector(seed, 70, 3 + j) == mat[:, j].tolist()


def test_counter_rng_chunk_invariance():
    a = np.concatenate(
        [sign_matrix(7, 10, 4, start=0), sign_matrix(7, 10, 6, start=4)], axis=1
    )
    b = sign_matrix(7, 10, 10, start=0)
    assert np.array_equal(a, b)


def test_int_values_magnitude_guard():
    big = Coeffs.from_values([1 << 30])
    with pytest.raises(DomainError, match="26 bits"):
        big.int_values()
    # denominators count toward the scaled magnitude
    mixed = Coeffs.from_values([F(1, 1 << 20), F(1 << 10)])
    with pytest.raises(DomainError):
        mixed.int_values()
    ok = Coeffs.from_values([F(3, 2), -7])
    ints, den = ok.int_values()
    assert ints.tolist() == [3, -14] and den == 2
