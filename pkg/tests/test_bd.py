"""Tree construction: biorthogonality, sandwiches, chains, projections."""

from fractions import Fraction as F

import numpy as np
import pytest

from rudlab.bd import (
    BDParams,
    BdBasisSpace,
    build_gamma,
    chain_replay_value,
    chain_vector,
    chain_witness,
    projection_matrix,
)
from rudlab.coeffs import Coeffs, DomainError
from rudlab.rademacher import sign_stats


@pytest.fixture(scope="module")
def gamma():
    return build_gamma(BDParams())


def test_params_validation():
    with pytest.raises(DomainError):
        BDParams(lam=F(2), b=F(1, 3))  # 1 + 2bl = 7/3 > 2
    with pytest.raises(DomainError):
        BDParams(lam=F(1))
    with pytest.raises(DomainError):
        BDParams(b=F(1, 2))
    BDParams(lam=F(2), b=F(1, 4))  # tight instance is admissible


def test_level_zero():
    g = build_gamma(BDParams(levels=0))
    assert g.size == 1
    assert g.D.tolist() == [[1]] and g.Dstar.tolist() == [[1]]


def test_biorthogonality_exact(gamma):
    assert gamma.biorthogonality_defect() == 0


def test_biorthogonality_small_vs_fraction_oracle():
    """Independent check: exact Fraction dot products on a small build."""
    g = build_gamma(BDParams(levels=3, cap=12, seed=1))
    n = g.size
    D = [[F(int(g.D[i, j]), g.d_scale) for j in range(n)] for i in range(n)]
    Ds = [[F(int(g.Dstar[i, j]), g.s_scale) for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(n):
            dot = sum(Ds[i][k] * D[k][j] for k in range(n))
            assert dot == (1 if i == j else 0)


def test_norm_ranges(gamma):
    lam = gamma.params.lam
    assert all(x >= 1 for x in gamma.dual_l1_norms())
    assert all(x <= lam for x in gamma.basis_sup_norms())
    assert all(x >= 1 for x in gamma.basis_sup_norms())


def test_restriction_identity(gamma):
    for m in range(len(gamma.levels)):
        idxs = gamma.level_indices(m)
        sub = gamma.D[np.ix_(idxs, idxs)]
        assert np.array_equal(sub, gamma.d_scale * np.eye(len(idxs), dtype=np.int64))


def test_projections(gamma):
    for m in (0, 1, 2):
        P, s = projection_matrix(gamma, m)
        assert np.array_equal(P @ P, s * P)  # idempotent, exact
    P, s = projection_matrix(gamma, len(gamma.levels) - 1)
    assert np.array_equal(P, s * np.eye(gamma.size, dtype=np.int64))
    P0, _ = projection_matrix(gamma, 0)
    assert np.linalg.matrix_rank(P0.astype(np.float64)) == 1
    with pytest.raises(DomainError):
        projection_matrix(gamma, 99)


def test_level_sandwich(gamma):
    space = BdBasisSpace(gamma)
    lam = gamma.params.lam
    rng = np.random.default_rng(0)
    for m in range(len(gamma.levels)):
        idxs = gamma.level_indices(m)
        for _ in range(4):
            pick = rng.choice(idxs, size=min(5, len(idxs)), replace=False)
            vals = rng.integers(-3, 4, size=len(pick))
            a = Coeffs.from_pairs(
                [(int(i), int(v)) for i, v in zip(pick, vals) if v]
            )
            if not a:
                continue
            n = F(space.norm(a))
            mx = max(abs(F(v)) for _, v in a.entries)
            assert mx <= n <= lam * mx


def test_top_level_basis_vectors_are_coordinates(gamma):
    top = len(gamma.levels) - 1
    for i in gamma.level_indices(top)[:10]:
        col = gamma.D[:, i]
        assert col[i] == gamma.d_scale and np.abs(col).sum() == gamma.d_scale


def test_chain_replay(gamma):
    b = F(gamma.params.b)
    for l in (1, 2, 3):
        levels = tuple(range(l + 1))
        chain = chain_witness(gamma, levels)
        assert len(chain) == l
        v = chain_vector(gamma, levels)
        coord = gamma.coordinate(chain[-1], v)
        assert coord == chain_replay_value(gamma, levels) == 1 + b * l
    # signed decorations replay identically
    for signs in [(1, -1), (-1, 1, -1), (1, 1, -1, 1)]:
        levels = tuple(range(len(signs)))
        chain = chain_witness(gamma, levels, signs)
        v = chain_vector(gamma, levels, signs)
        assert gamma.coordinate(chain[-1], v) == chain_replay_value(gamma, levels)
    with pytest.raises(DomainError, match="chain"):
        chain_witness(gamma, (0, 1, 2, 3, 4))


def test_multilevel_two_sided(gamma):
    space = BdBasisSpace(gamma)
    lam, b = gamma.params.lam, gamma.params.b
    rng = np.random.default_rng(7)
    for mset in [(0, 2), (0, 3), (1, 3)]:
        for _ in range(3):
            pairs = []
            for m in mset:
                for i in gamma.level_indices(m):
                    pairs.append((i, int(rng.choice([-1, 1]))))
            a = Coeffs.from_pairs(pairs)
            n = F(space.norm(a))
            summax = len(mset)
            assert n / lam <= summax <= n / b
    for l in (1, 2, 3):
        v = chain_vector(gamma, tuple(range(l + 1)))
        n = F(space.norm(v))
        assert n / lam <= l + 1 <= n / b


def test_rud_ratio_bound(gamma):
    space = BdBasisSpace(gamma)
    bound = float(gamma.params.lam * (2 / gamma.params.b + 1))
    rng = np.random.default_rng(9)
    for _ in range(10):
        size = int(rng.integers(2, 9))
        pick = rng.choice(np.arange(gamma.size), size=size, replace=False)
        vals = rng.integers(-3, 4, size=size)
        a = Coeffs.from_pairs([(int(i), int(v)) for i, v in zip(pick, vals) if v])
        if not a:
            continue
        st = sign_stats(space, a)
        assert float(space.norm(a)) / float(st.mean()) <= bound


def test_cap_policy_determinism():
    g1 = build_gamma(BDParams(levels=3, cap=40, seed=5))
    g2 = build_gamma(BDParams(levels=3, cap=40, seed=5))
    assert [len(l) for l in g1.levels] == [len(l) for l in g2.levels]
    assert np.array_equal(g1.D, g2.D) and np.array_equal(g1.Dstar, g2.Dstar)
    g3 = build_gamma(BDParams(levels=3, cap=40, seed=6))
    assert not np.array_equal(g1.D, g3.D)


def test_uncapped_small_build():
    g = build_gamma(BDParams(levels=2, cap=10**6))
    assert [len(l) for l in g.levels] == [1, 2, 24]
    assert g.biorthogonality_defect() == 0


def test_bd_rud_report(gamma):
    from rudlab.bd import bd_rud_report

    rep = bd_rud_report(gamma, samples=6, seed=4)
    assert rep["partition"].all_ok
    assert rep["max_ratio"] <= rep["rud_bound"] == 18.0
    ys = [y for _, y in rep["growth"]]
    assert ys == sorted(ys) and len(set(ys)) == len(ys)
    assert len(rep["classes"]) == 3


def test_chain_witness_trivial(gamma):
    from rudlab.bd import chain_witness

    assert chain_witness(gamma, (0,)) == []
    with pytest.raises(DomainError, match="one sign per level"):
        chain_witness(gamma, (0, 1), (1,))
