"""Acceptance suite: one test per criterion, one verdict line each.

Every criterion runs at its stated tolerance through the same experiment
functions the ``certify`` command uses, so a CLI run reproduces exactly
these checks.  Criterion 2's displayed lower inequality is provably false
for conditional engines (see the decisions ledger for the brute-force
counterexample); it is implemented faithfully and marked as a strict
expected failure, while its true upper half is asserted for every engine
and the lower half for the unconditional ones.
"""

import pytest

from rudlab.config import RunConfig
from rudlab.experiments import EXPERIMENTS, run_experiment

CFG = RunConfig()
_CACHE: dict[str, object] = {}


def _report(name: str):
    if name not in _CACHE:
        _CACHE[name] = run_experiment(name, CFG)
    return _CACHE[name]


def _check(num: int, title: str, report, rows=None) -> None:
    picked = [r for r in report.rows if rows is None or any(r.rid.startswith(p) for p in rows)]
    assert picked, f"no rows matched {rows}"
    failed = [r for r in picked if r.verdict == "FAIL"]
    warned = [r for r in picked if r.verdict == "WARN"]
    verdict = "FAIL" if failed else ("WARN" if warned else "PASS")
    print(f"\nACCEPTANCE {num:02d} {verdict}: {title}")
    for r in picked:
        print("   ", r.line())
    assert not failed, f"criterion {num} failed rows: {[r.rid for r in failed]}"


def test_c01_sandwich():
    _check(1, "sign-average sandwich on every engine, exact, zero tolerance",
           _report("sandwich"))


def test_c02_subsets_upper_half_and_unconditional_lower():
    rep = _report("subsets")
    _check(2, "subset-average comparison: provable parts",
           rep, rows=["subsets.upper"])
    unconditional = [
        f"subsets.lower.{s}" for s in
        ("lp:1", "lp:2", "linf", "walsh", "haar")
    ]
    _check(2, "subset average below sign average on unconditional engines",
           rep, rows=unconditional)


@pytest.mark.xfail(
    strict=True,
    reason="the displayed lower inequality E0 <= E is false for conditional "
    "engines: summing basis, constant coefficients, m = 6 gives E0 = 3 > "
    "E = 85/32 (see the decisions ledger); implemented faithfully, fails honestly",
)
def test_c02_subsets_as_displayed():
    rep = _report("subsets")
    _check(2, "subset-average two-sided comparison exactly as displayed", rep)


def test_c03_parallelogram():
    _check(3, "mean squared Euclidean norm equals the coefficient square sum",
           _report("parallelogram"))


def test_c04_khintchine_kahane():
    _check(4, "second moment bounded by twice the squared mean, every engine",
           _report("khintchine-kahane"))


def test_c05_contraction():
    _check(5, "contraction under {0,+-1/2,+-1} multipliers, exact",
           _report("contraction"))


def test_c06_summing():
    _check(6, "summing norm: root-two/2 sandwich plus both length-16 witnesses",
           _report("summing"),
           rows=["summing.lower", "summing.upper",
                 "summing.ruc_witness", "summing.rud_witness"])


def test_c07_summing_duals():
    _check(7, "dual system: l1 lower bound and twice-mean upper bound, exact",
           _report("summing"), rows=["summing.dual_lower", "summing.dual_upper"])


def test_c08_james():
    _check(8, "chain norms: 2x l2 bound, skipped lower bound, ratio <= 4",
           _report("james"))


def test_c09_walsh():
    _check(9, "product-sign system in L1: max/sign-average/ratio bounds",
           _report("walsh"))


def test_c10_bmo():
    _check(10, "square-function norm: mean <= 3 l2 <= 3 norm, exact",
           _report("bmo"))


def test_c11_renorm():
    _check(11, "renormed convergence ratios <= 1 + delta, exact",
           _report("renorm"))


def test_c12_partition():
    _check(12, "partition bound on l1, tree, and summing instances",
           _report("partition"))


def test_c13_duality():
    _check(13, "dual divergence ratios <= twice the measured primal constant",
           _report("duality"))


def test_c14_bd():
    _check(14, "tree construction: biorthogonality, sandwiches, chains, ratio <= 18",
           _report("bd"))


def test_c15_zmr():
    _check(15, "witness gap ratios: norms >= n, strictly increasing, 1.5x growth",
           _report("zmr"))


def test_c16_zruc():
    _check(16, "convergence-side construction is 2-bounded on the first two levels",
           _report("zruc"))


def test_c17_zrud():
    _check(17, "block sandwich and the 1/rho ratio bound, exact",
           _report("zrud"))


def test_c18_haar_blocks():
    rep = _report("haar-blocks")
    _check(18, "tree-system blocks: divergence ratios reported (warn-only)", rep)


def test_c19_smax():
    _check(19, "summing/l2 maximum: bracket and convergence ratio <= 3",
           _report("smax"))


def test_every_experiment_registered():
    assert set(EXPERIMENTS) >= {
        "summing", "james", "walsh", "bmo", "smax", "renorm", "partition",
        "duality", "zmr", "zruc", "zrud", "bd", "haar-blocks",
        "khintchine-kahane", "contraction", "parallelogram",
    }
