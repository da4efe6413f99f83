"""Sign-average engines.

Exact expectation over all sign patterns, exact subset (0/1 mask) and
permutation averages, second moments, and seeded Monte-Carlo estimation
with Student-t confidence brackets.

Exact enumeration walks the 2^m canonical bitmask patterns in fixed-size
chunks; partial sums are combined by exact addition, so results do not
depend on the chunking.  Monte-Carlo sample i is a pure function of
(seed, i) via the counter-based generator, so estimates are bit-identical
across runs and worker counts.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .batches import ExactBatch
from .coeffs import (
    Coeffs,
    DomainError,
    EnumerationCapError,
    DEFAULT_ENUM_CAP,
    enumerate_sign_patterns,
    apply_signs,
    mask_matrix_full,
    sign_matrix_full,
)
from .exactnum import Scalar
from .rng import DEFAULT_SEED, sign_matrix
from .spaces import Space

_CHUNK = 1 << 13  # exact-enumeration chunk width (results are chunk-invariant)
_MC_CHUNK = 4096


@dataclass(frozen=True)
class ExpectationEstimate:
    """Value of a sign average with its method tag and rigor bracket."""

    value: Scalar
    method: str  # exact | monte_carlo | subsets | permutation
    samples: int = 0
    seed: int | None = None
    bracket: tuple[Scalar, Scalar] | None = None
    confidence: float | None = None

    def __post_init__(self):
        if self.method != "monte_carlo" and self.bracket is None:
            object.__setattr__(self, "bracket", (self.value, self.value))
        lo, hi = self.bracket
        if not float(lo) <= float(self.value) <= float(hi):
            raise DomainError("bracket must contain the estimate")

    @property
    def upper(self) -> Scalar:
        return self.bracket[1]

    @property
    def lower(self) -> Scalar:
        return self.bracket[0]

    def to_json(self) -> dict:
        lo, hi = self.bracket
        return {
            "value": float(self.value),
            "method": self.method,
            "samples": self.samples,
            "seed": self.seed,
            "bracket": [float(lo), float(hi)],
            "confidence": self.confidence,
        }


def _check_cap(a: Coeffs, cap: int) -> int:
    m = len(a)
    if m > cap:
        raise EnumerationCapError(
            f"support of size {m} exceeds the enumeration cap {cap}; use expect_mc"
        )
    return m


def sign_stats(space: Space, a: Coeffs, cap: int = DEFAULT_ENUM_CAP) -> ExactBatch:
    """Exact norms of a under all 2^m sign patterns (canonical order)."""
    m = _check_cap(a, cap)
    try:
        batch = space.mult_batch(a, sign_matrix_full(m), 1)
    except ValueError:  # radical-valued entries: no integer matrix form
        batch = None
    if batch is not None:
        return batch
    values = [space.norm(apply_signs(a, e)) for e in enumerate_sign_patterns(a.support, cap)]
    return ExactBatch.from_scalars(values)


def subset_stats(space: Space, a: Coeffs, cap: int = DEFAULT_ENUM_CAP) -> ExactBatch:
    """Exact norms of a under all 2^m coordinate masks."""
    m = _check_cap(a, cap)
    try:
        batch = space.mult_batch(a, mask_matrix_full(m), 1)
    except ValueError:
        batch = None
    if batch is not None:
        return batch
    sup = a.support
    values: list[Scalar] = []
    for mask in range(1 << m):
        keep = [sup[k] for k in range(m) if (mask >> k) & 1]
        values.append(space.norm(a.restrict(keep)))
    return ExactBatch.from_scalars(values)


#: full per-pattern batches are materialised up to this support size;
#: beyond it the bitmask range is walked in chunks and the exact partial
#: means are combined, so the result never depends on the chunking
_FULL_BATCH_BITS = 16


def _chunked_mean(space: Space, a: Coeffs, m: int, masks: bool, squared: bool) -> Scalar:
    from .coeffs import mask_matrix_range, sign_matrix_range

    build = mask_matrix_range if masks else sign_matrix_range
    total: Scalar = 0
    chunk = _CHUNK
    for start in range(0, 1 << m, chunk):
        stop = min(start + chunk, 1 << m)
        batch = space.mult_batch(a, build(m, start, stop), 1)
        if batch is None:
            raise EnumerationCapError(
                "no exact batch path for a support this large; use expect_mc"
            )
        part = batch.mean_sq() if squared else batch.mean()
        total = total + part * Fraction(stop - start, 1 << m)
    return total


def expect_exact(space: Space, a: Coeffs, cap: int = DEFAULT_ENUM_CAP) -> ExpectationEstimate:
    if not a:
        return ExpectationEstimate(0, "exact")
    m = _check_cap(a, cap)
    if m > _FULL_BATCH_BITS:
        return ExpectationEstimate(_chunked_mean(space, a, m, False, False), "exact")
    return ExpectationEstimate(sign_stats(space, a, cap).mean(), "exact")


def expect_second_moment(space: Space, a: Coeffs, cap: int = DEFAULT_ENUM_CAP) -> ExpectationEstimate:
    if not a:
        return ExpectationEstimate(0, "exact")
    m = _check_cap(a, cap)
    if m > _FULL_BATCH_BITS:
        return ExpectationEstimate(_chunked_mean(space, a, m, False, True), "exact")
    return ExpectationEstimate(sign_stats(space, a, cap).mean_sq(), "exact")


def expect_subsets(space: Space, a: Coeffs, cap: int = DEFAULT_ENUM_CAP) -> ExpectationEstimate:
    if not a:
        return ExpectationEstimate(0, "subsets")
    m = _check_cap(a, cap)
    if m > _FULL_BATCH_BITS:
        return ExpectationEstimate(_chunked_mean(space, a, m, True, False), "subsets")
    return ExpectationEstimate(subset_stats(space, a, cap).mean(), "subsets")


def expect_perm(
    space: Space,
    a: Coeffs,
    perm_cap: int = 8,
    span: tuple[int, int] | None = None,
) -> ExpectationEstimate:
    """Exact average over all placements of the coefficients along a
    contiguous index range (default: the span of the support); positions
    without a coefficient carry zeros and are permuted too."""
    if not a:
        return ExpectationEstimate(0, "permutation")
    lo, hi = span if span is not None else (a.support[0], a.support[-1])
    if lo > a.support[0] or hi < a.support[-1]:
        raise DomainError("span must cover the support")
    positions = list(range(lo, hi + 1))
    if len(positions) > perm_cap:
        raise DomainError(
            f"span of size {len(positions)} exceeds the permutation cap {perm_cap}"
        )
    values = [a.value(i) for i in positions]
    total: Scalar = 0
    count = 0
    for perm in itertools.permutations(values):
        total = total + space.norm(Coeffs.from_pairs(zip(positions, perm)))
        count += 1
    return ExpectationEstimate(total * Fraction(1, count), "permutation")


def _t_quantile(df: int, confidence: float) -> float:
    from scipy.stats import t

    return float(t.ppf(0.5 + confidence / 2.0, df))


def expect_mc(
    space: Space,
    a: Coeffs,
    samples: int,
    seed: int = DEFAULT_SEED,
    confidence: float = 0.95,
) -> ExpectationEstimate:
    """Seeded Monte-Carlo mean of norms over i.i.d. uniform sign patterns.

    The bracket is a two-sided Student-t confidence interval from the
    sample mean and sample variance; it is statistical, not rigorous.
    """
    if samples < 100:
        raise DomainError("Monte-Carlo estimation requires at least 100 samples")
    if not a:
        return ExpectationEstimate(
            0.0, "monte_carlo", samples, seed, (0.0, 0.0), confidence
        )
    m = len(a)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        n = min(_MC_CHUNK, samples - done)
        signs = sign_matrix(seed, m, n, start=done).astype(np.float64)
        vals = space.mult_batch_float(a, signs)
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        done += n
    mean = total / samples
    var = max(0.0, (total_sq - samples * mean * mean) / max(1, samples - 1))
    half = _t_quantile(samples - 1, confidence) * math.sqrt(var / samples)
    return ExpectationEstimate(
        mean, "monte_carlo", samples, seed, (mean - half, mean + half), confidence
    )


def expect_auto(
    space: Space,
    a: Coeffs,
    cap: int = DEFAULT_ENUM_CAP,
    samples: int = 100_000,
    seed: int = DEFAULT_SEED,
    confidence: float = 0.95,
) -> ExpectationEstimate:
    """Exact when the support fits under the cap, Monte-Carlo otherwise."""
    try:
        return expect_exact(space, a, cap)
    except EnumerationCapError:
        return expect_mc(space, a, samples, seed, confidence)
