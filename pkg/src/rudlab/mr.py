"""Coding-function sequence spaces and their witness vectors.

The construction lives on a strictly increasing sequence of even level
cardinalities, an injective coding function sigma from finite index sets
into the level sequence, and families of admissible set tuples whose
cardinalities are forced by sigma.  Three norms are built on top:

* the base space: supremum of undecorated tuple-functional pairings joined
  with the coordinate supremum;
* the convergence-side space: base norm plus its own sign average;
* the divergence-side space: supremum over tuple functionals decorated with
  equi-distributed signs per level, plus undecorated and coordinate
  functionals.

Desk-scale soundness notes.  The classical smallness condition on the level
sequence cannot hold with small numbers, so the pair-interaction sum
``delta_hat`` is computed from the declared prefix and carried through every
bound.  Likewise the product of equi-distributed fractions ``rho_hat`` is
measured, never assumed close to 1, and the divergence-side ratio bound is
stated against ``1/rho_hat``.

Norming families are restricted to a finite support by enumerating, for
every sigma-consistent tuple prefix, all intersections a free final set can
have with the support ("tail closure"); this is what makes the finite
restriction complete.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .coeffs import Coeffs, DomainError, NormingFunctional
from .exactnum import QSum, Scalar, sqrt_exact
from .spaces import NormingSetSpace, RenormSpace, Space

DEFAULT_LEVELS = (2, 4, 8)
DEFAULT_UNIVERSE = 14
DEFAULT_MAX_N = 3


def k_m(m: int) -> int:
    """Number of balanced sign vectors on a set of even cardinality m."""
    if m < 2 or m % 2:
        raise DomainError(f"equi-distributed signs need an even cardinality, got {m}")
    return comb(m, m // 2)


def equi_sign_vectors(c: int, width: int = 0) -> list[tuple[int, ...]]:
    """Sign vectors on c slots with |sum| <= width * sqrt(c) (width 0: balanced)."""
    out = []
    lim_sq = width * width * c
    for plus in range(c + 1):
        if (2 * plus - c) ** 2 <= lim_sq:
            for pos in itertools.combinations(range(c), plus):
                sv = [-1] * c
                for p in pos:
                    sv[p] = 1
                out.append(tuple(sv))
    return out


@dataclass(frozen=True)
class LevelSequence:
    """A finite prefix of the even level-cardinality sequence."""

    prefix: tuple[int, ...] = DEFAULT_LEVELS

    def __post_init__(self):
        p = self.prefix
        if not p or any(m % 2 or m < 2 for m in p) or any(
            p[i] >= p[i + 1] for i in range(len(p) - 1)
        ):
            raise DomainError("levels must be strictly increasing even integers >= 2")

    def virtual(self, k: int) -> int:
        """The k-th level (0-based), doubling past the declared prefix."""
        if k < len(self.prefix):
            return self.prefix[k]
        return self.prefix[-1] << (k - len(self.prefix) + 1)

    @property
    def delta_hat(self) -> QSum:
        """sum over ordered pairs j != k of sqrt(min(m_j/m_k, m_k/m_j))."""
        total = QSum()
        for j, mj in enumerate(self.prefix):
            for k, mk in enumerate(self.prefix):
                if j != k:
                    r = Fraction(min(mj, mk), max(mj, mk))
                    total = total + sqrt_exact(r)
        return total

    @property
    def rho_hat(self) -> Fraction:
        """Product over the prefix of k_m / 2^m."""
        rho = Fraction(1)
        for m in self.prefix:
            rho *= Fraction(k_m(m), 1 << m)
        return rho

    def rho_used(self, cards: tuple[int, ...]) -> Fraction:
        """The same product over the level cardinalities actually present."""
        rho = Fraction(1)
        for c in cards:
            rho *= Fraction(k_m(c), 1 << c)
        return rho


class SigmaCoder:
    """Deterministic injective assignment s -> sigma(s) with sigma(s) > #s.

    The domain is every nonempty even-cardinality subset of the index
    universe (unions of admissible tuples always have even cardinality).
    Subsets are processed in a fixed global order -- decreasing cardinality,
    then increasing maximum, then lexicographic -- and each receives the
    smallest still-unused element of the level sequence (second level
    onward, virtually extended past the prefix) exceeding its cardinality.
    Processing large subsets first is what lets small prefix levels reach
    the consecutive-block unions that the witness vectors are built from;
    the assignment never depends on query order.
    """

    def __init__(self, levels: LevelSequence, universe: int = DEFAULT_UNIVERSE):
        self.levels = levels
        self.universe = universe
        self._index: dict[frozenset[int], int] = {}
        # smallest level index whose value exceeds a given cardinality
        threshold: dict[int, int] = {}
        for card in range(2, universe + 1, 2):
            k = 1  # codomain starts at the second level
            while levels.virtual(k) <= card:
                k += 1
            threshold[card] = k
        skip: dict[int, int] = {}  # union-find "next unused level index"

        def take(k: int) -> int:
            path = []
            while k in skip:
                path.append(k)
                k = skip[k]
            for p in path:
                skip[p] = k
            skip[k] = k + 1
            return k

        subsets: list[tuple[int, ...]] = []
        for card in range(2, universe + 1, 2):
            subsets.extend(itertools.combinations(range(universe), card))
        subsets.sort(key=lambda s: (-len(s), max(s), s))
        for s in subsets:
            self._index[frozenset(s)] = take(threshold[len(s)])

    def sigma(self, s: frozenset[int]) -> int:
        k = self.sigma_index(s)
        if k is None:
            raise DomainError(
                f"sigma is undefined for {sorted(s)} (outside the coded universe)"
            )
        return self.levels.virtual(k)

    def sigma_index(self, s: frozenset[int]) -> int | None:
        """Position of sigma(s) in the level sequence, or None off-domain."""
        return self._index.get(frozenset(s))

    def sigma_in_prefix(self, s: frozenset[int]) -> int | None:
        """sigma(s) when it lands inside the declared prefix, else None."""
        k = self._index.get(frozenset(s))
        if k is None or k >= len(self.levels.prefix):
            return None
        return self.levels.prefix[k]

    def sigma_capped(self, s: frozenset[int], cap: int) -> int | None:
        """sigma(s) when it is <= cap, else None (avoids huge virtual values)."""
        k = self._index.get(frozenset(s))
        if k is None or k >= len(self.levels.prefix) + max(cap, 2).bit_length():
            return None
        v = self.levels.virtual(k)
        return v if v <= cap else None

    def in_domain(self, s: frozenset[int]) -> bool:
        return frozenset(s) in self._index

    def assignments(self):
        """(subset, level index, value) triples for audit sweeps."""
        for s, k in self._index.items():
            yield s, k, self.levels.virtual(k)


@dataclass(frozen=True)
class AdmissibleTuple:
    """Successive sets s_1 < ... < s_n with sigma-forced cardinalities."""

    sets: tuple[frozenset[int], ...]
    flavor: str = "B0"  # B0: undecorated family; B: decorated variant

    def __post_init__(self):
        prev_max = -1
        for s in self.sets:
            if min(s) <= prev_max:
                raise DomainError("tuple sets must be successive")
            prev_max = max(s)


def enumerate_tuples(
    support: tuple[int, ...],
    coder: SigmaCoder,
    levels: LevelSequence,
    max_n: int = DEFAULT_MAX_N,
    flavor: str = "B0",
) -> list[AdmissibleTuple]:
    """All admissible tuples with every set contained in the support."""
    sup = sorted(set(support))
    out: list[AdmissibleTuple] = []
    if max_n <= 0:
        return out

    def extend(prefix: list[frozenset[int]], union: frozenset[int], min_next: int):
        if prefix:
            out.append(AdmissibleTuple(tuple(prefix), flavor))
        if len(prefix) == max_n:
            return
        if prefix:
            nxt = coder.sigma_in_prefix(union) if coder.in_domain(union) else None
            cards = [] if nxt is None else [nxt]
        else:
            cards = list(levels.prefix)
        avail = [i for i in sup if i > min_next]
        for card in cards:
            if card > len(avail) or (prefix and card <= len(prefix[-1])):
                continue
            for combo in itertools.combinations(avail, card):
                s = frozenset(combo)
                extend(prefix + [s], union | s, max(combo))

    extend([], frozenset(), -1)
    return out


# ---------------------------------------------------------------------------
# norming families over a finite support (tail closure)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TupleFamily:
    """A sigma-consistent tuple prefix plus one free final set.

    ``fixed`` are the fully determined sets (inside the coded universe);
    the final set is only constrained by its cardinality ``tail_card`` and
    by living strictly above ``tail_min``.
    """

    fixed: tuple[frozenset[int], ...]
    tail_card: int
    tail_min: int


def closure_families(coder: SigmaCoder, levels: LevelSequence, max_n: int) -> list[TupleFamily]:
    """Every family of admissible tuples seen from a finite support.

    Length-1 tuples are free sets of any level cardinality; cardinalities
    past the first one covering the universe are dominated (same tails at a
    smaller weight) and pruned.  Longer tuples must have sigma-consistent
    prefixes inside the coded universe; prefixes whose forced next
    cardinality exceeds twice the universe are pruned too -- their fixed
    parts are restrictions already produced by shorter families and the
    pruned free tail carries weight below 1/sqrt(2 * universe) of it.
    """
    free_cards: list[int] = []
    k = 0
    while True:
        v = levels.virtual(k)
        free_cards.append(v)
        if v >= coder.universe:
            break
        k += 1
    families: list[TupleFamily] = [TupleFamily((), c, -1) for c in free_cards]
    cap = 2 * coder.universe

    def extend(prefix: list[frozenset[int]], union: frozenset[int], depth: int):
        if depth >= max_n:
            return
        card = coder.sigma_capped(union, cap) if coder.in_domain(union) else None
        if card is None or card <= len(prefix[-1]):
            return
        lo = max(union)
        families.append(TupleFamily(tuple(prefix), card, lo))
        avail = [i for i in range(coder.universe) if i > lo]
        if card > len(avail):
            return
        for combo in itertools.combinations(avail, card):
            s = frozenset(combo)
            extend(prefix + [s], union | s, depth + 1)

    for c in levels.prefix:
        if c > coder.universe:
            continue
        for combo in itertools.combinations(range(coder.universe), c):
            s = frozenset(combo)
            extend([s], s, 1)
    return families


def _weight(card: int) -> QSum:
    return QSum({1: Fraction(1)}) / sqrt_exact(card)


def _subsets_upto(items: list[int], cap: int):
    for j in range(0, min(cap, len(items)) + 1):
        yield from itertools.combinations(items, j)


def zmr_functionals(
    ctx: "MrContext", support: tuple[int, ...]
) -> list[NormingFunctional]:
    """Undecorated tuple functionals of the base family, restricted to the
    support, tails enumerated over every admissible intersection."""
    sup = sorted(set(support))
    out: list[NormingFunctional] = []
    for fam in ctx.families:
        fixed_pairs: list[tuple[int, Scalar]] = []
        for s in fam.fixed:
            w = _weight(len(s))
            fixed_pairs.extend((i, w) for i in s if i in set(sup))
        tail_avail = [i for i in sup if i > fam.tail_min]
        wt = _weight(fam.tail_card)
        for t in _subsets_upto(tail_avail, fam.tail_card):
            pairs = fixed_pairs + [(i, wt) for i in t]
            if pairs:
                out.append(Coeffs.from_pairs(pairs))
    return out


def _restricted_sign_patterns(k: int, half_cap: int, full: bool, width: int):
    """Sign patterns on k visible slots of a set whose balanced signs have
    half_cap entries of each sign; partial visibility only caps the counts."""
    if full:
        return equi_sign_vectors(k, width) if k else [()]
    out = []
    for sv in itertools.product((-1, 1), repeat=k):
        plus = sum(1 for x in sv if x > 0)
        if plus <= half_cap and k - plus <= half_cap:
            out.append(sv)
    return out


def zrud_functionals(
    ctx: "MrContext", support: tuple[int, ...]
) -> list[NormingFunctional]:
    """Decorated, undecorated, and coordinate functionals restricted to the
    support (both global signs are covered by the absolute pairing)."""
    sup = sorted(set(support))
    sup_set = set(sup)
    out: list[NormingFunctional] = [Coeffs.from_pairs([(i, 1)]) for i in sup]
    for fam in ctx.families:
        level_slots: list[tuple[list[int], int, bool]] = []
        for s in fam.fixed:
            visible = sorted(s & sup_set)
            level_slots.append((visible, len(s), len(visible) == len(s)))
        tail_avail = [i for i in sup if i > fam.tail_min]
        wt = _weight(fam.tail_card)
        for t in _subsets_upto(tail_avail, fam.tail_card):
            # undecorated member of the family
            pairs = [(i, wt) for i in t]
            for (visible, card, _), s in zip(level_slots, fam.fixed):
                w = _weight(card)
                pairs.extend((i, w) for i in visible)
            if pairs:
                out.append(Coeffs.from_pairs(pairs))
            # decorated members: per-level balanced signs, tails capped
            options: list[list[tuple[tuple[int, ...], tuple[int, ...]]]] = []
            feasible = True
            for visible, card, full in level_slots:
                pats = _restricted_sign_patterns(len(visible), card // 2, full, ctx.width)
                if not pats:
                    feasible = False
                    break
                options.append([(tuple(visible), sv) for sv in pats])
            tpats = _restricted_sign_patterns(len(t), fam.tail_card // 2, False, ctx.width)
            if not feasible:
                continue
            options.append([(tuple(t), sv) for sv in tpats])
            for chosen in itertools.product(*options):
                pairs = []
                for (slots, sv), card in zip(
                    chosen, [len(s) for s in fam.fixed] + [fam.tail_card]
                ):
                    w = _weight(card)
                    pairs.extend((i, e * w) for i, e in zip(slots, sv))
                if pairs:
                    out.append(Coeffs.from_pairs(pairs))
    return out


# ---------------------------------------------------------------------------
# context and spaces
# ---------------------------------------------------------------------------


class MrContext:
    """Levels, coder, and the three norm engines built on them."""

    def __init__(
        self,
        levels: tuple[int, ...] = DEFAULT_LEVELS,
        universe: int = DEFAULT_UNIVERSE,
        max_n: int = DEFAULT_MAX_N,
        width: int = 0,
    ):
        self.levels = LevelSequence(tuple(levels))
        self.universe = universe
        self.max_n = max_n
        self.width = width
        self.coder = SigmaCoder(self.levels, universe)
        self.families = closure_families(self.coder, self.levels, max_n)
        self.zmr = ZmrSpace(self)
        self.zrud = ZrudSpace(self)
        self.zruc = RenormSpace(self.zmr, Fraction(1), enum_cap=16)
        self.zruc.name = "zruc"
        self.zruc.sweep_max_m = 6
        self.zruc.sweep_indices = tuple(range(min(6, universe)))

    def canonical_blocks(self, n: int) -> list[frozenset[int]]:
        """Consecutive index blocks with the prefix cardinalities."""
        if n > len(self.levels.prefix):
            raise DomainError(f"only {len(self.levels.prefix)} levels are configured")
        blocks = []
        start = 0
        for c in self.levels.prefix[:n]:
            blocks.append(frozenset(range(start, start + c)))
            start += c
        if start > self.universe:
            raise DomainError("coded universe too small for the requested depth")
        return blocks

    def block_vector(self, n: int) -> Coeffs:
        """x = sum over the first n blocks of (#s)^(-1/2) * indicator."""
        pairs: list[tuple[int, Scalar]] = []
        for s in self.canonical_blocks(n):
            w = _weight(len(s))
            pairs.extend((i, w) for i in s)
        return Coeffs.from_pairs(pairs)

    def single_block(self, n: int) -> Coeffs:
        s = self.canonical_blocks(n)[n - 1]
        w = _weight(len(s))
        return Coeffs.from_pairs((i, w) for i in s)


class ZmrSpace(NormingSetSpace):
    def __init__(self, ctx: MrContext):
        super().__init__(
            "zmr", lambda sup: zmr_functionals(ctx, sup), include_coord_sup=True
        )
        self.ctx = ctx
        self.sweep_indices = tuple(range(min(8, ctx.universe)))
        self.sweep_max_m = 8

    def paper_witnesses(self, kind, dim):
        n = min(self.ctx.max_n, len(self.ctx.levels.prefix))
        return [self.ctx.block_vector(k) for k in range(1, n + 1)]


class ZrudSpace(NormingSetSpace):
    def __init__(self, ctx: MrContext):
        super().__init__(
            "zrud", lambda sup: zrud_functionals(ctx, sup), include_coord_sup=False
        )
        self.ctx = ctx
        self.sweep_indices = tuple(range(min(6, ctx.universe)))
        self.sweep_max_m = 6
        # functional families on the tiny first-level supports recur across
        # every sweep; keep them all
        self.cache_limit = 512


# ---------------------------------------------------------------------------
# fast float norms over a fixed support (for Monte-Carlo witness runs)
# ---------------------------------------------------------------------------


def zmr_fast_norms(ctx: MrContext, support: tuple[int, ...], values: np.ndarray) -> np.ndarray:
    """Base-space norms of column vectors on ``support`` (float path).

    Equivalent to the explicit family enumeration: per family the best free
    tail is read off sorted prefix sums.  Cross-checked against the exact
    engine in the tests.
    """
    sup = sorted(set(support))
    pos = {i: k for k, i in enumerate(sup)}
    n = values.shape[1]
    best = np.abs(values).max(axis=0)  # coordinate supremum
    for fam in ctx.families:
        fixed = np.zeros(n)
        for s in fam.fixed:
            rows = [pos[i] for i in s if i in pos]
            if rows:
                fixed += values[rows].sum(axis=0) / len(s) ** 0.5
        rows = [pos[i] for i in sup if i > fam.tail_min]
        w = 1.0 / fam.tail_card**0.5
        if rows:
            sub = np.sort(values[rows], axis=0)
            gains = np.maximum(sub[::-1], 0.0)[: fam.tail_card]
            losses = np.minimum(sub, 0.0)[: fam.tail_card]
            tail_hi = gains.cumsum(axis=0).max(axis=0) if len(gains) else 0.0
            tail_lo = losses.cumsum(axis=0).min(axis=0) if len(losses) else 0.0
        else:
            tail_hi = tail_lo = 0.0
        cand = np.maximum(fixed + w * tail_hi, -(fixed + w * tail_lo))
        best = np.maximum(best, cand)
    return best


# ---------------------------------------------------------------------------
# witnesses and reports
# ---------------------------------------------------------------------------


@dataclass
class WitnessReport:
    vector: Coeffs
    tuple_sets: AdmissibleTuple
    norm: Scalar
    expectation: "object"  # ExpectationEstimate
    analytic_bound: Scalar


def mr_witness(
    n: int,
    ctx: MrContext,
    mc_samples: int = 1_000_000,
    seed: int | None = None,
    enum_cap: int = 12,
) -> WitnessReport:
    """The depth-n block vector with its norm and sign average.

    The norm is certified >= n by the matching tuple functional; the sign
    average is exact while the support fits under the enumeration cap and a
    Monte-Carlo bracket beyond it.  The analytic upper bound carried along
    is 1 + 2*delta_hat + 2*sqrt(sum 1/#s_i) with the measured delta_hat.
    """
    from .rademacher import ExpectationEstimate, expect_exact
    from .rng import DEFAULT_SEED, sign_matrix

    if seed is None:
        seed = DEFAULT_SEED
    blocks = ctx.canonical_blocks(n)
    x = ctx.block_vector(n)
    norm = ctx.zmr.norm(x)
    m = len(x)
    if m <= enum_cap:
        est = expect_exact(ctx.zmr, x)
    else:
        xf = x.values_float()
        total = 0.0
        total_sq = 0.0
        done = 0
        while done < mc_samples:
            take = min(1 << 14, mc_samples - done)
            signs = sign_matrix(seed, m, take, start=done).astype(np.float64)
            vals = zmr_fast_norms(ctx, x.support, xf[:, None] * signs)
            total += float(vals.sum())
            total_sq += float((vals * vals).sum())
            done += take
        import math as _math

        from scipy.stats import t as _t

        mean = total / mc_samples
        var = max(0.0, (total_sq - mc_samples * mean * mean) / (mc_samples - 1))
        half = float(_t.ppf(0.975, mc_samples - 1)) * _math.sqrt(var / mc_samples)
        est = ExpectationEstimate(
            mean, "monte_carlo", mc_samples, seed, (mean - half, mean + half), 0.95
        )
    inv = Fraction(0)
    for s in blocks:
        inv += Fraction(1, len(s))
    bound = 1 + 2 * ctx.levels.delta_hat + 2 * sqrt_exact(inv)
    return WitnessReport(x, AdmissibleTuple(tuple(blocks)), norm, est, bound)


def _exact_max(values: list[Scalar]) -> Scalar:
    best = values[0]
    for v in values[1:]:
        if (QSum.of(v) - QSum.of(best)).sign() > 0:
            best = v
    return best


def _greedy_fill(block_units: list[tuple[Scalar, int]], budget: int) -> Scalar:
    """Largest sum of at most ``budget`` unit slots with positive values;
    ``block_units`` holds (slot value, slot count) per block, exact."""
    import functools

    def cmp(x, y):
        return (QSum.of(x[0]) - QSum.of(y[0])).sign()

    total: Scalar = 0
    left = budget
    for val, count in sorted(block_units, key=functools.cmp_to_key(cmp), reverse=True):
        if left <= 0 or QSum.of(val).sign() <= 0:
            break
        take = min(left, count)
        total = total + val * take
        left -= take
    return total


def zrud_block_norm(ctx: MrContext, a_blocks: list) -> Scalar:
    """Exact divergence-side norm of sum_j a_j x_j over the canonical blocks.

    Entries are constant on each block, so the supremum over each tail
    family reduces to a slot-allocation problem across blocks; balanced
    decorations pair to zero against full blocks and only the capped tails
    contribute.  Cross-checked against the explicit family enumeration at
    small scale in the tests.
    """
    n = len(a_blocks)
    blocks = ctx.canonical_blocks(n)
    entry: dict[int, Scalar] = {}
    block_of: dict[int, int] = {}
    values: list[Scalar] = []
    for j, (a, s) in enumerate(zip(a_blocks, blocks)):
        e = _weight(len(s)) * Fraction(a)
        values.append(e)
        for i in s:
            entry[i] = e
            block_of[i] = j
    cands: list[Scalar] = [abs(QSum.of(e)) for e in values]  # coordinate functionals
    for fam in ctx.families:
        a_fixed = QSum()
        for s in fam.fixed:
            w = _weight(len(s))
            for i in s:
                if i in entry:
                    a_fixed = a_fixed + w * entry[i]
        avail = [
            (values[j], sum(1 for i in s if i > fam.tail_min))
            for j, s in enumerate(blocks)
        ]
        avail = [(v, c) for v, c in avail if c]
        w = _weight(fam.tail_card)
        pos = _greedy_fill(avail, fam.tail_card)
        neg = _greedy_fill([(QSum.of(v) * -1, c) for v, c in avail], fam.tail_card)
        # undecorated: best tail aligned with either orientation of the prefix
        cands.append(abs(a_fixed + w * pos))
        cands.append(abs(a_fixed - w * neg))
        # decorated: full prefix sets pair to zero, tails capped per sign
        half = fam.tail_card // 2
        dec = _greedy_fill(avail, half) + _greedy_fill(
            [(QSum.of(v) * -1, c) for v, c in avail], half
        )
        cands.append(abs(w * QSum.of(dec)))
    best = _exact_max(cands)
    return best.as_fraction() if isinstance(best, QSum) and best.is_rational() else best


def zrud_block_sandwich(ctx: MrContext, a_blocks: list) -> tuple[Scalar, Scalar, Scalar]:
    """(sup of partial sums, exact norm, upper constant) for sum a_j x_j."""
    norm = zrud_block_norm(ctx, a_blocks)
    sup: Scalar = 0
    acc = Fraction(0)
    for a in a_blocks:
        acc += Fraction(a)
        if abs(acc) > sup:
            sup = abs(acc)
    return sup, norm, 3 + 4 * ctx.levels.delta_hat


def zrud_block(n: int, ctx: MrContext) -> Coeffs:
    """The n-th normalized block vector x_n = (#s_n)^(-1/2) 1_{s_n}."""
    return ctx.single_block(n)
