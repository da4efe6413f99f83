"""Vectorised exact norm batches.

A norm engine evaluating one coefficient vector under thousands of sign
patterns produces values of a very constrained shape:

* ``classes``: sum_c X[c][i] * sqrt(c) / scale over a small fixed set of
  radicand classes c (c = 1 is the rational part); summing, dyadic, and
  functional-sup norms land here.
* ``roots``: sqrt(R[i]) / roots_scale with the radicand varying per pattern
  (Euclidean and chain-difference norms).  The two parts may coexist
  (square function plus partial-sum supremum, branchwise maxima).
* ``scalars``: a plain list of exact scalars (slow fallback).

The min/max/mean/second-moment reductions stay exact throughout.  Extremes
over mixed-radical batches are located by a float pass and then certified by
exact comparison of every near-tied candidate; sums of products are taken
over Python integers so no intermediate can overflow.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import numpy as np

from .exactnum import QSum, Scalar, split_square

_TIE_RTOL = 1e-9


def _ints(arr: np.ndarray) -> list[int]:
    return [int(x) for x in arr.tolist()]


def _scalar_gt(a: Scalar, b: Scalar) -> bool:
    if isinstance(a, QSum) or isinstance(b, QSum):
        return (QSum.of(a) - QSum.of(b)).sign() > 0
    return a > b


@dataclass
class ExactBatch:
    """Exact values of one norm under a batch of coefficient multipliers."""

    scale: int = 1
    classes: dict[int, np.ndarray] | None = None
    roots: np.ndarray | None = None
    roots_scale: int | None = None
    scalars: list[Scalar] | None = None
    _floats: np.ndarray | None = field(default=None, repr=False)

    # -- constructors -------------------------------------------------------

    @staticmethod
    def from_rational(nums: np.ndarray, scale: int) -> "ExactBatch":
        return ExactBatch(scale=scale, classes={1: nums})

    @staticmethod
    def from_roots(radicands: np.ndarray, scale: int) -> "ExactBatch":
        return ExactBatch(roots=radicands, roots_scale=scale)

    @staticmethod
    def from_classes(classes: dict[int, np.ndarray], scale: int) -> "ExactBatch":
        return ExactBatch(scale=scale, classes=classes)

    @staticmethod
    def from_scalars(values: list[Scalar]) -> "ExactBatch":
        return ExactBatch(scalars=values)

    # -- basics ---------------------------------------------------------------

    def __len__(self) -> int:
        if self.scalars is not None:
            return len(self.scalars)
        if self.classes is not None:
            return len(next(iter(self.classes.values())))
        return len(self.roots)

    def value(self, i: int) -> Scalar:
        if self.scalars is not None:
            return self.scalars[i]
        total = QSum()
        if self.classes is not None:
            for core, arr in self.classes.items():
                total = total + QSum.root(core, Fraction(int(arr[i]), self.scale))
        if self.roots is not None:
            r = int(self.roots[i])
            if r:
                total = total + QSum.root(r, Fraction(1, self.roots_scale))
        return total.as_fraction() if total.is_rational() else total

    def float_values(self) -> np.ndarray:
        if self._floats is None:
            if self.scalars is not None:
                self._floats = np.array([float(v) for v in self.scalars])
            else:
                acc = np.zeros(len(self), dtype=np.float64)
                if self.classes is not None:
                    for core, arr in self.classes.items():
                        acc += arr.astype(np.float64) * (core**0.5) / self.scale
                if self.roots is not None:
                    acc += np.sqrt(self.roots.astype(np.float64)) / self.roots_scale
                self._floats = acc
        return self._floats

    # -- exact reductions -------------------------------------------------------

    def _extreme(self, want_max: bool) -> tuple[Scalar, int]:
        if self.scalars is not None:
            best = 0
            for i in range(1, len(self.scalars)):
                vi, vb = self.scalars[i], self.scalars[best]
                if (want_max and _scalar_gt(vi, vb)) or (not want_max and _scalar_gt(vb, vi)):
                    best = i
            return self.scalars[best], best
        if self.classes is None and self.roots is not None:
            i = int(np.argmax(self.roots) if want_max else np.argmin(self.roots))
            return self.value(i), i
        if self.roots is None and len(self.classes) == 1:
            ((_, arr),) = self.classes.items()
            i = int(np.argmax(arr) if want_max else np.argmin(arr))
            return self.value(i), i
        # Mixed radicals: locate by float, certify near-ties exactly.
        fv = self.float_values()
        target = fv.max() if want_max else fv.min()
        tol = _TIE_RTOL * (1.0 + abs(target))
        cand = np.nonzero(np.abs(fv - target) <= tol)[0]
        best = int(cand[0])
        for i in cand[1:]:
            vi, vb = self.value(int(i)), self.value(best)
            if (want_max and _scalar_gt(vi, vb)) or (not want_max and _scalar_gt(vb, vi)):
                best = int(i)
        return self.value(best), best

    def max(self) -> Scalar:
        return self._extreme(True)[0]

    def min(self) -> Scalar:
        return self._extreme(False)[0]

    def argmax(self) -> int:
        return self._extreme(True)[1]

    def mean(self) -> Scalar:
        n = len(self)
        if self.scalars is not None:
            total: Scalar = 0
            for v in self.scalars:
                total = total + v
            return total / n if isinstance(total, float) else total * Fraction(1, n)
        total = QSum()
        if self.classes is not None:
            for core, arr in self.classes.items():
                total = total + QSum.root(core, Fraction(sum(_ints(arr)), n * self.scale))
        if self.roots is not None:
            cores, counts = np.unique(self.roots, return_counts=True)
            for r, c in zip(_ints(cores), _ints(counts)):
                total = total + QSum.root(r, Fraction(c, n * self.roots_scale))
        return total.as_fraction() if total.is_rational() else total

    def mean_sq(self) -> Scalar:
        """Exact mean of the squared values."""
        n = len(self)
        if self.scalars is not None:
            total: Scalar = 0
            for v in self.scalars:
                total = total + v * v
            return total / n if isinstance(total, float) else total * Fraction(1, n)
        total = QSum()
        items = (
            [(c, _ints(arr)) for c, arr in self.classes.items()]
            if self.classes is not None
            else []
        )
        for j, (cj, xj) in enumerate(items):
            total = total + Fraction(cj * sum(x * x for x in xj), n * self.scale**2)
            for ck, xk in items[j + 1 :]:
                cross = sum(a * b for a, b in zip(xj, xk))
                outer, core = split_square(cj * ck)
                total = total + QSum.root(core, Fraction(2 * cross * outer, n * self.scale**2))
        if self.roots is not None:
            rr = _ints(self.roots)
            total = total + Fraction(sum(rr), n * self.roots_scale**2)
            if items:
                # cross terms 2 * (class part) * sqrt(r)/roots_scale, grouped by r
                acc: dict[int, dict[int, int]] = {}
                for cj, xj in items:
                    for i, r in enumerate(rr):
                        if r and xj[i]:
                            acc.setdefault(r, {}).setdefault(cj, 0)
                            acc[r][cj] += xj[i]
                for r, per_class in acc.items():
                    for cj, s in per_class.items():
                        outer, core = split_square(cj * r)
                        total = total + QSum.root(
                            core,
                            Fraction(2 * s * outer, n * self.scale * self.roots_scale),
                        )
        return total.as_fraction() if total.is_rational() else total

    # -- affine adjustments -------------------------------------------------

    def shift_rational(self, offset: Fraction) -> "ExactBatch":
        """Add an exact rational constant to every value."""
        if self.scalars is not None:
            return ExactBatch.from_scalars([v + offset for v in self.scalars])
        offset = Fraction(offset)
        classes = dict(self.classes) if self.classes is not None else {}
        base = classes.get(1, np.zeros(len(self), dtype=np.int64))
        new_scale = self.scale * offset.denominator // gcd(self.scale, offset.denominator)
        mul = new_scale // self.scale
        classes = {c: arr.astype(np.int64) * mul for c, arr in classes.items()}
        classes[1] = classes.get(1, base * 0) + int(offset * new_scale)
        return ExactBatch(
            scale=new_scale,
            classes=classes,
            roots=self.roots,
            roots_scale=self.roots_scale,
        )

    def scale_rational(self, factor: Fraction) -> "ExactBatch":
        """Multiply every value by a positive rational factor."""
        factor = Fraction(factor)
        if factor < 0:
            raise ValueError("norm batches cannot be negated")
        if self.scalars is not None:
            return ExactBatch.from_scalars([v * factor for v in self.scalars])
        num, den = factor.numerator, factor.denominator
        classes = (
            {c: arr * num for c, arr in self.classes.items()}
            if self.classes is not None
            else None
        )
        roots = self.roots * (num * num) if self.roots is not None else None
        return ExactBatch(
            scale=self.scale * den,
            classes=classes,
            roots=roots,
            roots_scale=self.roots_scale * den if roots is not None else None,
        )
