"""Exact scalar arithmetic over the rationals extended by square roots.

Values are finite sums ``sum_i q_i * sqrt(k_i)`` with rational ``q_i`` and
positive integer radicands ``k_i``.  This is exactly the number field needed
by the norm engines: Euclidean norms of rational vectors, the ``1/sqrt(k)``
functional weights, and their averages all live here.

Comparisons are exact.  A nonzero combination of square roots of distinct
squarefree integers is never zero (linear independence over Q), so the sign
of a difference is decided by interval arithmetic with integer-square-root
brackets, tightened until the interval excludes zero.  Radicands are kept
only semi-canonical (small square factors extracted); if an undetected
square factor ever makes two terms collide, the slow full factorisation
path merges them before the sign loop continues.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt
from typing import Union

_SMALL_PRIMES = (
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47,
    53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
)

#: Precision at which the sign loop re-canonicalises via full factorisation.
_FACTOR_FALLBACK_BITS = 512
_MAX_SIGN_BITS = 1 << 16


def split_square(k: int) -> tuple[int, int]:
    """Write ``k = outer**2 * core`` with core free of small square factors."""
    if k <= 0:
        raise ValueError("radicand must be positive")
    r = isqrt(k)
    if r * r == k:
        return r, 1
    outer = 1
    for p in _SMALL_PRIMES:
        pp = p * p
        while k % pp == 0:
            k //= pp
            outer *= p
        if pp > k:
            break
    r = isqrt(k)
    if r * r == k:
        return outer * r, 1
    return outer, k


_BRACKET_CACHE: dict[tuple[int, int], tuple[Fraction, Fraction]] = {}


def _sqrt_bracket(core: int, bits: int) -> tuple[Fraction, Fraction]:
    """Rational bracket lo <= sqrt(core) <= hi of width 2**-bits."""
    key = (core, bits)
    hit = _BRACKET_CACHE.get(key)
    if hit is None:
        r = isqrt(core << (2 * bits))
        den = 1 << bits
        hit = (Fraction(r, den), Fraction(r + 1, den))
        if len(_BRACKET_CACHE) > 1 << 16:
            _BRACKET_CACHE.clear()
        _BRACKET_CACHE[key] = hit
    return hit


def _canonicalise(terms: dict[int, Fraction]) -> dict[int, Fraction]:
    """Fully squarefree-reduce all radicands (slow path, rarely needed)."""
    from sympy import factorint

    out: dict[int, Fraction] = {}
    for core, q in terms.items():
        outer = 1
        rem = 1
        for p, e in factorint(core).items():
            outer *= p ** (e // 2)
            if e % 2:
                rem *= p
        q2 = q * outer
        acc = out.get(rem, Fraction(0)) + q2
        if acc:
            out[rem] = acc
        elif rem in out:
            del out[rem]
    return out


class QSum:
    """A finite rational combination of square roots of positive integers."""

    __slots__ = ("_t",)

    def __init__(self, terms: dict[int, Fraction] | None = None):
        self._t = terms or {}

    # -- construction -----------------------------------------------------

    @staticmethod
    def of(x: "ExactScalar") -> "QSum":
        if isinstance(x, QSum):
            return x
        q = Fraction(x)
        return QSum({1: q} if q else {})

    @staticmethod
    def root(radicand: int, coeff: Fraction = Fraction(1)) -> "QSum":
        if radicand == 0 or coeff == 0:
            return QSum()
        outer, core = split_square(radicand)
        return QSum({core: coeff * outer})

    # -- queries -----------------------------------------------------------

    @property
    def terms(self) -> dict[int, Fraction]:
        return self._t

    def is_rational(self) -> bool:
        return all(c == 1 for c in self._t)

    def as_fraction(self) -> Fraction:
        t = self._t
        if not t:
            return Fraction(0)
        if set(t) == {1}:
            return t[1]
        canon = _canonicalise(t)
        if set(canon) <= {1}:
            return canon.get(1, Fraction(0))
        raise ValueError(f"not a rational value: {self!r}")

    def __float__(self) -> float:
        return float(sum(float(q) * core ** 0.5 for core, q in self._t.items()))

    def __bool__(self) -> bool:
        return self.sign() != 0

    def __repr__(self) -> str:
        if not self._t:
            return "QSum(0)"
        parts = [
            f"{q}" if core == 1 else f"{q}*sqrt({core})"
            for core, q in sorted(self._t.items())
        ]
        return "QSum(" + " + ".join(parts) + ")"

    # -- arithmetic ----------------------------------------------------------

    def _merge(self, other: dict[int, Fraction], flip: bool) -> "QSum":
        out = dict(self._t)
        for core, q in other.items():
            acc = out.get(core, Fraction(0)) + (-q if flip else q)
            if acc:
                out[core] = acc
            elif core in out:
                del out[core]
        return QSum(out)

    def __add__(self, other):
        if isinstance(other, float):
            return NotImplemented
        return self._merge(QSum.of(other)._t, flip=False)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, float):
            return NotImplemented
        return self._merge(QSum.of(other)._t, flip=True)

    def __rsub__(self, other):
        return QSum.of(other)._merge(self._t, flip=True)

    def __neg__(self):
        return QSum({c: -q for c, q in self._t.items()})

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __mul__(self, other):
        if isinstance(other, float):
            return NotImplemented
        o = QSum.of(other)._t
        out: dict[int, Fraction] = {}
        for c1, q1 in self._t.items():
            for c2, q2 in o.items():
                if c1 == c2:
                    core, mult = 1, c1
                else:
                    outer, core = split_square(c1 * c2)
                    mult = outer
                acc = out.get(core, Fraction(0)) + q1 * q2 * mult
                if acc:
                    out[core] = acc
                elif core in out:
                    del out[core]
        return QSum(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0 or int(n) != n:
            raise ValueError("only non-negative integer powers")
        acc = QSum({1: Fraction(1)})
        for _ in range(int(n)):
            acc = acc * self
        return acc

    def __truediv__(self, other):
        if isinstance(other, float):
            return NotImplemented
        o = QSum.of(other)._t
        if not o:
            raise ZeroDivisionError("division by zero")
        if len(o) == 1:
            ((core, q),) = o.items()
            if core == 1:
                return self * Fraction(1, 1) * (1 / q)
            # 1/(q*sqrt(c)) = sqrt(c)/(q*c)
            return self * QSum({core: Fraction(1) / (q * core)})
        raise TypeError("division by a multi-term radical sum is not supported")

    def __rtruediv__(self, other):
        return QSum.of(other) / self

    # -- exact ordering ------------------------------------------------------

    def sign(self) -> int:
        t = self._t
        if not t:
            return 0
        if len(t) == 1:
            ((_, q),) = t.items()
            return 1 if q > 0 else -1
        bits = 32
        while bits <= _MAX_SIGN_BITS:
            lo = Fraction(0)
            hi = Fraction(0)
            for core, q in t.items():
                if core == 1:
                    lo += q
                    hi += q
                    continue
                blo, bhi = _sqrt_bracket(core, bits)
                if q > 0:
                    lo += q * blo
                    hi += q * bhi
                else:
                    lo += q * bhi
                    hi += q * blo
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            bits *= 2
            if bits == _FACTOR_FALLBACK_BITS * 2:
                t = _canonicalise(t)
                if not t:
                    return 0
                if len(t) == 1:
                    ((_, q),) = t.items()
                    return 1 if q > 0 else -1
        raise ArithmeticError(f"sign undecided at {_MAX_SIGN_BITS} bits: {self!r}")

    def _cmp(self, other) -> int:
        return (self - other).sign()

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __eq__(self, other):
        if isinstance(other, float):
            return NotImplemented
        if not isinstance(other, (QSum, int, Fraction)):
            return NotImplemented
        return self._cmp(other) == 0

    __hash__ = None  # exact values are compared, never hashed


ExactScalar = Union[int, Fraction, QSum]
Scalar = Union[ExactScalar, float]

SQRT2 = QSum({2: Fraction(1)})


def sqrt_exact(x: ExactScalar) -> QSum:
    """Exact square root of a non-negative rational."""
    q = x.as_fraction() if isinstance(x, QSum) else Fraction(x)
    if q < 0:
        raise ValueError("square root of a negative value")
    if q == 0:
        return QSum()
    # sqrt(n/d) = sqrt(n*d)/d
    return QSum.root(q.numerator * q.denominator, Fraction(1, q.denominator))


def is_exact(x: Scalar) -> bool:
    return isinstance(x, (int, Fraction, QSum))


def sign_of(x: Scalar) -> int:
    if isinstance(x, QSum):
        return x.sign()
    return (x > 0) - (x < 0)


def scalar_float(x: Scalar) -> float:
    return float(x)


def scalar_le(x: Scalar, y: Scalar, rtol: float = 0.0) -> bool:
    """x <= y, exactly for exact scalars, with relative slack for floats."""
    if is_exact(x) and is_exact(y):
        d = (QSum.of(y) - QSum.of(x)) if (isinstance(x, QSum) or isinstance(y, QSum)) else (y - x)
        return sign_of(d) >= 0
    fx, fy = float(x), float(y)
    return fx <= fy + rtol * max(1.0, abs(fx), abs(fy))


def qsum_interval(x: Scalar, bits: int) -> tuple[Fraction, Fraction]:
    """Exact rational bracket for any exact scalar."""
    if not isinstance(x, QSum):
        q = Fraction(x)
        return q, q
    lo = Fraction(0)
    hi = Fraction(0)
    for core, q in x.terms.items():
        if core == 1:
            lo += q
            hi += q
            continue
        blo, bhi = _sqrt_bracket(core, bits)
        if q > 0:
            lo += q * blo
            hi += q * bhi
        else:
            lo += q * bhi
            hi += q * blo
    return lo, hi


def le_times_square(x: Scalar, c: Fraction, y: Scalar) -> bool:
    """Decide x <= c * y**2 exactly for exact scalars with y >= 0.

    Symbolic when the radical sums are small; otherwise interval arithmetic
    at escalating precision (sound either way), with a final symbolic pass.
    """
    X, Y = QSum.of(x), QSum.of(y)
    if len(Y.terms) <= 8:
        return (QSum.of(c) * Y * Y - X).sign() >= 0
    bits = 32
    while bits <= 1 << 13:
        xlo, xhi = qsum_interval(X, bits)
        ylo, yhi = qsum_interval(Y, bits)
        ylo = max(ylo, Fraction(0))
        if c * ylo * ylo >= xhi:
            return True
        if c * yhi * yhi < xlo:
            return False
        bits *= 2
    return (QSum.of(c) * Y * Y - X).sign() >= 0


def scalar_repr(x: Scalar) -> str:
    """Human-readable rendering: exact rationals stay exact."""
    if isinstance(x, QSum):
        if x.is_rational():
            return str(x.as_fraction())
        return repr(float(x))
    if isinstance(x, (int, Fraction)):
        return str(x)
    return repr(x)
