"""L1[0,1] norms of Walsh and Haar combinations on exact dyadic grids.

Both systems are piecewise constant on the 2^K dyadic atoms determined by
the finest index involved, so the L1 norm is an exact average of absolute
values on the grid; no quadrature is ever used.

Canonical enumerations:

* Walsh: integer k encodes the product set through its binary digits; bit
  j of k means the (j+1)-st sign function participates.  k = 0 is the
  constant function.
* Tree functions: index 1 is the constant function (monotone-basis
  convention); index j = 2^k + l with k >= 0, 1 <= l <= 2^k is +1 on
  [(2l-2)/2^(k+1), (2l-1)/2^(k+1)) and -1 on the next atom of that size.
"""

from __future__ import annotations

import numpy as np

from .batches import ExactBatch
from .coeffs import Coeffs, DomainError
from .spaces import Space, _float_values, _int_mult_values

DEFAULT_GRID_CAP = 20


def walsh_atom_matrix(indices: tuple[int, ...], levels: int) -> np.ndarray:
    """(2^levels, m) matrix of Walsh function values on the dyadic atoms."""
    atoms = np.arange(1 << levels, dtype=np.uint32)
    cols = []
    for k in indices:
        masked = atoms & np.uint32(k)
        par = masked.copy()
        # popcount parity via folding
        for shift in (16, 8, 4, 2, 1):
            par ^= par >> np.uint32(shift)
        cols.append(1 - 2 * (par & np.uint32(1)).astype(np.int64))
    return np.stack(cols, axis=1)


class WalshL1Space(Space):
    """Exact L1 norm of a finite Walsh combination."""

    name = "walsh_l1"
    sweep_indices = tuple(range(64))
    sweep_max_m = 10

    def __init__(self, grid_cap: int = DEFAULT_GRID_CAP):
        self.grid_cap = grid_cap

    def _levels(self, support: tuple[int, ...]) -> int:
        k = max((int(i).bit_length() for i in support), default=0)
        if k > self.grid_cap:
            raise DomainError(
                f"finest sign-function index {k} exceeds the grid cap {self.grid_cap}"
            )
        return k

    def mult_batch(self, a, mult, den=1):
        v, scale = _int_mult_values(a, mult, den)
        levels = self._levels(a.support)
        w = walsh_atom_matrix(a.support, levels)
        values = w @ v  # (atoms, N)
        return ExactBatch.from_rational(np.abs(values).sum(axis=0), scale << levels)

    def mult_batch_float(self, a, mult):
        v = _float_values(a, mult)
        levels = self._levels(a.support)
        w = walsh_atom_matrix(a.support, levels)
        return np.abs(w @ v).mean(axis=0)


def haar_level(j: int) -> tuple[int, int]:
    """Split j >= 2 as 2^k + l with 1 <= l <= 2^k; returns (k, l)."""
    if j < 2:
        raise DomainError("true tree functions start at index 2")
    k = (j - 1).bit_length() - 1
    return k, j - (1 << k)


def haar_atom_matrix(indices: tuple[int, ...], levels: int) -> np.ndarray:
    """(2^levels, m) matrix of tree-function values on the dyadic atoms."""
    g = 1 << levels
    cols = []
    for j in indices:
        col = np.zeros(g, dtype=np.int64)
        if j == 1:
            col[:] = 1
        else:
            k, l = haar_level(j)
            width = g >> (k + 1)  # atoms per half-support
            start = (2 * l - 2) * width
            col[start : start + width] = 1
            col[start + width : start + 2 * width] = -1
        cols.append(col)
    return np.stack(cols, axis=1)


class HaarL1Space(Space):
    """Exact L1 norm of a finite combination of the dyadic tree system."""

    name = "haar_l1"
    sweep_indices = tuple(range(1, 256))
    sweep_max_m = 10

    def __init__(self, grid_cap: int = DEFAULT_GRID_CAP):
        self.grid_cap = grid_cap

    def _levels(self, support: tuple[int, ...]) -> int:
        deepest = 0
        for j in support:
            if j >= 2:
                deepest = max(deepest, haar_level(j)[0] + 1)
        if deepest > self.grid_cap:
            raise DomainError(
                f"finest dyadic level {deepest} exceeds the grid cap {self.grid_cap}"
            )
        return deepest

    def mult_batch(self, a, mult, den=1):
        if min(a.support, default=1) < 1:
            raise DomainError("tree indices start at 1")
        v, scale = _int_mult_values(a, mult, den)
        levels = self._levels(a.support)
        h = haar_atom_matrix(a.support, levels)
        return ExactBatch.from_rational(np.abs(h @ v).sum(axis=0), scale << levels)

    def mult_batch_float(self, a, mult):
        v = _float_values(a, mult)
        levels = self._levels(a.support)
        h = haar_atom_matrix(a.support, levels)
        return np.abs(h @ v).mean(axis=0)


def haar_block(level_range: tuple[int, int], weights: Coeffs) -> Coeffs:
    """A block vector supported on tree indices p..q (inclusive)."""
    p, q = level_range
    if not all(p <= i <= q for i in weights.support):
        raise DomainError("block weights must live inside the index range")
    return weights
