"""Textbook exact-rational simplex for small polytope support functions.

Maximises c.x subject to A x <= b over free variables (split into positive
parts), with Bland's anticycling rule, so termination is guaranteed.  All
pivots are Fractions; the optimum and an optimiser are exact.  Our polytopes
always contain the origin (b >= 0), so the slack basis is feasible and no
phase-1 is needed.
"""

from __future__ import annotations

from fractions import Fraction

from .coeffs import DomainError


class UnboundedError(DomainError):
    """The objective is unbounded over the polyhedron."""


def simplex_max(
    c: list[Fraction], rows: list[list[Fraction]], rhs: list[Fraction]
) -> tuple[Fraction, list[Fraction]]:
    """max c.x st rows[i] . x <= rhs[i]; x free. Returns (optimum, x)."""
    n = len(c)
    m = len(rows)
    if any(r < 0 for r in rhs):
        raise DomainError("origin must be feasible")
    # variables: x = u - v with u, v >= 0, then slacks
    width = 2 * n + m
    tab = [[Fraction(0)] * (width + 1) for _ in range(m)]
    for i, (row, b) in enumerate(zip(rows, rhs)):
        for j, val in enumerate(row):
            tab[i][j] = Fraction(val)
            tab[i][n + j] = -Fraction(val)
        tab[i][2 * n + i] = Fraction(1)
        tab[i][width] = Fraction(b)
    cost = [Fraction(v) for v in c] + [-Fraction(v) for v in c] + [Fraction(0)] * m
    basis = list(range(2 * n, width))
    obj = Fraction(0)

    while True:
        enter = next((j for j in range(width) if cost[j] > 0), None)
        if enter is None:
            break
        ratios = [
            (tab[i][width] / tab[i][enter], basis[i], i)
            for i in range(m)
            if tab[i][enter] > 0
        ]
        if not ratios:
            raise UnboundedError("functional escapes the restricted polar")
        _, _, piv = min(ratios)  # Bland: smallest ratio, then smallest basic var
        pr = tab[piv]
        pv = pr[enter]
        tab[piv] = [x / pv for x in pr]
        for i in range(m):
            if i != piv and tab[i][enter]:
                f = tab[i][enter]
                tab[i] = [x - f * y for x, y in zip(tab[i], tab[piv])]
        f = cost[enter]
        obj += f * tab[piv][width]
        cost = [x - f * y for x, y in zip(cost, tab[piv][:width])]
        basis[piv] = enter

    x = [Fraction(0)] * n
    for i, var in enumerate(basis):
        val = tab[i][width]
        if var < n:
            x[var] += val
        elif var < 2 * n:
            x[var - n] -= val
    return obj, x
