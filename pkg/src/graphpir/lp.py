"""Exact-rational primal simplex with Bland's pivoting rule.

Solves  max c.x  subject to  A x <= b, x >= 0  with b >= 0, which is the
shape of both capacity LPs after reformulation: the all-slack basis is
feasible, so no artificial variables are needed. All arithmetic is over
fractions.Fraction; Bland's rule (smallest eligible index enters, ties on
the ratio test broken by smallest basis index) guarantees termination.
"""

from __future__ import annotations

from fractions import Fraction


class Unbounded(Exception):
    """The LP has unbounded objective (never expected for capacity LPs)."""


def simplex_max(objective, rows, rhs):
    """Return (optimum, x) for max objective.x s.t. rows.x <= rhs, x >= 0.

    objective: sequence of n costs; rows: m sequences of n coefficients;
    rhs: m values, all >= 0.
    """
    n = len(objective)
    m = len(rows)
    for value in rhs:
        if value < 0:
            raise ValueError("rhs must be non-negative for the all-slack start")

    # Tableau: columns 0..n-1 structural, n..n+m-1 slack, last is rhs.
    width = n + m + 1
    tableau = []
    for i, row in enumerate(rows):
        line = [Fraction(v) for v in row] + [Fraction(0)] * m + [Fraction(rhs[i])]
        line[n + i] = Fraction(1)
        tableau.append(line)
    # Reduced-cost row (c_j for structural, 0 for slack) and objective value.
    cost = [Fraction(v) for v in objective] + [Fraction(0)] * (m + 1)
    basis = [n + i for i in range(m)]

    while True:
        entering = None
        for j in range(n + m):
            if cost[j] > 0:
                entering = j  # Bland: smallest improving index
                break
        if entering is None:
            break
        leaving = None
        best_ratio = None
        for i in range(m):
            coeff = tableau[i][entering]
            if coeff > 0:
                ratio = tableau[i][-1] / coeff
                if (
                    best_ratio is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and basis[i] < basis[leaving])
                ):
                    best_ratio = ratio
                    leaving = i
        if leaving is None:
            raise Unbounded("improving direction never blocked")
        _pivot(tableau, cost, leaving, entering)
        basis[leaving] = entering

    x = [Fraction(0)] * n
    for i, var in enumerate(basis):
        if var < n:
            x[var] = tableau[i][-1]
    optimum = -cost[-1]
    return optimum, x


def _pivot(tableau, cost, row, col):
    pivot_row = tableau[row]
    inv = Fraction(1) / pivot_row[col]
    tableau[row] = [v * inv for v in pivot_row]
    pivot_row = tableau[row]
    for i, line in enumerate(tableau):
        if i != row:
            factor = line[col]
            if factor:
                tableau[i] = [a - factor * b for a, b in zip(line, pivot_row)]
    factor = cost[col]
    if factor:
        for j in range(len(cost)):
            cost[j] -= factor * pivot_row[j]
