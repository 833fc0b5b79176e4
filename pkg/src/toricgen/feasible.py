"""Exact feasibility of homogeneous linear sign systems via Fourier-Motzkin.

A constraint is a pair (coeffs, rel) with rel one of '>', '>=', '='
meaning coeffs . x REL 0.  Systems here are tiny (a handful of variables
and at most a few dozen constraints), so no redundancy elimination is
attempted.
"""

from __future__ import annotations

from fractions import Fraction

GT = ">"
GE = ">="
EQ = "="


def _normalize(constraints):
    # Split equalities into opposite inequalities; drop trivial rows early.
    out = []
    for coeffs, rel in constraints:
        coeffs = tuple(Fraction(c) for c in coeffs)
        if rel == EQ:
            out.append((coeffs, False))
            out.append((tuple(-c for c in coeffs), False))
        elif rel == GE:
            out.append((coeffs, False))
        elif rel == GT:
            out.append((coeffs, True))
        else:
            raise ValueError(f"unknown relation {rel!r}")
    return out


def find_solution(constraints, dim: int):
    """A rational point satisfying all constraints, or None if infeasible.

    Each constraint is (coeffs, rel) over `dim` variables with zero
    right-hand side.
    """
    rows = _normalize(constraints)
    stages = []  # per eliminated variable: the rows mentioning it
    for k in range(dim - 1, 0, -1):
        pos = [r for r in rows if r[0][k] > 0]
        neg = [r for r in rows if r[0][k] < 0]
        zero = [r for r in rows if r[0][k] == 0]
        stages.append((k, pos, neg))
        new_rows = list(zero)
        for (pc, ps) in pos:
            for (nc, ns) in neg:
                comb = tuple(pc[i] * (-nc[k]) + nc[i] * pc[k] for i in range(dim))
                new_rows.append((comb, ps or ns))
        rows = new_rows

    # One variable left: the rows are demands on the sign of x0.
    need_pos = need_neg = False  # some strict row demands x0 > 0 / x0 < 0
    has_lo = has_hi = False
    for coeffs, strict in rows:
        c = coeffs[0]
        if c == 0:
            if strict:
                return None
        elif c > 0:
            has_lo = True
            need_pos = need_pos or strict
        else:
            has_hi = True
            need_neg = need_neg or strict
    if has_lo and has_hi:
        if need_pos or need_neg:
            return None
        x0 = Fraction(0)
    elif need_pos:
        x0 = Fraction(1)
    elif need_neg:
        x0 = Fraction(-1)
    else:
        x0 = Fraction(0)
    point = [Fraction(0)] * dim
    point[0] = x0

    for k, pos, neg in reversed(stages):
        lb = ub = None
        lb_strict = ub_strict = False
        for coeffs, strict in pos:
            rest = sum(coeffs[i] * point[i] for i in range(dim) if i != k)
            bound = -rest / coeffs[k]
            if lb is None or bound > lb:
                lb, lb_strict = bound, strict
            elif bound == lb:
                lb_strict = lb_strict or strict
        for coeffs, strict in neg:
            rest = sum(coeffs[i] * point[i] for i in range(dim) if i != k)
            bound = -rest / coeffs[k]
            if ub is None or bound < ub:
                ub, ub_strict = bound, strict
            elif bound == ub:
                ub_strict = ub_strict or strict
        if lb is None and ub is None:
            point[k] = Fraction(0)
        elif lb is None:
            point[k] = ub - 1 if ub_strict else ub
        elif ub is None:
            point[k] = lb + 1 if lb_strict else lb
        elif lb < ub:
            point[k] = (lb + ub) / 2
        else:
            # Fourier-Motzkin guarantees lb <= ub and non-strict contact.
            assert lb == ub and not (lb_strict or ub_strict)
            point[k] = lb
    return tuple(point)


def feasible(constraints, dim: int) -> bool:
    return find_solution(constraints, dim) is not None
