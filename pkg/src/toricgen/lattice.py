"""Exact integer and rational linear algebra over Z^n.

Vectors are tuples of ints (or Fractions), matrices are tuples of row
tuples.  Everything here is pure and immutable; the matrices that show up
are tiny (rank <= ~8), so the classical algorithms are used throughout.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

Rat = Fraction

IntVector = tuple[int, ...]
RatVector = tuple[Fraction, ...]
IntMatrix = tuple[tuple[int, ...], ...]


class NotCompletable(ValueError):
    """The given vectors span a non-saturated sublattice."""


def floor_rat(x) -> int:
    """Floor of an int or Fraction, exact."""
    return math.floor(x)


def vec_add(a, b):
    return tuple(x + y for x, y in zip(a, b, strict=True))


def vec_sub(a, b):
    return tuple(x - y for x, y in zip(a, b, strict=True))


def vec_scale(k, a):
    return tuple(k * x for x in a)


def dot(a, b):
    return sum(x * y for x, y in zip(a, b, strict=True))


def is_primitive(v: IntVector) -> bool:
    """True iff the gcd of |entries| is 1 (so the zero vector is not primitive)."""
    g = 0
    for x in v:
        g = gcd(g, abs(x))
    return g == 1


def primitive_part(v) -> tuple[IntVector, Fraction]:
    """Scale a nonzero rational vector to its primitive integer form.

    Returns (primitive, scale) with v = scale * primitive and scale > 0.
    """
    fracs = [Fraction(x) for x in v]
    if all(x == 0 for x in fracs):
        raise ValueError("zero vector has no primitive part")
    den = 1
    for x in fracs:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in fracs]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    prim = tuple(x // g for x in ints)
    return prim, Fraction(g, den)


def identity_matrix(n: int) -> IntMatrix:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def zero_matrix(m: int, n: int) -> IntMatrix:
    return tuple((0,) * n for _ in range(m))


def mat_from_columns(cols) -> IntMatrix:
    return tuple(zip(*cols, strict=True)) if cols else ()


def mat_columns(a: IntMatrix):
    return [tuple(row[j] for row in a) for j in range(len(a[0]))] if a else []


def mat_mul(a, b):
    bt = list(zip(*b, strict=True))
    return tuple(tuple(dot(row, col) for col in bt) for row in a)


def mat_vec(a, v):
    return tuple(dot(row, v) for row in a)


def transpose(a):
    return tuple(zip(*a, strict=True))


def det(a) -> int:
    """Integer determinant via fraction-free (Bareiss) elimination."""
    n = len(a)
    if n == 0:
        return 1
    m = [list(row) for row in a]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[-1][-1]


def mat_rank(a) -> int:
    """Rank over Q of an integer (or rational) matrix."""
    m = [[Fraction(x) for x in row] for row in a]
    rows, cols = len(m), len(m[0]) if m else 0
    rank = 0
    for j in range(cols):
        piv = next((i for i in range(rank, rows) if m[i][j] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = 1 / m[rank][j]
        m[rank] = [x * inv for x in m[rank]]
        for i in range(rows):
            if i != rank and m[i][j] != 0:
                c = m[i][j]
                m[i] = [x - c * y for x, y in zip(m[i], m[rank])]
        rank += 1
        if rank == rows:
            break
    return rank


def solve_rational(a, b):
    """One rational solution x of A x = b, or None if inconsistent.

    Free variables are set to 0.
    """
    rows = len(a)
    cols = len(a[0]) if rows else 0
    m = [[Fraction(x) for x in row] + [Fraction(bi)] for row, bi in zip(a, b, strict=True)]
    pivots = []
    r = 0
    for j in range(cols):
        piv = next((i for i in range(r, rows) if m[i][j] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][j]
        m[r] = [x * inv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][j] != 0:
                c = m[i][j]
                m[i] = [x - c * y for x, y in zip(m[i], m[r])]
        pivots.append(j)
        r += 1
        if r == rows:
            break
    for i in range(r, rows):
        if m[i][cols] != 0:
            return None
    x = [Fraction(0)] * cols
    for i, j in enumerate(pivots):
        x[j] = m[i][cols]
    return tuple(x)


@dataclass(frozen=True)
class SmithDecomposition:
    """A = U . S . V with U, V unimodular and S in Smith normal form."""

    u: IntMatrix
    s: IntMatrix
    v: IntMatrix
    u_inv: IntMatrix
    v_inv: IntMatrix

    @property
    def diagonal(self) -> tuple[int, ...]:
        return tuple(self.s[i][i] for i in range(min(len(self.s), len(self.s[0]) if self.s else 0)))


def smith_normal_form(a: IntMatrix) -> SmithDecomposition:
    """Classical Smith reduction with minimal-absolute-value pivoting."""
    m = len(a)
    n = len(a[0]) if m else 0
    s = [list(row) for row in a]
    u = [list(row) for row in identity_matrix(m)]
    uinv = [list(row) for row in identity_matrix(m)]
    v = [list(row) for row in identity_matrix(n)]
    vinv = [list(row) for row in identity_matrix(n)]

    # Invariant: a == u @ s @ v throughout; uinv, vinv are the inverses.
    def row_add(i, j, k):  # s[i] += k * s[j]
        s[i] = [x + k * y for x, y in zip(s[i], s[j])]
        for r in range(m):
            u[r][j] -= k * u[r][i]
        uinv[i] = [x + k * y for x, y in zip(uinv[i], uinv[j])]

    def col_add(j, i, k):  # s[:,j] += k * s[:,i]
        for r in range(m):
            s[r][j] += k * s[r][i]
        v[i] = [x - k * y for x, y in zip(v[i], v[j])]
        for r in range(n):
            vinv[r][j] += k * vinv[r][i]

    def swap_rows(i, j):
        s[i], s[j] = s[j], s[i]
        for r in range(m):
            u[r][i], u[r][j] = u[r][j], u[r][i]
        uinv[i], uinv[j] = uinv[j], uinv[i]

    def swap_cols(i, j):
        for r in range(m):
            s[r][i], s[r][j] = s[r][j], s[r][i]
        v[i], v[j] = v[j], v[i]
        for r in range(n):
            vinv[r][i], vinv[r][j] = vinv[r][j], vinv[r][i]

    def negate_row(i):
        s[i] = [-x for x in s[i]]
        for r in range(m):
            u[r][i] = -u[r][i]
        uinv[i] = [-x for x in uinv[i]]

    t = 0
    while t < min(m, n):
        # Minimal |pivot| in the trailing submatrix.
        piv = None
        for i in range(t, m):
            for j in range(t, n):
                if s[i][j] != 0 and (piv is None or abs(s[i][j]) < abs(s[piv[0]][piv[1]])):
                    piv = (i, j)
        if piv is None:
            break
        if piv[0] != t:
            swap_rows(t, piv[0])
        if piv[1] != t:
            swap_cols(t, piv[1])
        dirty = False
        for i in range(t + 1, m):
            if s[i][t] != 0:
                q = s[i][t] // s[t][t]
                row_add(i, t, -q)
                if s[i][t] != 0:
                    dirty = True
        for j in range(t + 1, n):
            if s[t][j] != 0:
                q = s[t][j] // s[t][t]
                col_add(j, t, -q)
                if s[t][j] != 0:
                    dirty = True
        if dirty:
            continue
        # Enforce the divisibility chain before moving on.
        offender = None
        for i in range(t + 1, m):
            for j in range(t + 1, n):
                if s[i][j] % s[t][t] != 0:
                    offender = i
                    break
            if offender is not None:
                break
        if offender is not None:
            row_add(t, offender, 1)
            continue
        if s[t][t] < 0:
            negate_row(t)
        t += 1

    return SmithDecomposition(
        u=tuple(tuple(r) for r in u),
        s=tuple(tuple(r) for r in s),
        v=tuple(tuple(r) for r in v),
        u_inv=tuple(tuple(r) for r in uinv),
        v_inv=tuple(tuple(r) for r in vinv),
    )


def lattice_membership(a: IntMatrix, b: IntVector):
    """Some integer x with A x = b, or None if no integral solution exists."""
    m = len(a)
    n = len(a[0]) if m else 0
    if len(b) != m:
        raise ValueError("dimension mismatch")
    if n == 0:
        return () if all(x == 0 for x in b) else None
    snf = smith_normal_form(a)
    c = mat_vec(snf.u_inv, b)
    y = [0] * n
    for i in range(m):
        d = snf.s[i][i] if i < min(m, n) else 0
        if d == 0:
            if c[i] != 0:
                return None
        else:
            if c[i] % d != 0:
                return None
            y[i] = c[i] // d
    return mat_vec(snf.v_inv, tuple(y))


@dataclass(frozen=True)
class AbelianGroupPresentation:
    """Z^rank_ambient / image(relations) in coordinates free (+) torsion.

    `projection` maps ambient coordinates to free coordinates followed by
    torsion coordinates; torsion entries are meaningful modulo the
    corresponding invariant factor.
    """

    free_rank: int
    torsion_factors: tuple[int, ...]
    projection: IntMatrix

    def project(self, vec: IntVector) -> tuple[IntVector, IntVector]:
        out = mat_vec(self.projection, vec)
        free = out[: self.free_rank]
        tors = tuple(x % d for x, d in zip(out[self.free_rank :], self.torsion_factors, strict=True))
        return free, tors


def cokernel(a: IntMatrix) -> AbelianGroupPresentation:
    """Presentation of Z^rows / (column span of A)."""
    m = len(a)
    n = len(a[0]) if m else 0
    if n == 0:
        return AbelianGroupPresentation(m, (), identity_matrix(m))
    snf = smith_normal_form(a)
    diag = [snf.s[i][i] if i < min(m, n) else 0 for i in range(m)]
    free_idx = [i for i in range(m) if diag[i] == 0]
    tors_idx = [i for i in range(m) if diag[i] >= 2]
    proj = tuple(snf.u_inv[i] for i in free_idx) + tuple(snf.u_inv[i] for i in tors_idx)
    return AbelianGroupPresentation(len(free_idx), tuple(diag[i] for i in tors_idx), proj)


def complete_to_basis(vs, rank: int) -> IntMatrix:
    """Unimodular rank x rank matrix whose leading columns are vs.

    Raises NotCompletable if vs do not span a saturated sublattice (in
    particular if they are linearly dependent).
    """
    k = len(vs)
    if k == 0:
        return identity_matrix(rank)
    b = mat_from_columns(vs)
    snf = smith_normal_form(b)
    diag = snf.diagonal
    if len(diag) < k or any(d != 1 for d in diag[:k]):
        raise NotCompletable(f"vectors span a sublattice with invariants {diag}")
    ucols = mat_columns(snf.u)
    out = mat_from_columns(list(vs) + ucols[k:])
    assert abs(det(out)) == 1
    return out


def lcm(*values: int) -> int:
    out = 1
    for x in values:
        if x:
            out = out * abs(x) // gcd(out, abs(x))
    return out


def invertible_minor_lcm(rays, rank: int) -> int:
    """lcm of |det| over all invertible rank x rank submatrices of the ray matrix."""
    out = 1
    for sub in itertools.combinations(rays, rank):
        d = det(mat_from_columns(list(sub)))
        if d:
            out = lcm(out, d)
    return out
