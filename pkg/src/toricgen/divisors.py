"""Torus-invariant divisors, Q-divisors and the divisor class group.

Divisors are plain dicts mapping ray id -> coefficient (int for TDivisor,
Fraction for QDivisor); absent keys mean coefficient zero.  Helper
functions keep dicts normalized (no explicit zeros) so dict equality is
divisor equality.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering

from .fan import Fan
from .lattice import AbelianGroupPresentation, cokernel, lattice_membership


def divisor(coeffs=None) -> dict:
    """Normalized divisor dict (zeros dropped)."""
    return {i: c for i, c in (coeffs or {}).items() if c != 0}


def div_add(d, e):
    out = dict(d)
    for i, c in e.items():
        out[i] = out.get(i, 0) + c
    return divisor(out)


def div_sub(d, e):
    return div_add(d, {i: -c for i, c in e.items()})


def div_scale(k, d):
    return divisor({i: k * c for i, c in d.items()})


def dense_coeffs(f: Fan, d) -> tuple:
    return tuple(d.get(i, 0) for i in range(len(f.rays)))


@total_ordering
@dataclass(frozen=True)
class DivClass:
    """A divisor class in canonical coordinates: Smith-basis free part plus
    torsion residues reduced into [0, d)."""

    free: tuple[int, ...]
    torsion: tuple[int, ...]

    def __lt__(self, other):
        return (self.free, self.torsion) < (other.free, other.torsion)

    def __str__(self):
        parts = list(self.free) + [f"{t}t" for t in self.torsion]
        return "[" + ",".join(str(p) for p in parts) + "]"


@dataclass(frozen=True)
class ClassGroup:
    fan: Fan
    presentation: AbelianGroupPresentation

    def class_of(self, d) -> DivClass:
        free, tors = self.presentation.project(dense_coeffs(self.fan, d))
        return DivClass(free, tors)

    @property
    def zero(self) -> DivClass:
        return DivClass((0,) * self.presentation.free_rank, (0,) * len(self.presentation.torsion_factors))

    def add(self, a: DivClass, b: DivClass) -> DivClass:
        free = tuple(x + y for x, y in zip(a.free, b.free, strict=True))
        tors = tuple(
            (x + y) % d
            for x, y, d in zip(a.torsion, b.torsion, self.presentation.torsion_factors, strict=True)
        )
        return DivClass(free, tors)

    def neg(self, a: DivClass) -> DivClass:
        free = tuple(-x for x in a.free)
        tors = tuple((-x) % d for x, d in zip(a.torsion, self.presentation.torsion_factors, strict=True))
        return DivClass(free, tors)

    def sub(self, a: DivClass, b: DivClass) -> DivClass:
        return self.add(a, self.neg(b))


def _relation_matrix(f: Fan):
    # Column j is the principal divisor of the j-th lattice basis vector:
    # entry (i, j) = (v_i, e_j) = j-th coordinate of ray i.
    return tuple(f.rays)


def class_group(f: Fan) -> ClassGroup:
    """Torus-invariant divisors modulo linear equivalence (with torsion)."""
    return ClassGroup(f, cokernel(_relation_matrix(f)))


def linearly_equivalent(f: Fan, d, e) -> bool:
    """True iff d - e is a principal torus-invariant divisor."""
    diff = dense_coeffs(f, div_sub(d, e))
    if not diff:
        return True
    return lattice_membership(_relation_matrix(f), diff) is not None


def divide_class(g: ClassGroup, c: DivClass, m: int) -> list[DivClass]:
    """All y with m*y = c, in canonical sorted order (empty if none)."""
    if m < 1:
        raise ValueError("m must be positive")
    free = []
    for x in c.free:
        if x % m != 0:
            return []
        free.append(x // m)
    factor_solutions = []
    for x, d in zip(c.torsion, g.presentation.torsion_factors, strict=True):
        # Solve m*y = x in Z/d.
        sols = [y for y in range(d) if (m * y - x) % d == 0]
        if not sols:
            return []
        factor_solutions.append(sols)
    out = [DivClass(tuple(free), tors) for tors in itertools.product(*factor_solutions)]
    return sorted(out)


def qdivisor(coeffs=None) -> dict:
    """Normalized Q-divisor dict with Fraction coefficients."""
    return {i: Fraction(c) for i, c in (coeffs or {}).items() if c != 0}
