"""Frobenius pushforward decompositions and generalized Thomsen collections.

Two independent algorithms compute the splitting multiplicities of the
pushforward of a line bundle along the degree-m Frobenius map: a direct
cube count over {0..m-1}^r and an enumeration of the (1/m)-lattice points
of the unit box via the floor-formula divisors.  The Thomsen collection is
the stabilized set of floor-divisor classes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .divisors import ClassGroup, DivClass, class_group, dense_coeffs, div_sub, divide_class, divisor
from .fan import Fan, is_smooth
from .lattice import dot, floor_rat, invertible_minor_lcm, lcm, mat_rank


class RaysDoNotSpan(ValueError):
    """The lattice enumeration needs the rays to span the ambient space."""


class NoStabilization(RuntimeError):
    def __init__(self, budget):
        super().__init__(f"Thomsen collection did not stabilize within {budget} doubling rounds")
        self.budget = budget


def divisor_floor(f: Fan, u, d=None) -> dict:
    """The floor-formula divisor: coefficient floor((v_i, u) + c_i) on ray i."""
    d = d or {}
    if len(u) != f.rank:
        raise ValueError("u must have the fan's rank")
    return divisor({i: floor_rat(dot(v, u) + d.get(i, 0)) for i, v in enumerate(f.rays)})


@dataclass(frozen=True)
class FrobeniusDecomposition:
    m: int
    source: dict
    multiplicities: dict  # DivClass -> positive int

    def sorted_items(self):
        return sorted(self.multiplicities.items())

    @property
    def total(self) -> int:
        return sum(self.multiplicities.values())


def frobenius_cube(f: Fan, m: int, bundle=None, group: ClassGroup | None = None) -> FrobeniusDecomposition:
    """Multiplicities via the cube count of the pushforward splitting theorem.

    For each point (l_1..l_r) of {0..m-1}^r the class of bundle - sum l_i D_i
    contributes one unit to every m-th root of that class.
    """
    bundle = divisor(bundle or {})
    if m < 1:
        raise ValueError("m must be positive")
    if not is_smooth(f):
        raise ValueError("fan must be smooth")
    g = group or class_group(f)
    mult: dict[DivClass, int] = {}
    r = len(f.rays)
    for point in itertools.product(range(m), repeat=r):
        c = g.class_of(div_sub(bundle, {i: point[i] for i in range(r)}))
        for root in divide_class(g, c, m):
            mult[root] = mult.get(root, 0) + 1
    return FrobeniusDecomposition(m, bundle, mult)


def _box_points(m: int, n: int):
    steps = [Fraction(k, m) for k in range(m)]
    return itertools.product(steps, repeat=n)


def frobenius_lattice(f: Fan, m: int, d=None, group: ClassGroup | None = None) -> FrobeniusDecomposition:
    """Multiplicities by enumerating u in (1/m)Z^n within the unit box.

    Requires the rays to span the ambient space and m*d to be integral.
    """
    d = d or {}
    if m < 1:
        raise ValueError("m must be positive")
    if mat_rank(f.ray_matrix()) < f.rank:
        raise RaysDoNotSpan("rays do not span the ambient space")
    for i, c in d.items():
        if (m * Fraction(c)).denominator != 1:
            raise ValueError(f"m*c_{i} is not integral")
    g = group or class_group(f)
    mult: dict[DivClass, int] = {}
    for u in _box_points(m, f.rank):
        c = g.class_of(divisor_floor(f, u, d))
        mult[c] = mult.get(c, 0) + 1
    source = divisor({i: int(m * Fraction(c)) for i, c in d.items()})
    return FrobeniusDecomposition(m, source, mult)


@dataclass(frozen=True)
class ThomsenCollection:
    classes: frozenset
    m_used: int
    stabilization_evidence: tuple[int, int, int]

    def sorted_classes(self):
        return sorted(self.classes)


def stabilization_base(f: Fan, d=None) -> int:
    """Base grid denominator: lcm of coefficient denominators times the lcm
    of |det| over invertible full-rank ray submatrices."""
    d = d or {}
    denoms = [Fraction(c).denominator for c in d.values()]
    return lcm(lcm(*denoms) if denoms else 1, invertible_minor_lcm(f.rays, f.rank))


def _classes_at(f: Fan, g: ClassGroup, m: int, d):
    return frozenset(g.class_of(divisor_floor(f, u, d)) for u in _box_points(m, f.rank))


def thomsen_collection(f: Fan, d=None, budget: int = 6, group: ClassGroup | None = None) -> ThomsenCollection:
    """The stabilized set of floor-divisor classes T(X, D).

    The grid denominator starts at the stabilization base and doubles until
    two consecutive doubling rounds bring no new classes (a single stalled
    round can be a coincidence: classes needing an unrelated prime factor in
    the denominator appear only two doublings later).
    """
    d = {i: Fraction(c) for i, c in (d or {}).items()}
    if not is_smooth(f):
        raise ValueError("fan must be smooth")
    g = group or class_group(f)
    m = stabilization_base(f, d)
    sets = [_classes_at(f, g, m, d), _classes_at(f, g, 2 * m, d)]
    for _ in range(budget):
        sets.append(_classes_at(f, g, 4 * m, d))
        if sets[0] == sets[1] == sets[2]:
            return ThomsenCollection(sets[2], m, (m, 2 * m, 4 * m))
        sets.pop(0)
        m *= 2
    raise NoStabilization(budget)
