import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toricgen.lattice import (
    NotCompletable,
    cokernel,
    complete_to_basis,
    det,
    dot,
    invertible_minor_lcm,
    is_primitive,
    lattice_membership,
    lcm,
    mat_from_columns,
    mat_mul,
    mat_rank,
    mat_vec,
    primitive_part,
    smith_normal_form,
    solve_rational,
)

small_ints = st.integers(min_value=-9, max_value=9)


def matrices(max_dim=4):
    return st.integers(1, max_dim).flatmap(
        lambda m: st.integers(1, max_dim).flatmap(
            lambda n: st.lists(st.lists(small_ints, min_size=n, max_size=n), min_size=m, max_size=m)
        )
    )


def test_primitive_part():
    assert primitive_part((2, 4)) == ((1, 2), Fraction(2))
    assert primitive_part((Fraction(1, 2), Fraction(3, 2))) == ((1, 3), Fraction(1, 2))
    assert is_primitive((3, 5)) and not is_primitive((2, 4))
    with pytest.raises(ValueError):
        primitive_part((0, 0))


def test_det_and_rank():
    assert det(((2, 0), (0, 3))) == 6
    assert det(((1, 2), (2, 4))) == 0
    assert mat_rank(((1, 2), (2, 4))) == 1
    assert mat_rank(((1, 0, 0), (0, 1, 0))) == 2


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_smith_normal_form_properties(rows):
    a = tuple(tuple(r) for r in rows)
    snf = smith_normal_form(a)
    # Decomposition holds exactly and the outer factors are unimodular.
    assert mat_mul(mat_mul(snf.u, snf.s), snf.v) == a
    assert abs(det(snf.u)) == 1 and abs(det(snf.v)) == 1
    assert mat_mul(snf.u, snf.u_inv) == tuple(
        tuple(1 if i == j else 0 for j in range(len(snf.u))) for i in range(len(snf.u))
    )
    diag = snf.diagonal
    nonzero = [d for d in diag if d != 0]
    assert all(d >= 0 for d in diag)
    assert all(nonzero[i + 1] % nonzero[i] == 0 for i in range(len(nonzero) - 1))
    # Off-diagonal entries vanish.
    for i, row in enumerate(snf.s):
        for j, x in enumerate(row):
            if i != j:
                assert x == 0


def test_smith_known_values():
    assert smith_normal_form(((2, 4, 4), (-6, 6, 12), (10, -4, -16))).diagonal == (2, 6, 12)
    assert smith_normal_form(((1, 0), (1, 2))).diagonal == (1, 2)


@settings(max_examples=40, deadline=None)
@given(matrices(3), st.lists(small_ints, min_size=3, max_size=3))
def test_lattice_membership_certificates(rows, x):
    a = tuple(tuple(r) for r in rows)
    n = len(a[0])
    x = tuple(x[:n]) + (0,) * (n - len(x[:n]))
    b = mat_vec(a, x)
    sol = lattice_membership(a, b)
    assert sol is not None
    assert mat_vec(a, sol) == tuple(b)


def test_lattice_membership_negative():
    # Column lattice of [[2,0],[0,2]] misses odd vectors.
    assert lattice_membership(((2, 0), (0, 2)), (1, 0)) is None
    assert lattice_membership(((2, 0), (0, 2)), (4, -2)) == (2, -1)


def test_cokernel_presentations():
    pres = cokernel(((1, 0), (1, 2)))
    assert pres.free_rank == 0 and pres.torsion_factors == (2,)
    pres = cokernel(((1, 0), (0, 1), (-1, -1)))
    assert pres.free_rank == 1 and pres.torsion_factors == ()
    free, tors = pres.project((1, 0, 0))
    assert len(free) == 1 and tors == ()


def test_solve_rational():
    assert solve_rational(((2, 0), (0, 4)), (1, 2)) == (Fraction(1, 2), Fraction(1, 2))
    assert solve_rational(((1, 1), (2, 2)), (1, 3)) is None


def test_complete_to_basis():
    basis = complete_to_basis([(1, 0, 0), (0, 1, 0)], 3)
    assert abs(det(basis)) == 1
    assert mat_vec(basis, (1, 0, 0)) == (1, 0, 0)
    with pytest.raises(NotCompletable):
        complete_to_basis([(2, 0)], 2)
    with pytest.raises(NotCompletable):
        complete_to_basis([(1, 0), (1, 2)], 2)


def test_invertible_minor_lcm():
    rays = ((1, 0), (0, 1), (-1, -1))
    assert invertible_minor_lcm(rays, 2) == 1
    assert invertible_minor_lcm(((1, 0), (1, 2)), 2) == 2
    assert lcm(4, 6) == 12


def test_dot_and_columns():
    assert dot((1, 2), (3, 4)) == 11
    assert mat_from_columns([(1, 2), (3, 4)]) == ((1, 3), (2, 4))
