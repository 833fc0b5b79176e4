from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from toricgen import feasible


def _satisfies(constraints, point):
    for coeffs, rel in constraints:
        val = sum(Fraction(c) * x for c, x in zip(coeffs, point))
        if rel == feasible.GT and not val > 0:
            return False
        if rel == feasible.GE and not val >= 0:
            return False
        if rel == feasible.EQ and val != 0:
            return False
    return True


def test_basic():
    assert feasible.find_solution([((1, 0), feasible.GT)], 2) is not None
    assert feasible.find_solution([((1,), feasible.GT), ((-1,), feasible.GT)], 1) is None
    assert feasible.find_solution([((1, 1), feasible.EQ), ((1, -1), feasible.GT)], 2) is not None
    # Strict demand squeezed onto a point is infeasible.
    assert feasible.find_solution([((1,), feasible.GE), ((-1,), feasible.GE), ((1,), feasible.GT)], 1) is None


def test_equality_plane():
    sol = feasible.find_solution([((1, 2, 3), feasible.EQ), ((0, 1, 0), feasible.GT)], 3)
    assert sol is not None and _satisfies([((1, 2, 3), feasible.EQ), ((0, 1, 0), feasible.GT)], sol)


small = st.integers(min_value=-4, max_value=4)
constraint = st.tuples(st.lists(small, min_size=3, max_size=3), st.sampled_from([feasible.GT, feasible.GE, feasible.EQ]))


@settings(max_examples=200, deadline=None)
@given(st.lists(constraint, min_size=1, max_size=7))
def test_witnesses_satisfy_their_systems(cons):
    cons = [(tuple(c), rel) for c, rel in cons]
    sol = feasible.find_solution(cons, 3)
    if sol is not None:
        assert _satisfies(cons, sol)
    else:
        # The zero point only fails when some strict constraint exists.
        assert any(rel == feasible.GT for _, rel in cons)
