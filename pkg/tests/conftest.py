import pytest

from toricgen.fan import Fan


@pytest.fixture
def fan_p1():
    return Fan.make(1, [(1,), (-1,)], [(0,), (1,)])


@pytest.fixture
def fan_p2():
    return Fan.make(2, [(1, 0), (0, 1), (-1, -1)], [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def fan_p1xp1():
    return Fan.make(2, [(1, 0), (-1, 0), (0, 1), (0, -1)], [(0, 2), (0, 3), (1, 2), (1, 3)])


@pytest.fixture
def fan_a2():
    return Fan.make(2, [(1, 0), (0, 1)], [(0, 1)])


@pytest.fixture
def fan_p3():
    return Fan.make(3, [(1, 0, 0), (0, 1, 0), (0, 0, 1), (-1, -1, -1)], [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)])


@pytest.fixture
def fan_torsion():
    # Two rays, no 2-cone: class group Z/2.
    return Fan.make(2, [(1, 0), (1, 2)], [(0,), (1,)])
