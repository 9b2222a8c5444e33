import numpy as np
import pytest
from hypothesis import settings

from rgw.core_algebra import SpaceSpec
from rgw.workbench import catalog as cat

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


def lie_table(n, table):
    c = np.zeros((n, n, n))
    for (i, j), v in table.items():
        c[i, j] = v
        c[j, i] = -np.asarray(v, dtype=float)
    return c


def sphere2_hand():
    """Basis (h, e1, e2): [h,e1] = e2, [h,e2] = -e1, [e1,e2] = h."""
    c = lie_table(3, {(0, 1): [0, 0, 1], (0, 2): [0, -1, 0], (1, 2): [1, 0, 0]})
    return SpaceSpec(1, 2, c, np.eye(2), name="S2-hand")


@pytest.fixture
def su2():
    return cat.su2()


@pytest.fixture
def su2_berger():
    return cat.su2(gram=np.diag([1.0, 1.0, 2.0]))


@pytest.fixture
def heis():
    return cat.heisenberg(1)


@pytest.fixture
def s2():
    return sphere2_hand()


@pytest.fixture
def r3():
    return cat.abelian(3)
