import pytest

from corset.balls import CayleyBall
from corset.coned import ConedBall
from corset.groups import group_from_spec
from corset.subgroups import PeripheralStructure, PeripheralSubgroup


@pytest.fixture(scope="session")
def F2():
    return group_from_spec({"kind": "free", "rank": 2})


@pytest.fixture(scope="session")
def Z2():
    return group_from_spec({"kind": "abelian", "rank": 2})


@pytest.fixture(scope="session")
def H3():
    return group_from_spec({"kind": "heisenberg"})


@pytest.fixture(scope="session")
def torus():
    return group_from_spec({"kind": "mapping_torus"})


@pytest.fixture(scope="session")
def z_star_h3():
    return group_from_spec(
        {
            "kind": "free_product",
            "factors": [{"kind": "free", "rank": 1, "names": ["t"]}, {"kind": "heisenberg"}],
        }
    )


@pytest.fixture(scope="session")
def f2_ball6(F2):
    return CayleyBall(F2, 6)


@pytest.fixture(scope="session")
def f2_ball8(F2):
    return CayleyBall(F2, 8)


@pytest.fixture(scope="session")
def f2_rel_a(F2, f2_ball8):
    P = PeripheralSubgroup(F2, [F2.parse("a")], name="<a>")
    return ConedBall(f2_ball8, PeripheralStructure([P]))


@pytest.fixture(scope="session")
def z2_ball8(Z2):
    return CayleyBall(Z2, 8)


@pytest.fixture(scope="session")
def z2_rel_a(Z2, z2_ball8):
    P = PeripheralSubgroup(Z2, [Z2.parse("a")], name="<a>")
    return ConedBall(z2_ball8, PeripheralStructure([P]))


@pytest.fixture(scope="session")
def z2_rel_ab(Z2, z2_ball8):
    Pa = PeripheralSubgroup(Z2, [Z2.parse("a")], name="<a>")
    Pb = PeripheralSubgroup(Z2, [Z2.parse("b")], name="<b>")
    return ConedBall(z2_ball8, PeripheralStructure([Pa, Pb]))
