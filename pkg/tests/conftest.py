import pytest

from meshreason.mesh import build_face_graph
from meshreason.primitives import icosphere


@pytest.fixture(scope="session")
def ico_graph():
    return build_face_graph(icosphere(1))
