import mpmath as mp
import pytest

from kahlerdyn import TorusAutomorphism, mazur_involutions, torus_action


@pytest.fixture(autouse=True)
def _ambient_precision():
    """Oracle computations in tests run at generous ambient precision."""
    old = mp.mp.prec
    mp.mp.prec = 256
    yield
    mp.mp.prec = old


@pytest.fixture(scope="session")
def cat_torus():
    return TorusAutomorphism(2, [[2, 1], [1, 1]])


@pytest.fixture(scope="session")
def cat_action(cat_torus):
    return torus_action(cat_torus)


@pytest.fixture(scope="session")
def cubic_torus():
    """k = 3 torus whose cover map is the companion of x^3 + x^2 - 1: the
    dominant eigenvalue pair is complex with an irrational angle, so the
    degree-1 pullback has a positive-dimensional angle closure."""
    return TorusAutomorphism(3, [[0, 0, 1], [1, 0, 0], [0, 1, -1]])


@pytest.fixture(scope="session")
def wehler_surface_model():
    return mazur_involutions(2)
