import math

import pytest

EQUILATERAL = (math.pi / 3, math.pi / 3, math.pi / 3)
RIGHT = (math.pi / 2, math.pi / 4, math.pi / 4)
QUAD_CELLS = (math.pi / 2, math.pi / 2, 0.0)


def pytest_addoption(parser):
    """Register command-line options."""
    parser.addoption(
        "--mesh-size",
        action="store",
        type=int,
        default=4,
        help="Period p = q of the lattice torus used by the shared fixtures",
    )
    parser.addoption(
        "--slow",
        action="store_true",
        default=False,
        help="Also run the long sweeps (winding at R=5 and R=10, 9x9 nondegeneracy grid)",
    )


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long parameter sweeps, enabled with --slow")


def pytest_collection_modifyitems(config, items):
    """Skip tests marked slow unless --slow was given."""
    if config.getoption("--slow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session")
def mesh_size(request):
    return request.config.getoption("--mesh-size")


@pytest.fixture(scope="session")
def lattice(mesh_size):
    """The p x p lattice torus."""
    from Torus.Mesh import build_lattice_torus

    return build_lattice_torus(mesh_size, mesh_size)


@pytest.fixture(scope="session")
def equilateral(lattice):
    from Torus.Mesh import uniform_angle_structure

    return uniform_angle_structure(lattice, *EQUILATERAL)


@pytest.fixture(scope="session")
def right_angles(lattice):
    from Torus.Mesh import uniform_angle_structure

    return uniform_angle_structure(lattice, *RIGHT)


@pytest.fixture(scope="session")
def euclidean_pattern(lattice, equilateral):
    """Equilateral pattern with translation holonomy."""
    from Torus.Pattern import solve_pattern

    return solve_pattern(lattice, equilateral, 0.0, 0.0)


@pytest.fixture(scope="session")
def affine_pattern(lattice, equilateral):
    """Equilateral angles at (A1, A2) = (0.5, 0.2)."""
    from Torus.Pattern import solve_pattern

    return solve_pattern(lattice, equilateral, 0.5, 0.2)


@pytest.fixture(scope="session")
def affine_period_map(affine_pattern):
    from Torus.Hodge import period_map

    return period_map(affine_pattern)
