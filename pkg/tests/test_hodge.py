import math

import numpy as np
import pytest

from Torus.Hodge import (DualOneForm, cotangent_weights, dirichlet_energy,
                         energy_inequality_check, harmonic_oneform, period_map)
from Torus.Mesh import lattice_loops, uniform_angle_structure
from Torus.Moduli import UNIT_DIRECTIONS, h_tau, norm_tau, omega
from Torus.Pattern import solve_pattern
from tests.conftest import QUAD_CELLS, RIGHT

BASIS = [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]


@pytest.fixture(scope="module")
def affine_weights(affine_pattern):
    return cotangent_weights(affine_pattern)


@pytest.fixture(scope="module")
def right_pattern(lattice):
    return solve_pattern(lattice, uniform_angle_structure(lattice, *RIGHT), 0.7, -0.4)


# ---------------------------------------------------------------------- #
#  WEIGHTS
# ---------------------------------------------------------------------- #

def test_equilateral_weights(euclidean_pattern):
    weights = cotangent_weights(euclidean_pattern)
    assert np.allclose(weights.corner_angles, math.pi / 3, atol=1e-12)
    assert np.allclose(weights.c, 1 / math.sqrt(3), atol=1e-12)
    assert weights.kept.all()


def test_opposite_angles_complement_intersection_angle(affine_weights, right_pattern):
    assert np.max(np.abs(affine_weights.angle_defect)) <= 1e-10
    assert np.max(np.abs(cotangent_weights(right_pattern).angle_defect)) <= 1e-10


def test_zero_angles_remove_edges(lattice):
    pattern = solve_pattern(lattice, uniform_angle_structure(lattice, *QUAD_CELLS), 0.3, 0.1)
    weights = cotangent_weights(pattern)
    classes = lattice.edge_class[lattice.edge_halfedge]
    assert np.array_equal(weights.removed_edges, np.flatnonzero(classes == 3))
    assert np.all(weights.c[classes == 3] == 0.0)
    assert np.all(weights.c[weights.kept] > 0)
    assert weights.cells.n_cells == lattice.n_faces // 2


# ---------------------------------------------------------------------- #
#  HARMONIC FORMS
# ---------------------------------------------------------------------- #

def test_zero_periods_give_zero_form(lattice, affine_weights):
    eta = harmonic_oneform(affine_weights, lattice, (0.0, 0.0))
    assert np.allclose(eta.eta, 0.0, atol=1e-14)


@pytest.mark.parametrize("p", BASIS)
def test_form_is_harmonic(lattice, affine_weights, p):
    eta = harmonic_oneform(affine_weights, lattice, p)
    assert eta.closed_residual() <= 1e-10
    assert eta.coclosed_residual() <= 1e-10
    assert eta.status() == {"closed": True, "coclosed": True}


def test_dual_periods_match_and_are_path_independent(lattice, euclidean_pattern, affine_weights, mesh_size):
    for weights in (cotangent_weights(euclidean_pattern), affine_weights):
        eta = harmonic_oneform(weights, lattice, (1.0, 0.0))
        assert eta.dual_period(lattice.gamma1_dual) == pytest.approx(1.0, abs=1e-10)
        assert eta.dual_period(lattice.gamma2_dual) == pytest.approx(0.0, abs=1e-10)
        shifted = lattice_loops(mesh_size, mesh_size, row=2, column=3)
        assert eta.dual_period(shifted["gamma1_dual"]) == pytest.approx(1.0, abs=1e-10)
        assert eta.dual_period(shifted["gamma2_dual"]) == pytest.approx(0.0, abs=1e-10)


def test_conjugate_periods_are_path_independent(lattice, affine_weights, mesh_size):
    shifted = lattice_loops(mesh_size, mesh_size, row=1, column=2)
    for p in BASIS:
        eta = harmonic_oneform(affine_weights, lattice, p)
        assert eta.conjugate_period(shifted["gamma1_primal"]) == pytest.approx(
            eta.conjugate_period(lattice.gamma1_primal), abs=1e-10)
        assert eta.conjugate_period(shifted["gamma2_primal"]) == pytest.approx(
            eta.conjugate_period(lattice.gamma2_primal), abs=1e-10)


def test_forms_are_linear_in_periods(lattice, affine_weights):
    p, q = np.array([0.3, -1.2]), np.array([2.0, 0.7])
    combined = harmonic_oneform(affine_weights, lattice, p + q).eta
    separate = harmonic_oneform(affine_weights, lattice, p).eta + harmonic_oneform(affine_weights, lattice, q).eta
    assert np.allclose(combined, separate, atol=1e-12)


def test_form_document(lattice, affine_weights):
    doc = harmonic_oneform(affine_weights, lattice, (1.0, 0.0)).to_dict()
    assert len(doc["eta"]) == lattice.n_edges
    assert doc["periods"] == [1.0, 0.0]


# ---------------------------------------------------------------------- #
#  ENERGY AND PERIOD MAP
# ---------------------------------------------------------------------- #

def test_energy_is_quadratic(lattice, affine_weights):
    eta = harmonic_oneform(affine_weights, lattice, (1.0, 0.5))
    doubled = DualOneForm(lattice, affine_weights, 2 * eta.eta, 2 * eta.potential, (2.0, 1.0))
    assert dirichlet_energy(affine_weights, np.zeros(lattice.n_halfedges)) == 0.0
    assert dirichlet_energy(affine_weights, doubled) == pytest.approx(4 * dirichlet_energy(affine_weights, eta),
                                                                    rel=1e-12)


def test_period_map_is_traceless(affine_period_map, right_pattern):
    assert abs(affine_period_map.trace) <= 1e-10
    assert abs(period_map(right_pattern).trace) <= 1e-10


@pytest.mark.parametrize("p", BASIS)
def test_energy_equals_symplectic_pairing(lattice, affine_period_map, p):
    eta = harmonic_oneform(affine_period_map.weights, lattice, p)
    energy = dirichlet_energy(affine_period_map.weights, eta)
    assert energy > 0
    assert omega(p, affine_period_map(p)) == pytest.approx(energy, abs=1e-10)


def test_reciprocity(affine_period_map):
    rng = np.random.default_rng(3)
    for _ in range(10):
        p, q = rng.normal(size=2), rng.normal(size=2)
        assert abs(omega(p, affine_period_map(q)) - omega(q, affine_period_map(p))) <= 1e-10


def test_period_map_square_and_determinant(affine_period_map, right_pattern):
    for h in (affine_period_map, period_map(right_pattern)):
        assert np.allclose(h.matrix @ h.matrix, -h.det * np.eye(2), atol=1e-9)
        assert 0 < h.det < 1


def test_period_map_at_euclidean_point_is_smooth_conjugate(euclidean_pattern):
    h = period_map(euclidean_pattern)
    assert np.allclose(h.matrix, h_tau(euclidean_pattern.tau).matrix, atol=1e-9)


@pytest.mark.parametrize("p", BASIS)
def test_energy_inequality(affine_pattern, affine_period_map, p):
    lhs, rhs, margin = energy_inequality_check(affine_pattern, p, affine_period_map)
    assert margin > 0
    assert lhs - rhs == margin
    doubled = energy_inequality_check(affine_pattern, (2 * p[0], 2 * p[1]), affine_period_map)[2]
    assert doubled == pytest.approx(4 * margin, abs=1e-9)


def test_norm_contraction(affine_pattern, affine_period_map):
    for p in UNIT_DIRECTIONS:
        assert norm_tau(affine_pattern.tau, p) > norm_tau(affine_pattern.tau, affine_period_map(p))


def test_period_matrix_document(affine_period_map):
    doc = affine_period_map.as_dict(energies=[1.0, 2.0])
    assert doc["kind"] == "discrete"
    assert doc["trace"] == affine_period_map.trace
    assert doc["energies"] == [1.0, 2.0]
