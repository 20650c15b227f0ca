"""
Two-parameter family of cross ratio systems on triangular-lattice tori and
its Euclidean member.
"""

import math

import numpy as np

from Torus.Errors import InvalidArgument, InvalidAngles, NumericalCheckFailure
from Torus.Mesh import uniform_angle_structure
from Torus.Pattern import crossratio_residuals, solve_pattern
from Torus.Penner import lift_inverse, penner_form, ShearTangent
from Utilities.Log import Log

CLASS_TOLERANCE = 1e-10


def _edge_classes(mesh):
    if mesh.edge_class is None:
        raise InvalidAngles("mesh carries no edge-class tags; build it with build_lattice_torus")
    return mesh.edge_class[mesh.edge_halfedge]


def family_cross_ratios(mesh, theta1, theta2, theta3, alpha, beta):
    """X = alpha e^{i theta1} on E1, beta e^{i theta2} on E2, e^{i theta3} / (alpha beta) on E3."""
    uniform_angle_structure(mesh, theta1, theta2, theta3)
    if not (alpha > 0 and beta > 0):
        raise InvalidArgument(f"family parameters must be positive, got alpha={alpha}, beta={beta}")
    values = {
        1: alpha * np.exp(1j * theta1),
        2: beta * np.exp(1j * theta2),
        3: np.exp(1j * theta3) / (alpha * beta),
    }
    X = np.array([values[int(c)] for c in _edge_classes(mesh)])
    product, telescoping = crossratio_residuals(mesh, X)
    worst = max(product.max(), telescoping.max())
    if worst > 1e-12:
        raise NumericalCheckFailure(f"lattice family violates the vertex equations by {worst:.3e}", residual=worst)
    return X


def family_parameters(pattern):
    """(alpha, beta, spread) read off a solved lattice pattern; spread is the worst classwise deviation."""
    classes = _edge_classes(pattern.mesh)
    modulus = np.abs(pattern.X)
    alpha = float(modulus[classes == 1].mean())
    beta = float(modulus[classes == 2].mean())
    spread = max(
        float(np.ptp(modulus[classes == 1])),
        float(np.ptp(modulus[classes == 2])),
        float(np.max(np.abs(modulus[classes == 3] - 1.0 / (alpha * beta)))),
    )
    return alpha, beta, spread


def euclidean_point(mesh, theta1, theta2, theta3, initial=None):
    """(alpha, beta) of the pattern with translation holonomy."""
    angles = uniform_angle_structure(mesh, theta1, theta2, theta3)
    pattern = solve_pattern(mesh, angles, 0.0, 0.0, initial=initial)
    alpha, beta, spread = family_parameters(pattern)
    if spread > CLASS_TOLERANCE:
        raise NumericalCheckFailure(f"|X| is not constant per edge class (spread {spread:.3e})", spread=spread)
    Log.logger.info(f"Euclidean point for theta=({theta1}, {theta2}, {theta3}): alpha={alpha!r} beta={beta!r}")
    return alpha, beta


def class_tangents(mesh):
    """Exact shear tangents along log alpha and log beta."""
    classes = _edge_classes(mesh)
    along_alpha = np.select([classes == 1, classes == 3], [1.0, -1.0], 0.0)
    along_beta = np.select([classes == 2, classes == 3], [1.0, -1.0], 0.0)
    return ShearTangent(along_alpha), ShearTangent(along_beta)


def euclidean_pullback(mesh, theta1, theta2, theta3):
    """Penner form on the (log alpha, log beta) tangents; returns (matrix, det)."""
    uniform_angle_structure(mesh, theta1, theta2, theta3)
    x_alpha, x_beta = class_tangents(mesh)
    a_alpha, a_beta = lift_inverse(mesh, x_alpha), lift_inverse(mesh, x_beta)
    off = penner_form(mesh, a_alpha, a_beta)
    matrix = np.array([[0.0, off], [-off, 0.0]])
    if not abs(off) > 1e-6:
        raise NumericalCheckFailure(f"pullback form degenerates at the Euclidean point ({off!r})", value=off)
    det = float(np.linalg.det(matrix))
    Log.logger.info(f"Euclidean pullback off-diagonal {off!r}, det {det!r}")
    return matrix, det


def tri_example_report(mesh, theta1, theta2, theta3):
    alpha, beta = euclidean_point(mesh, theta1, theta2, theta3)
    matrix, det = euclidean_pullback(mesh, theta1, theta2, theta3)
    return {
        "theta": [theta1, theta2, theta3],
        "theta_over_pi": [t / math.pi for t in (theta1, theta2, theta3)],
        "euclidean_point": {"alpha": alpha, "beta": beta},
        "pullback": matrix,
        "det": det,
    }
