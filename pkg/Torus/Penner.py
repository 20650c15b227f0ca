"""
Tangent vectors of shear coordinates and of logarithmic lambda lengths, the
linear map between them and the Penner form evaluated on lifts.

Everything here runs on the full triangulation, zero-angle edges included.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from Torus.Errors import NotInW
from Torus.Moduli import omega, pullback_form
from Torus.Hodge import period_map
from Torus.Pattern import solve_pattern
from Utilities.ConfigReader import ConfigReader
from Utilities.Log import Log


@dataclass
class ShearTangent:
    x: np.ndarray   # per edge

    def vertex_sums(self, mesh):
        sums = np.zeros(mesh.n_vertices)
        np.add.at(sums, mesh.origin, self.x[mesh.edge_of])
        return sums

    def w_residual(self, mesh):
        return float(np.max(np.abs(self.vertex_sums(mesh))))


@dataclass
class ACoordTangent:
    a: np.ndarray   # per edge


def lift_matrix(mesh):
    """Matrix of a -> x; row e reads the four edges flanking e."""
    H = np.zeros((mesh.n_edges, mesh.n_edges))
    eo = mesh.edge_of
    for e, h in enumerate(mesh.edge_halfedge):
        g = mesh.twin[h]
        H[e, eo[mesh.prev[h]]] += 1.0
        H[e, eo[mesh.next[g]]] -= 1.0
        H[e, eo[mesh.prev[g]]] += 1.0
        H[e, eo[mesh.next[h]]] -= 1.0
    return H


def lift_map_h(mesh, a):
    a = a.a if isinstance(a, ACoordTangent) else np.asarray(a, dtype=float)
    return ShearTangent(lift_matrix(mesh) @ a)


def lift_kernel(mesh):
    return scipy.linalg.null_space(lift_matrix(mesh))


def lift_inverse(mesh, x, tol=1e-9):
    """Minimum-norm a with h(a) = x."""
    x = x if isinstance(x, ShearTangent) else ShearTangent(np.asarray(x, dtype=float))
    residual = x.w_residual(mesh)
    if residual > tol:
        raise NotInW(f"vertex sums of the shear tangent reach {residual:.3e}", residual=residual)
    H = lift_matrix(mesh)
    a, _, rank, _ = scipy.linalg.lstsq(H, x.x)
    misfit = float(np.max(np.abs(H @ a - x.x))) if len(a) else 0.0
    if misfit > tol:
        raise NotInW(f"shear tangent is outside the range of the lift map (misfit {misfit:.3e})", residual=misfit)
    Log.logger.debug(f"Lifted shear tangent: rank {rank} of {mesh.n_edges}, misfit {misfit:.2e}")
    return ACoordTangent(a)


def penner_form(mesh, a, b):
    a = a.a if isinstance(a, ACoordTangent) else np.asarray(a, dtype=float)
    b = b.a if isinstance(b, ACoordTangent) else np.asarray(b, dtype=float)
    e = mesh.edge_of.reshape(-1, 3)
    a01, a12, a20 = a[e[:, 0]], a[e[:, 1]], a[e[:, 2]]
    b01, b12, b20 = b[e[:, 0]], b[e[:, 1]], b[e[:, 2]]
    terms = a01 * (b12 - b20) + a12 * (b20 - b01) + a20 * (b01 - b12)
    return float(-2.0 * terms.sum())


# ---------------------------------------------------------------------- #
#  FINITE-DIFFERENCE TANGENTS
# ---------------------------------------------------------------------- #

def shear_tangent_fd(mesh, angles, A1, A2, direction, step=None, initial=None):
    """Central difference of log|X| along direction in the (A1, A2) plane."""
    step = ConfigReader.readfloat("finite_difference", "step") if step is None else float(step)
    d1, d2 = float(direction[0]), float(direction[1])
    if d1 == 0.0 and d2 == 0.0:
        return ShearTangent(np.zeros(mesh.n_edges))
    plus = solve_pattern(mesh, angles, A1 + step * d1, A2 + step * d2, initial=initial)
    minus = solve_pattern(mesh, angles, A1 - step * d1, A2 - step * d2, initial=initial)
    x = ShearTangent((np.log(np.abs(plus.X)) - np.log(np.abs(minus.X))) / (2.0 * step))
    residual = x.w_residual(mesh)
    if residual > 10.0 * step ** 2:
        raise NotInW(f"finite-difference tangent leaves W: vertex sums {residual:.3e}", residual=residual)
    return x


@dataclass
class CrossCheck:
    A: tuple
    step: float
    via_penner: float
    via_holonomy: float

    @property
    def relerr(self):
        scale = abs(self.via_holonomy)
        if scale == 0.0:
            return abs(self.via_penner)
        return abs(self.via_penner - self.via_holonomy) / scale

    def as_row(self):
        return {"A1": self.A[0], "A2": self.A[1], "step": self.step,
                "via_penner": self.via_penner, "via_holonomy": self.via_holonomy, "relerr": self.relerr}


def crosscheck_pullback(pattern, dirs, step=None, h_x=None):
    """Penner form on lifted shear tangents against 2 (1 - det h_X) omega(p, q)."""
    step = ConfigReader.readfloat("finite_difference", "step") if step is None else float(step)
    p, q = dirs
    form = pullback_form(pattern, h_x)
    mesh, angles = pattern.mesh, pattern.angles
    A1, A2 = pattern.A
    a = lift_inverse(mesh, shear_tangent_fd(mesh, angles, A1, A2, p, step, pattern.u))
    b = lift_inverse(mesh, shear_tangent_fd(mesh, angles, A1, A2, q, step, pattern.u))
    check = CrossCheck(pattern.A, step, penner_form(mesh, a, b), form.lam * omega(p, q))
    Log.logger.info(f"Pullback cross-check at A={pattern.A}: penner={check.via_penner:.10g} "
                    f"holonomy={check.via_holonomy:.10g} relerr={check.relerr:.2e}")
    return check


def predicted_B_derivative_check(pattern, p, step=None, h_x=None):
    """Relative error between h_X p and the central difference of (B1, B2) along p."""
    step = ConfigReader.readfloat("finite_difference", "step") if step is None else float(step)
    h_x = h_x if h_x is not None else period_map(pattern)
    mesh, angles = pattern.mesh, pattern.angles
    A1, A2 = pattern.A
    plus = solve_pattern(mesh, angles, A1 + step * p[0], A2 + step * p[1], initial=pattern.u)
    minus = solve_pattern(mesh, angles, A1 - step * p[0], A2 - step * p[1], initial=pattern.u)
    fd = (np.array(plus.B) - np.array(minus.B)) / (2.0 * step)
    predicted = h_x(p)
    relerr = float(np.linalg.norm(fd - predicted) / np.linalg.norm(predicted))
    Log.logger.info(f"B-derivative check at A={pattern.A}, p={tuple(p)}: relerr={relerr:.2e}")
    return relerr
