"""
Cotangent weights of a developed pattern, discrete harmonic one-forms on the
cell decomposition and the period map they induce.

A one-form is stored per halfedge and is antisymmetric under twin. The dual
edge of halfedge h runs from the right face to the left face, so a dual loop
given as crossed halfedges has period sum(eta[k]).
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from Torus.Errors import InvalidArgument, SingularLaplacian
from Utilities.ConfigReader import ConfigReader
from Utilities.Log import Log


def _cot(x):
    return np.cos(x) / np.sin(x)


@dataclass
class EdgeWeights:
    mesh: object
    cells: object
    corner_angles: np.ndarray   # (F, 3), angle at each corner of the developed face
    c: np.ndarray               # per edge; 0 on removed edges
    kept: np.ndarray            # per edge
    angle_defect: np.ndarray    # per edge, opposite angles + theta - pi

    @property
    def halfedge_c(self):
        return self.c[self.mesh.edge_of]

    @property
    def removed_edges(self):
        return np.flatnonzero(~self.kept)


def cotangent_weights(pattern):
    """c_e = (cot of the two angles opposite e) / 2; zero-angle edges are removed."""
    mesh = pattern.mesh
    Z = pattern.layout.face_positions
    corner_angles = np.empty((mesh.n_faces, 3))
    for c in range(3):
        corner_angles[:, c] = np.angle((Z[:, (c + 2) % 3] - Z[:, c]) / (Z[:, (c + 1) % 3] - Z[:, c]))

    opposite = corner_angles[mesh.face, (mesh.corner + 2) % 3]
    rep = mesh.edge_halfedge
    alpha, beta = opposite[rep], opposite[mesh.twin[rep]]
    kept = pattern.angles.theta > 0.0
    c = np.where(kept, 0.5 * (_cot(alpha) + _cot(beta)), 0.0)
    defect = alpha + beta + pattern.angles.theta - np.pi
    Log.logger.info(f"Cotangent weights: {int(kept.sum())} kept edges, {int((~kept).sum())} removed, "
                    f"min weight {c[kept].min():.6g}")
    return EdgeWeights(mesh, pattern.system.cells, corner_angles, c, kept, defect)


@dataclass
class DualOneForm:
    mesh: object
    weights: EdgeWeights
    eta: np.ndarray       # per halfedge
    potential: np.ndarray  # per cell
    periods: tuple

    @property
    def edge_values(self):
        return self.eta[self.mesh.edge_halfedge]

    def closed_residual(self):
        """Largest sum of eta over the outgoing halfedges of a vertex."""
        sums = np.zeros(self.mesh.n_vertices)
        np.add.at(sums, self.mesh.origin, self.eta)
        return float(np.max(np.abs(sums)))

    def coclosed_residual(self):
        """Largest sum of eta / c around the boundary of a cell."""
        c = self.weights.halfedge_c
        worst = 0.0
        for cycle in self.weights.cells.boundary:
            worst = max(worst, abs(float(np.sum(self.eta[cycle] / c[cycle]))))
        return worst

    def dual_period(self, loop):
        return float(np.sum(self.eta[list(loop)]))

    def conjugate_period(self, loop):
        """Period of eta / c along a primal path of kept halfedges."""
        loop = list(loop)
        c = self.weights.halfedge_c[loop]
        if np.any(c == 0.0):
            raise InvalidArgument("primal loop runs along a removed edge")
        return float(np.sum(-self.eta[loop] / c))

    def status(self, tol=None):
        tol = ConfigReader.readfloat("hodge", "check_tolerance") if tol is None else tol
        return {"closed": self.closed_residual() <= tol, "coclosed": self.coclosed_residual() <= tol}

    def to_dict(self):
        return {
            "periods": list(self.periods),
            "eta": {str(e): float(v) for e, v in enumerate(self.edge_values)},
            "closed_residual": self.closed_residual(),
            "coclosed_residual": self.coclosed_residual(),
        }


def _cell_laplacian(weights):
    mesh, cells = weights.mesh, weights.cells
    bh = np.concatenate([np.asarray(b, dtype=np.int64) for b in cells.boundary])
    owner = cells.cell_of_face[mesh.face[bh]]
    neighbour = cells.cell_of_face[mesh.face[mesh.twin[bh]]]
    inv = 1.0 / weights.halfedge_c[bh]
    n = cells.n_cells
    L = sp.coo_matrix((np.concatenate([inv, -inv]),
                       (np.concatenate([owner, owner]), np.concatenate([owner, neighbour]))),
                      shape=(n, n)).tocsr()
    return L, bh, owner, inv


def harmonic_oneform(weights, mesh, p):
    """Closed and co-closed one-form with dual-loop periods p."""
    p = np.asarray(p, dtype=float).reshape(2)
    cells = weights.cells
    n = cells.n_cells
    L, bh, owner, inv = _cell_laplacian(weights)
    seed = cells.cell_shift @ p
    rhs = -np.bincount(owner, weights=seed[bh] * inv, minlength=n)

    ones = sp.csr_matrix(np.ones((n, 1)))
    system = sp.bmat([[L, ones], [ones.T, None]], format="csc")
    solution = spsolve(system, np.append(rhs, 0.0))
    F = np.asarray(solution[:-1])
    if not np.all(np.isfinite(F)):
        raise SingularLaplacian("cell Laplacian is singular; the cell decomposition may be disconnected")

    cof = cells.cell_of_face
    eta = F[cof[mesh.face]] - F[cof[mesh.face[mesh.twin]]] + seed
    eta[cells.zero] = 0.0
    Log.logger.debug(f"Harmonic one-form with periods {tuple(p)}")
    return DualOneForm(mesh, weights, eta, F, (float(p[0]), float(p[1])))


def dirichlet_energy(weights, eta):
    values = eta.edge_values if isinstance(eta, DualOneForm) else np.asarray(eta)[weights.mesh.edge_halfedge]
    kept = weights.kept
    return float(np.sum(values[kept] ** 2 / weights.c[kept]))


@dataclass
class PeriodMatrix:
    matrix: np.ndarray
    kind: str = "discrete"

    @property
    def trace(self):
        return float(np.trace(self.matrix))

    @property
    def det(self):
        return float(np.linalg.det(self.matrix))

    def __call__(self, p):
        return self.matrix @ np.asarray(p, dtype=float)

    def as_dict(self, **diagnostics):
        doc = {"kind": self.kind, "matrix": self.matrix.tolist(), "trace": self.trace, "det": self.det}
        doc.update(diagnostics)
        return doc


def period_map(pattern, weights=None):
    """Columns are the conjugate primal periods of the harmonic forms with dual periods (1,0) and (0,1)."""
    weights = weights if weights is not None else cotangent_weights(pattern)
    mesh = pattern.mesh
    columns, forms = [], []
    for a in ((1.0, 0.0), (0.0, 1.0)):
        eta = harmonic_oneform(weights, mesh, a)
        forms.append(eta)
        columns.append([eta.conjugate_period(mesh.gamma1_primal), eta.conjugate_period(mesh.gamma2_primal)])
    h = PeriodMatrix(np.array(columns).T, "discrete")
    h.forms = forms
    h.weights = weights
    Log.logger.info(f"Period map at A={pattern.A}: trace={h.trace:.3e} det={h.det:.12g}")
    return h


def energy_inequality_check(pattern, p, h_x=None):
    """(lhs, rhs, margin) with lhs the discrete energy of eta_p and rhs the smooth energy of h_X p."""
    from Torus.Moduli import norm_tau

    if pattern.is_euclidean:
        Log.logger.warning("energy inequality evaluated at a Euclidean pattern")
    h_x = h_x if h_x is not None else period_map(pattern)
    eta = harmonic_oneform(h_x.weights, pattern.mesh, p)
    lhs = dirichlet_energy(h_x.weights, eta)
    rhs = norm_tau(pattern.tau, h_x(p)) ** 2
    return lhs, rhs, lhs - rhs
