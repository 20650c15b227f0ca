"""
Circle patterns on affine tori: the circumradius system, the developing map,
cross ratios and the conformal data (c, tau) read off the holonomy.
"""

import cmath
import math
from dataclasses import dataclass

import networkx as nx
import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from Torus.Errors import (BranchError, DegenerateCrossRatio, DegenerateLayout,
                          EuclideanDegenerate, InconsistentZeroAngle, InvalidArgument,
                          NonConvergence)
from Torus.Mesh import CellDecomposition
from Utilities.ConfigReader import ConfigReader
from Utilities.Log import Log
from Utilities.Serializer import complex_pair


def face_half_angle(du, theta_k):
    """Half of the central angle subtended by a chord, given the log-radius gap
    ``du`` to the neighbouring circle and the exterior angle ``theta_k``."""
    du = np.asarray(du, dtype=float)
    theta_k = np.asarray(theta_k, dtype=float)
    angle = np.arctan2(np.sin(theta_k), np.exp(du) + np.cos(theta_k))
    zero = theta_k == 0.0
    if np.any(zero):
        Log.logger.debug(f"degenerate half angle: {int(np.count_nonzero(zero))} zero exterior angles")
        angle = np.where(zero, 0.0, angle)
    return float(angle) if angle.ndim == 0 else angle


def _half_angle_slope(du, theta_k):
    e = np.exp(du)
    s, c = np.sin(theta_k), np.cos(theta_k)
    return -s * e / ((e + c) ** 2 + s ** 2)


# ---------------------------------------------------------------------- #
#  RADIUS SYSTEM
# ---------------------------------------------------------------------- #

class RadiusSystem:
    """Angle-sum equations, one per cell, in the cell log-radii."""

    def __init__(self, mesh, angles, A, cells=None):
        self.mesh = mesh
        self.angles = angles
        self.A = np.asarray(A, dtype=float).reshape(2)
        if not np.all(np.isfinite(self.A)):
            raise InvalidArgument(f"holonomy stretches must be finite, got {tuple(self.A)!r}")
        self.cells = cells if cells is not None else CellDecomposition(mesh, angles)
        tol = ConfigReader.readfloat("angles", "sum_tolerance")

        for h in self.cells.inconsistent:
            shift = float(self.cells.cell_shift[h] @ self.A)
            if abs(shift) > tol:
                raise InconsistentZeroAngle(
                    f"zero-angle edge at halfedge {h} requires a radius jump of {shift!r}",
                    halfedge=int(h), shift=shift)

        cof = self.cells.cell_of_face
        self.bh = np.concatenate([np.asarray(b, dtype=np.int64) for b in self.cells.boundary])
        self.owner = cof[mesh.face[self.bh]]
        self.neighbour = cof[mesh.face[mesh.twin[self.bh]]]
        self.shift = self.cells.cell_shift[self.bh] @ self.A
        self.exterior = math.pi - angles.halfedge_theta[self.bh]
        self.weights = self.cells.cell_sizes().astype(float)

    @property
    def n_cells(self):
        return self.cells.n_cells

    def gaps(self, u_cell):
        return u_cell[self.owner] - u_cell[self.neighbour] + self.shift

    def half_angles(self, u_cell):
        return face_half_angle(self.gaps(u_cell), self.exterior)

    def residual(self, u_cell):
        sums = np.bincount(self.owner, weights=self.half_angles(u_cell), minlength=self.n_cells)
        return sums - math.pi

    def jacobian(self, u_cell):
        g = _half_angle_slope(self.gaps(u_cell), self.exterior)
        rows = np.concatenate([self.owner, self.owner])
        cols = np.concatenate([self.owner, self.neighbour])
        vals = np.concatenate([g, -g])
        n = self.n_cells
        return sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()

    def bordered_solve(self, matrix, rhs):
        """Solves matrix x = rhs under sum(weights * x) = 0."""
        w = sp.csr_matrix(self.weights.reshape(-1, 1))
        system = sp.bmat([[matrix, w], [w.T, None]], format="csc")
        solution = spsolve(system, np.append(rhs, 0.0))
        return np.asarray(solution[:-1])

    def face_values(self, u_cell):
        return u_cell[self.cells.cell_of_face] + self.cells.delta @ self.A

    def cell_values(self, u_face):
        roots = np.array([members[0] for members in self.cells.cells])
        return np.asarray(u_face, dtype=float)[roots]


def solve_radii(mesh, angles, A1, A2, tol=None, max_iterations=None, initial=None, system=None):
    """Damped Newton on the cell angle sums; returns log-radii per face with zero face sum."""
    tol = ConfigReader.readfloat("solver", "tol") if tol is None else float(tol)
    if not tol > 0:
        raise InvalidArgument(f"solver tolerance must be positive, got {tol!r}")
    if max_iterations is None:
        max_iterations = ConfigReader.readint("solver", "max_iterations")
    min_damping = ConfigReader.readfloat("solver", "min_damping")

    system = system if system is not None else RadiusSystem(mesh, angles, (A1, A2))
    u = np.zeros(system.n_cells) if initial is None else system.cell_values(initial)
    r = system.residual(u)
    norm = np.linalg.norm(r)
    iterations = 0
    while not np.max(np.abs(r)) <= tol:
        if iterations >= max_iterations:
            raise NonConvergence(f"radius solver stopped after {iterations} iterations, "
                                 f"residual {np.max(np.abs(r)):.3e}", residual=float(np.max(np.abs(r))))
        step = system.bordered_solve(system.jacobian(u), -r)
        t = 1.0
        while True:
            trial = u + t * step
            r_trial = system.residual(trial)
            if np.linalg.norm(r_trial) < norm:
                break
            t *= 0.5
            if t < min_damping:
                raise NonConvergence(f"line search failed at iteration {iterations}, "
                                     f"residual {np.max(np.abs(r)):.3e}", residual=float(np.max(np.abs(r))))
        u, r, norm = trial, r_trial, np.linalg.norm(r_trial)
        iterations += 1
        Log.logger.debug(f"Newton iteration {iterations}: damping={t} residual={np.max(np.abs(r)):.3e}")

    u_face = system.face_values(u)
    u_face -= u_face.mean()
    Log.logger.info(f"Radius system solved at A=({A1}, {A2}) in {iterations} iterations, "
                    f"residual {np.max(np.abs(r)):.3e}")
    return u_face


# ---------------------------------------------------------------------- #
#  SIMILARITIES
# ---------------------------------------------------------------------- #

@dataclass(frozen=True)
class Similarity:
    """z -> a*z + b"""

    a: complex = 1.0
    b: complex = 0.0

    def __call__(self, z):
        return self.a * z + self.b

    def compose(self, other):
        return Similarity(self.a * other.a, self.a * other.b + self.b)

    def inverse(self):
        return Similarity(1.0 / self.a, -self.b / self.a)

    def power(self, n):
        base = self if n >= 0 else self.inverse()
        result = Similarity()
        for _ in range(abs(int(n))):
            result = base.compose(result)
        return result

    @classmethod
    def matching(cls, src0, src1, dst0, dst1):
        a = (dst1 - dst0) / (src1 - src0)
        return cls(a, dst0 - a * src0)


@dataclass
class Holonomy:
    rho1: Similarity
    rho2: Similarity

    def deck(self, shift):
        m, n = int(shift[0]), int(shift[1])
        return self.rho1.power(m).compose(self.rho2.power(n))

    @property
    def is_translation(self):
        return abs(self.rho1.a - 1) < 1e-9 and abs(self.rho2.a - 1) < 1e-9


# ---------------------------------------------------------------------- #
#  DEVELOPING MAP
# ---------------------------------------------------------------------- #

@dataclass
class Layout:
    """Developed pattern: one placed lift per face plus the deck translation it represents."""

    face_positions: np.ndarray   # (F, 3) complex
    face_translation: np.ndarray  # (F, 2) int
    face_radius: np.ndarray      # (F,) circumradius of the placed lift
    face_center: np.ndarray      # (F,) complex
    z: np.ndarray                # (V,) complex, fundamental lift
    holonomy: Holonomy
    B: tuple


class _CellCharts:
    """Cell circles in local coordinates and the chord of every kept halfedge."""

    def __init__(self, system, u_cell):
        mesh = system.mesh
        cells = system.cells
        self.system = system
        half = system.half_angles(u_cell)
        self.radius = np.exp(u_cell)
        self.start = np.zeros(mesh.n_halfedges, dtype=complex)
        self.end = np.zeros(mesh.n_halfedges, dtype=complex)
        pos = 0
        for cid, cycle in enumerate(cells.boundary):
            phase = 0.0
            R = self.radius[cid]
            for h in cycle:
                nxt = phase + 2.0 * half[pos]
                self.start[h] = R * cmath.exp(1j * phase)
                self.end[h] = R * cmath.exp(1j * nxt)
                if not abs(self.end[h] - self.start[h]) > np.finfo(float).eps * R:
                    raise DegenerateLayout(f"chord of halfedge {h} underflows", halfedge=int(h))
                phase = nxt
                pos += 1
        corner_h = cells.corner_boundary
        self.corner = self.start[corner_h].reshape(-1, 3)

    def chord(self, h):
        return self.end[h] - self.start[h]


def _glue(charts, placed, h):
    """Similarity placing the cell across kept halfedge h, given the placement of h's own cell."""
    g = int(charts.system.mesh.twin[h])
    return Similarity.matching(charts.start[g], charts.end[g], placed(charts.end[h]), placed(charts.start[h]))


def _walk_dual_loop(system, charts, cell_sim, cell_trans, loop):
    mesh, cells = system.mesh, system.cells
    cof = cells.cell_of_face
    first = int(mesh.twin[loop[0]])
    cell = int(cof[mesh.face[first]])
    sim = start_sim = cell_sim[cell]
    trans = np.array(cell_trans[cell])
    for k in loop:
        h = int(mesh.twin[k])
        if not cells.zero[k]:
            sim = _glue(charts, sim, h)
        trans = trans - cells.cell_shift[h]
        cell = int(cof[mesh.face[k]])
    return sim.compose(start_sim.inverse()), trans - cell_trans[cell]


def _rotation_total(system, charts, loop):
    """Sum of turning angles between consecutive kept crossings, each inside (-pi, pi)."""
    mesh, cells = system.mesh, system.cells
    kept = [int(k) for k in loop if not cells.zero[k]]
    total = 0.0
    for i, k_next in enumerate(kept):
        k_prev = kept[i - 1]
        total += cmath.phase(-charts.chord(int(mesh.twin[k_next])) / charts.chord(k_prev))
    return total


def develop(mesh, angles, u, A=(0.0, 0.0), base_face=0, tree="bfs", system=None):
    """Lays the pattern out in the plane and reads off the holonomy of the two dual loops."""
    if not 0 <= base_face < mesh.n_faces:
        raise InvalidArgument(f"base face {base_face} is not a face of the mesh")
    system = system if system is not None else RadiusSystem(mesh, angles, A)
    cells = system.cells
    u_cell = system.cell_values(u)
    charts = _CellCharts(system, u_cell)

    root = int(cells.cell_of_face[base_face])
    graph = cells.cell_graph()
    if tree == "bfs":
        edges = nx.bfs_edges(graph, root)
    elif tree == "dfs":
        edges = nx.dfs_edges(graph, root)
    else:
        raise InvalidArgument(f"unknown spanning tree kind {tree!r}")

    anchor = charts.corner[base_face, 0]
    cell_sim = {root: Similarity(1.0 / anchor, 0.0)}
    cell_trans = {root: cells.delta[base_face].copy()}
    for parent, child in edges:
        h = graph.edges[parent, child]["halfedge"]
        if cells.cell_of_face[mesh.face[h]] != parent:
            h = int(mesh.twin[h])
        cell_sim[child] = _glue(charts, cell_sim[parent], h)
        cell_trans[child] = cell_trans[parent] - cells.cell_shift[h]
    if len(cell_sim) != cells.n_cells:
        raise DegenerateLayout("cell adjacency graph is disconnected")

    holonomies, B = [], []
    for r, loop in enumerate((mesh.gamma1_dual, mesh.gamma2_dual)):
        rho, moved = _walk_dual_loop(system, charts, cell_sim, cell_trans, loop)
        target = (1, 0) if r == 0 else (0, 1)
        if tuple(int(x) for x in moved) != target:
            raise DegenerateLayout(f"dual loop {r + 1} shifts by {tuple(moved)}")
        beta = _rotation_total(system, charts, loop)
        if abs(math.remainder(beta - cmath.phase(rho.a), 2 * math.pi)) > 1e-8:
            raise DegenerateLayout(f"rotation total {beta!r} disagrees with holonomy argument {cmath.phase(rho.a)!r}")
        holonomies.append(rho)
        B.append(beta)
    holonomy = Holonomy(*holonomies)

    cof = cells.cell_of_face
    positions = np.empty((mesh.n_faces, 3), dtype=complex)
    translation = np.empty((mesh.n_faces, 2), dtype=np.int64)
    radius = np.empty(mesh.n_faces)
    center = np.empty(mesh.n_faces, dtype=complex)
    for f in range(mesh.n_faces):
        cid = int(cof[f])
        sim = cell_sim[cid]
        positions[f] = sim(charts.corner[f])
        translation[f] = cell_trans[cid] - cells.delta[f]
        radius[f] = abs(sim.a) * charts.radius[cid]
        center[f] = sim.b

    offsets = mesh.corner_offset
    z = np.empty(mesh.n_vertices, dtype=complex)
    seen = np.zeros(mesh.n_vertices, dtype=bool)
    for f in range(mesh.n_faces):
        for c in range(3):
            v = int(mesh.faces[f, c])
            if not seen[v]:
                seen[v] = True
                z[v] = holonomy.deck(-(translation[f] + offsets[f, c]))(positions[f, c])

    Log.logger.info(f"Developed pattern over {cells.n_cells} cells ({tree} tree from face {base_face}); "
                    f"B=({B[0]:.6g}, {B[1]:.6g})")
    return Layout(positions, translation, radius, center, z, holonomy, tuple(B))


# ---------------------------------------------------------------------- #
#  CROSS RATIOS
# ---------------------------------------------------------------------- #

def cross_ratio(zi, zj, zk, zl):
    den = (zi - zl) * (zj - zk)
    scale = max(abs(zi - zj), abs(zk - zl), 1e-300)
    if not abs(den) > 1e-14 * scale * scale:
        raise DegenerateCrossRatio("coincident points in cross ratio")
    return -(zk - zi) * (zl - zj) / den


def cross_ratios(mesh, layout):
    """Cross ratio of every edge from its two flanking triangles."""
    ds = mesh.dual_shift
    X = np.empty(mesh.n_edges, dtype=complex)
    for e, h in enumerate(mesh.edge_halfedge):
        h = int(h)
        f, c = int(mesh.face[h]), int(mesh.corner[h])
        g = int(mesh.twin[h])
        fg, cg = int(mesh.face[g]), int(mesh.corner[g])
        zi, zj, zk = layout.face_positions[f, c], layout.face_positions[f, (c + 1) % 3], layout.face_positions[f, (c + 2) % 3]
        lift = layout.face_translation[f] + ds[g] - layout.face_translation[fg]
        zl = layout.holonomy.deck(lift)(layout.face_positions[fg, (cg + 2) % 3])
        try:
            X[e] = cross_ratio(zi, zj, zk, zl)
        except DegenerateCrossRatio as err:
            raise DegenerateCrossRatio(f"coincident points at edge {e}", edge=e) from err
    return X


def crossratio_residuals(mesh, X):
    """Per-vertex residuals of the product and telescoping-sum equations, clockwise."""
    Xh = np.asarray(X)[mesh.edge_of]
    product = np.empty(mesh.n_vertices)
    telescoping = np.empty(mesh.n_vertices)
    for v in range(mesh.n_vertices):
        partial = np.cumprod(Xh[mesh.outgoing(v)])
        product[v] = abs(partial[-1] - 1.0)
        telescoping[v] = abs(partial.sum())
    return product, telescoping


# ---------------------------------------------------------------------- #
#  CONFORMAL DATA
# ---------------------------------------------------------------------- #

def conformal_data(pattern):
    """(c, tau); c is None for Euclidean patterns."""
    A1, A2 = pattern.A
    if A1 == 0.0 and A2 == 0.0:
        beta1, beta2 = pattern.layout.holonomy.rho1.b, pattern.layout.holonomy.rho2.b
        if abs(beta1) == 0.0:
            raise EuclideanDegenerate("first translation vanishes")
        tau = beta2 / beta1
        c = None
    else:
        B1, B2 = pattern.B
        c = complex(A1, B1)
        tau = complex(A2, B2) / c
    if not tau.imag > 0:
        raise BranchError(f"tau={tau!r} is not in the upper half plane", tau=complex_pair(tau))
    return c, tau


@dataclass
class CirclePattern:
    mesh: object
    angles: object
    A: tuple
    u: np.ndarray
    layout: Layout
    X: np.ndarray
    residual: float
    c: complex = None
    tau: complex = None
    system: RadiusSystem = None

    @property
    def z(self):
        return self.layout.z

    @property
    def B(self):
        return self.layout.B

    @property
    def holonomy(self):
        return self.layout.holonomy

    @property
    def holonomy_kind(self):
        return "euclidean" if self.A == (0.0, 0.0) else "affine"

    @property
    def is_euclidean(self):
        return self.holonomy_kind == "euclidean"

    def to_dict(self):
        product, telescoping = crossratio_residuals(self.mesh, self.X)
        doc = {
            "A": list(self.A),
            "B": list(self.B),
            "holonomy_kind": self.holonomy_kind,
            "u": self.u,
            "z": [complex_pair(z) for z in self.z],
            "X": {str(e): complex_pair(x) for e, x in enumerate(self.X)},
            "tau": complex_pair(self.tau),
            "c": None if self.c is None else complex_pair(self.c),
            "holonomy": {
                "rho1": [complex_pair(self.holonomy.rho1.a), complex_pair(self.holonomy.rho1.b)],
                "rho2": [complex_pair(self.holonomy.rho2.a), complex_pair(self.holonomy.rho2.b)],
            },
            "residuals": {
                "radius": self.residual,
                "arg_X": float(np.max(np.abs(np.angle(self.X) - self.angles.theta))),
                "product": float(product.max()),
                "telescoping": float(telescoping.max()),
            },
        }
        return doc


def solve_pattern(mesh, angles, A1, A2, tol=None, initial=None, base_face=0, tree="bfs"):
    """solve_radii -> develop -> cross_ratios -> conformal_data."""
    A = (float(A1), float(A2))
    system = RadiusSystem(mesh, angles, A)
    u = solve_radii(mesh, angles, A[0], A[1], tol=tol, initial=initial, system=system)
    residual = float(np.max(np.abs(system.residual(system.cell_values(u)))))
    layout = develop(mesh, angles, u, A, base_face=base_face, tree=tree, system=system)
    X = cross_ratios(mesh, layout)
    pattern = CirclePattern(mesh, angles, A, u, layout, X, residual, system=system)
    pattern.c, pattern.tau = conformal_data(pattern)
    return pattern
