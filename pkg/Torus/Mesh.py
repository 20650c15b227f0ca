"""
Triangulated tori stored on the quotient.

Halfedge ``h = 3*f + c`` runs from corner ``c`` to corner ``c+1`` of face
``f`` (faces counterclockwise). The universal cover is encoded by a crossing
index per halfedge: the deck translation (m, n) picked up by the lift of the
halfedge that starts in the fundamental domain.

A dual path stepping across halfedge ``h`` moves from the right face
``face(twin(h))`` into the left face ``face(h)``; ``dual_shift[h]`` is the deck
translation gained by that step when both faces are taken in their anchored
lifts (corner 0 in the fundamental domain).
"""

import math

import networkx as nx
import numpy as np

from Torus.Basereport import ValidationReport
from Torus.Errors import InvalidAngles, InvalidArgument, InvalidMesh
from Utilities.ConfigReader import ConfigReader
from Utilities.Log import Log


class TorusTriangulation:

    def __init__(self, n_vertices, faces, crossing, gamma1_primal, gamma2_primal,
                 gamma1_dual, gamma2_dual, edge_class=None):
        self.n_vertices = int(n_vertices)
        self.faces = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
        self.crossing = np.asarray(crossing, dtype=np.int64).reshape(-1, 2)
        if len(self.crossing) != 3 * len(self.faces):
            raise InvalidMesh(
                f"expected {3 * len(self.faces)} crossing entries, got {len(self.crossing)}")
        self.gamma1_primal = [int(h) for h in gamma1_primal]
        self.gamma2_primal = [int(h) for h in gamma2_primal]
        self.gamma1_dual = [int(h) for h in gamma1_dual]
        self.gamma2_dual = [int(h) for h in gamma2_dual]
        self.edge_class = None if edge_class is None else np.asarray(edge_class, dtype=np.int64)

        nh = 3 * len(self.faces)
        hs = np.arange(nh)
        self.face = hs // 3
        self.corner = hs % 3
        self.next = 3 * self.face + (self.corner + 1) % 3
        self.prev = 3 * self.face + (self.corner + 2) % 3
        self.origin = self.faces.reshape(-1)
        self.head = self.origin[self.next]
        self.twin = self._match_twins()
        self.edge_of, self.edge_halfedge = self._number_edges()

    # ------------------------------------------------------------------ #
    #  CONSTRUCTION HELPERS
    # ------------------------------------------------------------------ #

    def _match_twins(self):
        """Pairs i->j (crossing c) with j->i (crossing -c); unmatched get -1."""
        key_to_h = {}
        for h in range(self.n_halfedges):
            key = (int(self.origin[h]), int(self.head[h]), int(self.crossing[h, 0]), int(self.crossing[h, 1]))
            key_to_h.setdefault(key, h)
        twin = np.full(self.n_halfedges, -1, dtype=np.int64)
        for h in range(self.n_halfedges):
            key = (int(self.head[h]), int(self.origin[h]), -int(self.crossing[h, 0]), -int(self.crossing[h, 1]))
            twin[h] = key_to_h.get(key, -1)
        return twin

    def _number_edges(self):
        edge_of = np.full(self.n_halfedges, -1, dtype=np.int64)
        reps = []
        for h in range(self.n_halfedges):
            if edge_of[h] >= 0:
                continue
            edge_of[h] = len(reps)
            t = self.twin[h]
            if t >= 0 and edge_of[t] < 0:
                edge_of[t] = len(reps)
            reps.append(h)
        return edge_of, np.asarray(reps, dtype=np.int64)

    # ------------------------------------------------------------------ #
    #  COUNTS
    # ------------------------------------------------------------------ #

    @property
    def n_faces(self):
        return len(self.faces)

    @property
    def n_halfedges(self):
        return 3 * len(self.faces)

    @property
    def n_edges(self):
        return len(self.edge_halfedge)

    @property
    def euler_characteristic(self):
        return self.n_vertices - self.n_edges + self.n_faces

    # ------------------------------------------------------------------ #
    #  COVER ENCODING
    # ------------------------------------------------------------------ #

    @property
    def corner_offset(self):
        """Deck offset of each corner inside the anchored face lift, shape (F, 3, 2)."""
        cr = self.crossing.reshape(-1, 3, 2)
        off = np.zeros((self.n_faces, 3, 2), dtype=np.int64)
        off[:, 1] = cr[:, 0]
        off[:, 2] = cr[:, 0] + cr[:, 1]
        return off

    @property
    def dual_shift(self):
        off = self.corner_offset
        t = self.twin
        left = off[self.face, (self.corner + 1) % 3]
        right = off[self.face[t], self.corner[t]]
        shift = right - left
        shift[t < 0] = 0
        return shift

    def outgoing(self, v):
        """Outgoing halfedges of vertex v in clockwise order."""
        start = int(np.flatnonzero(self.origin == v)[0])
        star = [start]
        h = int(self.next[self.twin[start]])
        while h != start:
            star.append(h)
            h = int(self.next[self.twin[h]])
        return star

    def degree(self, v):
        return len(self.outgoing(v))

    def loop_crossing(self, halfedges):
        return tuple(int(x) for x in self.crossing[list(halfedges)].sum(axis=0))

    def dual_loop_shift(self, halfedges):
        return tuple(int(x) for x in self.dual_shift[list(halfedges)].sum(axis=0))

    # ------------------------------------------------------------------ #
    #  SERIALIZATION
    # ------------------------------------------------------------------ #

    def to_dict(self):
        doc = {
            "n_vertices": self.n_vertices,
            "faces": self.faces.tolist(),
            "crossing": {str(h): self.crossing[h].tolist() for h in range(self.n_halfedges)},
            "gamma1_primal": list(self.gamma1_primal),
            "gamma2_primal": list(self.gamma2_primal),
            "gamma1_dual": list(self.gamma1_dual),
            "gamma2_dual": list(self.gamma2_dual),
        }
        if self.edge_class is not None:
            doc["edge_class"] = {str(h): int(self.edge_class[h]) for h in range(self.n_halfedges)}
        return doc

    @classmethod
    def from_dict(cls, doc):
        try:
            faces = doc["faces"]
            nh = 3 * len(faces)
            crossing = [doc["crossing"][str(h)] for h in range(nh)]
            edge_class = None
            if "edge_class" in doc:
                edge_class = [doc["edge_class"][str(h)] for h in range(nh)]
            return cls(doc["n_vertices"], faces, crossing,
                       doc["gamma1_primal"], doc["gamma2_primal"],
                       doc["gamma1_dual"], doc["gamma2_dual"], edge_class)
        except KeyError as err:
            raise InvalidMesh(f"mesh document is missing field {err}") from err
        except (TypeError, ValueError, IndexError) as err:
            raise InvalidMesh(f"malformed mesh document: {err}") from err


def save_mesh(mesh, path):
    from Utilities.Serializer import write_json
    return write_json(mesh.to_dict(), path)


def load_mesh(path):
    from Utilities.Serializer import read_json
    return TorusTriangulation.from_dict(read_json(path))


# ---------------------------------------------------------------------- #
#  LATTICE TORI
# ---------------------------------------------------------------------- #

# Edge classes by lattice direction: E1 along (1,0), E2 along (0,1), E3 along (1,1).
_DIRECTION_CLASS = {(1, 0): 1, (0, 1): 2, (1, 1): 3}
# Corner walks of the two triangles of a grid square; the diagonal runs lower-left to upper-right.
_LOWER = ((1, 0), (0, 1), (-1, -1))
_UPPER = ((1, 1), (-1, 0), (0, -1))


def _lattice_face_index(p, a, b, upper):
    return 2 * ((a % p) + p * b) + (1 if upper else 0)


def build_lattice_torus(p, q):
    """p x q quotient of the triangular lattice, every vertex of degree 6."""
    if int(p) != p or int(q) != q or p < 2 or q < 2:
        raise InvalidArgument(f"lattice periods must be integers >= 2, got p={p}, q={q}")
    p, q = int(p), int(q)

    faces, crossing, edge_class = [], [], []
    for b in range(q):
        for a in range(p):
            for walk in (_LOWER, _UPPER):
                x, y = a, b
                corners = []
                for dx, dy in walk:
                    corners.append((x % p) + p * (y % q))
                    nx_, ny_ = x + dx, y + dy
                    crossing.append((nx_ // p - x // p, ny_ // q - y // q))
                    d = (dx, dy) if (dx, dy) in _DIRECTION_CLASS else (-dx, -dy)
                    edge_class.append(_DIRECTION_CLASS[d])
                    x, y = nx_, ny_
                faces.append(corners)

    loops = lattice_loops(p, q)
    mesh = TorusTriangulation(p * q, faces, crossing, loops["gamma1_primal"], loops["gamma2_primal"],
                              loops["gamma1_dual"], loops["gamma2_dual"], edge_class)
    Log.logger.info(f"Built {p}x{q} lattice torus: V={mesh.n_vertices} E={mesh.n_edges} F={mesh.n_faces}")
    return mesh


def lattice_loops(p, q, row=0, column=0):
    """Generator loops of the p x q lattice torus through grid row ``row`` and column ``column``."""
    row, column = row % q, column % p
    # E2 leaving (column, b) upward is corner 1 of the lower triangle of the square to its left.
    loops = {
        "gamma1_primal": [3 * _lattice_face_index(p, a, row, False) for a in range(p)],
        "gamma2_primal": [3 * _lattice_face_index(p, column - 1, b, False) + 1 for b in range(q)],
        "gamma1_dual": [],
        "gamma2_dual": [],
    }
    for a in range(p):
        loops["gamma1_dual"].append(3 * _lattice_face_index(p, a, row, False) + 2)
        loops["gamma1_dual"].append(3 * _lattice_face_index(p, a + 1, row, True) + 2)
    for b in range(q):
        loops["gamma2_dual"].append(3 * _lattice_face_index(p, column, b, True) + 0)
        loops["gamma2_dual"].append(3 * _lattice_face_index(p, column, (b + 1) % q, False) + 0)
    return loops


# ---------------------------------------------------------------------- #
#  VALIDATION
# ---------------------------------------------------------------------- #

def validate_triangulation(mesh):
    report = ValidationReport("triangulation")
    nh = mesh.n_halfedges

    bad = np.flatnonzero((mesh.faces < 0) | (mesh.faces >= mesh.n_vertices))
    report.check("vertex ids in range", len(bad) == 0,
                 f"face {bad[0] // 3} has an out-of-range vertex" if len(bad) else "")
    degenerate = [f for f in range(mesh.n_faces) if len(set(mesh.faces[f].tolist())) < 3]
    report.check("faces are triangles", not degenerate,
                 f"face {degenerate[0]} repeats a vertex" if degenerate else "")

    twin_bad = None
    for h in range(nh):
        t = int(mesh.twin[h])
        if (t < 0 or t == h or mesh.twin[t] != h or mesh.origin[t] != mesh.head[h]
                or mesh.head[t] != mesh.origin[h]):
            twin_bad = h
            break
    report.check("twin is an involution", twin_bad is None,
                 f"halfedge {twin_bad} has twin {int(mesh.twin[twin_bad])}" if twin_bad is not None else "")

    next_bad = next((h for h in range(nh) if mesh.next[mesh.next[mesh.next[h]]] != h), None)
    report.check("next cycles every face in three steps", next_bad is None,
                 f"halfedge {next_bad}" if next_bad is not None else "")

    report.check("Euler characteristic is 0", mesh.euler_characteristic == 0,
                 f"V-E+F={mesh.euler_characteristic}")

    sums = mesh.crossing.reshape(-1, 3, 2).sum(axis=1)
    open_faces = np.flatnonzero(np.any(sums != 0, axis=1))
    report.check("face crossing closure", len(open_faces) == 0,
                 f"face {open_faces[0]} sums to {tuple(sums[open_faces[0]])}" if len(open_faces) else "")

    anti_bad = None
    if twin_bad is None:
        for h in range(nh):
            if np.any(mesh.crossing[mesh.twin[h]] != -mesh.crossing[h]):
                anti_bad = h
                break
    report.check("crossing(twin) = -crossing", twin_bad is None and anti_bad is None,
                 f"halfedge {anti_bad}" if anti_bad is not None else "twins unavailable" if twin_bad is not None else "")

    used = set(mesh.faces.reshape(-1).tolist())
    report.check("every vertex is used", len(used) == mesh.n_vertices,
                 f"{mesh.n_vertices - len(used)} isolated vertices")

    for name, loop, target in (("gamma1_primal", mesh.gamma1_primal, (1, 0)),
                               ("gamma2_primal", mesh.gamma2_primal, (0, 1))):
        chained = all(mesh.head[loop[k]] == mesh.origin[loop[(k + 1) % len(loop)]] for k in range(len(loop)))
        report.check(f"{name} is a closed path", bool(loop) and chained, "")
        total = mesh.loop_crossing(loop) if loop else (0, 0)
        report.check(f"{name} crossing total", total == target, f"total={total} expected={target}")

    if twin_bad is None and len(open_faces) == 0:
        for name, loop, target in (("gamma1_dual", mesh.gamma1_dual, (1, 0)),
                                   ("gamma2_dual", mesh.gamma2_dual, (0, 1))):
            chained = all(mesh.face[loop[k]] == mesh.face[mesh.twin[loop[(k + 1) % len(loop)]]]
                          for k in range(len(loop)))
            report.check(f"{name} is a closed dual path", bool(loop) and chained, "")
            total = mesh.dual_loop_shift(loop) if loop else (0, 0)
            report.check(f"{name} dual crossing total", total == target, f"total={total} expected={target}")

    Log.logger.info(f"Validated triangulation: passed={report.passed}")
    return report


# ---------------------------------------------------------------------- #
#  ANGLE STRUCTURES
# ---------------------------------------------------------------------- #

class AngleStructure:
    """Intersection angle per undirected edge."""

    def __init__(self, mesh, theta):
        self.mesh = mesh
        self.theta = np.asarray(theta, dtype=float).reshape(-1)
        if len(self.theta) != mesh.n_edges:
            raise InvalidAngles(f"expected {mesh.n_edges} angles, got {len(self.theta)}")

    @property
    def halfedge_theta(self):
        return self.theta[self.mesh.edge_of]

    def vertex_sums(self):
        sums = np.zeros(self.mesh.n_vertices)
        np.add.at(sums, self.mesh.origin, self.halfedge_theta)
        return sums

    def to_dict(self):
        return {"theta": self.theta.tolist()}


def uniform_angle_structure(mesh, theta1, theta2, theta3):
    tol = ConfigReader.readfloat("angles", "sum_tolerance")
    thetas = (float(theta1), float(theta2), float(theta3))
    if abs(sum(thetas) - math.pi) > tol:
        raise InvalidAngles(f"class angles must sum to pi, got {sum(thetas)!r}")
    if any(t < 0 or t >= math.pi for t in thetas):
        raise InvalidAngles(f"class angles must lie in [0, pi), got {thetas}")
    if mesh.edge_class is None:
        raise InvalidAngles("mesh carries no edge-class tags; build it with build_lattice_torus")
    classes = mesh.edge_class[mesh.edge_halfedge]
    theta = np.array([thetas[c - 1] for c in classes])
    return AngleStructure(mesh, theta)


def _vertex_stars(mesh):
    stars = set()
    for v in range(mesh.n_vertices):
        stars.add(frozenset(int(mesh.edge_of[h]) for h in mesh.outgoing(v)))
    return stars


def contractible_dual_cycles(mesh, max_cycle_len):
    """Simple contractible dual cycles of length <= max_cycle_len, as lists of crossed halfedges.

    Dual edges are subdivided so that cycles through parallel dual edges are found as well.
    """
    graph = nx.Graph()
    for e, h in enumerate(mesh.edge_halfedge):
        f, g = int(mesh.face[h]), int(mesh.face[mesh.twin[h]])
        if f == g:
            continue
        graph.add_edge(("f", f), ("e", e))
        graph.add_edge(("e", e), ("f", g))

    shift = mesh.dual_shift
    found = []
    for cycle in nx.simple_cycles(graph, length_bound=2 * max_cycle_len):
        k = next(i for i, node in enumerate(cycle) if node[0] == "f")
        cycle = cycle[k:] + cycle[:k]
        crossed = []
        for i in range(1, len(cycle), 2):
            f_from, e, f_to = cycle[i - 1][1], cycle[i][1], cycle[(i + 1) % len(cycle)][1]
            h = int(mesh.edge_halfedge[e])
            if mesh.face[h] != f_to or mesh.face[mesh.twin[h]] != f_from:
                h = int(mesh.twin[h])
            crossed.append(h)
        if tuple(shift[crossed].sum(axis=0)) == (0, 0):
            found.append(crossed)
    found.sort(key=lambda c: (len(c), sorted(c)))
    return found


def validate_angle_structure(mesh, angles, max_cycle_len=None):
    if max_cycle_len is None:
        max_cycle_len = ConfigReader.readint("angles", "max_cycle_len")
    tol = ConfigReader.readfloat("angles", "sum_tolerance")
    report = ValidationReport("angle structure")

    theta = angles.theta
    out = np.flatnonzero((theta < 0) | (theta >= math.pi))
    report.check("angles in [0, pi)", len(out) == 0, f"edge {out[0]} has {theta[out[0]]!r}" if len(out) else "")

    sums = angles.vertex_sums()
    dev = np.abs(sums - 2 * math.pi)
    worst = int(np.argmax(dev))
    report.check("condition (i): vertex sums are 2*pi", dev[worst] <= tol,
                 f"vertex {worst} sums to {sums[worst]!r}")

    stars = _vertex_stars(mesh)
    cycles = contractible_dual_cycles(mesh, max_cycle_len)
    exempt = 0
    for crossed in cycles:
        edges = frozenset(int(mesh.edge_of[h]) for h in crossed)
        if len(edges) == len(crossed) and edges in stars:
            exempt += 1
            continue
        total = float(theta[list(mesh.edge_of[crossed])].sum())
        if not report.check("condition (ii): contractible dual cycle sum > 2*pi", total - 2 * math.pi > tol,
                            f"cycle through halfedges {crossed} sums to {total!r}"):
            break
    report.note(f"condition (ii) checked on {len(cycles)} contractible dual cycles of length <= {max_cycle_len} "
                f"({exempt} enclose a single vertex); longer cycles were not enumerated")
    report.cycles_checked = len(cycles)
    Log.logger.info(f"Validated angle structure: passed={report.passed}")
    return report


# ---------------------------------------------------------------------- #
#  CELL DECOMPOSITION
# ---------------------------------------------------------------------- #

class CellDecomposition:
    """Faces merged across zero-angle edges.

    ``delta[f]`` places face ``f`` relative to the root lift of its cell: the
    anchored lift of ``f`` is the cell lift translated by ``-delta[f]``.
    ``cell_shift[h]`` is the dual shift between cell lifts; it vanishes on
    zero-angle edges unless a zero-angle cycle closes up non-trivially.
    """

    def __init__(self, mesh, angles):
        self.mesh = mesh
        self.angles = angles
        self.zero = angles.halfedge_theta == 0.0
        ds = mesh.dual_shift
        nf = mesh.n_faces

        self.cell_of_face = np.full(nf, -1, dtype=np.int64)
        self.delta = np.zeros((nf, 2), dtype=np.int64)
        self.cells = []
        for root in range(nf):
            if self.cell_of_face[root] >= 0:
                continue
            cid = len(self.cells)
            members = [root]
            self.cell_of_face[root] = cid
            queue = [root]
            while queue:
                x = queue.pop(0)
                for c in range(3):
                    h = 3 * x + c
                    if not self.zero[h]:
                        continue
                    g = int(mesh.twin[h])
                    y = int(mesh.face[g])
                    if self.cell_of_face[y] < 0:
                        self.cell_of_face[y] = cid
                        self.delta[y] = self.delta[x] - ds[g]
                        members.append(y)
                        queue.append(y)
            self.cells.append(sorted(members))

        self.cell_shift = ds + self.delta[mesh.face] - self.delta[mesh.face[mesh.twin]]
        self.inconsistent = [h for h in np.flatnonzero(self.zero) if np.any(self.cell_shift[h] != 0)]

        self.corner_boundary = np.empty(mesh.n_halfedges, dtype=np.int64)
        for h in range(mesh.n_halfedges):
            self.corner_boundary[h] = self._rotate_to_boundary(h)
        self.boundary = []
        for cid, members in enumerate(self.cells):
            kept = [3 * f + c for f in members for c in range(3) if not self.zero[3 * f + c]]
            start = min(kept)
            cycle = [start]
            h = self.boundary_next(start)
            while h != start:
                cycle.append(h)
                h = self.boundary_next(h)
            self.boundary.append(cycle)

    def _rotate_to_boundary(self, h):
        mesh = self.mesh
        seen = 0
        while self.zero[h]:
            h = int(mesh.next[mesh.twin[h]])
            seen += 1
            if seen > mesh.n_halfedges:
                raise InvalidAngles("a vertex is surrounded by zero-angle edges only")
        return int(h)

    def boundary_next(self, h):
        return self._rotate_to_boundary(int(self.mesh.next[h]))

    @property
    def n_cells(self):
        return len(self.cells)

    def cell_sizes(self):
        return np.array([len(c) for c in self.cells])

    def cell_graph(self):
        """Adjacency of cells across kept edges; each graph edge remembers one halfedge."""
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n_cells))
        mesh = self.mesh
        for e, h in enumerate(mesh.edge_halfedge):
            if self.zero[h]:
                continue
            a, b = int(self.cell_of_face[mesh.face[h]]), int(self.cell_of_face[mesh.face[mesh.twin[h]]])
            if a != b and not graph.has_edge(a, b):
                graph.add_edge(a, b, halfedge=int(h))
        return graph
