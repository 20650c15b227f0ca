"""
SVG drawing of a developed pattern: circumcircles and triangles of k x k
holonomy translates of the fundamental domain. The y axis is flipped so the
picture has the mathematical orientation.
"""

import os

import numpy as np
import svgwrite as svg

from Torus.Errors import InvalidArgument
from Utilities.ConfigReader import ConfigReader
from Utilities.Log import Log


def _point(z):
    return (float(z.real), float(-z.imag))


def _class_strokes():
    return {
        1: ConfigReader.readconfig("svg", "class1_stroke"),
        2: ConfigReader.readconfig("svg", "class2_stroke"),
        3: ConfigReader.readconfig("svg", "class3_stroke"),
    }


def tile_copies(pattern, k):
    """(m, n, positions (F, 3), centers (F,), radii (F,)) for every translate."""
    layout = pattern.layout
    copies = []
    for n in range(k):
        for m in range(k):
            positions = np.empty_like(layout.face_positions)
            centers = np.empty_like(layout.face_center)
            radii = np.empty_like(layout.face_radius)
            for f in range(pattern.mesh.n_faces):
                deck = layout.holonomy.deck(np.array([m, n]) - layout.face_translation[f])
                positions[f] = deck(layout.face_positions[f])
                centers[f] = deck(layout.face_center[f])
                radii[f] = abs(deck.a) * layout.face_radius[f]
            copies.append((m, n, positions, centers, radii))
    return copies


def build_drawing(pattern, k, path="pattern.svg"):
    if int(k) != k or k < 1:
        raise InvalidArgument(f"tile count must be a positive integer, got {k!r}")
    k = int(k)
    mesh = pattern.mesh
    copies = tile_copies(pattern, k)

    lo = min(min((c - r).real for c, r in zip(cc, rr)) for _, _, _, cc, rr in copies)
    hi = max(max((c + r).real for c, r in zip(cc, rr)) for _, _, _, cc, rr in copies)
    bottom = min(min(-(c.imag + r) for c, r in zip(cc, rr)) for _, _, _, cc, rr in copies)
    top = max(max(-(c.imag - r) for c, r in zip(cc, rr)) for _, _, _, cc, rr in copies)
    extent = max(hi - lo, top - bottom)
    width = ConfigReader.readfloat("svg", "stroke_width") * extent
    margin = 2 * width

    dwg = svg.Drawing(path, profile='full')
    dwg.viewbox(minx=lo - margin, miny=bottom - margin,
                width=hi - lo + 2 * margin, height=top - bottom + 2 * margin)

    circle_stroke = ConfigReader.readconfig("svg", "circle_stroke")
    default_stroke = ConfigReader.readconfig("svg", "default_stroke")
    strokes = _class_strokes()
    for m, n, positions, centers, radii in copies:
        for f in range(mesh.n_faces):
            dwg.add(svg.shapes.Circle(_point(centers[f]), float(radii[f]), id=f"c-{m}-{n}-{f}",
                                      fill='none', stroke=circle_stroke, stroke_width=width / 2))
        for f in range(mesh.n_faces):
            dwg.add(svg.shapes.Polygon([_point(z) for z in positions[f]], id=f"t-{m}-{n}-{f}",
                                       fill='none', stroke='none'))
        for e, h in enumerate(mesh.edge_halfedge):
            f, c = int(mesh.face[h]), int(mesh.corner[h])
            colour = default_stroke if mesh.edge_class is None else strokes[int(mesh.edge_class[h])]
            dwg.add(svg.shapes.Line(_point(positions[f, c]), _point(positions[f, (c + 1) % 3]),
                                    id=f"e-{m}-{n}-{e}", stroke=colour, stroke_width=width))
    return dwg


def export_svg(pattern, k, path):
    dwg = build_drawing(pattern, k, path)
    try:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        dwg.save()
    except OSError as err:
        raise InvalidArgument(f"cannot write {path}: {err.strerror}") from err
    Log.logger.info(f"Wrote {k}x{k} SVG layout: {path}")
    return path
