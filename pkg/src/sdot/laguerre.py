"""Laguerre (power) diagrams of weighted sites restricted to a mesh.

The cell of site ``j`` with weight ``psi_j`` is
``{x : |x - y_j|^2 - psi_j <= |x - y_k|^2 - psi_k for all k}``; with equal
weights this is the Voronoi diagram.  Cells are built by clipping the mesh
bounding box against power bisectors, visiting competitors in order of
increasing distance and stopping at a provably safe radius, so pruning
never changes the result.  Each cell is then intersected with the mesh
triangles to produce fragments carrying the local affine density.

Edges created by a bisector cut keep the competitor's index as a label,
which is how interface segments (the support of the dual Hessian) are
collected without any geometric search.  Each interface is recorded from
the lower-indexed side only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .domain import Mesh, SiteSet
from .errors import ValidationError
from .geom import (
    MERGE_REL,
    HalfPlane,
    Point,
    Polygon,
    area,
    clip_labeled,
    integrate_affine,
    integrate_affine_segment,
)

# fragments smaller than this fraction of the bbox area are dropped
AREA_DROP_REL = 1e-14

# edge label meaning "mesh/triangle boundary, not a bisector"
BOUNDARY = -1

Segment = tuple[Point, Point, tuple[float, float, float]]


@dataclass(frozen=True)
class CellFragment:
    site: int
    triangle: int
    polygon: Polygon
    density: tuple[float, float, float]  # affine (gx, gy, g0) on this triangle


@dataclass(frozen=True)
class LaguerreDiagram:
    mesh: Mesh
    sites: SiteSet
    psi: np.ndarray
    fragments: list[CellFragment]
    interfaces: dict[tuple[int, int], list[Segment]] = field(repr=False)
    masses: np.ndarray = field(repr=False)

    @property
    def site_count(self) -> int:
        return len(self.sites)


def bisector(y_i: Point, psi_i: float, y_j: Point, psi_j: float) -> HalfPlane:
    """Half-plane of points power-closer to site ``i`` than to site ``j``.

    Expanding ``|x - y_i|^2 - psi_i <= |x - y_j|^2 - psi_j`` gives
    ``2 (y_j - y_i) . x <= |y_j|^2 - |y_i|^2 - psi_j + psi_i``.
    """
    a = 2.0 * (y_j[0] - y_i[0])
    b = 2.0 * (y_j[1] - y_i[1])
    if a == 0.0 and b == 0.0:
        raise ValidationError(f"coincident sites at ({y_i[0]:g}, {y_i[1]:g})")
    c = (
        y_j[0] * y_j[0]
        + y_j[1] * y_j[1]
        - y_i[0] * y_i[0]
        - y_i[1] * y_i[1]
        - psi_j
        + psi_i
    )
    return (a, b, c)


def build(mesh: Mesh, sites: SiteSet, psi) -> LaguerreDiagram:
    """Construct the Laguerre diagram of ``(sites, psi)`` restricted to the mesh."""
    psi = np.asarray(psi, dtype=float)
    n = len(sites)
    if psi.shape != (n,):
        raise ValidationError(f"psi must have {n} entries, got shape {psi.shape}")
    if not np.isfinite(psi).all():
        raise ValidationError("non-finite weight")

    x0, y0, x1, y1 = mesh.bbox
    bbox_rect: Polygon = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    merge_tol = MERGE_REL * mesh.bbox_diameter
    area_drop = AREA_DROP_REL * max((x1 - x0) * (y1 - y0), merge_tol**2)
    psi_max = float(psi.max())
    order = sites.neighbor_order
    dist = sites.neighbor_dist
    tri_bb = mesh.tri_bboxes
    # native floats: the clipping loops box numpy scalars otherwise
    pos = [tuple(p) for p in sites.positions.tolist()]
    psi_l = psi.tolist()
    tri_pts = mesh.vertices[mesh.triangles].tolist()
    tri_rho = [tuple(r) for r in mesh.tri_density.tolist()]

    fragments: list[CellFragment] = []
    interfaces: dict[tuple[int, int], list[Segment]] = {}
    masses = np.zeros(n)

    for j in range(n):
        cell, labels, applied = _clip_cell(
            bbox_rect, pos[j], psi_l[j], psi_l, psi_max, pos, order[j], dist[j], merge_tol
        )
        if not cell:
            continue

        cx = [p[0] for p in cell]
        cy = [p[1] for p in cell]
        # triangles whose bbox overlaps the cell bbox (cheap reject)
        cand = np.nonzero(
            (tri_bb[:, 0] <= max(cx) + merge_tol)
            & (tri_bb[:, 2] >= min(cx) - merge_tol)
            & (tri_bb[:, 1] <= max(cy) + merge_tol)
            & (tri_bb[:, 3] >= min(cy) - merge_tol)
        )[0]

        for t in cand.tolist():
            corners = tri_pts[t]
            poly, lab = cell, labels
            for e in range(3):
                ax, ay = corners[e]
                bx, by = corners[e - 2]
                h = (by - ay, ax - bx, (by - ay) * ax + (ax - bx) * ay)
                poly, lab = clip_labeled(poly, lab, h, BOUNDARY, merge_tol)
                if not poly:
                    break
            if not poly or area(poly) < area_drop:
                continue
            if BOUNDARY in lab:
                lab = _relabel_boundary_edges(
                    poly, lab, pos[j], psi_l[j], psi_l, pos, applied, merge_tol
                )

            density = tri_rho[t]
            fragments.append(CellFragment(j, t, poly, density))
            masses[j] += integrate_affine(poly, *density)

            m = len(poly)
            for e in range(m):
                k = lab[e]
                if k > j:  # lower-indexed site owns the interface record
                    seg = (poly[e], poly[(e + 1) % m], density)
                    interfaces.setdefault((j, k), []).append(seg)

    diagram = LaguerreDiagram(mesh, sites, psi, fragments, interfaces, masses)
    diagram.masses.setflags(write=False)
    return diagram


def _clip_cell(bbox_rect, yj, psi_j, psi, psi_max, pos, order_j, dist_j, merge_tol):
    """Clip the bbox against bisectors of site j, nearest competitor first.

    Stops once every remaining competitor k satisfies
    ``(d_k - R)^2 >= R^2 + psi_max - psi_j`` with ``d_k >= R``, where R is
    the current polygon's max distance from the site: for points x of the
    polygon, ``|x - y_k| >= d_k - R`` then forces the power distance to k
    to exceed the one to j, so k cannot carve the polygon and neither can
    any farther competitor.  Pruning therefore never changes the cell.
    """
    poly: Polygon = list(bbox_rect)
    labels = [BOUNDARY] * len(poly)
    applied: list[int] = []
    yx, yy = yj
    rsq = max((px - yx) ** 2 + (py - yy) ** 2 for px, py in poly)
    gap = rsq + psi_max - psi_j  # >= 0 since psi_max >= psi_j
    for k, d in zip(order_j.tolist(), dist_j.tolist()):
        if d * d >= rsq:  # d >= R, the termination bound applies
            s = d - math.sqrt(rsq)
            if s * s >= gap:
                break
        h = bisector(yj, psi_j, pos[k], psi[k])
        poly, labels = clip_labeled(poly, labels, h, k, merge_tol)
        applied.append(k)
        if not poly:
            break
        rsq = max((px - yx) ** 2 + (py - yy) ** 2 for px, py in poly)
        gap = rsq + psi_max - psi_j
    return poly, labels, applied


def _relabel_boundary_edges(poly, labels, yj, psi_j, psi, pos, applied, merge_tol):
    """Recover interface edges that coincide with triangle boundaries.

    A bisector lying exactly on a mesh edge never cuts either neighboring
    triangle, so the shared edge keeps the BOUNDARY label; detect that case
    by checking boundary-labelled edges against the applied bisectors.
    """
    m = len(poly)
    out = list(labels)
    for e in range(m):
        if out[e] != BOUNDARY:
            continue
        p = poly[e]
        q = poly[(e + 1) % m]
        for k in applied:
            a, b, c = bisector(yj, psi_j, pos[k], psi[k])
            band = merge_tol * math.hypot(a, b)
            if (
                abs(a * p[0] + b * p[1] - c) <= band
                and abs(a * q[0] + b * q[1] - c) <= band
            ):
                out[e] = k
                break
    return out


def interface_weight(diagram: LaguerreDiagram, i: int, j: int) -> float:
    """Density line integral over the (i, j) interface, over ``2 |y_i - y_j|``.

    Zero when the cells are not adjacent.  This is the magnitude of the
    off-diagonal dual Hessian entry.
    """
    if i == j:
        raise ValidationError("interface requires two distinct sites")
    pair = (min(i, j), max(i, j))
    segments = diagram.interfaces.get(pair)
    if not segments:
        return 0.0
    total = 0.0
    for p, q, (gx, gy, g0) in segments:
        total += integrate_affine_segment(p, q, gx, gy, g0)
    yi = diagram.sites.positions[pair[0]]
    yj = diagram.sites.positions[pair[1]]
    return total / (2.0 * math.hypot(yj[0] - yi[0], yj[1] - yi[1]))


def assign(points: np.ndarray, sites: SiteSet, psi, chunk: int = 65536) -> np.ndarray:
    """Classify points by power-distance argmin (ties to the lower index)."""
    psi = np.asarray(psi, dtype=float)
    pts = np.asarray(points, dtype=float)
    out = np.empty(len(pts), dtype=np.int64)
    pos = sites.positions
    for lo in range(0, len(pts), chunk):
        block = pts[lo : lo + chunk]
        d2 = ((block[:, None, :] - pos[None, :, :]) ** 2).sum(axis=2) - psi[None, :]
        out[lo : lo + chunk] = np.argmin(d2, axis=1)
    return out
