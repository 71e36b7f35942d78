"""
LSBuck - Cut-Cell Quadrature

Integration rules restricted to the material part of each element:
- Tensor Gauss-Legendre rules for outer elements
- Triangulation of enriched elements along the interface polygon
- Dunavant triangle rules mapped into the parent square

Rule weights are parent-area weights: summing them over an outer element
gives 4, so assembly multiplies by |J_el| only.
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from errors import QuadratureError
from geometry_nurbs import Element, NurbsPatch
from levelset import (
    ENRICHED,
    INNER,
    PARENT_CORNERS,
    Crossing,
    ElementClassification,
    LevelSetShape,
    edge_intersections,
    element_phi,
    walk_to_parent,
)

logger = logging.getLogger('lsbuck.quadrature')

PARENT_AREA = 4.0
SLIVER_FRACTION = 1e-12
AREA_TOL = 1e-10


# ---------------------------------------------------------------------------
# Rules
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TriangleRule:
    """
    Rule on the reference triangle (0,0), (1,0), (0,1).

    Weights sum to 1; an integral is 1/2 * sum(w_i f_i).
    """

    name: str
    points: np.ndarray    # (n, 2)
    weights: np.ndarray   # (n,)
    degree: int


def _symmetric_points(a: float, b: float) -> List[List[float]]:
    # barycentric (a, b, b) and its permutations, as (xi', eta') = (L2, L3)
    return [[b, b], [a, b], [b, a]]


DUNAVANT_3 = TriangleRule(
    name='dunavant3',
    points=np.array([[1.0 / 6.0, 1.0 / 6.0], [2.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 3.0]]),
    weights=np.full(3, 1.0 / 3.0),
    degree=2,
)

DUNAVANT_7 = TriangleRule(
    name='dunavant7',
    points=np.array(
        [[1.0 / 3.0, 1.0 / 3.0]]
        + _symmetric_points(0.0597158717897698, 0.4701420641051151)
        + _symmetric_points(0.7974269853530873, 0.1012865073234563)
    ),
    weights=np.array([0.225] + [0.1323941527885062] * 3 + [0.1259391805448271] * 3),
    degree=5,
)

TRIANGLE_RULES = {3: DUNAVANT_3, 7: DUNAVANT_7}


def triangle_rule(n_points: int) -> TriangleRule:
    try:
        return TRIANGLE_RULES[int(n_points)]
    except KeyError:
        raise QuadratureError(
            f"Unsupported triangle rule with {n_points} points (choose from {sorted(TRIANGLE_RULES)})"
        )


def tensor_gauss(n_points: int):
    """n x n Gauss-Legendre rule on [-1, 1]^2 (points, weights)"""
    x, w = np.polynomial.legendre.leggauss(n_points)
    X, Y = np.meshgrid(x, x, indexing='xy')
    W = np.outer(w, w)
    return np.column_stack([X.ravel(), Y.ravel()]), W.ravel()


# ---------------------------------------------------------------------------
# Triangulation
# ---------------------------------------------------------------------------

def _signed_area(poly: np.ndarray) -> float:
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def triangle_area(tri) -> float:
    tri = np.asarray(tri, dtype=float)
    (x0, y0), (x1, y1), (x2, y2) = tri
    return 0.5 * abs((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0))


def _inside_triangle(p, a, b, c, tol=1e-14) -> bool:
    def cross(o, u, v):
        return (u[0] - o[0]) * (v[1] - o[1]) - (u[1] - o[1]) * (v[0] - o[0])
    return cross(a, b, p) >= -tol and cross(b, c, p) >= -tol and cross(c, a, p) >= -tol


def ear_clip(polygon) -> List[np.ndarray]:
    """
    Triangulate a simple polygon.

    Collinear and repeated vertices are dropped. Raises QuadratureError when
    no ear exists, which signals a self-intersecting input.
    """
    pts = np.asarray(polygon, dtype=float)
    if len(pts) < 3 or abs(_signed_area(pts)) <= 1e-300:
        return []
    if _signed_area(pts) < 0:
        pts = pts[::-1]

    scale = max(float(np.ptp(pts, axis=0).max()), 1e-300)
    eps = 1e-14 * scale * scale
    idx = list(range(len(pts)))
    triangles = []
    while len(idx) > 3:
        clipped = False
        for k in range(len(idx)):
            i0, i1, i2 = idx[k - 1], idx[k], idx[(k + 1) % len(idx)]
            a, b, c = pts[i0], pts[i1], pts[i2]
            turn = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
            if abs(turn) <= eps:
                idx.pop(k)
                clipped = True
                break
            if turn < 0:
                continue
            blocked = False
            for j in idx:
                if j in (i0, i1, i2):
                    continue
                p = pts[j]
                if np.allclose(p, a) or np.allclose(p, b) or np.allclose(p, c):
                    continue
                if _inside_triangle(p, a, b, c):
                    blocked = True
                    break
            if blocked:
                continue
            triangles.append(np.array([a, b, c]))
            idx.pop(k)
            clipped = True
            break
        if not clipped:
            raise QuadratureError("Polygon has no ear; interface polygon is self-intersecting")
    if len(idx) == 3:
        tri = pts[idx]
        if triangle_area(tri) > 0.5 * eps:
            triangles.append(tri)
    return triangles


@dataclass(frozen=True, eq=False)
class CutCellPartition:
    """Triangles tiling the parent square, tagged material or void"""

    triangles: np.ndarray   # (n, 3, 2) parent coordinates
    material: np.ndarray    # (n,) bool
    n_dropped: int = 0

    @property
    def areas(self) -> np.ndarray:
        return np.array([triangle_area(t) for t in self.triangles])

    @property
    def material_area(self) -> float:
        return float(self.areas[self.material].sum())

    @property
    def void_area(self) -> float:
        return float(self.areas[~self.material].sum())

    def quadrature(self, rule: TriangleRule):
        """Mapped points and parent-area weights over the material triangles"""
        points, weights = [], []
        for tri in self.triangles[self.material]:
            p, w = map_triangle_gauss(tri, rule)
            points.append(p)
            weights.append(0.5 * w)
        if not points:
            return np.zeros((0, 2)), np.zeros(0)
        return np.vstack(points), np.concatenate(weights)


def _bulge_point(start: np.ndarray, end: np.ndarray,
                 phi_parent: Callable, n_steps: int = 16) -> Optional[np.ndarray]:
    """Interface point on the perpendicular bisector of a chord, if one is near"""
    chord = end - start
    length = float(np.linalg.norm(chord))
    if length <= 1e-12:
        return None
    mid = 0.5 * (start + end)
    normal = np.array([-chord[1], chord[0]]) / length
    f_mid = phi_parent(mid)
    if f_mid == 0.0:
        return None

    def reach(direction):
        # largest t keeping mid + t*direction inside the parent square
        limits = []
        for c in range(2):
            if direction[c] > 1e-14:
                limits.append((1.0 - mid[c]) / direction[c])
            elif direction[c] < -1e-14:
                limits.append((-1.0 - mid[c]) / direction[c])
        return min([0.5 * length] + limits)

    best = None
    for sign in (1.0, -1.0):
        direction = sign * normal
        t_max = reach(direction)
        if t_max <= 0:
            continue
        ts = np.linspace(0.0, t_max, n_steps + 1)
        prev_t, prev_f = 0.0, f_mid
        for t in ts[1:]:
            f = phi_parent(mid + t * direction)
            if (f >= 0) != (prev_f >= 0):
                root = brentq(lambda s: phi_parent(mid + s * direction), prev_t, t, xtol=1e-15)
                if best is None or root < best[0]:
                    best = (root, mid + root * direction)
                break
            prev_t, prev_f = t, f
    if best is None or best[0] <= 1e-12:
        return None
    return best[1]


def _runs(corner_phi, crossings: Sequence[Crossing], phi_parent: Optional[Callable]):
    """Split the counter-clockwise boundary into runs between crossings"""
    corner_flags = np.asarray(corner_phi) >= 0
    ordered = sorted(crossings, key=lambda c: c.position)
    runs = []
    for i, start in enumerate(ordered):
        end = ordered[(i + 1) % len(ordered)]
        lo = start.position
        hi = end.position + (4.0 if i == len(ordered) - 1 else 0.0)
        corners = [k % 4 for k in range(int(np.floor(lo)) + 1, int(np.ceil(hi)) + 1)
                   if lo < k < hi]
        if corners:
            flag = bool(corner_flags[corners[0]])
        elif phi_parent is not None:
            flag = phi_parent(walk_to_parent(0.5 * (lo + hi))[0]) >= 0
        else:
            flag = None
        runs.append({'start': start.parent, 'end': end.parent,
                     'corners': [PARENT_CORNERS[k] for k in corners], 'flag': flag})

    # runs without corners and without phi alternate with their neighbours
    for _ in range(len(runs)):
        for i, run in enumerate(runs):
            if run['flag'] is None and runs[i - 1]['flag'] is not None:
                run['flag'] = not runs[i - 1]['flag']
    if any(run['flag'] is None for run in runs):
        raise QuadratureError("Cannot determine material side of the interface")

    # drop crossings that separate runs of the same side (touching points)
    merged = []
    for run in runs:
        if merged and merged[-1]['flag'] == run['flag']:
            merged[-1]['end'] = run['end']
            merged[-1]['corners'] = merged[-1]['corners'] + [run['start']] + run['corners']
        else:
            merged.append(dict(run))
    if len(merged) > 1 and merged[0]['flag'] == merged[-1]['flag']:
        last = merged.pop()
        merged[0]['start'] = last['start']
        merged[0]['corners'] = last['corners'] + [last['end']] + merged[0]['corners']
    return merged


def _polygons(runs, center_flag: bool, bulges):
    """Cap polygons for runs on the far side, one central polygon for the rest"""
    polygons = []
    central = []
    for run, bulge in zip(runs, bulges):
        central.append(run['start'])
        if run['flag'] == center_flag:
            central.extend(run['corners'])
        else:
            if bulge is not None:
                central.append(bulge)
            cap = [run['start']] + run['corners'] + [run['end']]
            if bulge is not None:
                cap.append(bulge)
            polygons.append((cap, run['flag']))
    polygons.append((central, center_flag))
    return polygons


def _triangulate(polygons):
    triangles, flags = [], []
    for poly, flag in polygons:
        for tri in ear_clip(np.array(poly)):
            triangles.append(tri)
            flags.append(flag)
    return triangles, flags


def triangulate_cut_element(corner_phi, crossings: Sequence[Crossing],
                            phi_parent: Optional[Callable] = None) -> CutCellPartition:
    """
    Split the parent square along the interface polygon.

    The boundary is cut into runs at the crossings. Runs on the side opposite
    to the element centre become caps closed by a chord; everything else
    forms the central region. When phi_parent is given, each chord gets an
    extra vertex on the interface near its midpoint. Triangles inherit the
    side of the region they come from.

    Args:
        corner_phi: phi at the four parent corners (PARENT_CORNERS order)
        crossings: interface crossings from edge_intersections
        phi_parent: optional phi(parent_point) for the centre test and chord bulges

    Returns:
        CutCellPartition
    """
    if len(crossings) < 2:
        raise QuadratureError(f"Cut element needs at least 2 crossings, got {len(crossings)}")

    runs = _runs(corner_phi, crossings, phi_parent)
    if len(runs) == 1:
        flag = runs[0]['flag']
        triangles = ear_clip(PARENT_CORNERS)
        return CutCellPartition(np.array(triangles), np.full(len(triangles), flag))

    if phi_parent is not None:
        center_flag = phi_parent(np.zeros(2)) >= 0
    else:
        weight = {True: 0, False: 0}
        for run in runs:
            weight[run['flag']] += len(run['corners'])
        center_flag = weight[True] >= weight[False]
    if all(run['flag'] != center_flag for run in runs):
        center_flag = runs[0]['flag']

    bulges = [None] * len(runs)
    if phi_parent is not None:
        bulges = [
            _bulge_point(np.asarray(run['end']), np.asarray(run['start']), phi_parent)
            if run['flag'] != center_flag else None
            for run in runs
        ]

    triangles, flags = None, None
    for attempt in (bulges, [None] * len(runs)):
        try:
            candidate, candidate_flags = _triangulate(_polygons(runs, center_flag, attempt))
        except QuadratureError:
            continue
        total = sum(triangle_area(t) for t in candidate)
        if abs(total - PARENT_AREA) <= AREA_TOL:
            triangles, flags = candidate, candidate_flags
            break
    if triangles is None:
        raise QuadratureError("Cut-element triangulation does not tile the parent square")

    keep = [triangle_area(t) >= SLIVER_FRACTION * PARENT_AREA for t in triangles]
    n_dropped = len(keep) - sum(keep)
    if n_dropped:
        logger.warning(f"Dropped {n_dropped} sliver triangle(s) below "
                       f"{SLIVER_FRACTION * PARENT_AREA:.1e} parent area")
    tris = np.array([t for t, k in zip(triangles, keep) if k]).reshape(-1, 3, 2)
    material = np.array([f for f, k in zip(flags, keep) if k], dtype=bool)
    return CutCellPartition(triangles=tris, material=material, n_dropped=n_dropped)


# ---------------------------------------------------------------------------
# Mapping and element rules
# ---------------------------------------------------------------------------

def map_triangle_gauss(triangle, rule: TriangleRule):
    """
    Map a reference-triangle rule onto a triangle in parent coordinates.

    Returns:
        tuple: (points (n, 2), weights (n,)) with weights w_i * |J_tri|,
        |J_tri| = 2 * area, so that 1/2 * sum(weights) is the triangle area

    Raises:
        QuadratureError: zero-area triangle
    """
    tri = np.asarray(triangle, dtype=float)
    area = triangle_area(tri)
    if area <= 0.0:
        raise QuadratureError(f"Zero-area triangle {tri.tolist()}")
    xi, eta = rule.points[:, 0], rule.points[:, 1]
    shape = np.column_stack([1.0 - xi - eta, xi, eta])
    return shape @ tri, rule.weights * (2.0 * area)


@dataclass(frozen=True, eq=False)
class ElementRule:
    """Quadrature points in parent coordinates and parent-area weights"""

    points: np.ndarray
    weights: np.ndarray
    enriched: bool = False
    partition: Optional[CutCellPartition] = None

    @property
    def n_points(self) -> int:
        return len(self.weights)


def physical_rule(patch: NurbsPatch, element: Element,
                  classification: ElementClassification,
                  shape: Optional[LevelSetShape] = None,
                  triangle_points: int = 7,
                  gauss_points: Optional[int] = None) -> ElementRule:
    """
    Integration rule over the material part of one element.

    outer -> (p+1) x (q+1) tensor Gauss rule; inner -> empty;
    enriched -> mapped triangle rules over the material triangles.
    """
    tag = classification.tag(element.index)
    if tag == INNER:
        return ElementRule(np.zeros((0, 2)), np.zeros(0))
    if tag != ENRICHED:
        n = gauss_points or max(patch.degrees) + 1
        points, weights = tensor_gauss(n)
        return ElementRule(points, weights)

    if shape is None:
        raise QuadratureError(f"Element {element.index} is enriched but no shape was given")
    crossings = edge_intersections(patch, element, shape, classification.edge_samples)
    partition = triangulate_cut_element(
        classification.phi_corners[element.index], crossings,
        phi_parent=element_phi(patch, element, shape),
    )
    points, weights = partition.quadrature(triangle_rule(triangle_points))
    logger.debug(
        f"Element {element.index}: {len(partition.triangles)} triangles, "
        f"material area {partition.material_area:.6f}"
    )
    return ElementRule(points, weights, enriched=True, partition=partition)
