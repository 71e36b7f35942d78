"""
LSBuck - Level-Set Cutouts

Implicit cutout geometry on the plate patch:
- Circle, ellipse and union shapes (negative inside the void)
- Element classification into outer / inner / enriched elements
- Interface crossings along the element boundary
- The enrichment function psi on the element's four-corner basis

Sign convention: phi >= 0 is material, phi < 0 is void.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from errors import ClassificationInconsistencyError, GeometryError
from geometry_nurbs import (
    Element,
    NurbsPatch,
    inverse_map,
    locate_element,
    map_parent_points,
)

logger = logging.getLogger('lsbuck.levelset')

OUTER = 'outer'
INNER = 'inner'
ENRICHED = 'enriched'

DEFAULT_EDGE_SAMPLES = 8

# Parent-square corners, counter-clockwise from (-1, -1)
PARENT_CORNERS = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])


# ---------------------------------------------------------------------------
# Shapes
# ---------------------------------------------------------------------------

class LevelSetShape:
    """Base class for cutout shapes; subclasses implement evaluate()"""

    def evaluate(self, points) -> np.ndarray:
        raise NotImplementedError

    def seed_points(self) -> np.ndarray:
        """Points inside every void component, (k, 2)"""
        return np.zeros((0, 2))

    def __call__(self, points):
        return self.evaluate(points)


@dataclass(frozen=True)
class Circle(LevelSetShape):
    center: Tuple[float, float]
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise GeometryError(f"Circle radius must be positive, got {self.radius}")

    def evaluate(self, points) -> np.ndarray:
        X = np.asarray(points, dtype=float)
        return np.linalg.norm(X - np.asarray(self.center), axis=-1) - self.radius

    def seed_points(self) -> np.ndarray:
        return np.asarray([self.center], dtype=float)


@dataclass(frozen=True)
class Ellipse(LevelSetShape):
    """
    Rotated ellipse. theta turns the major axis counter-clockwise away from
    the plate's y-axis, so theta = 0 is an ellipse elongated along y.

    phi is the algebraic level function ((m/a)^2 + (n/b)^2 - 1) * min(a, b)
    with m, n the coordinates along the major and minor axes; its zero set
    and sign match the true distance, its magnitude does not.
    """

    center: Tuple[float, float]
    semi_major: float
    semi_minor: float
    theta: float = 0.0

    def __post_init__(self):
        if not (self.semi_major > 0 and self.semi_minor > 0):
            raise GeometryError(
                f"Ellipse semi-axes must be positive, got ({self.semi_major}, {self.semi_minor})"
            )

    @property
    def major_axis(self) -> np.ndarray:
        return np.array([-np.sin(self.theta), np.cos(self.theta)])

    def evaluate(self, points) -> np.ndarray:
        X = np.asarray(points, dtype=float) - np.asarray(self.center)
        c, s = np.cos(self.theta), np.sin(self.theta)
        m = -s * X[..., 0] + c * X[..., 1]
        n = c * X[..., 0] + s * X[..., 1]
        a, b = self.semi_major, self.semi_minor
        return ((m / a) ** 2 + (n / b) ** 2 - 1.0) * min(a, b)

    def seed_points(self) -> np.ndarray:
        return np.asarray([self.center], dtype=float)


@dataclass(frozen=True)
class ShapeUnion(LevelSetShape):
    """Void = union of the children's interiors"""

    children: Tuple[LevelSetShape, ...]

    def __post_init__(self):
        object.__setattr__(self, 'children', tuple(self.children))
        if len(self.children) == 0:
            raise GeometryError("Shape union needs at least one child")

    def evaluate(self, points) -> np.ndarray:
        values = [child.evaluate(points) for child in self.children]
        return np.minimum.reduce(values)

    def seed_points(self) -> np.ndarray:
        return np.concatenate([child.seed_points() for child in self.children], axis=0)


def signed_distance(shape: LevelSetShape, X) -> np.ndarray:
    """phi at one point (float) or an array of points (..., 2)"""
    value = shape.evaluate(X)
    return float(value) if np.ndim(value) == 0 else value


def clover(radius: float = 0.15,
           centers: Sequence[Tuple[float, float]] = ((0.4, 0.65), (0.5, 0.7), (0.5, 0.6))
           ) -> ShapeUnion:
    """Three-circle union used for the clover-shaped cutout"""
    return ShapeUnion(tuple(Circle(tuple(c), radius) for c in centers))


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ElementClassification:
    """Element tags plus the level-set values they were derived from"""

    tags: Tuple[str, ...]
    phi_control_points: np.ndarray   # (n_cp,)
    phi_corners: np.ndarray          # (n_elements, 4), PARENT_CORNERS order
    enriched_control_points: np.ndarray
    edge_samples: int = DEFAULT_EDGE_SAMPLES

    def tag(self, index: int) -> str:
        return self.tags[index]

    def elements_with(self, tag: str) -> List[int]:
        return [i for i, t in enumerate(self.tags) if t == tag]

    def counts(self) -> Dict[str, int]:
        return {t: sum(1 for x in self.tags if x == t) for t in (OUTER, INNER, ENRICHED)}

    @property
    def n_enriched_control_points(self) -> int:
        return len(self.enriched_control_points)


def boundary_walk(samples_per_edge: int = DEFAULT_EDGE_SAMPLES) -> Tuple[np.ndarray, np.ndarray]:
    """
    Counter-clockwise sample points on the parent-square boundary.

    Returns:
        tuple: (positions, parents). positions run over [0, 4); edge k goes
        from corner k to corner k+1 and corner k sits at position k.
    """
    m = samples_per_edge + 1
    positions = np.arange(4 * m) / m
    return positions, walk_to_parent(positions)


def walk_to_parent(positions) -> np.ndarray:
    """Parent coordinates of boundary-walk positions"""
    positions = np.atleast_1d(np.asarray(positions, dtype=float)) % 4.0
    edge = np.minimum(np.floor(positions).astype(int), 3)
    frac = positions - edge
    start = PARENT_CORNERS[edge]
    end = PARENT_CORNERS[(edge + 1) % 4]
    return start + frac[:, None] * (end - start)


def classify_elements(patch: NurbsPatch, shape: Optional[LevelSetShape],
                      edge_samples: int = DEFAULT_EDGE_SAMPLES) -> ElementClassification:
    """
    Tag every element as outer, inner or enriched.

    An element is enriched when the level set changes sign among its corners
    and the edge_samples interior points of each edge; corner-only checks miss
    shallow arcs that enter and leave through one edge.
    """
    elements = patch.elements()
    n_cp = patch.n_control_points

    if shape is None:
        return ElementClassification(
            tags=tuple(OUTER for _ in elements),
            phi_control_points=np.full(n_cp, np.inf),
            phi_corners=np.full((len(elements), 4), np.inf),
            enriched_control_points=np.zeros(0, dtype=int),
            edge_samples=edge_samples,
        )

    phi_cp = np.asarray(shape.evaluate(patch.control_points_flat()), dtype=float)
    _, walk = boundary_walk(edge_samples)
    corner_rows = np.arange(4) * (edge_samples + 1)

    tags = []
    phi_corners = np.empty((len(elements), 4))
    enriched_cps = set()
    for element in elements:
        phi = np.asarray(shape.evaluate(map_parent_points(patch, element, walk)))
        phi_corners[element.index] = phi[corner_rows]
        material = phi >= 0
        if material.all():
            tags.append(OUTER)
        elif not material.any():
            tags.append(INNER)
        else:
            tags.append(ENRICHED)
            enriched_cps.update(int(a) for a in element.support(patch))
    _check_hidden_voids(patch, shape, tags)

    classification = ElementClassification(
        tags=tuple(tags),
        phi_control_points=phi_cp,
        phi_corners=phi_corners,
        enriched_control_points=np.array(sorted(enriched_cps), dtype=int),
        edge_samples=edge_samples,
    )
    counts = classification.counts()
    logger.info(
        f"Classified {len(elements)} elements: {counts[OUTER]} outer, "
        f"{counts[INNER]} inner, {counts[ENRICHED]} enriched "
        f"({classification.n_enriched_control_points} enriched control points)"
    )
    return classification


def _check_hidden_voids(patch: NurbsPatch, shape: LevelSetShape, tags: Sequence[str]):
    """
    A void whose boundary never meets an element edge leaves the element
    tagged outer. Each void component's seed point must therefore fall in
    an element that is already inner or enriched.

    Raises:
        ClassificationInconsistencyError: a void lies strictly inside one element
    """
    for seed in shape.seed_points():
        if float(shape.evaluate(seed)) >= 0:
            continue
        try:
            xi, eta = inverse_map(patch, seed)
        except GeometryError:
            continue
        index = locate_element(patch, xi, eta)
        if tags[index] == OUTER:
            raise ClassificationInconsistencyError(
                f"Cutout around {np.round(seed, 6).tolist()} lies inside element {index} "
                f"without crossing its edges; refine the plate mesh"
            )


# ---------------------------------------------------------------------------
# Interface crossings
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Crossing:
    """Interface point on the element boundary"""

    position: float          # boundary-walk coordinate in [0, 4)
    parent: np.ndarray       # (2,)
    point: np.ndarray        # physical (2,)
    phi: float = field(default=0.0)


def element_phi(patch: NurbsPatch, element: Element, shape: LevelSetShape):
    """phi as a function of parent coordinates on one element"""
    def phi_parent(parent) -> float:
        point = map_parent_points(patch, element, parent)[0]
        return float(shape.evaluate(point))
    return phi_parent


def edge_intersections(patch: NurbsPatch, element: Element, shape: LevelSetShape,
                       edge_samples: int = DEFAULT_EDGE_SAMPLES,
                       xtol: float = 1e-15) -> List[Crossing]:
    """
    Ordered (counter-clockwise) interface crossings on an element boundary.

    Sign changes between consecutive boundary samples are bracketed and
    refined with Brent's method, so two crossings on one edge are found when
    an arc enters and leaves between corners.

    Raises:
        ClassificationInconsistencyError: no sign change on the boundary
    """
    positions, walk = boundary_walk(edge_samples)
    phi = np.asarray(shape.evaluate(map_parent_points(patch, element, walk)))
    phi_parent = element_phi(patch, element, shape)

    def along_walk(pos: float) -> float:
        return phi_parent(walk_to_parent(pos)[0])

    crossings = []
    n = len(positions)
    for k in range(n):
        a, b = positions[k], positions[k] + 1.0 / (edge_samples + 1)
        fa, fb = phi[k], phi[(k + 1) % n]
        if (fa >= 0) == (fb >= 0):
            continue
        if fb == 0.0:
            root = b
        else:
            root = brentq(along_walk, a, b, xtol=xtol)
        parent = walk_to_parent(root)[0]
        point = map_parent_points(patch, element, parent)[0]
        crossings.append(Crossing(position=float(root % 4.0), parent=parent, point=point,
                                  phi=float(shape.evaluate(point))))

    if not crossings:
        raise ClassificationInconsistencyError(
            f"Element {element.index} is tagged enriched but no interface crossing was found"
        )
    logger.debug(f"Element {element.index}: {len(crossings)} interface crossing(s)")
    return crossings


# ---------------------------------------------------------------------------
# Enrichment
# ---------------------------------------------------------------------------

def corner_basis(parents) -> Tuple[np.ndarray, np.ndarray]:
    """Bilinear corner functions (n, 4) and parent gradients (n, 4, 2)"""
    P = np.atleast_2d(np.asarray(parents, dtype=float))
    s, t = P[:, 0:1], P[:, 1:2]
    si, ti = PARENT_CORNERS[:, 0], PARENT_CORNERS[:, 1]
    N = 0.25 * (1.0 + s * si) * (1.0 + t * ti)
    dN = np.empty(N.shape + (2,))
    dN[..., 0] = 0.25 * si * (1.0 + t * ti)
    dN[..., 1] = 0.25 * ti * (1.0 + s * si)
    return N, dN


def enrichment_psi(phi_at_corners, N) -> float:
    """psi = sum |phi_I| N_I - |sum phi_I N_I|"""
    phi_at_corners = np.asarray(phi_at_corners, dtype=float)
    N = np.asarray(N, dtype=float)
    return float(np.abs(phi_at_corners) @ N - abs(phi_at_corners @ N))


def enrichment_field(phi_at_corners, parents) -> Tuple[np.ndarray, np.ndarray]:
    """
    psi and its parent-coordinate gradient at many points.

    Returns:
        tuple: (psi (n,), dpsi (n, 2))
    """
    phi_at_corners = np.asarray(phi_at_corners, dtype=float)
    N, dN = corner_basis(parents)
    interp = N @ phi_at_corners
    psi = N @ np.abs(phi_at_corners) - np.abs(interp)
    dpsi = (np.einsum('nic,i->nc', dN, np.abs(phi_at_corners))
            - np.sign(interp)[:, None] * np.einsum('nic,i->nc', dN, phi_at_corners))
    return psi, dpsi
