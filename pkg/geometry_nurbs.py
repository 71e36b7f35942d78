"""
LSBuck - NURBS Geometry

B-spline / NURBS machinery shared by the plate patch and the stiffener curve:
- Knot span lookup and basis derivatives (triangular-table recursion)
- Rational surface and curve bases with quotient-rule derivatives
- Surface map, Jacobian and point inversion
- Uniform h-refinement by knot insertion (geometry preserved exactly)

Conventions:
- Parametric domain [0, 1] x [0, 1] with open (clamped) knot vectors
- Control nets are indexed [i, j] with i along xi; the global control point
  number is A = j * n_xi + i (xi runs fastest)
- An element is a nonempty knot-span product, mapped from the parent square
  [-1, 1]^2. The parent-to-physical Jacobian is J_param @ diag(dxi/2, deta/2),
  so a single-span unit-square patch has a parent Jacobian of 0.5 * identity.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from errors import (
    DomainError,
    GeometryError,
    InvertedElementError,
    NumericalDegeneracyError,
)

logger = logging.getLogger('lsbuck.geometry')

KNOT_TOL = 1e-12


def _frozen_array(values, dtype=float):
    arr = np.array(values, dtype=dtype)
    arr.flags.writeable = False
    return arr


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class KnotVector:
    """Open knot vector of a given degree"""

    values: np.ndarray
    degree: int

    def __post_init__(self):
        values = _frozen_array(self.values)
        object.__setattr__(self, 'values', values)
        p = int(self.degree)
        object.__setattr__(self, 'degree', p)

        if p < 0:
            raise DomainError(f"Degree must be non-negative, got {p}")
        if values.ndim != 1 or len(values) < 2 * (p + 1):
            raise DomainError(
                f"Knot vector of degree {p} needs at least {2 * (p + 1)} knots"
            )
        if np.any(np.diff(values) < 0):
            raise DomainError("Knot vector must be non-decreasing")
        if not (np.allclose(values[:p + 1], values[0], atol=KNOT_TOL)
                and np.allclose(values[-(p + 1):], values[-1], atol=KNOT_TOL)):
            raise DomainError("Knot vector must be open (end knots repeated p+1 times)")
        if values[-1] - values[0] <= 0:
            raise NumericalDegeneracyError("Knot vector spans a zero-length interval")

    @classmethod
    def open_uniform(cls, degree: int, n_spans: int = 1,
                     start: float = 0.0, end: float = 1.0) -> 'KnotVector':
        """Clamped knot vector with n_spans equal spans"""
        interior = np.linspace(start, end, n_spans + 1)[1:-1]
        values = np.concatenate([
            np.full(degree + 1, start), interior, np.full(degree + 1, end)
        ])
        return cls(values, degree)

    @property
    def n_basis(self) -> int:
        return len(self.values) - self.degree - 1

    @property
    def domain(self) -> Tuple[float, float]:
        return float(self.values[0]), float(self.values[-1])

    def nonempty_spans(self) -> List[int]:
        """Span indices i with values[i] < values[i+1], in increasing order"""
        p, U = self.degree, self.values
        return [i for i in range(p, self.n_basis) if U[i + 1] - U[i] > KNOT_TOL]

    def breakpoints(self) -> np.ndarray:
        return np.unique(self.values)


@dataclass(frozen=True, eq=False)
class NurbsPatch:
    """Tensor-product NURBS surface"""

    knots_xi: KnotVector
    knots_eta: KnotVector
    control_points: np.ndarray   # (n_xi, n_eta, dim)
    weights: np.ndarray          # (n_xi, n_eta)

    def __post_init__(self):
        cps = _frozen_array(self.control_points)
        wts = _frozen_array(self.weights)
        object.__setattr__(self, 'control_points', cps)
        object.__setattr__(self, 'weights', wts)

        expected = (self.knots_xi.n_basis, self.knots_eta.n_basis)
        if cps.ndim != 3 or cps.shape[:2] != expected or cps.shape[2] not in (2, 3):
            raise DomainError(
                f"Control net shape {cps.shape} does not match basis counts {expected}"
            )
        if wts.shape != expected:
            raise DomainError(f"Weight grid shape {wts.shape} does not match {expected}")
        if np.any(wts <= 0):
            raise DomainError("All NURBS weights must be strictly positive")

    @property
    def shape(self) -> Tuple[int, int]:
        return self.knots_xi.n_basis, self.knots_eta.n_basis

    @property
    def n_control_points(self) -> int:
        n_xi, n_eta = self.shape
        return n_xi * n_eta

    @property
    def degrees(self) -> Tuple[int, int]:
        return self.knots_xi.degree, self.knots_eta.degree

    def control_point_index(self, i: int, j: int) -> int:
        return j * self.shape[0] + i

    def control_points_flat(self) -> np.ndarray:
        """(n_cp, 2) planar coordinates ordered by global control point number"""
        return self.control_points[:, :, :2].transpose(1, 0, 2).reshape(-1, 2)

    def boundary_control_points(self) -> dict:
        """Global control point numbers on each parametric edge"""
        n_xi, n_eta = self.shape
        return {
            'xi0': [self.control_point_index(0, j) for j in range(n_eta)],
            'xi1': [self.control_point_index(n_xi - 1, j) for j in range(n_eta)],
            'eta0': [self.control_point_index(i, 0) for i in range(n_xi)],
            'eta1': [self.control_point_index(i, n_eta - 1) for i in range(n_xi)],
        }

    def elements(self) -> List['Element']:
        """All nonempty span products, numbered with xi fastest"""
        spans_xi = self.knots_xi.nonempty_spans()
        spans_eta = self.knots_eta.nonempty_spans()
        U, V = self.knots_xi.values, self.knots_eta.values
        elems = []
        for b, sj in enumerate(spans_eta):
            for a, si in enumerate(spans_xi):
                elems.append(Element(
                    index=b * len(spans_xi) + a,
                    span_xi=si,
                    span_eta=sj,
                    xi_bounds=(float(U[si]), float(U[si + 1])),
                    eta_bounds=(float(V[sj]), float(V[sj + 1])),
                ))
        return elems

    @property
    def n_elements(self) -> int:
        return len(self.knots_xi.nonempty_spans()) * len(self.knots_eta.nonempty_spans())


@dataclass(frozen=True)
class Element:
    """Knot-span product with its parent-square mapping"""

    index: int
    span_xi: int
    span_eta: int
    xi_bounds: Tuple[float, float]
    eta_bounds: Tuple[float, float]

    @property
    def parent_scaling(self) -> np.ndarray:
        """d(xi, eta)/d(parent) as a diagonal 2x2 matrix"""
        return np.diag([
            0.5 * (self.xi_bounds[1] - self.xi_bounds[0]),
            0.5 * (self.eta_bounds[1] - self.eta_bounds[0]),
        ])

    def parent_to_param(self, parent) -> Tuple[float, float]:
        s, t = parent
        xi = self.xi_bounds[0] + 0.5 * (s + 1.0) * (self.xi_bounds[1] - self.xi_bounds[0])
        eta = self.eta_bounds[0] + 0.5 * (t + 1.0) * (self.eta_bounds[1] - self.eta_bounds[0])
        return xi, eta

    def param_to_parent(self, xi: float, eta: float) -> np.ndarray:
        s = 2.0 * (xi - self.xi_bounds[0]) / (self.xi_bounds[1] - self.xi_bounds[0]) - 1.0
        t = 2.0 * (eta - self.eta_bounds[0]) / (self.eta_bounds[1] - self.eta_bounds[0]) - 1.0
        return np.array([s, t])

    def support(self, patch: NurbsPatch) -> np.ndarray:
        """Global numbers of the (p+1)(q+1) functions alive on the element"""
        p, q = patch.degrees
        n_xi = patch.shape[0]
        ii = np.arange(self.span_xi - p, self.span_xi + 1)
        jj = np.arange(self.span_eta - q, self.span_eta + 1)
        return (jj[:, None] * n_xi + ii[None, :]).ravel()


@dataclass(frozen=True, eq=False)
class NurbsCurve:
    """Planar NURBS curve (the stiffener uses degree 2)"""

    knots: KnotVector
    control_points: np.ndarray   # (n, 2)
    weights: np.ndarray          # (n,)

    def __post_init__(self):
        cps = _frozen_array(self.control_points)
        wts = _frozen_array(self.weights)
        object.__setattr__(self, 'control_points', cps)
        object.__setattr__(self, 'weights', wts)
        n = self.knots.n_basis
        if cps.shape != (n, 2):
            raise DomainError(f"Curve control points shape {cps.shape} != ({n}, 2)")
        if wts.shape != (n,):
            raise DomainError(f"Curve weights shape {wts.shape} != ({n},)")
        if np.any(wts <= 0):
            raise DomainError("All NURBS weights must be strictly positive")

    def spans(self) -> List[Tuple[float, float]]:
        U = self.knots.values
        return [(float(U[i]), float(U[i + 1])) for i in self.knots.nonempty_spans()]


# ---------------------------------------------------------------------------
# Univariate B-splines
# ---------------------------------------------------------------------------

def find_span(knots: KnotVector, xi: float) -> int:
    """
    Knot span index i with knots[i] <= xi < knots[i+1].

    xi equal to the last knot maps into the final nonempty span.

    Raises:
        DomainError: xi outside [first knot, last knot]
    """
    U = knots.values
    lo, hi = U[0], U[-1]
    if xi < lo - KNOT_TOL or xi > hi + KNOT_TOL:
        raise DomainError(f"Parameter {xi} outside knot range [{lo}, {hi}]")
    span = int(np.searchsorted(U, xi, side='right')) - 1
    return min(max(span, knots.degree), knots.n_basis - 1)


def basis_with_derivatives(knots: KnotVector, xi: float, max_order: int = 1,
                           span: Optional[int] = None) -> np.ndarray:
    """
    Nonzero B-spline values and derivatives at xi.

    Args:
        knots: Knot vector
        xi: Evaluation parameter
        max_order: Highest derivative order (orders above the degree are zero)
        span: Precomputed span index (looked up when omitted)

    Returns:
        np.ndarray: (max_order + 1, p + 1) array; row k holds the k-th
        derivatives of N_{span-p} .. N_{span}
    """
    p, U = knots.degree, knots.values
    if span is None:
        span = find_span(knots, xi)
    if U[span + 1] - U[span] <= KNOT_TOL:
        raise NumericalDegeneracyError(f"Zero-length knot span {span}")
    xi = min(max(float(xi), U[0]), U[-1])

    ndu = np.zeros((p + 1, p + 1))
    ndu[0, 0] = 1.0
    left = np.zeros(p + 1)
    right = np.zeros(p + 1)
    for j in range(1, p + 1):
        left[j] = xi - U[span + 1 - j]
        right[j] = U[span + j] - xi
        saved = 0.0
        for r in range(j):
            # lower triangle stores knot differences
            ndu[j, r] = right[r + 1] + left[j - r]
            temp = ndu[r, j - 1] / ndu[j, r]
            ndu[r, j] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        ndu[j, j] = saved

    n = max(int(max_order), 0)
    ders = np.zeros((n + 1, p + 1))
    ders[0, :] = ndu[:, p]
    top = min(n, p)

    a = np.zeros((2, p + 1))
    for r in range(p + 1):
        s1, s2 = 0, 1
        a[0, 0] = 1.0
        for k in range(1, top + 1):
            d = 0.0
            rk, pk = r - k, p - k
            if r >= k:
                a[s2, 0] = a[s1, 0] / ndu[pk + 1, rk]
                d = a[s2, 0] * ndu[rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else p - r
            for j in range(j1, j2 + 1):
                a[s2, j] = (a[s1, j] - a[s1, j - 1]) / ndu[pk + 1, rk + j]
                d += a[s2, j] * ndu[rk + j, pk]
            if r <= pk:
                a[s2, k] = -a[s1, k - 1] / ndu[pk + 1, r]
                d += a[s2, k] * ndu[r, pk]
            ders[k, r] = d
            s1, s2 = s2, s1

    factor = p
    for k in range(1, top + 1):
        ders[k, :] *= factor
        factor *= (p - k)
    return ders


# ---------------------------------------------------------------------------
# Rational bases and maps
# ---------------------------------------------------------------------------

def surface_basis(patch: NurbsPatch, xi: float, eta: float):
    """
    Rational basis R_ij and its parametric gradient at (xi, eta).

    Returns:
        tuple: (R, dR, support) with R of shape (nb,), dR of shape (nb, 2)
        holding dR/dxi and dR/deta, and support the global control point
        numbers (xi fastest)
    """
    kx, ke = patch.knots_xi, patch.knots_eta
    p, q = kx.degree, ke.degree
    si = find_span(kx, xi)
    sj = find_span(ke, eta)
    Nx = basis_with_derivatives(kx, xi, 1, si)
    Ne = basis_with_derivatives(ke, eta, 1, sj)

    w = patch.weights[si - p:si + 1, sj - q:sj + 1].T.ravel()
    N = np.outer(Ne[0], Nx[0]).ravel() * w
    Nxi = np.outer(Ne[0], Nx[1]).ravel() * w
    Neta = np.outer(Ne[1], Nx[0]).ravel() * w

    W = N.sum()
    dW = np.array([Nxi.sum(), Neta.sum()])
    R = N / W
    dR = np.empty((len(N), 2))
    dR[:, 0] = (Nxi * W - N * dW[0]) / W ** 2
    dR[:, 1] = (Neta * W - N * dW[1]) / W ** 2

    n_xi = patch.shape[0]
    ii = np.arange(si - p, si + 1)
    jj = np.arange(sj - q, sj + 1)
    support = (jj[:, None] * n_xi + ii[None, :]).ravel()
    return R, dR, support


def surface_map(patch: NurbsPatch, xi: float, eta: float):
    """
    Physical point and parametric Jacobian at (xi, eta).

    Returns:
        tuple: (point (2,), J (2, 2)) with J = [[dx/dxi, dx/deta], [dy/dxi, dy/deta]]

    Raises:
        InvertedElementError: det(J) <= 0
    """
    R, dR, support = surface_basis(patch, xi, eta)
    P = patch.control_points_flat()[support]
    point = R @ P
    J = P.T @ dR
    det = np.linalg.det(J)
    if det <= 0:
        raise InvertedElementError(
            f"Non-positive Jacobian determinant {det:.3e} at ({xi:.6f}, {eta:.6f})"
        )
    return point, J


def element_jacobian(patch: NurbsPatch, element: Element, parent) -> np.ndarray:
    """Parent-square to physical Jacobian J_el at a parent point"""
    xi, eta = element.parent_to_param(parent)
    _, J = surface_map(patch, xi, eta)
    return J @ element.parent_scaling


def map_parent_points(patch: NurbsPatch, element: Element, parents) -> np.ndarray:
    """Physical coordinates (n, 2) of parent-square points on one element"""
    parents = np.atleast_2d(np.asarray(parents, dtype=float))
    cps = patch.control_points_flat()
    out = np.empty((len(parents), 2))
    for k, parent in enumerate(parents):
        R, _, support = surface_basis(patch, *element.parent_to_param(parent))
        out[k] = R @ cps[support]
    return out


def locate_element(patch: NurbsPatch, xi: float, eta: float) -> int:
    """Index of the element containing a parametric point (right-end convention)"""
    spans_xi = patch.knots_xi.nonempty_spans()
    spans_eta = patch.knots_eta.nonempty_spans()
    a = spans_xi.index(find_span(patch.knots_xi, xi))
    b = spans_eta.index(find_span(patch.knots_eta, eta))
    return b * len(spans_xi) + a


def inverse_map(patch: NurbsPatch, point, tol: float = 1e-12, max_iter: int = 50):
    """
    Parametric coordinates of a physical point by Newton iteration.

    Raises:
        GeometryError: the point does not lie on the patch
    """
    point = np.asarray(point, dtype=float)
    cps = patch.control_points_flat()
    lo, hi = cps.min(axis=0), cps.max(axis=0)
    extent = np.maximum(hi - lo, 1e-300)
    guess = np.clip((point - lo) / extent, 0.0, 1.0)
    u = guess.copy()
    for _ in range(max_iter):
        x, J = surface_map(patch, u[0], u[1])
        residual = x - point
        if np.linalg.norm(residual) <= tol * max(1.0, float(np.max(extent))):
            break
        u = np.clip(u - np.linalg.solve(J, residual), 0.0, 1.0)
    x, _ = surface_map(patch, u[0], u[1])
    if np.linalg.norm(x - point) > 1e-9 * max(1.0, float(np.max(extent))):
        raise GeometryError(f"Point {point.tolist()} lies outside the plate patch")
    return float(u[0]), float(u[1])


def curve_basis(curve: NurbsCurve, s: float):
    """Rational curve basis, first derivative and support indices"""
    kv = curve.knots
    p = kv.degree
    span = find_span(kv, s)
    N = basis_with_derivatives(kv, s, 1, span)
    w = curve.weights[span - p:span + 1]
    Nw = N[0] * w
    dNw = N[1] * w
    W, dW = Nw.sum(), dNw.sum()
    R = Nw / W
    dR = (dNw * W - Nw * dW) / W ** 2
    return R, dR, np.arange(span - p, span + 1)


def curve_point(curve: NurbsCurve, s: float):
    """Point and parametric tangent dC/ds on a NURBS curve"""
    R, dR, support = curve_basis(curve, s)
    P = curve.control_points[support]
    return R @ P, dR @ P


# ---------------------------------------------------------------------------
# Knot insertion
# ---------------------------------------------------------------------------

def _insert_knot(knots: KnotVector, Pw: np.ndarray, u: float):
    """Insert one knot (Boehm); Pw holds homogeneous points along axis 0"""
    p, U = knots.degree, knots.values
    k = find_span(knots, u)
    n = knots.n_basis
    Q = np.empty((n + 1,) + Pw.shape[1:])
    Q[:k - p + 1] = Pw[:k - p + 1]
    for i in range(k - p + 1, k + 1):
        alpha = (u - U[i]) / (U[i + p] - U[i])
        Q[i] = alpha * Pw[i] + (1.0 - alpha) * Pw[i - 1]
    Q[k + 1:] = Pw[k:]
    new_values = np.insert(np.array(U), k + 1, u)
    return KnotVector(new_values, p), Q


def _midpoint_knots(knots: KnotVector) -> List[float]:
    U = knots.values
    return [0.5 * (U[i] + U[i + 1]) for i in knots.nonempty_spans()]


def _refine_direction(knots: KnotVector, Pw: np.ndarray):
    for u in _midpoint_knots(knots):
        knots, Pw = _insert_knot(knots, Pw, u)
    return knots, Pw


def h_refine(patch: NurbsPatch, levels: int) -> NurbsPatch:
    """
    Uniform h-refinement: each level halves every nonempty span in both
    directions. The geometric map is unchanged.
    """
    if levels < 0:
        raise DomainError(f"Refinement levels must be >= 0, got {levels}")
    if levels == 0:
        return patch

    w = patch.weights[:, :, None]
    Pw = np.concatenate([patch.control_points * w, w], axis=2)
    kx, ke = patch.knots_xi, patch.knots_eta
    for _ in range(levels):
        kx, Pw = _refine_direction(kx, Pw)
        ke, Pt = _refine_direction(ke, Pw.transpose(1, 0, 2))
        Pw = Pt.transpose(1, 0, 2)

    weights = Pw[:, :, -1]
    cps = Pw[:, :, :-1] / weights[:, :, None]
    refined = NurbsPatch(kx, ke, cps, weights)
    logger.debug(
        f"h-refined patch by {levels} level(s): {refined.n_elements} elements, "
        f"{refined.n_control_points} control points"
    )
    return refined


def h_refine_curve(curve: NurbsCurve, levels: int) -> NurbsCurve:
    """Uniform h-refinement of a curve; shape unchanged"""
    if levels < 0:
        raise DomainError(f"Refinement levels must be >= 0, got {levels}")
    w = curve.weights[:, None]
    Pw = np.concatenate([curve.control_points * w, w], axis=1)
    kv = curve.knots
    for _ in range(levels):
        kv, Pw = _refine_direction(kv, Pw)
    weights = Pw[:, -1]
    return NurbsCurve(kv, Pw[:, :-1] / weights[:, None], weights)


# ---------------------------------------------------------------------------
# Patch factories
# ---------------------------------------------------------------------------

def rectangle_patch(length: float = 1.0, width: float = 1.0, degree: int = 2,
                    origin=(0.0, 0.0)) -> NurbsPatch:
    """
    Single-element rectangular plate patch [x0, x0+length] x [y0, y0+width].

    Control points are evenly spaced, so the map is affine.
    """
    kv = KnotVector.open_uniform(degree, 1)
    ts = np.linspace(0.0, 1.0, degree + 1)
    xs = origin[0] + length * ts
    ys = origin[1] + width * ts
    cps = np.zeros((degree + 1, degree + 1, 2))
    cps[:, :, 0] = xs[:, None]
    cps[:, :, 1] = ys[None, :]
    return NurbsPatch(kv, kv, cps, np.ones((degree + 1, degree + 1)))


def quarter_annulus_patch(r_inner: float = 1.0, r_outer: float = 2.0) -> NurbsPatch:
    """Exact quarter annulus: quadratic rational in xi (arc), linear in eta (radius)"""
    kx = KnotVector.open_uniform(2, 1)
    ke = KnotVector.open_uniform(1, 1)
    c = np.sqrt(0.5)
    cps = np.zeros((3, 2, 2))
    weights = np.zeros((3, 2))
    for j, r in enumerate((r_inner, r_outer)):
        cps[:, j, :] = [[0.0, r], [r, r], [r, 0.0]]
        weights[:, j] = [1.0, c, 1.0]
    return NurbsPatch(kx, ke, cps, weights)


def bezier_curve(points) -> NurbsCurve:
    """Polynomial Bezier curve through the given control polygon"""
    pts = np.asarray(points, dtype=float)
    degree = len(pts) - 1
    return NurbsCurve(KnotVector.open_uniform(degree, 1), pts, np.ones(len(pts)))
