"""
LSBuck - Curvilinear Stiffeners

Eccentric Timoshenko beam stiffeners on a quadratic NURBS curve:
- Three-point parabola path with end offsets along the plate edges
- Rectangular section sized from the stiffness ratio gamma = EI/(bD)
  and the area ratio delta = A_s/(b t_p)
- Stiffness, geometric stiffness and thermal load expressed in plate DOFs
  (displacement compatibility at every curve quadrature station)

Beam kinematics along the unit tangent t = (tx, ty), n = (-ty, tx):
  axial        eps_c = eps_tt0 + e * kappa_tt,   e = (t_p + h_s) / 2
  bending      kappa_tt = t . grad(beta) . t
  shear        gamma = dw/ds + beta . t
  torsion      tau = d(beta . n)/ds
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from errors import SizingError, StiffenerConfigurationError
from geometry_nurbs import (
    NurbsCurve,
    NurbsPatch,
    bezier_curve,
    curve_point,
    h_refine_curve,
    inverse_map,
    locate_element,
    surface_basis,
)
from levelset import ENRICHED, ElementClassification, LevelSetShape, enrichment_field
from plate_fsdt import N_FIELDS

logger = logging.getLogger('lsbuck.stiffener')

TIMOSHENKO_SHEAR = 5.0 / 6.0
DEFAULT_START_DIRECTION = (0.0, -1.0)
DEFAULT_END_DIRECTION = (-1.0, 0.0)
DEFAULT_GAUSS_POINTS = 3
KNOT_SEARCH_SAMPLES = 16
CUTOUT_SEARCH_SAMPLES = 32


# ---------------------------------------------------------------------------
# Section
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StiffenerSection:
    """Rectangular isotropic section sitting on top of the plate"""

    b_s: float
    h_s: float
    E: float
    nu: float
    alpha: float
    plate_thickness: float

    def __post_init__(self):
        if not (self.b_s > 0 and self.h_s > 0):
            raise SizingError(f"Stiffener section must have b_s, h_s > 0, got ({self.b_s}, {self.h_s})")
        if self.E < 0:
            raise SizingError(f"Stiffener modulus must be non-negative, got {self.E}")

    @property
    def area(self) -> float:
        return self.b_s * self.h_s

    @property
    def eccentricity(self) -> float:
        return 0.5 * (self.plate_thickness + self.h_s)

    @property
    def I_centroid(self) -> float:
        return self.b_s * self.h_s ** 3 / 12.0

    @property
    def I_midplane(self) -> float:
        return self.I_centroid + self.area * self.eccentricity ** 2

    @property
    def G(self) -> float:
        return self.E / (2.0 * (1.0 + self.nu))

    @property
    def J(self) -> float:
        """St-Venant torsion constant, thin-rectangle approximation"""
        a, b = max(self.b_s, self.h_s), min(self.b_s, self.h_s)
        return a * b ** 3 / 3.0 * (1.0 - 0.63 * b / a)

    def rigidities(self) -> np.ndarray:
        """(EA, EI_c, kGA, GJ) for the (axial, bending, shear, torsion) rows"""
        return np.array([
            self.E * self.area,
            self.E * self.I_centroid,
            TIMOSHENKO_SHEAR * self.G * self.area,
            self.G * self.J,
        ])

    def ratios(self, plate_width: float, D11: float) -> Tuple[float, float]:
        """(gamma, delta) of this section on a plate"""
        gamma = self.E * self.I_midplane / (plate_width * D11) if D11 > 0 else np.inf
        delta = self.area / (plate_width * self.plate_thickness)
        return gamma, delta


def section_from_ratios(gamma: float, delta: float, plate_width: float,
                        plate_thickness: float, D11: float,
                        material: Dict[str, float]) -> StiffenerSection:
    """
    Size a rectangular stiffener from gamma = EI/(b D11) and delta = A_s/(b t_p).

    I is taken about the plate mid-plane: b_s h_s^3/12 + A_s e^2 with
    e = (t_p + h_s)/2, which gives
        h^2/3 + (t_p/2) h + (t_p^2/4 - I/A_s) = 0.

    Raises:
        SizingError: no positive real height
    """
    if not (gamma > 0 and delta > 0):
        raise SizingError(f"gamma and delta must be positive, got ({gamma}, {delta})")
    E = material['E']
    if not E > 0:
        raise SizingError(f"Stiffener modulus must be positive for sizing, got {E}")

    t = plate_thickness
    area = delta * plate_width * t
    inertia = gamma * plate_width * D11 / E
    roots = np.roots([1.0 / 3.0, t / 2.0, t * t / 4.0 - inertia / area])
    positive = [r.real for r in roots if abs(r.imag) <= 1e-14 * max(1.0, abs(r.real)) and r.real > 0]
    if not positive:
        raise SizingError(
            f"No positive stiffener height for gamma={gamma}, delta={delta} "
            f"(I/A_s={inertia / area:.4e} must exceed t_p^2/4={t * t / 4:.4e})"
        )
    h_s = max(positive)
    b_s = area / h_s
    logger.info(f"Stiffener sized: gamma={gamma}, delta={delta} -> b_s={b_s:.5g}, h_s={h_s:.5g}")
    return StiffenerSection(b_s=b_s, h_s=h_s, E=E, nu=material.get('nu', 0.3),
                            alpha=material.get('alpha', 0.0), plate_thickness=t)


# ---------------------------------------------------------------------------
# Path
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class StiffenerPath:
    """Quadratic Bezier path P0, P1, P2 on the plate mid-surface"""

    control_points: np.ndarray   # (3, 2)
    curve: NurbsCurve

    def refined(self, levels: int) -> NurbsCurve:
        return h_refine_curve(self.curve, levels)


def parabola_path(p_start, p_end, delta_eps: float = 0.0,
                  delta_dist: Optional[float] = None, middle=None,
                  start_direction=DEFAULT_START_DIRECTION,
                  end_direction=DEFAULT_END_DIRECTION) -> StiffenerPath:
    """
    Build a three-point parabola path.

    End control points move by delta_eps along their (unit) edge directions.
    The middle control point is `middle` if given, else [delta_dist, delta_dist],
    else the chord midpoint (straight stiffener).

    Raises:
        StiffenerConfigurationError: coincident end points
    """
    def unit(v):
        v = np.asarray(v, dtype=float)
        norm = np.linalg.norm(v)
        if norm <= 0:
            raise StiffenerConfigurationError(f"Edge direction {v.tolist()} has zero length")
        return v / norm

    P0 = np.asarray(p_start, dtype=float) + delta_eps * unit(start_direction)
    P2 = np.asarray(p_end, dtype=float) + delta_eps * unit(end_direction)
    if np.linalg.norm(P2 - P0) <= 1e-12:
        raise StiffenerConfigurationError("Stiffener end points coincide (zero-length path)")
    if middle is not None:
        P1 = np.asarray(middle, dtype=float)
    elif delta_dist is not None:
        P1 = np.array([delta_dist, delta_dist], dtype=float)
    else:
        P1 = 0.5 * (P0 + P2)
    points = np.array([P0, P1, P2])
    return StiffenerPath(control_points=points, curve=bezier_curve(points))


# ---------------------------------------------------------------------------
# Coupling to the plate
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FieldSample:
    """Plate basis at one physical point"""

    dofs: np.ndarray   # (5*nf,)
    N: np.ndarray      # (nf,)
    dN: np.ndarray     # (nf, 2) physical


class PlateFieldSampler:
    """Evaluates plate basis functions (standard and enriched) at physical points"""

    def __init__(self, patch: NurbsPatch, dofmap,
                 classification: Optional[ElementClassification] = None,
                 shape: Optional[LevelSetShape] = None):
        self.patch = patch
        self.dofmap = dofmap
        self.classification = classification
        self.shape = shape
        self.elements = patch.elements()

    def sample(self, point) -> FieldSample:
        """
        Raises:
            GeometryError: point outside the plate patch
            StiffenerConfigurationError: point inside a cutout
        """
        point = np.asarray(point, dtype=float)
        if self.shape is not None and float(self.shape.evaluate(point)) < 0:
            raise StiffenerConfigurationError(
                f"Stiffener station {point.tolist()} lies inside a cutout"
            )
        xi, eta = inverse_map(self.patch, point)
        element = self.elements[locate_element(self.patch, xi, eta)]
        R, dR, support = surface_basis(self.patch, xi, eta)
        cps = self.patch.control_points_flat()[support]
        J = cps.T @ dR
        dN = dR @ np.linalg.inv(J)
        N = R

        enriched = (self.classification is not None
                    and self.classification.tag(element.index) == ENRICHED)
        if enriched:
            parent = element.param_to_parent(xi, eta)
            psi, dpsi_parent = enrichment_field(
                self.classification.phi_corners[element.index], parent[None, :]
            )
            J_el_inv = np.linalg.inv(J @ element.parent_scaling)
            dpsi = dpsi_parent[0] @ J_el_inv
            N = np.concatenate([R, psi[0] * R])
            dN = np.concatenate([dN, R[:, None] * dpsi[None, :] + psi[0] * dN])
        dofs = self.dofmap.element_dofs(support, enriched)
        return FieldSample(dofs=dofs, N=N, dN=dN)


@dataclass(frozen=True, eq=False)
class StiffenerStation:
    """Beam strain rows at one curve quadrature point"""

    point: np.ndarray
    tangent: np.ndarray
    weight: float          # ds * Gauss weight
    dofs: np.ndarray
    B: np.ndarray          # (4, n): axial (with offset), bending, shear, torsion
    g: np.ndarray          # (n,): dw/ds


def _station_rows(sample: FieldSample, tangent: np.ndarray, eccentricity: float):
    tx, ty = tangent
    nf = len(sample.N)
    d_s = sample.dN @ tangent   # directional derivative of each function
    B = np.zeros((4, nf, N_FIELDS))
    # axial: eps_tt0 + e * kappa_tt
    B[0, :, 0] = tx * d_s
    B[0, :, 1] = ty * d_s
    B[0, :, 3] = eccentricity * tx * d_s
    B[0, :, 4] = eccentricity * ty * d_s
    # bending curvature kappa_tt
    B[1, :, 3] = tx * d_s
    B[1, :, 4] = ty * d_s
    # transverse shear
    B[2, :, 2] = d_s
    B[2, :, 3] = tx * sample.N
    B[2, :, 4] = ty * sample.N
    # twist of the normal rotation
    B[3, :, 3] = -ty * d_s
    B[3, :, 4] = tx * d_s
    g = np.zeros((nf, N_FIELDS))
    g[:, 2] = d_s
    return B.reshape(4, nf * N_FIELDS), g.ravel()


@dataclass(frozen=True, eq=False)
class StiffenerMatrices:
    """Stiffener contributions in plate DOFs, station by station"""

    section: StiffenerSection
    stations: List[StiffenerStation] = field(default_factory=list)

    def stiffness_blocks(self):
        """(dofs, K_local) per station"""
        C = np.diag(self.section.rigidities())
        for st in self.stations:
            yield st.dofs, st.weight * (st.B.T @ C @ st.B)

    def thermal_force_blocks(self, delta_T: float):
        """(dofs, f_local) per station: B_ax^T EA alpha dT"""
        EA = self.section.E * self.section.area
        for st in self.stations:
            yield st.dofs, st.weight * EA * self.section.alpha * delta_T * st.B[0]

    def axial_forces(self, u: np.ndarray, delta_T: float) -> np.ndarray:
        """N_s = EA (eps_c - alpha dT) at every station"""
        EA = self.section.E * self.section.area
        return np.array([
            EA * (st.B[0] @ u[st.dofs] - self.section.alpha * delta_T) for st in self.stations
        ])

    def geometric_blocks(self, axial_forces: Sequence[float]):
        """(dofs, N_s g g^T ds) per station"""
        for st, N_s in zip(self.stations, axial_forces):
            yield st.dofs, st.weight * N_s * np.outer(st.g, st.g)

    @property
    def length(self) -> float:
        return float(sum(st.weight for st in self.stations))


def check_path_clear(curve: NurbsCurve, shape: LevelSetShape,
                     samples: int = CUTOUT_SEARCH_SAMPLES) -> None:
    """
    Raise if any part of the curve enters the void phi < 0.

    Each curve span is sampled and every local minimum of phi along the
    samples is refined with a bounded scalar minimization.

    Raises:
        StiffenerConfigurationError: the curve crosses a cutout
    """
    def phi_at(s):
        return float(shape.evaluate(curve_point(curve, s)[0]))

    for lo, hi in curve.spans():
        s_grid = np.linspace(lo, hi, samples + 1)
        phi = np.array([phi_at(s) for s in s_grid])
        for i in range(samples + 1):
            left, right = max(i - 1, 0), min(i + 1, samples)
            if phi[i] > phi[left] or phi[i] > phi[right]:
                continue
            best_s, best_phi = s_grid[i], phi[i]
            if right > left:
                res = minimize_scalar(phi_at, bounds=(s_grid[left], s_grid[right]),
                                      method='bounded', options={'xatol': 1e-10})
                if res.fun < best_phi:
                    best_s, best_phi = float(res.x), float(res.fun)
            if best_phi < 0:
                point = curve_point(curve, best_s)[0]
                raise StiffenerConfigurationError(
                    f"Stiffener path enters a cutout near {point.tolist()} (phi={best_phi:.3e})"
                )


def plate_knot_crossings(curve: NurbsCurve, patch: NurbsPatch, lo: float, hi: float,
                         samples: int = KNOT_SEARCH_SAMPLES) -> List[float]:
    """Curve parameters in (lo, hi) where the curve crosses an interior plate knot line"""
    lines = [(axis, float(k))
             for axis, kv in enumerate((patch.knots_xi, patch.knots_eta))
             for k in kv.breakpoints()[1:-1]]
    if not lines:
        return []

    def param(s):
        return np.array(inverse_map(patch, curve_point(curve, s)[0]))

    s_grid = np.linspace(lo, hi, samples + 1)
    params = np.array([param(s) for s in s_grid])
    crossings = []
    for axis, k in lines:
        g = params[:, axis] - k
        sign = np.where(np.abs(g) <= 1e-10, 0.0, np.sign(g))
        for i in range(samples):
            if sign[i] * sign[i + 1] < 0:
                crossings.append(brentq(lambda s: param(s)[axis] - k,
                                        s_grid[i], s_grid[i + 1], xtol=1e-14))
            elif sign[i] == 0 and i > 0 and sign[i - 1] * sign[i + 1] < 0:
                crossings.append(float(s_grid[i]))

    tol = 1e-12 * (hi - lo)
    unique = []
    for s in sorted(crossings):
        if lo + tol < s < hi - tol and (not unique or s - unique[-1] > tol):
            unique.append(s)
    return unique


def stiffener_matrices(path: StiffenerPath, section: StiffenerSection,
                       sampler: PlateFieldSampler, refinement: int = 0,
                       gauss_points: int = DEFAULT_GAUSS_POINTS) -> StiffenerMatrices:
    """
    Couple a stiffener to the plate through the plate basis at the Gauss
    stations of the (independently refined) stiffener curve.

    Every curve span is split where it crosses a plate knot line, so each
    integration segment sees a single plate element and the beam energy
    is integrated over the plate basis it actually constrains.

    Raises:
        GeometryError: a station lies outside the plate
        StiffenerConfigurationError: the curve enters a cutout, or the
            curve has a vanishing tangent
    """
    curve = path.refined(refinement)
    if sampler.shape is not None:
        check_path_clear(curve, sampler.shape)
    gp, gw = np.polynomial.legendre.leggauss(gauss_points)
    segments = []
    for span_lo, span_hi in curve.spans():
        cuts = [span_lo, *plate_knot_crossings(curve, sampler.patch, span_lo, span_hi), span_hi]
        segments.extend(zip(cuts[:-1], cuts[1:]))
    stations = []
    for lo, hi in segments:
        half = 0.5 * (hi - lo)
        for x, w in zip(gp, gw):
            s = lo + half * (x + 1.0)
            point, dC = curve_point(curve, s)
            speed = float(np.linalg.norm(dC))
            if speed <= 1e-14:
                raise StiffenerConfigurationError(f"Stiffener tangent vanishes at s={s:.6f}")
            tangent = dC / speed
            sample = sampler.sample(point)
            B, g = _station_rows(sample, tangent, section.eccentricity)
            stations.append(StiffenerStation(
                point=point, tangent=tangent, weight=w * half * speed,
                dofs=sample.dofs, B=B, g=g,
            ))
    matrices = StiffenerMatrices(section=section, stations=stations)
    logger.info(
        f"Stiffener coupled: {len(curve.spans())} curve element(s), "
        f"{len(segments)} segment(s), {len(stations)} stations, length={matrices.length:.5f}"
    )
    return matrices
