"""
LSBuck - FSDT Plate Kernels

First-order shear deformation plate element kernels:
- Generalized displacements ordered (u0, v0, w0, beta_x, beta_y)
- Strain operator B_p (8 rows) and geometric operator B_NL (6 rows)
- In-plane prestress matrix sigma_p
- Element stiffness, geometric stiffness, thermal load and stress recovery

Columns are grouped per local function (5 per function). On enriched
elements the enriched functions psi * R_A follow the standard ones.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from errors import InvertedElementError
from geometry_nurbs import Element, NurbsPatch, surface_basis
from levelset import enrichment_field

logger = logging.getLogger('lsbuck.plate')

N_FIELDS = 5
FIELD_NAMES = ('u0', 'v0', 'w0', 'beta_x', 'beta_y')


@dataclass(frozen=True, eq=False)
class InPlaneStressState:
    """Mid-plane prestress; fields may be scalars or per-point arrays"""

    sigma_x0: np.ndarray
    sigma_y0: np.ndarray
    tau_xy0: np.ndarray
    t: float

    @classmethod
    def zeros(cls, n_points: int, t: float) -> 'InPlaneStressState':
        z = np.zeros(n_points)
        return cls(z, z.copy(), z.copy(), t)

    def scaled(self, factor: float) -> 'InPlaneStressState':
        return InPlaneStressState(self.sigma_x0 * factor, self.sigma_y0 * factor,
                                  self.tau_xy0 * factor, self.t)


# ---------------------------------------------------------------------------
# Operators
# ---------------------------------------------------------------------------

def _with_enrichment(N, dN, psi, dpsi):
    if psi is None:
        return N, dN
    psi = np.asarray(psi)[..., None]
    dpsi = np.asarray(dpsi)[..., None, :]
    enr = N * psi
    # d(psi R)/dx = R psi_x + R_x psi
    d_enr = N[..., None] * dpsi + dN * psi[..., None]
    return np.concatenate([N, enr], axis=-1), np.concatenate([dN, d_enr], axis=-2)


def strain_operator(N, dN, psi=None, dpsi=None) -> np.ndarray:
    """
    B_p for generalized strains
    (eps_x, eps_y, gamma_xy, kappa_x, kappa_y, kappa_xy, gamma_xz, gamma_yz).

    Args:
        N: basis values (nb,) or (nq, nb)
        dN: physical gradients (nb, 2) or (nq, nb, 2)
        psi, dpsi: optional enrichment value and physical gradient per point;
            when given, enriched columns are appended

    Returns:
        np.ndarray: (8, 5*nf) or (nq, 8, 5*nf)
    """
    N, dN = _with_enrichment(np.asarray(N, float), np.asarray(dN, float), psi, dpsi)
    single = N.ndim == 1
    N, dN = np.atleast_2d(N), dN.reshape((-1,) + dN.shape[-2:])
    nq, nf = N.shape
    dx, dy = dN[..., 0], dN[..., 1]
    B = np.zeros((nq, 8, nf, N_FIELDS))
    B[:, 0, :, 0] = dx
    B[:, 1, :, 1] = dy
    B[:, 2, :, 0] = dy
    B[:, 2, :, 1] = dx
    B[:, 3, :, 3] = dx
    B[:, 4, :, 4] = dy
    B[:, 5, :, 3] = dy
    B[:, 5, :, 4] = dx
    B[:, 6, :, 2] = dx
    B[:, 6, :, 3] = N
    B[:, 7, :, 2] = dy
    B[:, 7, :, 4] = N
    B = B.reshape(nq, 8, nf * N_FIELDS)
    return B[0] if single else B


def geometric_operator(N, dN, psi=None, dpsi=None) -> np.ndarray:
    """B_NL with rows (w,x  w,y  bx,x  bx,y  by,x  by,y)"""
    N, dN = _with_enrichment(np.asarray(N, float), np.asarray(dN, float), psi, dpsi)
    single = N.ndim == 1
    N, dN = np.atleast_2d(N), dN.reshape((-1,) + dN.shape[-2:])
    nq, nf = N.shape
    G = np.zeros((nq, 6, nf, N_FIELDS))
    for row, (field, c) in enumerate(((2, 0), (2, 1), (3, 0), (3, 1), (4, 0), (4, 1))):
        G[:, row, :, field] = dN[..., c]
    G = G.reshape(nq, 6, nf * N_FIELDS)
    return G[0] if single else G


def stress_matrix(state: InPlaneStressState) -> np.ndarray:
    """
    sigma_p: block diagonal t*S, t^3/12*S, t^3/12*S with S = [[sx, txy], [txy, sy]].

    Returns (6, 6) for scalar states, (nq, 6, 6) for per-point arrays.
    """
    sx = np.asarray(state.sigma_x0, float)
    sy = np.asarray(state.sigma_y0, float)
    txy = np.asarray(state.tau_xy0, float)
    S = np.zeros(sx.shape + (2, 2))
    S[..., 0, 0] = sx
    S[..., 1, 1] = sy
    S[..., 0, 1] = txy
    S[..., 1, 0] = txy
    t = state.t
    out = np.zeros(sx.shape + (6, 6))
    out[..., 0:2, 0:2] = t * S
    out[..., 2:4, 2:4] = t ** 3 / 12.0 * S
    out[..., 4:6, 4:6] = t ** 3 / 12.0 * S
    return out


# ---------------------------------------------------------------------------
# Element basis at quadrature points
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ElementBasis:
    """Basis functions of one element evaluated on its quadrature rule"""

    element: Element
    support: np.ndarray       # global control point numbers (nb,)
    enriched: bool
    N: np.ndarray             # (nq, nf), nf = nb or 2*nb
    dN: np.ndarray            # (nq, nf, 2) physical gradients
    detJ: np.ndarray          # (nq,) parent-to-physical determinant
    weights: np.ndarray       # (nq,) parent-area weights
    points: np.ndarray        # (nq, 2) physical coordinates

    @property
    def n_points(self) -> int:
        return len(self.weights)

    @property
    def n_functions(self) -> int:
        return self.N.shape[1]

    @property
    def dV(self) -> np.ndarray:
        return self.weights * self.detJ

    @cached_property
    def B(self) -> np.ndarray:
        return strain_operator(self.N, self.dN)

    @cached_property
    def B_NL(self) -> np.ndarray:
        return geometric_operator(self.N, self.dN)

    @classmethod
    def evaluate(cls, patch: NurbsPatch, element: Element, rule,
                 phi_corners: Optional[np.ndarray] = None) -> 'ElementBasis':
        """
        Args:
            patch: Plate patch
            element: Element of the patch
            rule: ElementRule (parent points, parent-area weights, enriched flag)
            phi_corners: corner level-set values, required when rule.enriched
        """
        support = element.support(patch)
        nb = len(support)
        nq = rule.n_points
        enriched = bool(rule.enriched)
        nf = 2 * nb if enriched else nb
        cps = patch.control_points_flat()
        scaling = element.parent_scaling

        N = np.zeros((nq, nb))
        dN = np.zeros((nq, nb, 2))
        detJ = np.zeros(nq)
        points = np.zeros((nq, 2))
        Jel_inv = np.zeros((nq, 2, 2))
        for k, parent in enumerate(rule.points):
            xi, eta = element.parent_to_param(parent)
            R, dR, _ = surface_basis(patch, xi, eta)
            P = cps[support]
            J = P.T @ dR
            J_el = J @ scaling
            det = np.linalg.det(J_el)
            if det <= 0:
                raise InvertedElementError(
                    f"Element {element.index}: det(J_el) = {det:.3e} at parent {parent}"
                )
            J_inv = np.linalg.inv(J)
            N[k] = R
            dN[k] = dR @ J_inv
            detJ[k] = det
            points[k] = R @ P
            Jel_inv[k] = np.linalg.inv(J_el)

        if enriched:
            psi, dpsi_parent = enrichment_field(phi_corners, rule.points)
            dpsi = np.einsum('qj,qjk->qk', dpsi_parent, Jel_inv)
            N, dN = _with_enrichment(N, dN, psi, dpsi)

        return cls(element=element, support=support, enriched=enriched, N=N, dN=dN,
                   detJ=detJ, weights=np.asarray(rule.weights, float), points=points)


# ---------------------------------------------------------------------------
# Element matrices
# ---------------------------------------------------------------------------

def _symmetrize(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


def element_stiffness(basis: ElementBasis, D_p: np.ndarray) -> np.ndarray:
    """K_e = sum_q B^T D_p B |J_el| w"""
    if basis.n_points == 0:
        n = N_FIELDS * basis.n_functions
        return np.zeros((n, n))
    K = np.einsum('qia,ij,qjb,q->ab', basis.B, D_p, basis.B, basis.dV, optimize=True)
    return _symmetrize(K)


def element_geometric_stiffness(basis: ElementBasis, state: InPlaneStressState) -> np.ndarray:
    """K_Ge = sum_q B_NL^T sigma_p B_NL |J_el| w (per-point stresses)"""
    if basis.n_points == 0:
        n = N_FIELDS * basis.n_functions
        return np.zeros((n, n))
    S = stress_matrix(state)
    if S.ndim == 2:
        S = np.broadcast_to(S, (basis.n_points, 6, 6))
    K = np.einsum('qia,qij,qjb,q->ab', basis.B_NL, S, basis.B_NL, basis.dV, optimize=True)
    return _symmetrize(K)


def element_thermal_force(basis: ElementBasis, N_T_unit: np.ndarray,
                          M_T_unit: np.ndarray, delta_T: float) -> np.ndarray:
    """f_e = sum_q B_p^T [N_T; M_T; 0; 0] dT |J_el| w"""
    if basis.n_points == 0:
        return np.zeros(N_FIELDS * basis.n_functions)
    resultants = np.concatenate([N_T_unit, M_T_unit, np.zeros(2)]) * delta_T
    return np.einsum('qia,i,q->a', basis.B, resultants, basis.dV)


def generalized_strains(basis: ElementBasis, u_local: np.ndarray) -> np.ndarray:
    """(nq, 8) generalized strains of a local displacement vector"""
    return np.einsum('qia,a->qi', basis.B, u_local)


def recover_stress(basis: ElementBasis, u_local: np.ndarray, constitutive,
                   delta_T: float) -> InPlaneStressState:
    """
    Membrane prestress at the quadrature points:
    N = A eps0 + B kappa - N_T dT, sigma = N / t.
    """
    eps = generalized_strains(basis, u_local)
    N = (eps[:, 0:3] @ constitutive.A.T + eps[:, 3:6] @ constitutive.B.T
         - constitutive.N_T_unit * delta_T)
    t = constitutive.thickness
    return InPlaneStressState(N[:, 0] / t, N[:, 1] / t, N[:, 2] / t, t)
