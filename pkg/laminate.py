"""
LSBuck - Laminate Constitutive Model

Classical laminate computations for the first-order shear plate:
- Plane-stress reduced stiffness of an orthotropic ply
- Rotation to the plate axes (in-plane and transverse-shear blocks)
- Thermal expansion rotation
- A, B, D, A_s through-thickness integration assembled into the 8x8 D_p
- Thermal stress/moment resultants per unit temperature rise
"""

import logging
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from errors import LaminateError, MaterialInstabilityError

logger = logging.getLogger('lsbuck.laminate')

DEFAULT_SHEAR_CORRECTION = 5.0 / 6.0


@dataclass(frozen=True)
class Ply:
    """Orthotropic lamina; theta in radians, measured from the plate x-axis"""

    E_L: float
    E_T: float
    G_LT: float
    G_TT: float
    nu_LT: float
    nu_TT: float
    alpha_L: float
    alpha_T: float
    theta: float
    thickness: float

    def __post_init__(self):
        for name in ('E_L', 'E_T', 'G_LT', 'G_TT', 'thickness'):
            if not getattr(self, name) > 0:
                raise LaminateError(f"Ply {name} must be positive, got {getattr(self, name)}")
        for name in ('nu_LT', 'nu_TT'):
            value = getattr(self, name)
            if not 0.0 <= value < 0.5:
                raise LaminateError(f"Ply {name} must lie in [0, 0.5), got {value}")

    @property
    def nu_TL(self) -> float:
        return self.nu_LT * self.E_T / self.E_L

    @classmethod
    def from_material(cls, material: Dict[str, float], theta: float,
                      thickness: float) -> 'Ply':
        """Build a ply from a material dictionary (config keys)"""
        if 'E' in material:
            return cls.isotropic(material['E'], material['nu'], material['alpha'],
                                 thickness, theta)
        return cls(
            E_L=material['E_L'], E_T=material['E_T'],
            G_LT=material['G_LT'], G_TT=material['G_TT'],
            nu_LT=material['nu_LT'], nu_TT=material.get('nu_TT', material['nu_LT']),
            alpha_L=material['alpha_L'], alpha_T=material['alpha_T'],
            theta=theta, thickness=thickness,
        )

    @classmethod
    def isotropic(cls, E: float, nu: float, alpha: float, thickness: float,
                  theta: float = 0.0) -> 'Ply':
        G = E / (2.0 * (1.0 + nu))
        return cls(E, E, G, G, nu, nu, alpha, alpha, theta, thickness)


@dataclass(frozen=True)
class LaminateStack:
    """Plies ordered bottom to top, centred on the mid-plane"""

    plies: Tuple[Ply, ...]

    def __post_init__(self):
        object.__setattr__(self, 'plies', tuple(self.plies))

    @property
    def thickness(self) -> float:
        return float(sum(ply.thickness for ply in self.plies))

    @property
    def z_interfaces(self) -> np.ndarray:
        """Interface coordinates from -h/2 to h/2 (len = n_plies + 1)"""
        h = self.thickness
        return np.concatenate([[0.0], np.cumsum([p.thickness for p in self.plies])]) - h / 2

    @classmethod
    def from_layup(cls, material: Dict[str, float], angles_deg: Sequence[float],
                   total_thickness: float) -> 'LaminateStack':
        """Equal-thickness plies at the given angles (degrees)"""
        if len(angles_deg) == 0:
            raise LaminateError("Layup must contain at least one ply")
        t_ply = total_thickness / len(angles_deg)
        return cls(tuple(
            Ply.from_material(material, np.deg2rad(a), t_ply) for a in angles_deg
        ))


@dataclass(frozen=True, eq=False)
class ConstitutiveSet:
    """Thickness-integrated stiffness of a laminate"""

    A: np.ndarray
    B: np.ndarray
    D: np.ndarray
    A_s: np.ndarray
    D_p: np.ndarray
    N_T_unit: np.ndarray
    M_T_unit: np.ndarray
    thickness: float

    def thermal_resultants(self, delta_T: float) -> np.ndarray:
        """[N_T; M_T] (6,) for a uniform temperature rise"""
        return np.concatenate([self.N_T_unit, self.M_T_unit]) * delta_T


# ---------------------------------------------------------------------------
# Ply-level transforms
# ---------------------------------------------------------------------------

def reduced_stiffness(ply: Ply) -> Dict[str, float]:
    """
    Plane-stress reduced stiffnesses in the material axes.

    Returns:
        dict: Q11, Q12, Q22, Q66, Q44 (= G_TT), Q55 (= G_LT)

    Raises:
        MaterialInstabilityError: 1 - nu_LT * nu_TL <= 0
    """
    denom = 1.0 - ply.nu_LT * ply.nu_TL
    if denom <= 0:
        raise MaterialInstabilityError(
            f"1 - nu_LT*nu_TL = {denom:.3e} <= 0 (nu_LT={ply.nu_LT}, nu_TL={ply.nu_TL})"
        )
    Q11 = ply.E_L / denom
    Q22 = ply.E_T / denom
    return {
        'Q11': Q11,
        'Q12': ply.nu_LT * Q22,
        'Q22': Q22,
        'Q66': ply.G_LT,
        'Q44': ply.G_TT,
        'Q55': ply.G_LT,
    }


def transformed_stiffness(Q: Dict[str, float], theta: float) -> Dict[str, float]:
    """Rotate reduced stiffnesses by theta (radians) into plate axes"""
    c, s = np.cos(theta), np.sin(theta)
    c2, s2 = c * c, s * s
    c4, s4 = c2 * c2, s2 * s2
    Q11, Q12, Q22, Q66 = Q['Q11'], Q['Q12'], Q['Q22'], Q['Q66']
    Q44, Q55 = Q['Q44'], Q['Q55']
    return {
        'Q11': Q11 * c4 + 2.0 * (Q12 + 2.0 * Q66) * s2 * c2 + Q22 * s4,
        'Q12': (Q11 + Q22 - 4.0 * Q66) * s2 * c2 + Q12 * (s4 + c4),
        'Q22': Q11 * s4 + 2.0 * (Q12 + 2.0 * Q66) * s2 * c2 + Q22 * c4,
        'Q16': (Q11 - Q12 - 2.0 * Q66) * s * c2 * c + (Q12 - Q22 + 2.0 * Q66) * s2 * s * c,
        'Q26': (Q11 - Q12 - 2.0 * Q66) * s2 * s * c + (Q12 - Q22 + 2.0 * Q66) * s * c2 * c,
        'Q66': (Q11 + Q22 - 2.0 * Q12 - 2.0 * Q66) * s2 * c2 + Q66 * (s4 + c4),
        'Q44': Q44 * c2 + Q55 * s2,
        'Q45': (Q55 - Q44) * c * s,
        'Q55': Q44 * s2 + Q55 * c2,
    }


def transformed_alpha(alpha_L: float, alpha_T: float, theta: float) -> np.ndarray:
    """(alpha_x, alpha_y, alpha_xy) with engineering shear component"""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([
        c * c * alpha_L + s * s * alpha_T,
        s * s * alpha_L + c * c * alpha_T,
        2.0 * c * s * (alpha_L - alpha_T),
    ])


def _membrane_matrix(Qb: Dict[str, float]) -> np.ndarray:
    return np.array([
        [Qb['Q11'], Qb['Q12'], Qb['Q16']],
        [Qb['Q12'], Qb['Q22'], Qb['Q26']],
        [Qb['Q16'], Qb['Q26'], Qb['Q66']],
    ])


def _shear_matrix(Qb: Dict[str, float]) -> np.ndarray:
    # rows/cols ordered (gamma_xz, gamma_yz)
    return np.array([
        [Qb['Q55'], Qb['Q45']],
        [Qb['Q45'], Qb['Q44']],
    ])


# ---------------------------------------------------------------------------
# Laminate integration
# ---------------------------------------------------------------------------

def constitutive_set(stack: LaminateStack,
                     K_shear: float = DEFAULT_SHEAR_CORRECTION) -> ConstitutiveSet:
    """
    Integrate ply stiffnesses through the thickness.

    D_p = [[A, B, 0], [B, D, 0], [0, 0, A_s]] acting on
    (eps_x, eps_y, gamma_xy, kappa_x, kappa_y, kappa_xy, gamma_xz, gamma_yz).

    Raises:
        LaminateError: empty stack
    """
    if len(stack.plies) == 0:
        raise LaminateError("Cannot integrate an empty laminate")

    A = np.zeros((3, 3))
    B = np.zeros((3, 3))
    D = np.zeros((3, 3))
    S = np.zeros((2, 2))
    N_T = np.zeros(3)
    M_T = np.zeros(3)

    z = stack.z_interfaces
    for k, ply in enumerate(stack.plies):
        z0, z1 = z[k], z[k + 1]
        Qb = transformed_stiffness(reduced_stiffness(ply), ply.theta)
        Qm = _membrane_matrix(Qb)
        dz1 = z1 - z0
        dz2 = (z1 ** 2 - z0 ** 2) / 2.0
        dz3 = (z1 ** 3 - z0 ** 3) / 3.0
        A += Qm * dz1
        B += Qm * dz2
        D += Qm * dz3
        S += _shear_matrix(Qb) * dz1

        Q_alpha = Qm @ transformed_alpha(ply.alpha_L, ply.alpha_T, ply.theta)
        N_T += Q_alpha * dz1
        M_T += Q_alpha * dz2

    A_s = K_shear * S
    D_p = np.zeros((8, 8))
    D_p[0:3, 0:3] = A
    D_p[0:3, 3:6] = B
    D_p[3:6, 0:3] = B
    D_p[3:6, 3:6] = D
    D_p[6:8, 6:8] = A_s

    logger.debug(
        f"Laminate integrated: {len(stack.plies)} plies, h={stack.thickness:.4g}, "
        f"A11={A[0, 0]:.4g}, D11={D[0, 0]:.4g}, |B|max={np.abs(B).max():.3g}"
    )
    return ConstitutiveSet(A=A, B=B, D=D, A_s=A_s, D_p=D_p,
                           N_T_unit=N_T, M_T_unit=M_T, thickness=stack.thickness)


# Named layups used by the ply-orientation studies (degrees, bottom to top)
NAMED_LAYUPS = {
    'symmetric_cross_ply': (0.0, 90.0, 90.0, 0.0),
    'antisymmetric_cross_ply': (0.0, 90.0, 0.0, 90.0),
    'symmetric_angle_ply': (45.0, -45.0, -45.0, 45.0),
    'antisymmetric_angle_ply': (45.0, -45.0, 45.0, -45.0),
}

# Material sets of the validation studies (alpha values are in units of alpha_0)
NAMED_MATERIALS = {
    'composite_kant': {
        'E_L': 15.0, 'E_T': 1.0, 'G_LT': 0.5, 'G_TT': 0.3356,
        'nu_LT': 0.3, 'nu_TT': 0.49, 'alpha_L': 0.015, 'alpha_T': 1.0,
    },
    'steel_avci': {'E': 208e9, 'nu': 0.3, 'alpha': 1.17e-5},
}
