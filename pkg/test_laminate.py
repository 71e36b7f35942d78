"""Tests for classical lamination theory"""

import numpy as np
import pytest

from errors import LaminateError, MaterialInstabilityError
from laminate import (
    NAMED_LAYUPS,
    NAMED_MATERIALS,
    LaminateStack,
    Ply,
    constitutive_set,
    reduced_stiffness,
    transformed_alpha,
    transformed_stiffness,
)

KANT = NAMED_MATERIALS['composite_kant']


def _stack(name, thickness=0.1):
    return LaminateStack.from_layup(KANT, NAMED_LAYUPS[name], thickness)


def test_isotropic_plate_rigidities():
    E, nu, t, alpha = 2.0, 0.25, 0.1, 3.0
    C = constitutive_set(LaminateStack((Ply.isotropic(E, nu, alpha, t),)))
    D = E * t ** 3 / (12 * (1 - nu ** 2))
    assert C.D[0, 0] == pytest.approx(D, rel=1e-14)
    assert C.D[0, 1] == pytest.approx(nu * D, rel=1e-14)
    assert C.A[2, 2] == pytest.approx(E / (2 * (1 + nu)) * t, rel=1e-14)
    G = E / (2 * (1 + nu))
    np.testing.assert_allclose(C.A_s, 5.0 / 6.0 * G * t * np.eye(2), rtol=1e-14)
    # N_T = E alpha t / (1 - nu) in both directions, no shear, no moment
    expected = E * alpha * t / (1 - nu)
    np.testing.assert_allclose(C.N_T_unit, [expected, expected, 0.0], rtol=1e-13, atol=1e-14)
    np.testing.assert_allclose(C.M_T_unit, 0.0, atol=1e-15)


@pytest.mark.parametrize("name", ['symmetric_cross_ply', 'symmetric_angle_ply'])
def test_symmetric_layups_have_no_coupling(name):
    C = constitutive_set(_stack(name))
    assert np.abs(C.B).max() <= 1e-14 * np.abs(C.A).max()
    assert np.abs(C.M_T_unit).max() <= 1e-14 * np.abs(C.N_T_unit).max()


def test_antisymmetric_cross_ply_couples():
    C = constitutive_set(_stack('antisymmetric_cross_ply'))
    assert abs(C.B[0, 0]) > 1e-6 * abs(C.A[0, 0])
    assert C.B[0, 0] == pytest.approx(-C.B[1, 1], rel=1e-12)


def test_angle_ply_shear_terms():
    C = constitutive_set(_stack('symmetric_angle_ply'))
    # +45/-45 pairs cancel A16 but not D16
    assert abs(C.A[0, 2]) <= 1e-12 * C.A[0, 0]
    assert abs(C.D[0, 2]) > 1e-6 * C.D[0, 0]


def test_d_p_block_structure():
    C = constitutive_set(_stack('antisymmetric_cross_ply'))
    np.testing.assert_allclose(C.D_p, C.D_p.T, atol=1e-15)
    np.testing.assert_allclose(C.D_p[0:3, 3:6], C.B)
    np.testing.assert_allclose(C.D_p[6:8, 6:8], C.A_s)
    assert np.all(C.D_p[0:6, 6:8] == 0)


def test_transformed_stiffness_zero_and_ninety():
    Q = reduced_stiffness(Ply.from_material(KANT, 0.0, 1.0))
    Q0 = transformed_stiffness(Q, 0.0)
    Q90 = transformed_stiffness(Q, np.pi / 2)
    assert Q0['Q11'] == pytest.approx(Q['Q11'])
    assert Q90['Q11'] == pytest.approx(Q['Q22'])
    assert Q90['Q22'] == pytest.approx(Q['Q11'])
    assert Q90['Q44'] == pytest.approx(Q['Q55'])
    assert abs(Q90['Q16']) < 1e-12 and abs(Q90['Q45']) < 1e-12


def test_transformed_alpha_rotation():
    np.testing.assert_allclose(transformed_alpha(0.015, 1.0, np.pi / 2), [1.0, 0.015, 0.0],
                               atol=1e-15)
    a45 = transformed_alpha(0.015, 1.0, np.pi / 4)
    assert a45[0] == pytest.approx(a45[1])
    assert a45[2] == pytest.approx(0.015 - 1.0)


def test_moduli_scaling_scales_everything():
    C1 = constitutive_set(_stack('antisymmetric_angle_ply'))
    scaled = {k: (v * 7.0 if k.startswith(('E_', 'G_')) else v) for k, v in KANT.items()}
    C7 = constitutive_set(LaminateStack.from_layup(scaled, NAMED_LAYUPS['antisymmetric_angle_ply'], 0.1))
    # entries that vanish analytically carry round-off of the matrix scale
    scale = np.abs(C7.D_p).max()
    np.testing.assert_allclose(C7.D_p, 7.0 * C1.D_p, rtol=1e-12, atol=1e-13 * scale)
    np.testing.assert_allclose(C7.N_T_unit, 7.0 * C1.N_T_unit, rtol=1e-12,
                               atol=1e-13 * np.abs(C7.N_T_unit).max())


def test_ply_validation():
    with pytest.raises(LaminateError):
        Ply.isotropic(-1.0, 0.3, 1.0, 0.1)
    with pytest.raises(LaminateError):
        Ply.isotropic(1.0, 0.5, 1.0, 0.1)
    with pytest.raises(LaminateError):
        LaminateStack.from_layup(KANT, [], 0.1)
    with pytest.raises(LaminateError):
        constitutive_set(LaminateStack(()))


def test_material_instability():
    # nu_LT^2 * E_T / E_L >= 1
    ply = Ply(E_L=1.0, E_T=10.0, G_LT=1.0, G_TT=1.0, nu_LT=0.45, nu_TT=0.3,
              alpha_L=1.0, alpha_T=1.0, theta=0.0, thickness=0.1)
    with pytest.raises(MaterialInstabilityError):
        reduced_stiffness(ply)


def test_z_interfaces():
    stack = _stack('symmetric_cross_ply', 0.2)
    np.testing.assert_allclose(stack.z_interfaces, [-0.1, -0.05, 0.0, 0.05, 0.1], atol=1e-15)
    assert stack.thickness == pytest.approx(0.2)
