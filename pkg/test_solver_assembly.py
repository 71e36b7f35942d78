"""Tests for DOF numbering, assembly, constraints and the buckling eigenproblem"""

import numpy as np
import pytest
import scipy.sparse as sp

from conftest import isotropic_constitutive, make_patch
from errors import AssemblyError, BoundaryConditionError, ConfigValidationError, SolverError
from levelset import Circle, classify_elements
from solver_assembly import (
    BoundaryConditionSet,
    BucklingSolution,
    DofMap,
    apply_bc,
    assemble,
    buckling_solve,
    discretize,
    factorize_stiffness,
    normalized_critical_temperature,
    prestress_solve,
    run_buckling,
)


def test_dofmap_numbering():
    dm = DofMap(10, np.array([7, 3]))
    np.testing.assert_array_equal(dm.enriched_control_points, [3, 7])
    assert dm.n_standard == 50 and dm.extra_dof == 10 and dm.n_dof == 60
    np.testing.assert_array_equal(dm.standard_dofs([2]), [10, 11, 12, 13, 14])
    np.testing.assert_array_equal(dm.enriched_dofs([7]), [55, 56, 57, 58, 59])
    assert dm.is_enriched(3) and not dm.is_enriched(4)
    dofs = dm.element_dofs([3, 4], enriched=False)
    assert len(dofs) == 10
    with pytest.raises(AssemblyError):
        dm.element_dofs([3, 4], enriched=True)


def test_dofmap_rejects_bad_enrichment():
    with pytest.raises(AssemblyError):
        DofMap(5, np.array([1, 1]))
    with pytest.raises(AssemblyError):
        DofMap(5, np.array([5]))


def test_boundary_condition_sets(unit_patch):
    dm = DofMap.from_classification(unit_patch, None)
    # 6 x 6 control points, 20 on the boundary
    assert len(BoundaryConditionSet.clamped().constrained_dofs(unit_patch, dm)) == 100
    # corners take the union of both edge sets
    assert len(BoundaryConditionSet.simply_supported().constrained_dofs(unit_patch, dm)) == 84
    custom = BoundaryConditionSet.from_kind('custom', {'xi0': ['w0']})
    np.testing.assert_array_equal(custom.constrained_dofs(unit_patch, dm),
                                  [5 * cp + 2 for cp in range(0, 36, 6)])
    assert BoundaryConditionSet.from_kind('ssss').kind == 'SSSS'


def test_boundary_condition_errors(unit_patch):
    with pytest.raises(BoundaryConditionError):
        BoundaryConditionSet.from_kind('CFCF')
    with pytest.raises(BoundaryConditionError):
        BoundaryConditionSet('custom', {'left': ('w0',)})
    with pytest.raises(BoundaryConditionError):
        BoundaryConditionSet('custom', {'xi0': ('theta',)})
    dm = DofMap.from_classification(unit_patch, None)
    with pytest.raises(BoundaryConditionError):
        BoundaryConditionSet('custom', dofs=(dm.n_dof,)).constrained_dofs(unit_patch, dm)


def test_enriched_boundary_dofs_are_constrained():
    patch = make_patch(2)
    shape = Circle((0.0, 0.5), 0.2)
    cls = classify_elements(patch, shape)
    dm = DofMap.from_classification(patch, cls)
    boundary = set(patch.boundary_control_points()['xi0'])
    enriched_edge = [cp for cp in dm.enriched_control_points if cp in boundary]
    assert enriched_edge
    fixed = set(BoundaryConditionSet.clamped().constrained_dofs(patch, dm).tolist())
    assert set(dm.enriched_dofs(enriched_edge).tolist()) <= fixed


def test_assembled_system_is_symmetric(iso_constitutive, central_circle):
    disc = discretize(make_patch(2), iso_constitutive, central_circle)
    system = assemble(disc)
    assert system.n_dof == disc.dofmap.n_dof
    assert abs(system.K - system.K.T).max() <= 1e-12 * abs(system.K).max()
    # standard functions sum to one, so their in-plane thermal loads cancel
    for c in (0, 1):
        assert abs(system.F_th[c:disc.dofmap.n_standard:5].sum()) < 1e-12


def test_apply_bc_leaves_positive_diagonal(iso_constitutive):
    shape = Circle((0.5, 0.5), 0.3)
    disc = discretize(make_patch(4), iso_constitutive, shape)
    system = apply_bc(assemble(disc), BoundaryConditionSet.clamped(), disc.patch)
    assert system.auto_constrained > 0
    diag = system.reduce(system.K).diagonal()
    assert np.all(diag > 0)
    assert len(system.free) + len(system.constrained) == system.n_dof


def test_factorize_singular_matrix():
    with pytest.raises(SolverError):
        factorize_stiffness(sp.csc_matrix(np.diag([1.0, 0.0])))


def test_clamped_prestress_is_uniform_compression(iso_constitutive):
    disc = discretize(make_patch(2), iso_constitutive)
    system = apply_bc(assemble(disc), BoundaryConditionSet.clamped(), disc.patch)
    prestress = prestress_solve(system, disc, delta_T_ref=1.0)
    np.testing.assert_allclose(prestress.displacement, 0.0, atol=1e-12)
    expected = -1.0 / (1.0 - 0.3)
    for state in prestress.element_stress:
        np.testing.assert_allclose(state.sigma_x0, expected, rtol=1e-10)
        np.testing.assert_allclose(state.sigma_y0, expected, rtol=1e-10)
        np.testing.assert_allclose(state.tau_xy0, 0.0, atol=1e-10)


def test_dense_eigenproblem():
    K = np.diag([2.0, 4.0, 8.0])
    solution = buckling_solve(K, -np.eye(3), n_modes=2)
    np.testing.assert_allclose(solution.eigenvalues, [2.0, 4.0])
    assert solution.buckled and solution.solver == 'dense'
    np.testing.assert_allclose(np.abs(solution.modes).max(axis=0), 1.0)


def test_sparse_eigenproblem_matches_dense():
    n = 40
    K = sp.diags(np.arange(1.0, n + 1.0)).tocsr()
    K_G = -sp.identity(n, format='csr')
    sparse = buckling_solve(K, K_G, n_modes=3, dense_limit=0)
    dense = buckling_solve(K, K_G, n_modes=3)
    assert sparse.solver == 'lanczos'
    np.testing.assert_allclose(sparse.eigenvalues, [1.0, 2.0, 3.0], rtol=1e-8)
    np.testing.assert_allclose(sparse.eigenvalues, dense.eigenvalues, rtol=1e-8)


def test_no_positive_eigenvalue():
    solution = buckling_solve(np.eye(3), np.eye(3))
    assert not solution.buckled
    assert solution.n_modes == 0
    assert np.isnan(solution.critical_temperature)


def test_eigen_shape_checks():
    with pytest.raises(AssemblyError):
        buckling_solve(np.eye(3), np.eye(2))
    with pytest.raises(SolverError):
        buckling_solve(np.zeros((0, 0)), np.zeros((0, 0)))


def test_normalization_conventions():
    solution = BucklingSolution(np.array([2.0]), np.ones((1, 1)), True, delta_T_ref=1.5)
    assert normalized_critical_temperature(solution) == pytest.approx(3.0)
    assert normalized_critical_temperature(solution, 'alpha0', alpha0=0.5) == pytest.approx(1.5)
    assert normalized_critical_temperature(solution, 'alpha0_e3', alpha0=0.5) == pytest.approx(1500.0)
    assert normalized_critical_temperature(solution, 'alpha0', 0.5, 100.0) == pytest.approx(150.0)
    with pytest.raises(ConfigValidationError):
        normalized_critical_temperature(solution, 'kelvin')


def _clamped_critical(constitutive):
    disc = discretize(make_patch(2), constitutive)
    run = run_buckling(disc, BoundaryConditionSet.clamped(), n_modes=1)
    return run.solution.critical_temperature


def test_critical_temperature_scales_inversely_with_alpha():
    base = _clamped_critical(isotropic_constitutive(alpha=1.0))
    doubled = _clamped_critical(isotropic_constitutive(alpha=2.0))
    assert base > 0
    assert doubled == pytest.approx(base / 2.0, rel=1e-8)


def test_critical_temperature_invariant_to_modulus():
    base = _clamped_critical(isotropic_constitutive(E=1.0))
    stiff = _clamped_critical(isotropic_constitutive(E=70.0))
    assert stiff == pytest.approx(base, rel=1e-8)


def test_extra_dofs_grow_slower_than_total():
    shape = Circle((0.5, 0.5), 0.15)
    sizes = []
    for level in (3, 4, 5):
        patch = make_patch(level)
        dm = DofMap.from_classification(patch, classify_elements(patch, shape))
        sizes.append((dm.n_dof, dm.extra_dof))
    for (n0, e0), (n1, e1) in zip(sizes, sizes[1:]):
        assert e1 > e0
        assert e1 / e0 < n1 / n0


@pytest.mark.slow
def test_simply_supported_plate_matches_mindlin_solution():
    E, nu, alpha, t = 1.0, 0.3, 1.0, 0.02
    C = isotropic_constitutive(E, nu, alpha, t)
    disc = discretize(make_patch(4, degree=3), C)
    run = run_buckling(disc, BoundaryConditionSet.simply_supported(), n_modes=1)
    D = E * t ** 3 / (12 * (1 - nu ** 2))
    kappa_G_t = 5.0 / 6.0 * E / (2 * (1 + nu)) * t
    k2 = 2 * np.pi ** 2
    N_cr = D * k2 / (1 + D * k2 / kappa_G_t)
    expected = N_cr * (1 - nu) / (E * alpha * t)
    assert run.solution.critical_temperature == pytest.approx(expected, rel=1e-2)

