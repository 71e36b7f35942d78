"""Tests for NURBS bases, maps and knot insertion"""

import numpy as np
import pytest

from errors import DomainError, GeometryError
from geometry_nurbs import (
    KnotVector,
    basis_with_derivatives,
    bezier_curve,
    curve_point,
    element_jacobian,
    find_span,
    h_refine,
    h_refine_curve,
    inverse_map,
    locate_element,
    map_parent_points,
    quarter_annulus_patch,
    rectangle_patch,
    surface_basis,
    surface_map,
)


def test_open_uniform_knots():
    kv = KnotVector.open_uniform(2, 4)
    np.testing.assert_allclose(kv.values, [0, 0, 0, 0.25, 0.5, 0.75, 1, 1, 1])
    assert kv.n_basis == 6
    assert kv.domain == (0.0, 1.0)
    assert kv.nonempty_spans() == [2, 3, 4, 5]


def test_invalid_knot_vectors():
    with pytest.raises(DomainError):
        KnotVector(np.array([0.0, 0.5, 0.2, 1.0]), 1)
    with pytest.raises(DomainError):
        KnotVector(np.array([0.0, 0.3, 1.0, 1.0]), 1)


def test_find_span_end_convention():
    kv = KnotVector.open_uniform(2, 4)
    assert find_span(kv, 0.0) == 2
    assert find_span(kv, 0.25) == 3
    assert find_span(kv, 1.0) == 5
    with pytest.raises(DomainError):
        find_span(kv, 1.5)


@pytest.mark.parametrize("xi", [0.0, 0.1, 0.37, 0.5, 0.99, 1.0])
def test_partition_of_unity(xi):
    kv = KnotVector.open_uniform(3, 5)
    ders = basis_with_derivatives(kv, xi, 2)
    assert ders[0].sum() == pytest.approx(1.0, abs=1e-14)
    assert ders[1].sum() == pytest.approx(0.0, abs=1e-12)
    assert np.all(ders[0] >= -1e-15)


def test_basis_derivative_matches_finite_difference():
    kv = KnotVector.open_uniform(2, 3)
    xi, h = 0.41, 1e-6
    span = find_span(kv, xi)
    d = basis_with_derivatives(kv, xi, 1, span)[1]
    fd = (basis_with_derivatives(kv, xi + h, 0, span)[0]
          - basis_with_derivatives(kv, xi - h, 0, span)[0]) / (2 * h)
    np.testing.assert_allclose(d, fd, atol=1e-7)


def test_surface_basis_partition_and_gradient(unit_patch):
    R, dR, support = surface_basis(unit_patch, 0.3, 0.7)
    assert len(R) == len(support) == 9
    assert R.sum() == pytest.approx(1.0, abs=1e-14)
    np.testing.assert_allclose(dR.sum(axis=0), 0.0, atol=1e-12)


def test_rational_gradient_matches_finite_difference():
    patch = quarter_annulus_patch(1.0, 2.0)
    xi, eta, h = 0.35, 0.6, 1e-6
    _, dR, _ = surface_basis(patch, xi, eta)
    Rp, _, _ = surface_basis(patch, xi + h, eta)
    Rm, _, _ = surface_basis(patch, xi - h, eta)
    np.testing.assert_allclose(dR[:, 0], (Rp - Rm) / (2 * h), atol=1e-7)


def test_quarter_annulus_is_exact_arc():
    patch = quarter_annulus_patch(1.0, 2.0)
    for xi in np.linspace(0, 1, 7):
        point, J = surface_map(patch, xi, 0.0)
        assert np.linalg.norm(point) == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.det(J) > 0


def test_h_refine_preserves_geometry():
    patch = quarter_annulus_patch(1.0, 2.0)
    refined = h_refine(patch, 2)
    assert refined.n_elements == 16
    for xi, eta in [(0.1, 0.2), (0.5, 0.5), (0.83, 0.97), (1.0, 1.0)]:
        p0, _ = surface_map(patch, xi, eta)
        p1, _ = surface_map(refined, xi, eta)
        np.testing.assert_allclose(p0, p1, atol=1e-12)


def test_h_refine_negative_levels():
    with pytest.raises(DomainError):
        h_refine(rectangle_patch(), -1)


def test_rectangle_patch_elements_and_jacobian():
    patch = h_refine(rectangle_patch(2.0, 1.0, 2), 1)
    elements = patch.elements()
    assert len(elements) == 4
    assert [e.index for e in elements] == [0, 1, 2, 3]
    J_el = element_jacobian(patch, elements[0], (0.0, 0.0))
    # parent square of side 2 maps onto a 1.0 x 0.5 element
    np.testing.assert_allclose(J_el, np.diag([0.5, 0.25]), atol=1e-14)


def test_boundary_control_points():
    patch = rectangle_patch(1.0, 1.0, 2)
    edges = patch.boundary_control_points()
    assert edges['xi0'] == [0, 3, 6]
    assert edges['eta1'] == [6, 7, 8]


def test_map_parent_points_and_locate(unit_patch):
    element = unit_patch.elements()[5]
    corners = map_parent_points(unit_patch, element, [[-1, -1], [1, 1]])
    np.testing.assert_allclose(corners, [[0.25, 0.25], [0.5, 0.5]], atol=1e-14)
    assert locate_element(unit_patch, 0.3, 0.3) == 5
    assert locate_element(unit_patch, 1.0, 1.0) == 15


def test_inverse_map_round_trip():
    patch = h_refine(quarter_annulus_patch(1.0, 2.0), 1)
    point, _ = surface_map(patch, 0.27, 0.64)
    xi, eta = inverse_map(patch, point)
    assert xi == pytest.approx(0.27, abs=1e-10)
    assert eta == pytest.approx(0.64, abs=1e-10)


def test_inverse_map_outside_patch(unit_patch):
    with pytest.raises(GeometryError):
        inverse_map(unit_patch, [1.5, 0.5])


def test_bezier_midpoint_and_curve_refinement():
    pts = np.array([[0.0, 0.0], [0.5, 1.0], [1.0, 0.0]])
    curve = bezier_curve(pts)
    mid, tangent = curve_point(curve, 0.5)
    np.testing.assert_allclose(mid, 0.25 * pts[0] + 0.5 * pts[1] + 0.25 * pts[2], atol=1e-14)
    np.testing.assert_allclose(tangent, [1.0, 0.0], atol=1e-14)
    refined = h_refine_curve(curve, 3)
    assert len(refined.spans()) == 8
    for s in np.linspace(0, 1, 11):
        np.testing.assert_allclose(curve_point(refined, s)[0], curve_point(curve, s)[0], atol=1e-12)
