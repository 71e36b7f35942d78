"""Tests for mode sampling and CSV/VTK export"""

import numpy as np
import pytest

from conftest import make_patch
from mode_export import (
    export_modes,
    read_mode_csv,
    sample_modes,
    write_mode_csv,
    write_mode_vtk,
)
from solver_assembly import discretize


@pytest.fixture
def holed(iso_constitutive, central_circle):
    return discretize(make_patch(2), iso_constitutive, central_circle)


def _w_equals_x(discretization):
    mode = np.zeros(discretization.dofmap.n_dof)
    cps = discretization.patch.control_points_flat()
    mode[2:discretization.dofmap.n_standard:5] = cps[:, 0]
    return mode


def test_zero_mode_gives_zero_field(holed):
    field = sample_modes(holed, np.zeros((holed.dofmap.n_dof, 2)), grid_resolution=11)
    assert field.n_modes == 2
    assert field.w.shape == (2, 11, 11)
    np.testing.assert_array_equal(field.w[:, ~field.mask], 0.0)
    assert np.all(np.isnan(field.w[:, field.mask]))


def test_linear_field_is_reproduced(holed):
    field = sample_modes(holed, _w_equals_x(holed), grid_resolution=21)
    np.testing.assert_allclose(field.w[0][~field.mask], field.x[~field.mask], atol=1e-13)
    np.testing.assert_allclose(field.x[0], np.linspace(0, 1, 21), atol=1e-14)


def test_masked_fraction_matches_hole_area(holed):
    field = sample_modes(holed, np.zeros(holed.dofmap.n_dof), grid_resolution=101)
    assert field.masked_fraction == pytest.approx(np.pi * 0.15 ** 2, abs=3e-3)
    assert field.mask[50, 50] and not field.mask[0, 0]


def test_grid_resolution_check(holed):
    with pytest.raises(ValueError):
        sample_modes(holed, np.zeros(holed.dofmap.n_dof), grid_resolution=1)


def test_mode_csv_round_trip(holed, tmp_path):
    field = sample_modes(holed, _w_equals_x(holed), grid_resolution=9)
    path = write_mode_csv(field, 0, tmp_path / 'mode_1.csv')
    assert path.read_text().splitlines()[0] == 'xi,eta,x,y,w'
    np.testing.assert_array_equal(read_mode_csv(path), field.w[0])


def test_mode_vtk_header(holed, tmp_path):
    field = sample_modes(holed, _w_equals_x(holed), grid_resolution=5)
    lines = write_mode_vtk(field, 0, tmp_path / 'mode_1.vtk').read_text().splitlines()
    assert lines[0] == '# vtk DataFile Version 3.0'
    assert 'DATASET STRUCTURED_POINTS' in lines
    assert 'DIMENSIONS 5 5 1' in lines
    assert 'SPACING 0.25 0.25 1.0' in lines
    assert 'SCALARS w_mode1 double 1' in lines
    assert len(lines) == 10 + 25


def test_mode_vtk_header_numbers_are_plain_floats(holed, tmp_path):
    field = sample_modes(holed, _w_equals_x(holed), grid_resolution=5)
    lines = write_mode_vtk(field, 0, tmp_path / 'mode_1.vtk').read_text().splitlines()
    header = {line.split()[0]: line.split()[1:] for line in lines[4:7]}
    assert [float(x) for x in header['ORIGIN']] == [0.0, 0.0, 0.0]
    assert [float(x) for x in header['SPACING']] == [0.25, 0.25, 1.0]
    assert not any('np.' in line for line in lines)


def test_export_modes_writes_every_mode(holed, tmp_path):
    modes = np.stack([_w_equals_x(holed), np.zeros(holed.dofmap.n_dof)], axis=1)
    written = export_modes(holed, modes, tmp_path / 'modes', grid_resolution=5)
    assert sorted(p.name for p in written) == ['mode_1.csv', 'mode_1.vtk',
                                               'mode_2.csv', 'mode_2.vtk']
    csv_only = export_modes(holed, modes, tmp_path / 'csv', grid_resolution=5, formats=['csv'])
    assert all(p.suffix == '.csv' for p in csv_only)
    with pytest.raises(ValueError):
        export_modes(holed, modes, tmp_path / 'bad', formats=['png'])
