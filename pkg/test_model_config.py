"""Tests for model file validation, overrides and sweep points"""

from pathlib import Path

import numpy as np
import pytest
import yaml

from errors import ConfigValidationError, LSBuckError
from levelset import Circle, ShapeUnion
from model_config import (
    DEFAULT_RUNTIME_CONFIG,
    apply_sweep_value,
    load_config,
    load_runtime_config,
    parse_config,
    with_overrides,
)

CASES = sorted((Path(__file__).parent / 'cases').glob('*.yaml'))


def _paths(excinfo):
    return [path for path, _ in excinfo.value.problems]


def test_minimal_config(minimal_model_dict):
    config = parse_config(minimal_model_dict)
    assert config.name == 'minimal'
    assert config.plate.thickness == pytest.approx(0.02)
    assert config.plate.aspect_ratio == pytest.approx(50.0)
    assert config.plate.layup == (0.0,) and config.plate.layup_name == 'single'
    assert config.plate.material_dict == {'E': 1.0, 'alpha': 1.0, 'nu': 0.3}
    assert config.boundary.kind == 'CCCC'
    assert config.analysis.n_modes == 3
    assert config.analysis.triangle_points == DEFAULT_RUNTIME_CONFIG['solver']['triangle_points']
    assert config.shape() is None and config.sweep is None


@pytest.mark.parametrize("case", CASES, ids=lambda p: p.stem)
def test_shipped_cases_validate(case):
    config = load_config(case)
    assert config.name == case.stem
    assert config.version == 1


def test_unknown_keys_are_rejected(minimal_model_dict):
    minimal_model_dict['plate']['colour'] = 'red'
    minimal_model_dict['solver'] = {}
    with pytest.raises(ConfigValidationError) as excinfo:
        parse_config(minimal_model_dict)
    assert set(_paths(excinfo)) == {'plate.colour', 'solver'}


def test_every_problem_is_reported(minimal_model_dict):
    minimal_model_dict['version'] = 2
    minimal_model_dict['plate']['refinement'] = 0
    minimal_model_dict['plate']['thickness'] = 0.01
    minimal_model_dict['analysis'] = {'n_modes': 0, 'triangle_points': 5,
                                      'normalization': 'kelvin'}
    minimal_model_dict['boundary'] = 'CFCF'
    with pytest.raises(ConfigValidationError) as excinfo:
        parse_config(minimal_model_dict)
    paths = _paths(excinfo)
    for expected in ('version', 'plate.refinement', 'plate', 'analysis.n_modes',
                     'analysis.triangle_points', 'analysis.normalization', 'boundary.kind'):
        assert expected in paths
    assert 'validation error' in str(excinfo.value)


def test_missing_required_sections():
    with pytest.raises(ConfigValidationError) as excinfo:
        parse_config({'name': 'empty'})
    assert {'version', 'plate'} <= set(_paths(excinfo))


def test_material_and_layup_forms(minimal_model_dict):
    minimal_model_dict['plate'].update(material='composite_kant', layup=[0, 90, 90, 0])
    config = parse_config(minimal_model_dict)
    assert config.plate.material_name == 'composite_kant'
    np.testing.assert_allclose(config.plate.layup, [0, np.pi / 2, np.pi / 2, 0])
    minimal_model_dict['plate'].update(material='unobtainium', layup='twisted')
    with pytest.raises(ConfigValidationError) as excinfo:
        parse_config(minimal_model_dict)
    assert set(_paths(excinfo)) == {'plate.material', 'plate.layup'}


def test_orthotropic_material_requires_all_moduli(minimal_model_dict):
    minimal_model_dict['plate']['material'] = {'E_L': 25.0, 'E_T': 1.0, 'nu_LT': 0.25}
    with pytest.raises(ConfigValidationError) as excinfo:
        parse_config(minimal_model_dict)
    assert {'plate.material.G_LT', 'plate.material.G_TT', 'plate.material.alpha_L',
            'plate.material.alpha_T'} <= set(_paths(excinfo))


def test_cutout_shapes(minimal_model_dict):
    minimal_model_dict['cutouts'] = [
        {'type': 'ellipse', 'center': [0.5, 0.5], 'semi_major': 0.2, 'semi_minor': 0.1,
         'theta': 30},
        {'type': 'circle', 'center': [0.2, 0.2], 'radius': 0.05},
    ]
    config = parse_config(minimal_model_dict)
    assert config.cutouts[0].theta == pytest.approx(np.pi / 6)
    shape = config.shape()
    assert isinstance(shape, ShapeUnion) and len(shape.children) == 2


def test_clover_and_union(minimal_model_dict):
    minimal_model_dict['cutouts'] = [{'type': 'clover', 'radius': 0.15}]
    clover_shape = parse_config(minimal_model_dict).shape()
    assert len(clover_shape.children) == 3
    minimal_model_dict['cutouts'] = [{'type': 'union', 'children': [
        {'type': 'circle', 'center': [0.3, 0.5], 'radius': 0.1},
        {'type': 'circle', 'center': [0.7, 0.5], 'radius': 0.1},
    ]}]
    union = parse_config(minimal_model_dict).shape()
    assert isinstance(union, ShapeUnion)
    assert union.evaluate([0.3, 0.5]) < 0 and union.evaluate([0.5, 0.5]) > 0


def test_zero_radius_means_no_cutout(minimal_model_dict):
    minimal_model_dict['cutouts'] = [{'type': 'circle', 'center': [0.5, 0.5], 'radius': 0}]
    assert parse_config(minimal_model_dict).shape() is None


def test_bad_cutouts(minimal_model_dict):
    minimal_model_dict['cutouts'] = [{'type': 'square'},
                                     {'type': 'circle', 'center': [0.5], 'radius': 0.1},
                                     {'type': 'union', 'children': []}]
    with pytest.raises(ConfigValidationError) as excinfo:
        parse_config(minimal_model_dict)
    assert set(_paths(excinfo)) == {'cutouts[0].type', 'cutouts[1].center',
                                    'cutouts[2].children'}


def test_stiffener_parsing(minimal_model_dict):
    minimal_model_dict['stiffeners'] = [{
        'p_start': [0.0, 0.2], 'p_end': [1.0, 0.2], 'middle': [0.5, 0.15],
        'material': {'E': 1.0, 'nu': 0.3, 'alpha': 1.0}, 'gamma': 5, 'delta': 0.1,
    }]
    stiffener = parse_config(minimal_model_dict).stiffeners[0]
    assert stiffener.middle == (0.5, 0.15)
    assert stiffener.refinement == 3 and stiffener.delta_eps == 0.0
    # both ends slide toward the corner (0, 0) by default
    assert stiffener.start_direction == (0.0, -1.0) and stiffener.end_direction == (-1.0, 0.0)
    assert stiffener.gauss_points == 3
    minimal_model_dict['stiffeners'][0].update(material='composite_kant', delta_dist=0.3)
    with pytest.raises(ConfigValidationError) as excinfo:
        parse_config(minimal_model_dict)
    assert set(_paths(excinfo)) == {'stiffeners[0]', 'stiffeners[0].material'}


def test_boundary_forms(minimal_model_dict):
    minimal_model_dict['boundary'] = {'kind': 'custom', 'edges': {'xi0': ['w0', 'beta_y']}}
    config = parse_config(minimal_model_dict)
    assert config.boundary.kind == 'custom'
    assert config.boundary.edges == (('xi0', ('w0', 'beta_y')),)
    minimal_model_dict['boundary'] = {'kind': 'SSSS', 'edges': {'xi0': ['w0']}}
    with pytest.raises(ConfigValidationError) as excinfo:
        parse_config(minimal_model_dict)
    assert _paths(excinfo) == ['boundary.edges']


def test_sweep_validation(minimal_model_dict):
    minimal_model_dict['cutouts'] = [{'type': 'ellipse', 'center': [0.5, 0.5],
                                      'semi_major': 0.2, 'semi_minor': 0.1}]
    minimal_model_dict['sweep'] = {'axis': 'ellipse_semi_axes', 'values': [[0.2, 0.1], [0.3]]}
    with pytest.raises(ConfigValidationError) as excinfo:
        parse_config(minimal_model_dict)
    assert _paths(excinfo) == ['sweep.values[1]']
    minimal_model_dict['sweep'] = {'axis': 'temperature', 'values': [1, 2]}
    with pytest.raises(ConfigValidationError):
        parse_config(minimal_model_dict)
    minimal_model_dict['cutouts'] = []
    minimal_model_dict['sweep'] = {'axis': 'radius', 'values': [0, 0.1]}
    with pytest.raises(ConfigValidationError) as excinfo:
        parse_config(minimal_model_dict)
    assert _paths(excinfo) == ['sweep.target']
    minimal_model_dict['cutouts'] = [{'type': 'circle', 'center': [0.5, 0.5], 'radius': 0.1}]
    sweep = parse_config(minimal_model_dict).sweep
    assert sweep.axis == 'radius' and sweep.values == (0, 0.1)


def test_cutout_axes_must_fit_the_cutout_type(minimal_model_dict):
    minimal_model_dict['cutouts'] = [{'type': 'ellipse', 'center': [0.5, 0.5],
                                      'semi_major': 0.2, 'semi_minor': 0.1}]
    minimal_model_dict['sweep'] = {'axis': 'radius', 'values': [0.1, 0.2]}
    with pytest.raises(ConfigValidationError) as excinfo:
        parse_config(minimal_model_dict)
    assert _paths(excinfo) == ['sweep.axis']
    assert 'ellipse' in excinfo.value.problems[0][1]
    minimal_model_dict['sweep'] = {'axis': 'ellipse_theta', 'values': [0, 45]}
    config = parse_config(minimal_model_dict)
    # a direct sweep call bypasses the file check
    with pytest.raises(ConfigValidationError) as excinfo:
        apply_sweep_value(config, 'radius', 0.1)
    assert _paths(excinfo) == ['sweep.axis']
    circle = parse_config({**minimal_model_dict, 'sweep': None,
                           'cutouts': [{'type': 'circle', 'center': [0.5, 0.5], 'radius': 0.1}]})
    with pytest.raises(ConfigValidationError):
        apply_sweep_value(circle, 'ellipse_theta', 30)


def test_a_over_h_sweep_rescales_thickness(minimal_model_dict):
    minimal_model_dict['sweep'] = {'axis': 'a_over_h', 'values': [10, 100]}
    config = parse_config(minimal_model_dict)
    assert config.sweep.values == (10, 100)
    thin = apply_sweep_value(config, 'a_over_h', 100)
    assert thin.plate.thickness == pytest.approx(0.01)
    assert thin.plate.aspect_ratio == pytest.approx(100.0)
    assert config.plate.thickness == pytest.approx(0.02)
    minimal_model_dict['sweep'] = {'axis': 'a_over_h', 'values': [0]}
    with pytest.raises(ConfigValidationError) as excinfo:
        parse_config(minimal_model_dict)
    assert _paths(excinfo) == ['sweep.values[0]']


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigValidationError):
        load_config(tmp_path / 'missing.yaml')
    broken = tmp_path / 'broken.yaml'
    broken.write_text("plate: [unclosed\n")
    with pytest.raises(ConfigValidationError):
        load_config(broken)


def test_load_config_uses_file_stem(tmp_path, minimal_model_dict):
    del minimal_model_dict['name']
    path = tmp_path / 'my_plate.yaml'
    path.write_text(yaml.safe_dump(minimal_model_dict))
    assert load_config(path).name == 'my_plate'


def test_runtime_config_merges_over_defaults(tmp_path):
    path = tmp_path / 'runtime.yaml'
    path.write_text("solver:\n  dense_limit: 10\n")
    runtime = load_runtime_config(str(path))
    assert runtime['solver']['dense_limit'] == 10
    assert runtime['solver']['edge_samples'] == 8
    missing = load_runtime_config(str(tmp_path / 'nope.yaml'))
    assert missing == DEFAULT_RUNTIME_CONFIG


def test_runtime_defaults_feed_analysis(minimal_model_dict):
    runtime = {'solver': {'dense_limit': 12, 'triangle_points': 3, 'edge_samples': 4},
               'normalization': {'convention': 'alpha0', 'alpha0': 2.0}}
    analysis = parse_config(minimal_model_dict, runtime).analysis
    assert (analysis.dense_limit, analysis.triangle_points, analysis.edge_samples) == (12, 3, 4)
    assert analysis.normalization == 'alpha0' and analysis.alpha0 == 2.0


def test_overrides(minimal_model_dict):
    config = parse_config(minimal_model_dict)
    changed = with_overrides(config, refinement=4, n_modes=7, out='elsewhere')
    assert changed.plate.refinement == 4
    assert changed.analysis.n_modes == 7
    assert changed.outputs.directory == 'elsewhere'
    assert config.plate.refinement == 2
    with pytest.raises(ConfigValidationError):
        with_overrides(config, refinement=0)


def test_apply_sweep_value(minimal_model_dict):
    minimal_model_dict['cutouts'] = [{'type': 'ellipse', 'center': [0.5, 0.5],
                                      'semi_major': 0.2, 'semi_minor': 0.1}]
    config = parse_config(minimal_model_dict)
    assert apply_sweep_value(config, 'ellipse_theta', 45).cutouts[0].theta == pytest.approx(np.pi / 4)
    axes = apply_sweep_value(config, 'ellipse_semi_axes', (0.3, 0.2)).cutouts[0]
    assert (axes.semi_major, axes.semi_minor) == (0.3, 0.2)
    assert apply_sweep_value(config, 'plate_refinement', 3).plate.refinement == 3
    layup = apply_sweep_value(config, 'layup', 'antisymmetric_cross_ply').plate
    assert layup.layup_name == 'antisymmetric_cross_ply'
    with pytest.raises(LSBuckError):
        apply_sweep_value(config, 'gamma', 3.0)
    with pytest.raises(LSBuckError):
        apply_sweep_value(config, 'radius', 0.1, target=1)


def test_radius_sweep_builds_circles(minimal_model_dict):
    minimal_model_dict['cutouts'] = [{'type': 'circle', 'center': [0.5, 0.5], 'radius': 0.1}]
    config = parse_config(minimal_model_dict)
    assert apply_sweep_value(config, 'radius', 0.0).shape() is None
    shape = apply_sweep_value(config, 'radius', 0.2).shape()
    assert isinstance(shape, Circle) and shape.radius == pytest.approx(0.2)
