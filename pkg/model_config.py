"""
LSBuck - Model Configuration

Two configuration layers, both YAML:
- config.yaml (runtime defaults: logging, solver, outputs, normalization)
- versioned model files under cases/ (plate, cutouts, stiffeners, boundary,
  analysis, sweep, outputs)

Model files are validated exhaustively: every problem is collected with its
dotted field path and reported together in a ConfigValidationError.
Angles are degrees in files and radians in ModelConfig.
"""

import copy
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import yaml

from errors import ConfigValidationError, LSBuckError
from laminate import NAMED_LAYUPS, NAMED_MATERIALS
from levelset import Circle, Ellipse, LevelSetShape, ShapeUnion, clover
from solver_assembly import COMPONENT_INDEX, EDGE_NAMES, NORMALIZATION_FACTORS

logger = logging.getLogger('lsbuck.config')

SCHEMA_VERSION = 1

# axes that edit one cutout, and the cutout types each one applies to
CUTOUT_AXIS_TYPES = {
    'radius': ('circle', 'clover'),
    'ellipse_theta': ('ellipse',),
    'ellipse_semi_axes': ('ellipse',),
}

SWEEP_AXES = (
    'radius', 'ellipse_theta', 'ellipse_semi_axes', 'plate_refinement',
    'stiffener_refinement', 'gamma', 'delta_eps', 'layup', 'a_over_h',
)

DEFAULT_RUNTIME_CONFIG = {
    'logging': {
        'level': 'INFO',
        'file': 'logs/lsbuck.log',
        'format': '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    },
    'solver': {
        'dense_limit': 3000,
        'eigen_tol': 0.0,
        'triangle_points': 7,
        'edge_samples': 8,
        'auto_constrain_tol': 1e-10,
    },
    'outputs': {
        'directory': 'results',
        'mode_grid': 101,
        'formats': ['csv', 'vtk'],
    },
    'normalization': {
        'convention': 'identity',
        'alpha0': 1.0,
        'thin_plate_ratio': 100.0,
        'thin_plate_factor': 100.0,
    },
}


def _merge(base: Dict, override: Dict) -> Dict:
    out = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def load_runtime_config(config_path='config.yaml') -> Dict[str, Any]:
    """Load config.yaml (relative to the project root) over built-in defaults"""
    config_file = Path(config_path)
    if not config_file.is_absolute():
        config_file = Path(__file__).parent / config_path
    if not config_file.exists():
        logger.warning(f"Runtime config not found: {config_file}, using defaults")
        return copy.deepcopy(DEFAULT_RUNTIME_CONFIG)
    with open(config_file, 'r') as f:
        return _merge(DEFAULT_RUNTIME_CONFIG, yaml.safe_load(f) or {})


# ---------------------------------------------------------------------------
# Config dataclasses
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PlateConfig:
    length: float
    width: float
    thickness: float
    degree: int
    refinement: int
    material: Tuple[Tuple[str, float], ...]
    material_name: str
    layup: Tuple[float, ...]            # radians, bottom to top
    layup_name: str
    shear_correction: float = 5.0 / 6.0

    @property
    def material_dict(self) -> Dict[str, float]:
        return dict(self.material)

    @property
    def aspect_ratio(self) -> float:
        """a/h"""
        return self.length / self.thickness


@dataclass(frozen=True)
class CutoutConfig:
    type: str
    center: Tuple[float, float] = (0.5, 0.5)
    radius: float = 0.0
    semi_major: float = 0.0
    semi_minor: float = 0.0
    theta: float = 0.0                  # radians
    children: Tuple['CutoutConfig', ...] = ()

    def to_shape(self) -> Optional[LevelSetShape]:
        if self.type == 'circle':
            return Circle(tuple(self.center), self.radius) if self.radius > 0 else None
        if self.type == 'ellipse':
            return Ellipse(tuple(self.center), self.semi_major, self.semi_minor, self.theta)
        if self.type == 'clover':
            return clover(self.radius) if self.radius > 0 else None
        shapes = [s for s in (child.to_shape() for child in self.children) if s is not None]
        return ShapeUnion(tuple(shapes)) if shapes else None


@dataclass(frozen=True)
class StiffenerConfig:
    p_start: Tuple[float, float]
    p_end: Tuple[float, float]
    gamma: float
    delta: float
    material: Tuple[Tuple[str, float], ...]
    delta_eps: float = 0.0
    delta_dist: Optional[float] = None
    middle: Optional[Tuple[float, float]] = None
    start_direction: Tuple[float, float] = (0.0, -1.0)
    end_direction: Tuple[float, float] = (-1.0, 0.0)
    refinement: int = 3
    gauss_points: int = 3

    @property
    def material_dict(self) -> Dict[str, float]:
        return dict(self.material)


@dataclass(frozen=True)
class BoundaryConfig:
    kind: str = 'CCCC'
    edges: Tuple[Tuple[str, Tuple[str, ...]], ...] = ()


@dataclass(frozen=True)
class AnalysisConfig:
    n_modes: int = 5
    delta_T_ref: float = 1.0
    normalization: str = 'identity'
    alpha0: float = 1.0
    thin_plate_scale: bool = False
    triangle_points: int = 7
    edge_samples: int = 8
    dense_limit: int = 3000


@dataclass(frozen=True)
class SweepConfig:
    axis: str
    values: Tuple[Any, ...]
    target: int = 0


@dataclass(frozen=True)
class OutputConfig:
    directory: str = 'results'
    mode_grid: int = 101
    formats: Tuple[str, ...] = ('csv', 'vtk')


@dataclass(frozen=True)
class ModelConfig:
    name: str
    plate: PlateConfig
    cutouts: Tuple[CutoutConfig, ...] = ()
    stiffeners: Tuple[StiffenerConfig, ...] = ()
    boundary: BoundaryConfig = field(default_factory=BoundaryConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    sweep: Optional[SweepConfig] = None
    outputs: OutputConfig = field(default_factory=OutputConfig)
    version: int = SCHEMA_VERSION

    def shape(self) -> Optional[LevelSetShape]:
        """Union of all cutouts (None when the plate is solid)"""
        shapes = [s for s in (c.to_shape() for c in self.cutouts) if s is not None]
        if not shapes:
            return None
        return shapes[0] if len(shapes) == 1 else ShapeUnion(tuple(shapes))


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

class _Validator:
    """Collects (path, message) problems instead of failing fast"""

    def __init__(self):
        self.problems: List[Tuple[str, str]] = []

    def error(self, path: str, message: str):
        self.problems.append((path, message))

    def mapping(self, data, path: str, allowed: Sequence[str],
                required: Sequence[str] = ()) -> Dict:
        if not isinstance(data, dict):
            self.error(path, f"expected a mapping, got {type(data).__name__}")
            return {}
        for key in data:
            if key not in allowed:
                self.error(f"{path}.{key}" if path else str(key), "unknown key")
        for key in required:
            if key not in data:
                self.error(f"{path}.{key}" if path else key, "required key missing")
        return data

    def number(self, data: Dict, key: str, path: str, default=None, minimum=None,
               exclusive_minimum=None, maximum=None, integer=False):
        full = f"{path}.{key}"
        if key not in data:
            return default
        value = data[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.error(full, f"expected a number, got {value!r}")
            return default
        if integer and int(value) != value:
            self.error(full, f"expected an integer, got {value!r}")
            return default
        if minimum is not None and value < minimum:
            self.error(full, f"must be >= {minimum}, got {value}")
        if exclusive_minimum is not None and value <= exclusive_minimum:
            self.error(full, f"must be > {exclusive_minimum}, got {value}")
        if maximum is not None and value > maximum:
            self.error(full, f"must be <= {maximum}, got {value}")
        return int(value) if integer else float(value)

    def point(self, data: Dict, key: str, path: str, default=None):
        full = f"{path}.{key}"
        if key not in data:
            return default
        value = data[key]
        if (not isinstance(value, (list, tuple)) or len(value) != 2
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
            self.error(full, f"expected a pair of numbers, got {value!r}")
            return default
        return (float(value[0]), float(value[1]))


def _material(v: _Validator, value, path: str):
    if isinstance(value, str):
        if value not in NAMED_MATERIALS:
            v.error(path, f"unknown material '{value}' (choose from {sorted(NAMED_MATERIALS)})")
            return (), value
        return tuple(sorted(NAMED_MATERIALS[value].items())), value
    isotropic = ('E', 'nu', 'alpha')
    orthotropic = ('E_L', 'E_T', 'G_LT', 'G_TT', 'nu_LT', 'nu_TT', 'alpha_L', 'alpha_T')
    data = v.mapping(value, path, isotropic + orthotropic)
    if not data:
        return (), 'custom'
    required = isotropic if 'E' in data else orthotropic[:5] + orthotropic[6:]
    out = {}
    for key in required:
        if key not in data:
            v.error(f"{path}.{key}", "required key missing")
    for key in data:
        if key in ('nu', 'nu_LT', 'nu_TT'):
            out[key] = v.number(data, key, path, minimum=0.0, maximum=0.4999999)
        elif key.startswith('alpha'):
            out[key] = v.number(data, key, path)
        else:
            out[key] = v.number(data, key, path, exclusive_minimum=0.0)
    return tuple(sorted((k, x) for k, x in out.items() if x is not None)), 'custom'


def _layup(v: _Validator, value, path: str):
    if isinstance(value, str):
        if value not in NAMED_LAYUPS:
            v.error(path, f"unknown layup '{value}' (choose from {sorted(NAMED_LAYUPS)})")
            return (), value
        return tuple(np.deg2rad(NAMED_LAYUPS[value]).tolist()), value
    if (not isinstance(value, (list, tuple)) or len(value) == 0
            or not all(isinstance(a, (int, float)) and not isinstance(a, bool) for a in value)):
        v.error(path, f"expected a layup name or a non-empty list of angles, got {value!r}")
        return (), 'custom'
    return tuple(np.deg2rad([float(a) for a in value]).tolist()), 'custom'


def _plate(v: _Validator, data, path='plate') -> Optional[PlateConfig]:
    data = v.mapping(data, path, ('length', 'width', 'thickness', 'a_over_h', 'degree',
                                  'refinement', 'material', 'layup', 'shear_correction'),
                     required=('material',))
    length = v.number(data, 'length', path, default=1.0, exclusive_minimum=0.0)
    width = v.number(data, 'width', path, default=1.0, exclusive_minimum=0.0)
    if 'thickness' in data and 'a_over_h' in data:
        v.error(path, "give either 'thickness' or 'a_over_h', not both")
    thickness = v.number(data, 'thickness', path, exclusive_minimum=0.0)
    a_over_h = v.number(data, 'a_over_h', path, exclusive_minimum=0.0)
    if thickness is None:
        if a_over_h is None:
            v.error(f"{path}.thickness", "required key missing (or give a_over_h)")
        elif length is not None:
            thickness = length / a_over_h
    degree = v.number(data, 'degree', path, default=2, minimum=1, integer=True)
    refinement = v.number(data, 'refinement', path, default=4, minimum=1, integer=True)
    shear = v.number(data, 'shear_correction', path, default=5.0 / 6.0, exclusive_minimum=0.0)
    material, material_name = _material(v, data.get('material', {}), f"{path}.material")
    layup, layup_name = ((0.0,), 'single') if 'layup' not in data else _layup(
        v, data['layup'], f"{path}.layup")
    if None in (length, width, thickness, degree, refinement):
        return None
    return PlateConfig(length=length, width=width, thickness=thickness, degree=degree,
                       refinement=refinement, material=material, material_name=material_name,
                       layup=layup, layup_name=layup_name, shear_correction=shear)


def _cutout(v: _Validator, data, path: str) -> Optional[CutoutConfig]:
    if not isinstance(data, dict):
        v.error(path, "expected a mapping")
        return None
    kind = data.get('type')
    if kind == 'circle':
        v.mapping(data, path, ('type', 'center', 'radius'), required=('center', 'radius'))
        return CutoutConfig('circle', center=v.point(data, 'center', path, (0.5, 0.5)),
                            radius=v.number(data, 'radius', path, default=0.0, minimum=0.0))
    if kind == 'ellipse':
        v.mapping(data, path, ('type', 'center', 'semi_major', 'semi_minor', 'theta'),
                  required=('center', 'semi_major', 'semi_minor'))
        theta = v.number(data, 'theta', path, default=0.0)
        return CutoutConfig('ellipse', center=v.point(data, 'center', path, (0.5, 0.5)),
                            semi_major=v.number(data, 'semi_major', path, default=1.0,
                                                exclusive_minimum=0.0),
                            semi_minor=v.number(data, 'semi_minor', path, default=1.0,
                                                exclusive_minimum=0.0),
                            theta=float(np.deg2rad(theta)))
    if kind == 'clover':
        v.mapping(data, path, ('type', 'radius'))
        return CutoutConfig('clover', radius=v.number(data, 'radius', path, default=0.15,
                                                      exclusive_minimum=0.0))
    if kind == 'union':
        v.mapping(data, path, ('type', 'children'), required=('children',))
        children = data.get('children', [])
        if not isinstance(children, list) or not children:
            v.error(f"{path}.children", "expected a non-empty list of shapes")
            return None
        parsed = [_cutout(v, c, f"{path}.children[{i}]") for i, c in enumerate(children)]
        return CutoutConfig('union', children=tuple(c for c in parsed if c is not None))
    v.error(f"{path}.type", f"unknown cutout type {kind!r} (circle, ellipse, clover, union)")
    return None


def _stiffener(v: _Validator, data, path: str) -> Optional[StiffenerConfig]:
    data = v.mapping(data, path, ('p_start', 'p_end', 'gamma', 'delta', 'material',
                                  'delta_eps', 'delta_dist', 'middle', 'start_direction',
                                  'end_direction', 'refinement', 'gauss_points'),
                     required=('p_start', 'p_end', 'material'))
    if 'middle' in data and 'delta_dist' in data:
        v.error(path, "give either 'middle' or 'delta_dist', not both")
    material, _ = _material(v, data.get('material', {}), f"{path}.material")
    if material and 'E' not in dict(material):
        v.error(f"{path}.material", "stiffener material must be isotropic (E, nu, alpha)")
    p_start = v.point(data, 'p_start', path)
    p_end = v.point(data, 'p_end', path)
    cfg = dict(
        gamma=v.number(data, 'gamma', path, default=5.0, exclusive_minimum=0.0),
        delta=v.number(data, 'delta', path, default=0.1, exclusive_minimum=0.0),
        delta_eps=v.number(data, 'delta_eps', path, default=0.0),
        delta_dist=v.number(data, 'delta_dist', path),
        middle=v.point(data, 'middle', path),
        start_direction=v.point(data, 'start_direction', path, (0.0, -1.0)),
        end_direction=v.point(data, 'end_direction', path, (-1.0, 0.0)),
        refinement=v.number(data, 'refinement', path, default=3, minimum=0, integer=True),
        gauss_points=v.number(data, 'gauss_points', path, default=3, minimum=1, integer=True),
    )
    if p_start is None or p_end is None or None in (cfg['gamma'], cfg['delta']):
        return None
    return StiffenerConfig(p_start=p_start, p_end=p_end, material=material, **cfg)


def _boundary(v: _Validator, data, path='boundary') -> BoundaryConfig:
    if isinstance(data, str):
        data = {'kind': data}
    data = v.mapping(data, path, ('kind', 'edges'))
    kind = str(data.get('kind', 'CCCC'))
    if kind.upper() not in ('CCCC', 'SSSS', 'CUSTOM'):
        v.error(f"{path}.kind", f"unknown boundary kind '{kind}' (CCCC, SSSS, custom)")
    edges = []
    raw_edges = data.get('edges', {}) or {}
    if kind.upper() == 'CUSTOM':
        raw_edges = v.mapping(raw_edges, f"{path}.edges", EDGE_NAMES)
        for edge, comps in raw_edges.items():
            if not isinstance(comps, list):
                v.error(f"{path}.edges.{edge}", "expected a list of components")
                continue
            for comp in comps:
                if comp not in COMPONENT_INDEX:
                    v.error(f"{path}.edges.{edge}", f"unknown component '{comp}'")
            if edge in EDGE_NAMES:
                edges.append((edge, tuple(c for c in comps if c in COMPONENT_INDEX)))
    elif raw_edges:
        v.error(f"{path}.edges", "edges are only allowed with kind 'custom'")
    return BoundaryConfig(kind=kind.upper() if kind.upper() != 'CUSTOM' else 'custom',
                          edges=tuple(edges))


def _analysis(v: _Validator, data, runtime: Dict, path='analysis') -> AnalysisConfig:
    data = v.mapping(data, path, ('n_modes', 'delta_T_ref', 'normalization', 'alpha0',
                                  'thin_plate_scale', 'triangle_points', 'edge_samples',
                                  'dense_limit'))
    solver = runtime.get('solver', {})
    norm = runtime.get('normalization', {})
    normalization = data.get('normalization', norm.get('convention', 'identity'))
    if normalization not in NORMALIZATION_FACTORS:
        v.error(f"{path}.normalization",
                f"unknown convention '{normalization}' (choose from {sorted(NORMALIZATION_FACTORS)})")
    triangle_points = v.number(data, 'triangle_points', path,
                               default=solver.get('triangle_points', 7), integer=True)
    if triangle_points not in (3, 7):
        v.error(f"{path}.triangle_points", f"must be 3 or 7, got {triangle_points}")
    thin = data.get('thin_plate_scale', False)
    if not isinstance(thin, bool):
        v.error(f"{path}.thin_plate_scale", f"expected true/false, got {thin!r}")
        thin = False
    return AnalysisConfig(
        n_modes=v.number(data, 'n_modes', path, default=5, minimum=1, integer=True),
        delta_T_ref=v.number(data, 'delta_T_ref', path, default=1.0, exclusive_minimum=0.0),
        normalization=normalization,
        alpha0=v.number(data, 'alpha0', path, default=norm.get('alpha0', 1.0),
                        exclusive_minimum=0.0),
        thin_plate_scale=thin,
        triangle_points=triangle_points,
        edge_samples=v.number(data, 'edge_samples', path,
                              default=solver.get('edge_samples', 8), minimum=0, integer=True),
        dense_limit=v.number(data, 'dense_limit', path,
                             default=solver.get('dense_limit', 3000), minimum=0, integer=True),
    )


def _sweep(v: _Validator, data, path='sweep') -> Optional[SweepConfig]:
    data = v.mapping(data, path, ('axis', 'values', 'target'), required=('axis', 'values'))
    axis = data.get('axis')
    if axis not in SWEEP_AXES:
        v.error(f"{path}.axis", f"unknown sweep axis {axis!r} (choose from {list(SWEEP_AXES)})")
    values = data.get('values', [])
    if not isinstance(values, list):
        v.error(f"{path}.values", "expected a list")
        values = []
    for i, value in enumerate(values):
        item = f"{path}.values[{i}]"
        if axis == 'ellipse_semi_axes':
            if not (isinstance(value, list) and len(value) == 2
                    and all(isinstance(x, (int, float)) and x > 0 for x in value)):
                v.error(item, f"expected a pair of positive semi-axes, got {value!r}")
        elif axis == 'layup':
            _layup(v, value, item)
        elif isinstance(value, bool) or not isinstance(value, (int, float)):
            v.error(item, f"expected a number, got {value!r}")
        elif axis in ('plate_refinement', 'stiffener_refinement') and (
                int(value) != value or value < (1 if axis == 'plate_refinement' else 0)):
            v.error(item, f"expected a valid refinement level, got {value!r}")
        elif axis == 'radius' and value < 0:
            v.error(item, f"radius must be >= 0, got {value}")
        elif axis == 'a_over_h' and value <= 0:
            v.error(item, f"a/h must be > 0, got {value}")
    target = v.number(data, 'target', path, default=0, minimum=0, integer=True)
    if axis not in SWEEP_AXES:
        return None
    return SweepConfig(axis=axis, values=tuple(
        tuple(x) if isinstance(x, list) else x for x in values), target=target)


def _check_cutout_target(v: _Validator, sweep: SweepConfig, cutouts, path='sweep') -> None:
    if sweep.target >= len(cutouts):
        v.error(f"{path}.target", f"sweep axis {sweep.axis!r} targets cutout {sweep.target}, "
                                  f"but only {len(cutouts)} cutout(s) are defined")
        return
    cutout = cutouts[sweep.target]
    allowed = CUTOUT_AXIS_TYPES[sweep.axis]
    if cutout is not None and cutout.type not in allowed:
        v.error(f"{path}.axis", f"axis {sweep.axis!r} applies to {' or '.join(allowed)} cutouts, "
                                f"but cutout {sweep.target} is a {cutout.type}")


def _outputs(v: _Validator, data, runtime: Dict, path='outputs') -> OutputConfig:
    data = v.mapping(data, path, ('directory', 'mode_grid', 'formats'))
    defaults = runtime.get('outputs', {})
    formats = data.get('formats', defaults.get('formats', ['csv', 'vtk']))
    if not isinstance(formats, list) or any(f not in ('csv', 'vtk') for f in formats):
        v.error(f"{path}.formats", f"expected a list drawn from ['csv', 'vtk'], got {formats!r}")
        formats = ['csv']
    return OutputConfig(
        directory=str(data.get('directory', defaults.get('directory', 'results'))),
        mode_grid=v.number(data, 'mode_grid', path, default=defaults.get('mode_grid', 101),
                           minimum=2, integer=True),
        formats=tuple(formats),
    )


def parse_config(raw: Dict, runtime: Optional[Dict] = None, name: str = 'model') -> ModelConfig:
    """
    Validate a model description already loaded into Python objects.

    Raises:
        ConfigValidationError: with every problem found
    """
    runtime = runtime or DEFAULT_RUNTIME_CONFIG
    v = _Validator()
    raw = v.mapping(raw, '', ('version', 'name', 'plate', 'cutouts', 'stiffeners',
                              'boundary', 'analysis', 'sweep', 'outputs'),
                    required=('version', 'plate'))
    if 'version' in raw and raw['version'] != SCHEMA_VERSION:
        v.error('version', f"unsupported schema version {raw['version']!r} (expected {SCHEMA_VERSION})")

    plate = _plate(v, raw.get('plate', {}))
    cutouts = raw.get('cutouts', []) or []
    if not isinstance(cutouts, list):
        v.error('cutouts', "expected a list")
        cutouts = []
    parsed_cutouts = [_cutout(v, c, f"cutouts[{i}]") for i, c in enumerate(cutouts)]
    stiffeners = raw.get('stiffeners', []) or []
    if not isinstance(stiffeners, list):
        v.error('stiffeners', "expected a list")
        stiffeners = []
    parsed_stiffeners = [_stiffener(v, s, f"stiffeners[{i}]") for i, s in enumerate(stiffeners)]
    boundary = _boundary(v, raw.get('boundary', 'CCCC'))
    analysis = _analysis(v, raw.get('analysis', {}) or {}, runtime)
    sweep = _sweep(v, raw['sweep']) if raw.get('sweep') is not None else None
    if sweep is not None and sweep.axis in CUTOUT_AXIS_TYPES:
        _check_cutout_target(v, sweep, parsed_cutouts)
    outputs = _outputs(v, raw.get('outputs', {}) or {}, runtime)

    if v.problems:
        raise ConfigValidationError(v.problems)
    return ModelConfig(
        name=str(raw.get('name', name)),
        plate=plate,
        cutouts=tuple(parsed_cutouts),
        stiffeners=tuple(parsed_stiffeners),
        boundary=boundary,
        analysis=analysis,
        sweep=sweep,
        outputs=outputs,
        version=SCHEMA_VERSION,
    )


def load_config(path, runtime: Optional[Dict] = None) -> ModelConfig:
    """
    Read and validate a model file (YAML; JSON is accepted as YAML).

    Raises:
        ConfigValidationError: unreadable file or schema violations
    """
    path = Path(path)
    if not path.exists():
        raise ConfigValidationError([(str(path), "file not found")])
    try:
        with open(path, 'r', encoding='utf-8') as f:
            raw = yaml.safe_load(f)
    except yaml.YAMLError as exc:
        raise ConfigValidationError([(str(path), f"not valid YAML/JSON: {exc}")])
    config = parse_config(raw if raw is not None else {}, runtime, name=path.stem)
    logger.info(f"Loaded model '{config.name}' from {path}")
    return config


# ---------------------------------------------------------------------------
# Overrides and sweep points
# ---------------------------------------------------------------------------

def with_overrides(config: ModelConfig, refinement: Optional[int] = None,
                   n_modes: Optional[int] = None, out: Optional[str] = None) -> ModelConfig:
    """Apply CLI overrides to a validated config"""
    problems = []
    if refinement is not None and refinement < 1:
        problems.append(('plate.refinement', f"must be >= 1, got {refinement}"))
    if n_modes is not None and n_modes < 1:
        problems.append(('analysis.n_modes', f"must be >= 1, got {n_modes}"))
    if problems:
        raise ConfigValidationError(problems)
    if refinement is not None:
        config = replace(config, plate=replace(config.plate, refinement=int(refinement)))
    if n_modes is not None:
        config = replace(config, analysis=replace(config.analysis, n_modes=int(n_modes)))
    if out is not None:
        config = replace(config, outputs=replace(config.outputs, directory=str(out)))
    return config


def _replace_cutout(config: ModelConfig, index: int, **changes) -> ModelConfig:
    if index >= len(config.cutouts):
        raise LSBuckError(f"Sweep target cutout {index} does not exist")
    cutouts = list(config.cutouts)
    cutouts[index] = replace(cutouts[index], **changes)
    return replace(config, cutouts=tuple(cutouts))


def _replace_stiffener(config: ModelConfig, index: int, **changes) -> ModelConfig:
    if index >= len(config.stiffeners):
        raise LSBuckError(f"Sweep target stiffener {index} does not exist")
    stiffeners = list(config.stiffeners)
    stiffeners[index] = replace(stiffeners[index], **changes)
    return replace(config, stiffeners=tuple(stiffeners))


def apply_sweep_value(config: ModelConfig, axis: str, value, target: int = 0) -> ModelConfig:
    """
    Config for one sweep point (angles in degrees, as in the file).

    Raises:
        ConfigValidationError: the axis does not fit the targeted cutout
    """
    if axis in CUTOUT_AXIS_TYPES and target < len(config.cutouts):
        kind = config.cutouts[target].type
        if kind not in CUTOUT_AXIS_TYPES[axis]:
            raise ConfigValidationError([(
                'sweep.axis',
                f"axis {axis!r} applies to {' or '.join(CUTOUT_AXIS_TYPES[axis])} cutouts, "
                f"but cutout {target} is a {kind}",
            )])
    if axis == 'radius':
        return _replace_cutout(config, target, radius=float(value))
    if axis == 'ellipse_theta':
        return _replace_cutout(config, target, theta=float(np.deg2rad(value)))
    if axis == 'ellipse_semi_axes':
        a, b = value
        return _replace_cutout(config, target, semi_major=float(a), semi_minor=float(b))
    if axis == 'plate_refinement':
        return replace(config, plate=replace(config.plate, refinement=int(value)))
    if axis == 'stiffener_refinement':
        return _replace_stiffener(config, target, refinement=int(value))
    if axis == 'gamma':
        return _replace_stiffener(config, target, gamma=float(value))
    if axis == 'delta_eps':
        return _replace_stiffener(config, target, delta_eps=float(value))
    if axis == 'layup':
        v = _Validator()
        layup, name = _layup(v, list(value) if isinstance(value, tuple) else value, 'sweep.values')
        if v.problems:
            raise ConfigValidationError(v.problems)
        return replace(config, plate=replace(config.plate, layup=layup, layup_name=name))
    if axis == 'a_over_h':
        return replace(config, plate=replace(config.plate,
                                             thickness=config.plate.length / float(value)))
    raise ConfigValidationError([('sweep.axis', f"unknown sweep axis {axis!r}")])
