"""
LSBuck - Analysis Pipeline

Turns a validated ModelConfig into buckling results:
- Plate patch (h-refined rectangle), laminate, cutout shape, stiffeners
- Thermal prestress + eigen solve via solver_assembly.run_buckling
- ResultsTable rows with normalized critical temperature, DOF accounting
  and per-phase wall times
- Parametric sweeps (per-point failures recorded, sweep continues)
- Mesh / enrichment report
"""

import concurrent.futures
import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from errors import LSBuckError
from geometry_nurbs import NurbsPatch, h_refine, rectangle_patch
from laminate import ConstitutiveSet, LaminateStack, Ply, constitutive_set
from levelset import ENRICHED, classify_elements
from model_config import (
    DEFAULT_RUNTIME_CONFIG,
    ModelConfig,
    PlateConfig,
    apply_sweep_value,
)
from solver_assembly import (
    NORMALIZATION_FACTORS,
    BoundaryConditionSet,
    BucklingRun,
    PlateDiscretization,
    discretize,
    normalized_critical_temperature,
    run_buckling,
)
from stiffener import (
    PlateFieldSampler,
    StiffenerMatrices,
    parabola_path,
    section_from_ratios,
    stiffener_matrices,
)

logger = logging.getLogger('lsbuck.analysis')

RESULT_COLUMNS = (
    'case', 'axis', 'value', 'status', 'lambda_star', 'delta_T_cr', 'n_modes',
    'n_dof', 'extra_dof', 'n_constrained', 'n_elements', 'n_enriched_elements',
    'solver', 'time_assembly', 'time_static', 'time_eigen', 'error',
)
EIGENVALUE_COLUMNS = ('case', 'mode', 'lambda', 'lambda_star')
MESH_COLUMNS = ('element', 'tag', 'xi_min', 'xi_max', 'eta_min', 'eta_max')


# ---------------------------------------------------------------------------
# Results table
# ---------------------------------------------------------------------------

@dataclass
class ResultsTable:
    """Rows in RESULT_COLUMNS order; row order is insertion (axis) order"""

    rows: List[Dict[str, Any]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def append(self, row: Dict[str, Any]):
        self.rows.append({col: row.get(col, '') for col in RESULT_COLUMNS})

    def column(self, name: str) -> List[Any]:
        return [row[name] for row in self.rows]

    @property
    def lambda_star(self) -> np.ndarray:
        return np.array([np.nan if r['lambda_star'] == '' else float(r['lambda_star'])
                         for r in self.rows])

    def write_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', newline='', encoding='utf-8') as f:
            writer = csv.DictWriter(f, fieldnames=RESULT_COLUMNS)
            writer.writeheader()
            for row in self.rows:
                writer.writerow({k: _format(v) for k, v in row.items()})
        logger.info(f"Wrote {len(self.rows)} result row(s) to {path}")
        return path

    @classmethod
    def read_csv(cls, path) -> 'ResultsTable':
        with open(path, 'r', newline='', encoding='utf-8') as f:
            return cls([dict(row) for row in csv.DictReader(f)])


def _format(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return ' '.join(str(v) for v in value)
    return str(value)


# ---------------------------------------------------------------------------
# Model building
# ---------------------------------------------------------------------------

def build_patch(plate: PlateConfig) -> NurbsPatch:
    """Rectangle of the plate's degree with 2^refinement elements per direction"""
    patch = rectangle_patch(plate.length, plate.width, plate.degree)
    return h_refine(patch, plate.refinement)


def build_constitutive(plate: PlateConfig) -> ConstitutiveSet:
    t_ply = plate.thickness / len(plate.layup)
    stack = LaminateStack(tuple(
        Ply.from_material(plate.material_dict, theta, t_ply) for theta in plate.layup
    ))
    return constitutive_set(stack, plate.shear_correction)


def build_stiffeners(config: ModelConfig,
                     discretization: PlateDiscretization) -> List[StiffenerMatrices]:
    """Size each stiffener from (gamma, delta) and couple it to the plate"""
    if not config.stiffeners:
        return []
    plate = config.plate
    D11 = float(discretization.constitutive.D[0, 0])
    sampler = PlateFieldSampler(discretization.patch, discretization.dofmap,
                                discretization.classification, discretization.shape)
    matrices = []
    for i, stiff in enumerate(config.stiffeners):
        section = section_from_ratios(stiff.gamma, stiff.delta, plate.width,
                                      plate.thickness, D11, stiff.material_dict)
        path = parabola_path(stiff.p_start, stiff.p_end, delta_eps=stiff.delta_eps,
                             delta_dist=stiff.delta_dist, middle=stiff.middle,
                             start_direction=stiff.start_direction,
                             end_direction=stiff.end_direction)
        logger.debug(f"Stiffener {i}: control points {path.control_points.tolist()}")
        matrices.append(stiffener_matrices(path, section, sampler,
                                           refinement=stiff.refinement,
                                           gauss_points=stiff.gauss_points))
    return matrices


def thin_plate_factor(config: ModelConfig, runtime: Optional[Dict] = None) -> float:
    """100 for thin plates (a/h >= 100) when thin_plate_scale is on, else 1"""
    if not config.analysis.thin_plate_scale:
        return 1.0
    norm = (runtime or DEFAULT_RUNTIME_CONFIG).get('normalization', {})
    ratio = norm.get('thin_plate_ratio', 100.0)
    factor = norm.get('thin_plate_factor', 100.0)
    return float(factor) if config.plate.aspect_ratio >= ratio - 1e-9 else 1.0


def boundary_conditions(config: ModelConfig) -> BoundaryConditionSet:
    edges = {edge: list(comps) for edge, comps in config.boundary.edges}
    return BoundaryConditionSet.from_kind(config.boundary.kind, edges or None)


# ---------------------------------------------------------------------------
# Single analysis
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AnalysisResult:
    """One solved model"""

    config: ModelConfig
    discretization: PlateDiscretization
    run: BucklingRun
    lambda_star: np.ndarray      # normalized eigenvalues, ascending
    row: Dict[str, Any]

    @property
    def critical(self) -> float:
        return float(self.lambda_star[0]) if len(self.lambda_star) else float('nan')


def run_analysis(config: ModelConfig, runtime: Optional[Dict] = None) -> AnalysisResult:
    """
    Build and solve one model.

    Raises:
        LSBuckError: any pipeline failure (logged with the case name)
    """
    runtime = runtime or DEFAULT_RUNTIME_CONFIG
    solver_cfg = runtime.get('solver', {})
    analysis = config.analysis
    try:
        patch = build_patch(config.plate)
        constitutive = build_constitutive(config.plate)
        discretization = discretize(patch, constitutive, config.shape(),
                                    edge_samples=analysis.edge_samples,
                                    triangle_points=analysis.triangle_points)
        stiffeners = build_stiffeners(config, discretization)
        run = run_buckling(discretization, boundary_conditions(config), stiffeners,
                           n_modes=analysis.n_modes, delta_T_ref=analysis.delta_T_ref,
                           dense_limit=analysis.dense_limit,
                           auto_constrain_tol=solver_cfg.get('auto_constrain_tol', 1e-10),
                           eigen_tol=solver_cfg.get('eigen_tol', 0.0))
    except LSBuckError as exc:
        logger.error(f"Case '{config.name}' failed: {exc}")
        raise

    solution = run.solution
    factor = thin_plate_factor(config, runtime)
    lambda_star = solution.eigenvalues * solution.delta_T_ref * normalization_scale(config, factor)

    counts = discretization.classification.counts()
    row = {
        'case': config.name,
        'status': 'ok' if solution.buckled else 'no_buckling',
        'lambda_star': (normalized_critical_temperature(solution, analysis.normalization,
                                                        analysis.alpha0, factor)
                        if solution.buckled else ''),
        'delta_T_cr': solution.critical_temperature if solution.buckled else '',
        'n_modes': solution.n_modes,
        'n_dof': discretization.dofmap.n_dof,
        'extra_dof': discretization.dofmap.extra_dof,
        'n_constrained': len(run.system.constrained),
        'n_elements': patch.n_elements,
        'n_enriched_elements': counts[ENRICHED],
        'solver': solution.solver,
        'time_assembly': run.timings['assembly'],
        'time_static': run.timings['static'],
        'time_eigen': run.timings['eigen'],
    }
    logger.info(
        f"Case '{config.name}': lambda* = {row['lambda_star']} "
        f"(nDoF={row['n_dof']}, extra={row['extra_dof']})"
    )
    return AnalysisResult(config, discretization, run, lambda_star, row)


def normalization_scale(config: ModelConfig, thin_factor: float = 1.0) -> float:
    """Factor turning a critical temperature rise into the reported lambda*"""
    analysis = config.analysis
    return NORMALIZATION_FACTORS[analysis.normalization](analysis.alpha0) * thin_factor


def results_table(result: AnalysisResult) -> ResultsTable:
    table = ResultsTable()
    table.append(result.row)
    return table


def write_eigenvalues(result: AnalysisResult, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    solution = result.run.solution
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.DictWriter(f, fieldnames=EIGENVALUE_COLUMNS)
        writer.writeheader()
        for k, (lam, lam_star) in enumerate(zip(solution.eigenvalues, result.lambda_star)):
            writer.writerow({'case': result.config.name, 'mode': k + 1,
                             'lambda': repr(float(lam)), 'lambda_star': repr(float(lam_star))})
    return path


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

def _sweep_point(config: ModelConfig, axis: str, value, target: int,
                 runtime: Optional[Dict]) -> Dict[str, Any]:
    label = value if not isinstance(value, (tuple, list)) else ' '.join(map(str, value))
    row = {'case': config.name, 'axis': axis, 'value': label}
    try:
        point = apply_sweep_value(config, axis, value, target)
        result = run_analysis(point, runtime)
        row.update({k: v for k, v in result.row.items() if k != 'case'})
    except LSBuckError as exc:
        logger.warning(f"Sweep point {axis}={label} failed: {exc}")
        row.update({'status': 'failed', 'error': str(exc)})
    return row


def sweep(config: ModelConfig, axis: Optional[str] = None, values: Optional[Sequence] = None,
          runtime: Optional[Dict] = None, target: Optional[int] = None,
          workers: int = 1) -> ResultsTable:
    """
    One row per value of the sweep axis, in the order given.

    Axis and values default to the config's sweep block. Failing points get
    status 'failed' and their error message; the sweep continues.
    """
    if axis is None:
        if config.sweep is None:
            raise LSBuckError(f"Case '{config.name}' has no sweep block and no axis was given")
        axis = config.sweep.axis
        values = config.sweep.values if values is None else values
        target = config.sweep.target if target is None else target
    values = list(values or [])
    target = target or 0
    table = ResultsTable()
    if not values:
        logger.info(f"Sweep over '{axis}' has no values")
        return table

    logger.info(f"Sweep '{config.name}' over {axis}: {len(values)} point(s)")
    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
            futures = [executor.submit(_sweep_point, config, axis, v, target, runtime)
                       for v in values]
            rows = [f.result() for f in futures]
    else:
        rows = [_sweep_point(config, axis, v, target, runtime) for v in values]
    for row in rows:
        table.append(row)
    return table


# ---------------------------------------------------------------------------
# Mesh report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeshReport:
    counts: Dict[str, int]
    enriched_elements: List[int]
    rows: List[Dict[str, Any]]
    n_enriched_control_points: int

    def write_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', newline='', encoding='utf-8') as f:
            writer = csv.DictWriter(f, fieldnames=MESH_COLUMNS)
            writer.writeheader()
            writer.writerows({k: _format(v) for k, v in row.items()} for row in self.rows)
        return path


def mesh_report(config_or_discretization) -> MeshReport:
    """Element tags and enriched element ids of a model (classification only)"""
    if isinstance(config_or_discretization, PlateDiscretization):
        patch = config_or_discretization.patch
        classification = config_or_discretization.classification
    else:
        config = config_or_discretization
        patch = build_patch(config.plate)
        classification = classify_elements(patch, config.shape(), config.analysis.edge_samples)
    rows = [{
        'element': el.index,
        'tag': classification.tag(el.index),
        'xi_min': el.xi_bounds[0], 'xi_max': el.xi_bounds[1],
        'eta_min': el.eta_bounds[0], 'eta_max': el.eta_bounds[1],
    } for el in patch.elements()]
    return MeshReport(counts=classification.counts(),
                      enriched_elements=classification.elements_with(ENRICHED),
                      rows=rows,
                      n_enriched_control_points=classification.n_enriched_control_points)
