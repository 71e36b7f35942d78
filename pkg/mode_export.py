"""
LSBuck - Mode Shape Export

Samples the transverse displacement w of buckling modes on a uniform
parametric grid, masks points inside cutouts (phi < 0) and writes
CSV grids or VTK legacy STRUCTURED_POINTS files for external plotting.
"""

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from geometry_nurbs import locate_element, surface_basis
from levelset import ENRICHED, enrichment_field
from plate_fsdt import N_FIELDS
from solver_assembly import COMPONENT_INDEX, PlateDiscretization

logger = logging.getLogger('lsbuck.export')

EXPORT_FORMATS = ('csv', 'vtk')
W = COMPONENT_INDEX['w0']


@dataclass(frozen=True, eq=False)
class ModeField:
    """w of each mode on an (n_eta, n_xi) grid; masked points hold NaN"""

    xi: np.ndarray          # (n_xi,)
    eta: np.ndarray         # (n_eta,)
    x: np.ndarray           # (n_eta, n_xi)
    y: np.ndarray           # (n_eta, n_xi)
    w: np.ndarray           # (n_modes, n_eta, n_xi)
    mask: np.ndarray        # (n_eta, n_xi), True inside a cutout

    @property
    def n_modes(self) -> int:
        return self.w.shape[0]

    @property
    def masked_fraction(self) -> float:
        return float(self.mask.mean())


def sample_modes(discretization: PlateDiscretization, modes: np.ndarray,
                 grid_resolution: int = 101) -> ModeField:
    """
    Evaluate w = sum R_A w_A (+ psi R_A w~_A on enriched elements) on a grid.

    Args:
        discretization: the plate the modes belong to
        modes: full-length mode vectors (n_dof,) or (n_dof, k)
        grid_resolution: points per parametric direction (>= 2)
    """
    if grid_resolution < 2:
        raise ValueError(f"grid_resolution must be >= 2, got {grid_resolution}")
    modes = np.asarray(modes, dtype=float)
    if modes.ndim == 1:
        modes = modes[:, None]
    patch = discretization.patch
    dofmap = discretization.dofmap
    classification = discretization.classification
    shape = discretization.shape
    elements = patch.elements()
    cps = patch.control_points_flat()

    lo_xi, hi_xi = patch.knots_xi.domain
    lo_eta, hi_eta = patch.knots_eta.domain
    xi = np.linspace(lo_xi, hi_xi, grid_resolution)
    eta = np.linspace(lo_eta, hi_eta, grid_resolution)
    n = grid_resolution
    x = np.zeros((n, n))
    y = np.zeros((n, n))
    w = np.zeros((modes.shape[1], n, n))
    mask = np.zeros((n, n), dtype=bool)

    for j, e in enumerate(eta):
        for i, s in enumerate(xi):
            R, _, support = surface_basis(patch, s, e)
            point = R @ cps[support]
            x[j, i], y[j, i] = point
            if shape is not None and float(shape.evaluate(point)) < 0:
                mask[j, i] = True
                continue
            w[:, j, i] = R @ modes[N_FIELDS * support + W, :]
            element = elements[locate_element(patch, s, e)]
            if classification.tag(element.index) == ENRICHED:
                parent = element.param_to_parent(s, e)
                psi, _ = enrichment_field(classification.phi_corners[element.index],
                                          parent[None, :])
                w_enr = dofmap.enriched_dofs(support).reshape(-1, N_FIELDS)[:, W]
                w[:, j, i] += psi[0] * (R @ modes[w_enr, :])

    w[:, mask] = np.nan
    logger.info(
        f"Sampled {modes.shape[1]} mode(s) on a {n}x{n} grid "
        f"({mask.sum()} masked point(s))"
    )
    return ModeField(xi=xi, eta=eta, x=x, y=y, w=w, mask=mask)


# ---------------------------------------------------------------------------
# Writers / readers
# ---------------------------------------------------------------------------

def write_mode_csv(field: ModeField, mode: int, path) -> Path:
    """One row per grid point: xi, eta, x, y, w (masked points: nan)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(['xi', 'eta', 'x', 'y', 'w'])
        for j in range(len(field.eta)):
            for i in range(len(field.xi)):
                writer.writerow([repr(float(v)) for v in (
                    field.xi[i], field.eta[j], field.x[j, i], field.y[j, i], field.w[mode, j, i]
                )])
    return path


def read_mode_csv(path) -> np.ndarray:
    """w values of a mode CSV reshaped to its (n_eta, n_xi) grid"""
    with open(path, 'r', newline='', encoding='utf-8') as f:
        rows = list(csv.DictReader(f))
    xi = sorted({float(r['xi']) for r in rows})
    eta = sorted({float(r['eta']) for r in rows})
    return np.array([float(r['w']) for r in rows]).reshape(len(eta), len(xi))


def write_mode_vtk(field: ModeField, mode: int, path, title: Optional[str] = None) -> Path:
    """
    VTK legacy STRUCTURED_POINTS file (ASCII). Spacing is taken from the
    grid corners, which is exact for affine (rectangular) patches.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n_eta, n_xi = field.x.shape
    dx = (field.x[0, -1] - field.x[0, 0]) / (n_xi - 1)
    dy = (field.y[-1, 0] - field.y[0, 0]) / (n_eta - 1)
    values = field.w[mode].ravel()
    lines = [
        '# vtk DataFile Version 3.0',
        (title or f'buckling mode {mode + 1}')[:255],
        'ASCII',
        'DATASET STRUCTURED_POINTS',
        f'DIMENSIONS {n_xi} {n_eta} 1',
        f'ORIGIN {float(field.x[0, 0])!r} {float(field.y[0, 0])!r} 0.0',
        f'SPACING {float(dx)!r} {float(dy)!r} 1.0',
        f'POINT_DATA {values.size}',
        f'SCALARS w_mode{mode + 1} double 1',
        'LOOKUP_TABLE default',
    ]
    lines.extend(repr(float(v)) for v in values)
    path.write_text('\n'.join(lines) + '\n', encoding='utf-8')
    return path


def export_modes(discretization: PlateDiscretization, modes: np.ndarray,
                 out_dir, grid_resolution: int = 101,
                 formats: Sequence[str] = EXPORT_FORMATS, prefix: str = 'mode') -> List[Path]:
    """
    Write every mode as mode_<k>.csv and/or mode_<k>.vtk under out_dir.

    Raises:
        ValueError: unknown format
        OSError: output not writable
    """
    unknown = [f for f in formats if f not in EXPORT_FORMATS]
    if unknown:
        raise ValueError(f"Unknown export format(s) {unknown}; choose from {EXPORT_FORMATS}")
    field = sample_modes(discretization, modes, grid_resolution)
    out_dir = Path(out_dir)
    written = []
    for k in range(field.n_modes):
        if 'csv' in formats:
            written.append(write_mode_csv(field, k, out_dir / f'{prefix}_{k + 1}.csv'))
        if 'vtk' in formats:
            written.append(write_mode_vtk(field, k, out_dir / f'{prefix}_{k + 1}.vtk'))
    logger.info(f"Exported {field.n_modes} mode(s) to {out_dir}")
    return written
