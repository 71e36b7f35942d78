"""
LSBuck - Global Assembly and Buckling Solver

Two-step linear thermal buckling:
1. Static solve K u = F_th * dT_ref and in-plane stress recovery
2. Generalized eigenproblem K phi = -lambda K_G phi for the smallest positive lambda

Key pieces:
- DofMap: 5 standard DOFs per control point, 5 extra per enriched control point
- BoundaryConditionSet: CCCC, SSSS or custom per-edge constraint lists
- Sparse symmetric scatter assembly (scipy.sparse COO -> CSR)
- Dense eigensolver for small systems, inverted Lanczos (eigsh) otherwise
"""

import logging
import time
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, eigsh, splu

from cut_quadrature import ElementRule, physical_rule
from errors import (
    AssemblyError,
    BoundaryConditionError,
    ConfigValidationError,
    SolverError,
)
from geometry_nurbs import NurbsPatch
from laminate import ConstitutiveSet
from levelset import ElementClassification, LevelSetShape, classify_elements
from plate_fsdt import (
    FIELD_NAMES,
    N_FIELDS,
    ElementBasis,
    InPlaneStressState,
    element_geometric_stiffness,
    element_stiffness,
    element_thermal_force,
    recover_stress,
)

logger = logging.getLogger('lsbuck.solver')

DEFAULT_DENSE_LIMIT = 3000
DEFAULT_AUTO_CONSTRAIN_TOL = 1e-10
POSITIVE_EIGEN_TOL = 1e-12

COMPONENT_INDEX = {name: c for c, name in enumerate(FIELD_NAMES)}
EDGE_NAMES = ('xi0', 'xi1', 'eta0', 'eta1')


# ---------------------------------------------------------------------------
# DOF numbering
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DofMap:
    """
    Standard DOF of control point A, component c: 5*A + c.
    Enriched DOF of the k-th enriched control point: 5*n_cp + 5*k + c.
    """

    n_control_points: int
    enriched_control_points: np.ndarray

    def __post_init__(self):
        enriched = np.asarray(self.enriched_control_points, dtype=int)
        if len(np.unique(enriched)) != len(enriched):
            raise AssemblyError("Enriched control points must be unique")
        if len(enriched) and (enriched.min() < 0 or enriched.max() >= self.n_control_points):
            raise AssemblyError("Enriched control point index out of range")
        slot = np.full(self.n_control_points, -1, dtype=int)
        slot[np.sort(enriched)] = np.arange(len(enriched))
        object.__setattr__(self, 'enriched_control_points', np.sort(enriched))
        object.__setattr__(self, '_slot', slot)

    @classmethod
    def from_classification(cls, patch: NurbsPatch,
                            classification: Optional[ElementClassification]) -> 'DofMap':
        enriched = (classification.enriched_control_points if classification is not None
                    else np.zeros(0, dtype=int))
        return cls(patch.n_control_points, enriched)

    @property
    def n_standard(self) -> int:
        return N_FIELDS * self.n_control_points

    @property
    def extra_dof(self) -> int:
        return N_FIELDS * len(self.enriched_control_points)

    @property
    def n_dof(self) -> int:
        return self.n_standard + self.extra_dof

    def standard_dofs(self, control_points) -> np.ndarray:
        cps = np.asarray(control_points, dtype=int)
        return (N_FIELDS * cps[:, None] + np.arange(N_FIELDS)[None, :]).ravel()

    def enriched_dofs(self, control_points) -> np.ndarray:
        cps = np.asarray(control_points, dtype=int)
        slots = self._slot[cps]
        if np.any(slots < 0):
            missing = cps[slots < 0].tolist()
            raise AssemblyError(f"Control points {missing} carry no enriched DOFs")
        return (self.n_standard + N_FIELDS * slots[:, None]
                + np.arange(N_FIELDS)[None, :]).ravel()

    def is_enriched(self, control_point: int) -> bool:
        return bool(self._slot[control_point] >= 0)

    def element_dofs(self, support, enriched: bool) -> np.ndarray:
        """Local-to-global map: standard functions first, then enriched ones"""
        dofs = self.standard_dofs(support)
        if enriched:
            dofs = np.concatenate([dofs, self.enriched_dofs(support)])
        return dofs


# ---------------------------------------------------------------------------
# Boundary conditions
# ---------------------------------------------------------------------------

CLAMPED = ('u0', 'v0', 'w0', 'beta_x', 'beta_y')


@dataclass(frozen=True)
class BoundaryConditionSet:
    """Per-edge fixed components; edges named by parametric side"""

    kind: str
    edges: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    dofs: Tuple[int, ...] = ()

    def __post_init__(self):
        problems = []
        for edge, components in self.edges.items():
            if edge not in EDGE_NAMES:
                problems.append(f"unknown edge '{edge}'")
            for comp in components:
                if comp not in COMPONENT_INDEX:
                    problems.append(f"unknown component '{comp}' on edge '{edge}'")
        if problems:
            raise BoundaryConditionError("; ".join(problems))

    @classmethod
    def clamped(cls) -> 'BoundaryConditionSet':
        return cls('CCCC', {edge: CLAMPED for edge in EDGE_NAMES})

    @classmethod
    def simply_supported(cls) -> 'BoundaryConditionSet':
        # x-edges (xi = const) keep beta_x free, y-edges keep beta_y free
        x_edge = ('u0', 'v0', 'w0', 'beta_y')
        y_edge = ('u0', 'v0', 'w0', 'beta_x')
        return cls('SSSS', {'xi0': x_edge, 'xi1': x_edge, 'eta0': y_edge, 'eta1': y_edge})

    @classmethod
    def from_kind(cls, kind: str, edges: Optional[Dict[str, Sequence[str]]] = None
                  ) -> 'BoundaryConditionSet':
        kind = kind.upper()
        if kind == 'CCCC':
            return cls.clamped()
        if kind == 'SSSS':
            return cls.simply_supported()
        if kind == 'CUSTOM':
            return cls('custom', {k: tuple(v) for k, v in (edges or {}).items()})
        raise BoundaryConditionError(f"Unknown boundary condition kind '{kind}'")

    def constrained_dofs(self, patch: NurbsPatch, dofmap: DofMap) -> np.ndarray:
        """Sorted global DOFs fixed by this set (enriched DOFs included)"""
        boundary = patch.boundary_control_points()
        fixed = set()
        for edge, components in self.edges.items():
            comps = [COMPONENT_INDEX[c] for c in components]
            for cp in boundary[edge]:
                for c in comps:
                    fixed.add(N_FIELDS * cp + c)
                    if dofmap.is_enriched(cp):
                        fixed.add(int(dofmap.enriched_dofs([cp])[c]))
        for dof in self.dofs:
            if not 0 <= dof < dofmap.n_dof:
                raise BoundaryConditionError(
                    f"Constraint references DOF {dof}, model has {dofmap.n_dof}"
                )
            fixed.add(int(dof))
        return np.array(sorted(fixed), dtype=int)


# ---------------------------------------------------------------------------
# Discretization and assembly
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PlateDiscretization:
    """Classified, integrated plate ready for assembly"""

    patch: NurbsPatch
    constitutive: ConstitutiveSet
    classification: ElementClassification
    shape: Optional[LevelSetShape]
    dofmap: DofMap
    rules: List[ElementRule]
    bases: List[ElementBasis]
    element_dofs: List[np.ndarray]


def discretize(patch: NurbsPatch, constitutive: ConstitutiveSet,
               shape: Optional[LevelSetShape] = None, edge_samples: int = 8,
               triangle_points: int = 7,
               gauss_points: Optional[int] = None) -> PlateDiscretization:
    """Classify elements, build their material-only rules and evaluate bases"""
    classification = classify_elements(patch, shape, edge_samples)
    dofmap = DofMap.from_classification(patch, classification)
    rules, bases, dofs = [], [], []
    for element in patch.elements():
        rule = physical_rule(patch, element, classification, shape,
                             triangle_points=triangle_points, gauss_points=gauss_points)
        basis = ElementBasis.evaluate(patch, element, rule,
                                      classification.phi_corners[element.index])
        rules.append(rule)
        bases.append(basis)
        dofs.append(dofmap.element_dofs(basis.support, basis.enriched))
    logger.info(
        f"Discretized plate: {patch.n_elements} elements, nDoF={dofmap.n_dof} "
        f"(extra {dofmap.extra_dof})"
    )
    return PlateDiscretization(patch, constitutive, classification, shape, dofmap,
                               rules, bases, dofs)


class _Scatter:
    """Deterministic COO accumulator"""

    def __init__(self, n: int):
        self.n = n
        self.rows, self.cols, self.vals = [], [], []

    def add(self, dofs: np.ndarray, block: np.ndarray):
        if block.shape != (len(dofs), len(dofs)):
            raise AssemblyError(
                f"Block shape {block.shape} does not match {len(dofs)} DOFs"
            )
        if len(dofs) and (dofs.min() < 0 or dofs.max() >= self.n):
            raise AssemblyError(f"DOF index out of range for system of size {self.n}")
        self.rows.append(np.repeat(dofs, len(dofs)))
        self.cols.append(np.tile(dofs, len(dofs)))
        self.vals.append(block.ravel())

    def matrix(self) -> sp.csr_matrix:
        if not self.vals:
            return sp.csr_matrix((self.n, self.n))
        M = sp.coo_matrix(
            (np.concatenate(self.vals), (np.concatenate(self.rows), np.concatenate(self.cols))),
            shape=(self.n, self.n),
        ).tocsr()
        M.sum_duplicates()
        return M


@dataclass(frozen=True, eq=False)
class GlobalSystem:
    """K and the thermal load per unit temperature rise, plus constraints"""

    K: sp.csr_matrix
    F_th: np.ndarray
    dofmap: DofMap
    constrained: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    auto_constrained: int = 0

    @property
    def n_dof(self) -> int:
        return self.K.shape[0]

    @property
    def free(self) -> np.ndarray:
        mask = np.ones(self.n_dof, dtype=bool)
        mask[self.constrained] = False
        return np.flatnonzero(mask)

    def reduce(self, M):
        free = self.free
        if sp.issparse(M):
            return M.tocsr()[free][:, free]
        M = np.asarray(M)
        return M[free] if M.ndim == 1 else M[np.ix_(free, free)]

    def expand(self, v_free: np.ndarray) -> np.ndarray:
        v_free = np.asarray(v_free)
        out = np.zeros((self.n_dof,) + v_free.shape[1:])
        out[self.free] = v_free
        return out


def assemble(discretization: PlateDiscretization, stiffeners: Sequence = (),
             dofmap: Optional[DofMap] = None) -> GlobalSystem:
    """
    Scatter element and stiffener stiffness into a sparse symmetric K and
    the thermal load F_th for a unit temperature rise.
    """
    dofmap = dofmap or discretization.dofmap
    n = dofmap.n_dof
    C = discretization.constitutive
    scatter = _Scatter(n)
    F = np.zeros(n)
    for basis, dofs in zip(discretization.bases, discretization.element_dofs):
        if basis.n_points == 0:
            continue
        if len(dofs) != N_FIELDS * basis.n_functions:
            raise AssemblyError(
                f"Element {basis.element.index}: {len(dofs)} DOFs for "
                f"{basis.n_functions} functions"
            )
        scatter.add(dofs, element_stiffness(basis, C.D_p))
        np.add.at(F, dofs, element_thermal_force(basis, C.N_T_unit, C.M_T_unit, 1.0))

    for stiffener in stiffeners:
        for dofs, block in stiffener.stiffness_blocks():
            scatter.add(dofs, block)
        for dofs, f in stiffener.thermal_force_blocks(1.0):
            np.add.at(F, dofs, f)

    K = scatter.matrix()
    logger.info(f"Assembled K: {n} DOFs, {K.nnz} nonzeros, {len(stiffeners)} stiffener(s)")
    return GlobalSystem(K=K, F_th=F, dofmap=dofmap)


def apply_bc(system: GlobalSystem, bcs: BoundaryConditionSet, patch: NurbsPatch,
             auto_constrain_tol: float = DEFAULT_AUTO_CONSTRAIN_TOL) -> GlobalSystem:
    """
    Constrain boundary DOFs, then every DOF whose stiffness diagonal is below
    auto_constrain_tol times the largest diagonal of its component (void
    control points, enriched functions with psi == 0).
    """
    fixed = bcs.constrained_dofs(patch, system.dofmap)
    diag = system.K.diagonal()
    n_cp = system.dofmap.n_control_points
    component = np.arange(system.n_dof) % N_FIELDS
    weak = np.zeros(system.n_dof, dtype=bool)
    for c in range(N_FIELDS):
        mask = component == c
        scale = np.abs(diag[mask]).max() if mask.any() else 0.0
        weak[mask] = np.abs(diag[mask]) <= auto_constrain_tol * scale
    auto = np.setdiff1d(np.flatnonzero(weak), fixed)
    constrained = np.union1d(fixed, auto).astype(int)
    logger.info(
        f"Boundary conditions {bcs.kind}: {len(fixed)} constrained, "
        f"{len(auto)} auto-constrained zero-stiffness DOFs "
        f"({np.sum(auto < N_FIELDS * n_cp)} standard)"
    )
    return replace(system, constrained=constrained, auto_constrained=len(auto))


# ---------------------------------------------------------------------------
# Static prestress
# ---------------------------------------------------------------------------

def factorize_stiffness(K) -> object:
    """
    Sparse LU of the constrained stiffness.

    Raises:
        SolverError: singular matrix
    """
    try:
        lu = splu(sp.csc_matrix(K))
    except RuntimeError as exc:
        raise SolverError(f"Stiffness matrix is singular (insufficient constraints?): {exc}")
    return lu


@dataclass(frozen=True, eq=False)
class PrestressState:
    """Static thermal solution and the stresses it induces"""

    delta_T: float
    displacement: np.ndarray
    element_stress: List[InPlaneStressState]
    stiffener_forces: List[np.ndarray]


def prestress_solve(system: GlobalSystem, discretization: PlateDiscretization,
                    stiffeners: Sequence = (), delta_T_ref: float = 1.0) -> PrestressState:
    """
    Solve K u = F_th dT_ref and recover sigma = (A eps0 + B kappa - N_T dT)/t
    at every quadrature point.

    Raises:
        SolverError: singular K or non-finite displacement
    """
    K_ff = system.reduce(system.K)
    F_f = system.reduce(system.F_th) * delta_T_ref
    if delta_T_ref == 0.0 or not np.any(F_f):
        u_f = np.zeros(len(F_f))
    else:
        u_f = factorize_stiffness(K_ff).solve(F_f)
    if not np.all(np.isfinite(u_f)):
        raise SolverError("Static thermal solve produced non-finite displacements")
    u = system.expand(u_f)

    C = discretization.constitutive
    stresses = []
    for basis, dofs in zip(discretization.bases, discretization.element_dofs):
        if basis.n_points == 0:
            stresses.append(InPlaneStressState.zeros(0, C.thickness))
            continue
        stresses.append(recover_stress(basis, u[dofs], C, delta_T_ref))
    forces = [s.axial_forces(u, delta_T_ref) for s in stiffeners]
    logger.info(f"Static thermal solve done: dT_ref={delta_T_ref}, max|u|={np.abs(u).max():.4e}")
    return PrestressState(delta_T=delta_T_ref, displacement=u,
                          element_stress=stresses, stiffener_forces=forces)


def assemble_geometric(discretization: PlateDiscretization, prestress: PrestressState,
                       stiffeners: Sequence = ()) -> sp.csr_matrix:
    """K_G from the recovered plate stresses and stiffener axial forces"""
    scatter = _Scatter(discretization.dofmap.n_dof)
    for basis, dofs, state in zip(discretization.bases, discretization.element_dofs,
                                  prestress.element_stress):
        if basis.n_points == 0:
            continue
        scatter.add(dofs, element_geometric_stiffness(basis, state))
    for stiffener, forces in zip(stiffeners, prestress.stiffener_forces):
        for dofs, block in stiffener.geometric_blocks(forces):
            scatter.add(dofs, block)
    return scatter.matrix()


# ---------------------------------------------------------------------------
# Eigenproblem
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BucklingSolution:
    """Eigenvalues are multipliers of the reference temperature rise"""

    eigenvalues: np.ndarray
    modes: np.ndarray           # (n, k), each normalized to max|phi| = 1
    buckled: bool
    delta_T_ref: float = 1.0
    solver: str = 'dense'

    @property
    def n_modes(self) -> int:
        return len(self.eigenvalues)

    @property
    def critical_temperature(self) -> float:
        if not self.buckled:
            return float('nan')
        return float(self.eigenvalues[0] * self.delta_T_ref)


def _normalize_modes(vecs: np.ndarray) -> np.ndarray:
    vecs = np.array(vecs, dtype=float, copy=True)
    for k in range(vecs.shape[1]):
        i = int(np.argmax(np.abs(vecs[:, k])))
        if vecs[i, k] != 0:
            vecs[:, k] /= vecs[i, k]
    return vecs


def buckling_solve(K, K_G, n_modes: int = 5, dense_limit: int = DEFAULT_DENSE_LIMIT,
                   tol: float = 0.0, delta_T_ref: float = 1.0) -> BucklingSolution:
    """
    Smallest positive lambda of K phi = -lambda K_G phi.

    Solved as -K_G phi = nu K phi with nu = 1/lambda, keeping the largest
    positive nu. Dense eigh below dense_limit DOFs, otherwise eigsh with a
    sparse LU of K as M^-1 and a fixed start vector.

    Returns:
        BucklingSolution (buckled=False when no positive eigenvalue exists)
    """
    n = K.shape[0]
    if K_G.shape != K.shape:
        raise AssemblyError(f"K {K.shape} and K_G {K_G.shape} differ in shape")
    if n == 0:
        raise SolverError("No free DOFs left after constraints")

    if n <= dense_limit:
        Kd = K.toarray() if sp.issparse(K) else np.asarray(K)
        KGd = K_G.toarray() if sp.issparse(K_G) else np.asarray(K_G)
        try:
            nu, vecs = scipy.linalg.eigh(-KGd, Kd)
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"Dense generalized eigensolve failed: {exc}")
        solver = 'dense'
    else:
        lu = factorize_stiffness(K)
        Minv = LinearOperator((n, n), matvec=lu.solve, dtype=float)
        k = min(max(n_modes, 1) + 2, n - 1)
        v0 = np.random.default_rng(0).standard_normal(n)
        try:
            nu, vecs = eigsh(-sp.csr_matrix(K_G), k=k, M=sp.csr_matrix(K), Minv=Minv,
                             which='LA', v0=v0, tol=tol)
        except Exception as exc:
            raise SolverError(f"Sparse eigensolve failed: {exc}")
        solver = 'lanczos'

    scale = np.abs(nu).max() if len(nu) else 0.0
    positive = np.flatnonzero(nu > POSITIVE_EIGEN_TOL * scale) if scale > 0 else np.zeros(0, int)
    if len(positive) == 0:
        logger.warning("No positive buckling eigenvalue: prestress does not destabilize the plate")
        return BucklingSolution(np.zeros(0), np.zeros((n, 0)), False, delta_T_ref, solver)

    order = positive[np.argsort(-nu[positive])][:n_modes]
    lambdas = 1.0 / nu[order]
    modes = _normalize_modes(vecs[:, order])
    logger.info(f"Eigen solve ({solver}, n={n}): lambda_1 = {lambdas[0]:.6e}")
    return BucklingSolution(lambdas, modes, True, delta_T_ref, solver)


NORMALIZATION_FACTORS = {
    'identity': lambda alpha0: 1.0,
    'alpha0': lambda alpha0: alpha0,
    'alpha0_e3': lambda alpha0: alpha0 * 1e3,
}


def normalized_critical_temperature(solution: BucklingSolution, convention: str = 'identity',
                                    alpha0: float = 1.0, thin_plate_scale: float = 1.0) -> float:
    """
    Reported critical temperature.

    identity -> dT_cr; alpha0 -> alpha0 dT_cr; alpha0_e3 -> 1e3 alpha0 dT_cr.
    thin_plate_scale multiplies the result (100 for plates with a/h >= 100).
    """
    if convention not in NORMALIZATION_FACTORS:
        raise ConfigValidationError([
            ('analysis.normalization', f"unknown convention '{convention}'"),
        ])
    return solution.critical_temperature * NORMALIZATION_FACTORS[convention](alpha0) * thin_plate_scale


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BucklingRun:
    """Full pipeline output for one plate"""

    solution: BucklingSolution
    system: GlobalSystem
    prestress: PrestressState
    K_G: sp.csr_matrix
    timings: Dict[str, float]

    def full_modes(self) -> np.ndarray:
        return self.system.expand(self.solution.modes)


def run_buckling(discretization: PlateDiscretization, bcs: BoundaryConditionSet,
                 stiffeners: Sequence = (), n_modes: int = 5, delta_T_ref: float = 1.0,
                 dense_limit: int = DEFAULT_DENSE_LIMIT,
                 auto_constrain_tol: float = DEFAULT_AUTO_CONSTRAIN_TOL,
                 eigen_tol: float = 0.0) -> BucklingRun:
    """Assemble, constrain, prestress and solve; phase wall times in seconds"""
    timings = {}
    t0 = time.perf_counter()
    system = assemble(discretization, stiffeners)
    system = apply_bc(system, bcs, discretization.patch, auto_constrain_tol)
    timings['assembly'] = time.perf_counter() - t0

    t0 = time.perf_counter()
    prestress = prestress_solve(system, discretization, stiffeners, delta_T_ref)
    K_G = assemble_geometric(discretization, prestress, stiffeners)
    timings['static'] = time.perf_counter() - t0

    t0 = time.perf_counter()
    solution = buckling_solve(system.reduce(system.K), system.reduce(K_G), n_modes,
                              dense_limit=dense_limit, tol=eigen_tol, delta_T_ref=delta_T_ref)
    timings['eigen'] = time.perf_counter() - t0
    return BucklingRun(solution, system, prestress, K_G, timings)
