"""P1 finite elements for linear elastodynamics on the unit square.

Assembly produces CSR matrices over interleaved (u_x, u_y) DOFs.  The time
stepper advances the three-level scheme

    (A + M/k^2) U_next = F_next + M (2 U_curr - U_prev) / k^2

with Dirichlet conditions imposed by eliminating boundary DOFs.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sparse
import scipy.sparse.linalg as spla

from .mesh import DofMap, GridMesh, build_dof_map, element_areas

_MIN_AREA = 1e-14


def elasticity_matrix_2d(young: float, poisson: float) -> np.ndarray:
    """Plane-stress constitutive matrix for Voigt strain (eps_xx, eps_yy, gamma_xy)."""
    if young <= 0.0:
        raise ValueError(f"Young's modulus must be positive, got {young}")
    if not -1.0 < poisson < 1.0:
        raise ValueError(f"plane stress needs -1 < nu < 1, got {poisson}")
    c = young / (1.0 - poisson**2)
    return c * np.array([
        [1.0, poisson, 0.0],
        [poisson, 1.0, 0.0],
        [0.0, 0.0, (1.0 - poisson) / 2.0],
    ])


def elasticity_matrix_3d(young: float, poisson: float) -> np.ndarray:
    """3D constitutive matrix for Voigt strain (xx, yy, zz, yz, zx, xy)."""
    if young <= 0.0:
        raise ValueError(f"Young's modulus must be positive, got {young}")
    if not -1.0 < poisson < 0.5:
        raise ValueError(f"3D elasticity needs -1 < nu < 1/2, got {poisson}")
    c = young / ((1.0 + poisson) * (1.0 - 2.0 * poisson))
    m = np.zeros((6, 6))
    m[:3, :3] = poisson
    np.fill_diagonal(m[:3, :3], 1.0 - poisson)
    m[3, 3] = m[4, 4] = m[5, 5] = (1.0 - 2.0 * poisson) / 2.0
    return c * m


@dataclass(frozen=True)
class ElasticMaterial:
    """Linear material used by the solver (the hybrid models always see E=1, nu=1/4)."""

    young: float = 1.0
    poisson: float = 0.25

    def __post_init__(self):
        elasticity_matrix_2d(self.young, self.poisson)  # reuse validation


def _element_geometry(mesh: GridMesh):
    """Per-element area and P1 gradient coefficients.

    Returns (areas, b, c) where grad phi_i = (b_i, c_i) / (2 A).
    """
    p = mesh.nodes[mesh.elements]                     # (ne, 3, 2)
    x, y = p[..., 0], p[..., 1]
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    areas = element_areas(mesh)
    if np.any(areas <= _MIN_AREA):
        bad = int(np.argmin(areas))
        raise ValueError(f"degenerate triangle {bad} with area {areas[bad]:.3e}")
    return areas, b, c


def _element_dofs(mesh: GridMesh) -> np.ndarray:
    """(ne, 6) DOF indices in vertex-major, component-minor order."""
    tri = mesh.elements
    dofs = np.empty((mesh.n_elements, 6), dtype=np.int64)
    dofs[:, 0::2] = 2 * tri
    dofs[:, 1::2] = 2 * tri + 1
    return dofs


def _scatter(mesh: GridMesh, local: np.ndarray) -> sparse.csr_matrix:
    dofs = _element_dofs(mesh)
    rows = np.repeat(dofs, 6, axis=1).ravel()
    cols = np.tile(dofs, (1, 6)).ravel()
    n = 2 * mesh.n_nodes
    mat = sparse.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n))
    return mat.tocsr()


def assemble_stiffness(mesh: GridMesh, material: ElasticMaterial) -> sparse.csr_matrix:
    """Stiffness matrix of the plane-stress bilinear form int eps(v)^T C eps(u)."""
    areas, b, c = _element_geometry(mesh)
    ne = mesh.n_elements
    cmat = elasticity_matrix_2d(material.young, material.poisson)

    bm = np.zeros((ne, 3, 6))
    bm[:, 0, 0::2] = b
    bm[:, 1, 1::2] = c
    bm[:, 2, 0::2] = c
    bm[:, 2, 1::2] = b
    bm /= (2.0 * areas)[:, None, None]

    local = np.einsum("eki,kl,elj->eij", bm, cmat, bm) * areas[:, None, None]
    return _scatter(mesh, local)


def assemble_mass(mesh: GridMesh) -> sparse.csr_matrix:
    """Consistent mass matrix of int v . u (unit density, no component coupling)."""
    areas, _, _ = _element_geometry(mesh)
    base = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0
    local = np.zeros((mesh.n_elements, 6, 6))
    local[:, 0::2, 0::2] = base
    local[:, 1::2, 1::2] = base
    local *= areas[:, None, None]
    return _scatter(mesh, local)


def assemble_load(mesh: GridMesh, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Load vector int f . v using the edge-midpoint rule (exact for quadratics).

    ``f`` maps points (m, 2) to values (m, 2) and must be finite everywhere.
    """
    areas, _, _ = _element_geometry(mesh)
    p = mesh.nodes[mesh.elements]                     # (ne, 3, 2)
    mids = 0.5 * (p + np.roll(p, -1, axis=1))         # midpoints 01, 12, 20

    vals = f(mids.reshape(-1, 2))
    vals = np.asarray(vals, dtype=float)
    if vals.shape != (mesh.n_elements * 3, 2):
        raise ValueError(f"load callable returned shape {vals.shape}, "
                         f"expected {(mesh.n_elements * 3, 2)}")
    if not np.all(np.isfinite(vals)):
        raise ValueError("load callable produced non-finite values")
    vals = vals.reshape(mesh.n_elements, 3, 2)

    # phi[vertex, midpoint]: each vertex sees 1/2 on its two adjacent midpoints
    phi = np.array([[0.5, 0.0, 0.5], [0.5, 0.5, 0.0], [0.0, 0.5, 0.5]])
    contrib = np.einsum("iq,eqc->eic", phi, vals) * (areas[:, None, None] / 3.0)

    out = np.zeros(2 * mesh.n_nodes)
    dofs = _element_dofs(mesh)
    np.add.at(out, dofs.ravel(), contrib.reshape(mesh.n_elements, 6).ravel())
    return out


def project_initial(mesh: GridMesh, field: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Nodal interpolation of a displacement field into the DOF vector."""
    vals = np.asarray(field(mesh.nodes), dtype=float)
    if vals.shape != (mesh.n_nodes, 2):
        raise ValueError(f"field returned shape {vals.shape}, expected {(mesh.n_nodes, 2)}")
    return vals.reshape(-1)


@dataclass
class FemOperators:
    """Assembled, factorized operators for one (mesh, material, k) configuration.

    ``solve_interior`` applies the inverse of the interior block of
    L = A + M/k^2; it is factorized once and reused for every step and
    every trajectory.  Instances are immutable in use and safe to share
    across independent rollouts.
    """

    mesh: GridMesh
    dofs: DofMap
    material: ElasticMaterial
    k: float
    stiffness: sparse.csr_matrix
    mass: sparse.csr_matrix
    lhat: sparse.csr_matrix
    lhat_ii: sparse.csr_matrix
    lhat_ib: sparse.csr_matrix
    solve_interior: Callable[[np.ndarray], np.ndarray]

    @property
    def n_dofs(self) -> int:
        return self.dofs.n_dofs


def build_operators(mesh: GridMesh, material: ElasticMaterial, k: float) -> FemOperators:
    if k <= 0.0:
        raise ValueError(f"time step must be positive, got {k}")
    dofs = build_dof_map(mesh)
    a = assemble_stiffness(mesh, material)
    m = assemble_mass(mesh)
    lhat = (a + m / k**2).tocsr()
    lhat_ii = lhat[dofs.interior][:, dofs.interior].tocsc()
    lhat_ib = lhat[dofs.interior][:, dofs.boundary].tocsr()
    solve = spla.factorized(lhat_ii)
    return FemOperators(mesh=mesh, dofs=dofs, material=material, k=float(k),
                        stiffness=a, mass=m, lhat=lhat,
                        lhat_ii=lhat_ii.tocsr(), lhat_ib=lhat_ib,
                        solve_interior=solve)


def apply_dirichlet(ops: FemOperators, rhs: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Reduce a full-space right-hand side to the interior system's rhs.

    Equivalent to replacing boundary rows by the identity: the reduced
    system L_ii u_i = rhs_i - L_ib g has the same interior solution.
    """
    rhs = np.asarray(rhs, dtype=float)
    g = np.asarray(g, dtype=float)
    if rhs.shape != (ops.n_dofs,):
        raise ValueError(f"rhs has shape {rhs.shape}, expected {(ops.n_dofs,)}")
    if g.shape != (ops.dofs.boundary.size,):
        raise ValueError(f"boundary data has shape {g.shape}, "
                         f"expected {(ops.dofs.boundary.size,)}")
    return rhs[ops.dofs.interior] - ops.lhat_ib @ g


def compose_full(ops: FemOperators, interior: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Merge interior values and boundary data into a full DOF vector."""
    out = np.empty(ops.n_dofs)
    out[ops.dofs.interior] = interior
    out[ops.dofs.boundary] = g
    return out


@dataclass(frozen=True)
class StatePair:
    """Two consecutive full-space states; u_prev lags u_curr by one step."""

    u_curr: np.ndarray
    u_prev: np.ndarray
    t_index: int = 0


def time_rhs(ops: FemOperators, state: StatePair, f_next: np.ndarray) -> np.ndarray:
    """Full-space right-hand side of the next-level solve."""
    hist = 2.0 * state.u_curr - state.u_prev
    return f_next + (ops.mass @ hist) / ops.k**2


def time_step(ops: FemOperators, state: StatePair, f_next: np.ndarray,
              g_next: np.ndarray) -> np.ndarray:
    """Advance one level; boundary DOFs of the result equal ``g_next`` exactly."""
    rhs = time_rhs(ops, state, f_next)
    interior = ops.solve_interior(apply_dirichlet(ops, rhs, g_next))
    return compose_full(ops, interior, g_next)
