"""Structured P1 triangulations of the unit square."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GridMesh:
    """Equidistant triangulation of [0, 1]^2.

    Nodes are numbered lexicographically with y as the major key: node
    ``j * (nx + 1) + i`` sits at ``(i / nx, j / ny)``.  Every grid cell is
    split along its lower-right -> upper-left diagonal into two
    counterclockwise triangles.
    """

    nx: int
    ny: int
    nodes: np.ndarray          # (n_nodes, 2) float64
    elements: np.ndarray       # (n_elements, 3) int, CCW vertex indices
    boundary_nodes: np.ndarray  # sorted indices of nodes on the boundary

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]


def build_grid_mesh(nx: int, ny: int) -> GridMesh:
    """Triangulate the unit square into ``2 * nx * ny`` elements.

    Raises ValueError unless both element counts are positive integers.
    """
    if not (isinstance(nx, (int, np.integer)) and isinstance(ny, (int, np.integer))):
        raise ValueError(f"element counts must be integers, got ({nx!r}, {ny!r})")
    if nx < 1 or ny < 1:
        raise ValueError(f"element counts must be >= 1, got ({nx}, {ny})")

    xs = np.linspace(0.0, 1.0, nx + 1)
    ys = np.linspace(0.0, 1.0, ny + 1)
    gx, gy = np.meshgrid(xs, ys)             # row j has constant y
    nodes = np.column_stack([gx.ravel(), gy.ravel()])

    elements = np.empty((2 * nx * ny, 3), dtype=np.int64)
    e = 0
    for j in range(ny):
        for i in range(nx):
            n00 = j * (nx + 1) + i
            n10 = n00 + 1
            n01 = n00 + (nx + 1)
            n11 = n01 + 1
            # diagonal runs n10 -> n01; both triangles CCW
            elements[e] = (n00, n10, n01)
            elements[e + 1] = (n10, n11, n01)
            e += 2

    ii, jj = np.meshgrid(np.arange(nx + 1), np.arange(ny + 1))
    on_edge = (ii == 0) | (ii == nx) | (jj == 0) | (jj == ny)
    boundary = np.flatnonzero(on_edge.ravel())

    return GridMesh(nx=int(nx), ny=int(ny), nodes=nodes, elements=elements,
                    boundary_nodes=boundary)


@dataclass(frozen=True)
class DofMap:
    """Interleaved displacement DOFs: node n carries DOFs (2n, 2n+1) = (u_x, u_y)."""

    n_nodes: int
    interior: np.ndarray   # sorted interior DOF indices
    boundary: np.ndarray   # sorted boundary DOF indices

    @property
    def n_dofs(self) -> int:
        return 2 * self.n_nodes

    def of(self, node: int, component: int) -> int:
        if component not in (0, 1):
            raise ValueError(f"component must be 0 or 1, got {component}")
        return 2 * node + component


def build_dof_map(mesh: GridMesh) -> DofMap:
    n = mesh.n_nodes
    boundary = np.sort(np.concatenate([2 * mesh.boundary_nodes,
                                       2 * mesh.boundary_nodes + 1]))
    mask = np.ones(2 * n, dtype=bool)
    mask[boundary] = False
    interior = np.flatnonzero(mask)
    return DofMap(n_nodes=n, interior=interior, boundary=boundary)


def element_areas(mesh: GridMesh) -> np.ndarray:
    """Signed areas of all triangles (positive for CCW orientation)."""
    p = mesh.nodes[mesh.elements]          # (ne, 3, 2)
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
