"""Closed quad mesh on a cube surface, with incidence operators.

Vertices are the integer points of {0..n}^3 having at least one coordinate in
{0, n}; cells are the n^2 unit quads per face, oriented counterclockwise as
seen from outside, so the surface is a combinatorial sphere (V - E + F = 2).
D0 maps vertex values to oriented edge differences and D1 maps edge values to
cell boundary circulations; D1 @ D0 = 0 holds structurally.  L = D1 @ D1.T is
the dual-graph Laplacian (4-regular for quads) used by the gauge solve.
Everything here is combinatorial: geometry enters only through the cube
center and side when sampling, so meshes are cached per n.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from ..errors import InvalidInput
from ..quadrature import FACES

# even permutations (u, v, axis): e_u x e_v = +e_axis
_EVEN = {(1, 2, 0), (2, 0, 1), (0, 1, 2)}


@dataclass
class CubeSurfaceMesh:
    n: int                      # cells per edge
    verts: np.ndarray           # (V, 3) int coordinates in {0..n}
    edges: np.ndarray           # (E, 2) vertex indices, oriented tail -> head (coordinate ascending)
    edge_dir: np.ndarray        # (E,) axis of each edge
    cells: np.ndarray           # (F, 4) vertex loops, CCW from outside
    cell_face: np.ndarray       # (F,) index into quadrature.FACES
    cell_uv: np.ndarray         # (F, 2) cell grid position on its face (u_ax < v_ax)
    D0: sparse.csr_matrix       # (E, V)
    D1: sparse.csr_matrix       # (F, E)
    vert_index: dict = field(repr=False)   # (i,j,k) -> vertex id
    edge_index: dict = field(repr=False)   # (tail, head) -> edge id
    _lu: object = field(default=None, repr=False)

    @property
    def n_verts(self):
        return int(self.verts.shape[0])

    @property
    def n_edges(self):
        return int(self.edges.shape[0])

    @property
    def n_cells(self):
        return int(self.cells.shape[0])

    def laplacian(self) -> sparse.csr_matrix:
        return (self.D1 @ self.D1.T).tocsr()

    def pinned_lu(self):
        """Factorization of L with L[0,0] += 1 (removes the constant kernel)."""
        if self._lu is None:
            L = self.laplacian().tolil()
            L[0, 0] += 1.0
            self._lu = splu(L.tocsc())
        return self._lu

    def vert_positions(self, center, side):
        c = np.asarray(center, dtype=float)
        return c + (self.verts / self.n - 0.5) * side

    def cell_areas(self, side):
        return np.full(self.n_cells, (side / self.n) ** 2)

    def cell_slot(self, face_idx, iu, iv):
        """Flat cell index for face face_idx, grid cell (iu, iv)."""
        return (face_idx * self.n + iu) * self.n + iv


def _build(n: int) -> CubeSurfaceMesh:
    if n < 2:
        raise InvalidInput(f"need at least 2 cells per edge, got {n}")
    rng = np.arange(n + 1)
    I, J, K = np.meshgrid(rng, rng, rng, indexing="ij")
    on = (I % n == 0) | (J % n == 0) | (K % n == 0)
    verts = np.stack([I[on], J[on], K[on]], axis=1)
    order = np.lexsort((verts[:, 2], verts[:, 1], verts[:, 0]))
    verts = verts[order]
    vert_index = {tuple(v): i for i, v in enumerate(verts)}

    cells = []
    cell_face = []
    cell_uv = []
    for fidx, (axis, sign) in enumerate(FACES):
        u_ax, v_ax = [t for t in range(3) if t != axis]
        w = 0 if sign < 0 else n
        forward = ((u_ax, v_ax, axis) in _EVEN) == (sign > 0)
        for iu in range(n):
            for iv in range(n):
                def node(du, dv):
                    p = [0, 0, 0]
                    p[axis] = w
                    p[u_ax] = iu + du
                    p[v_ax] = iv + dv
                    return vert_index[tuple(p)]
                loop = [node(0, 0), node(1, 0), node(1, 1), node(0, 1)]
                if not forward:
                    loop = loop[::-1]
                cells.append(loop)
                cell_face.append(fidx)
                cell_uv.append((iu, iv))
    cells = np.array(cells)
    cell_face = np.array(cell_face)
    cell_uv = np.array(cell_uv)

    # edges from cell loops, canonical orientation = ascending integer coordinate
    edge_index = {}
    edges = []
    edge_dir = []
    rows_d1, cols_d1, vals_d1 = [], [], []
    for f, loop in enumerate(cells):
        for s in range(4):
            a, b = int(loop[s]), int(loop[(s + 1) % 4])
            va, vb = verts[a], verts[b]
            ax = int(np.argmax(np.abs(vb - va)))
            tail, head = (a, b) if vb[ax] > va[ax] else (b, a)
            key = (tail, head)
            e = edge_index.get(key)
            if e is None:
                e = len(edges)
                edge_index[key] = e
                edges.append(key)
                edge_dir.append(ax)
            rows_d1.append(f)
            cols_d1.append(e)
            vals_d1.append(1.0 if (a, b) == key else -1.0)
    edges = np.array(edges)
    edge_dir = np.array(edge_dir)
    E, V, F = len(edges), len(verts), len(cells)
    assert V - E + F == 2, "cube surface must triangulate a sphere"

    D1 = sparse.csr_matrix((vals_d1, (rows_d1, cols_d1)), shape=(F, E))
    rows_d0 = np.repeat(np.arange(E), 2)
    cols_d0 = edges.ravel()
    vals_d0 = np.tile([-1.0, 1.0], E)
    D0 = sparse.csr_matrix((vals_d0, (rows_d0, cols_d0)), shape=(E, V))
    return CubeSurfaceMesh(n, verts, edges, edge_dir, cells, cell_face, cell_uv,
                           D0, D1, vert_index, edge_index)


_MESH_CACHE: dict = {}


def surface_mesh(n: int) -> CubeSurfaceMesh:
    """Cached closed quad mesh with n cells per cube edge."""
    if n not in _MESH_CACHE:
        _MESH_CACHE[n] = _build(n)
    return _MESH_CACHE[n]
