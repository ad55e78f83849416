"""Restriction of a field to the cube skeleton and conservative smoothing.

Each interior or outer face of the decomposition stores an (n_f, n_f) array
of per-cell integrals of X . e_axis (fixed +axis orientation; adjacent cubes
flip the sign to get their outward flux) sampled by the cell-center midpoint
rule, plus the scalar face total.  Smoothing convolves the cell values with a
separable bump kernel (reflect boundary) and then renormalizes so the face
total is unchanged; the stored scalar is carried over verbatim, so per-cube
boundary totals computed from the stored face sums are preserved bitwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage, sparse
from scipy.sparse.linalg import spsolve

from ..decomposition import CubeDecomposition
from ..errors import InvalidInput
from ..quadrature import FACES


@dataclass
class SkeletonFace:
    axis: int
    center: np.ndarray          # (3,) face center in world coordinates
    side: float                 # face edge length (= lattice eps)
    cube_minus: int             # cube index on the -axis side, -1 when outside
    cube_plus: int              # cube index on the +axis side, -1 when outside
    values: np.ndarray          # (n_f, n_f) cell integrals of X . e_axis
    total: float                # stored face integral, preserved by smoothing
    renorm: str = "none"        # which renormalization path the last smoothing took

    @property
    def n_f(self):
        return int(self.values.shape[0])

    @property
    def cell_area(self):
        return (self.side / self.n_f) ** 2

    @property
    def is_outer(self):
        return self.cube_minus < 0 or self.cube_plus < 0

    def outward_sign(self, cube_i):
        if cube_i == self.cube_minus:
            return 1.0
        if cube_i == self.cube_plus:
            return -1.0
        raise InvalidInput(f"cube {cube_i} is not adjacent to this face")

    def densities(self):
        """Cell-mean densities of X . e_axis, shape (n_f, n_f)."""
        return self.values / self.cell_area

    def cell_centers(self):
        """World coordinates of the n_f^2 cell centers, shape (n_f, n_f, 3)."""
        n = self.n_f
        t = (np.arange(n) + 0.5) / n - 0.5
        u_ax, v_ax = [a for a in range(3) if a != self.axis]
        out = np.broadcast_to(self.center, (n, n, 3)).copy()
        out[:, :, u_ax] += t[:, None] * self.side
        out[:, :, v_ax] += t[None, :] * self.side
        return out


@dataclass
class Skeleton:
    decomposition: CubeDecomposition
    faces: list
    face_of_cube: dict          # (cube_i, axis, sign) -> face index
    n_f: int

    @property
    def eps(self):
        return self.decomposition.lattice.eps

    def cube_faces(self, i):
        """The six (face, outward_sign) pairs of cube i, in FACES order."""
        out = []
        for axis, sign in FACES:
            f = self.faces[self.face_of_cube[(i, axis, sign)]]
            out.append((f, f.outward_sign(i)))
        return out

    def cube_cell_fluxes(self, i):
        """Outward per-cell fluxes of cube i, shape (6, n_f, n_f), FACES order."""
        out = np.empty((6, self.n_f, self.n_f))
        for k, (axis, sign) in enumerate(FACES):
            f = self.faces[self.face_of_cube[(i, axis, sign)]]
            out[k] = f.values * f.outward_sign(i)
        return out

    def cube_total(self, i):
        """Boundary flux of cube i from the stored face totals."""
        tot = 0.0
        for axis, sign in FACES:
            f = self.faces[self.face_of_cube[(i, axis, sign)]]
            tot += f.total * f.outward_sign(i)
        return tot

    def outer_faces(self):
        return [f for f in self.faces if f.is_outer]


def restrict_to_skeleton(field, dec: CubeDecomposition, n_f: int = 32,
                         block: int = 200000) -> Skeleton:
    """Sample X . e_axis at cell centers on every face of the decomposition.

    Faces are enumerated once: the +axis face of each cube always, the -axis
    face only when no neighbor owns it.  Evaluation is chunked to bound
    memory on fine lattices.
    """
    lattice = dec.lattice
    eps = lattice.eps
    coords = lattice.index_coords()
    lookup = {tuple(c): i for i, c in enumerate(coords)}
    faces = []
    face_of_cube = {}
    centers = []
    axes = []
    for i in range(lattice.n_sites):
        for axis in range(3):
            for sign in (1, -1):
                nb = list(coords[i])
                nb[axis] += sign
                j = lookup.get(tuple(nb), -1)
                if sign < 0 and j >= 0:
                    continue  # owned by the -axis neighbor as its +face
                if sign < 0:
                    cm, cp = -1, i
                else:
                    cm, cp = i, j
                fc = lattice.sites[i].copy()
                fc[axis] += sign * eps / 2.0
                fidx = len(faces)
                faces.append(SkeletonFace(axis, fc, eps, cm, cp,
                                          np.zeros((n_f, n_f)), 0.0))
                centers.append(fc)
                axes.append(axis)
                face_of_cube[(i, axis, sign)] = fidx
                if j >= 0:
                    face_of_cube[(j, axis, -sign)] = fidx
    # evaluate all cell centers in chunks
    t = (np.arange(n_f) + 0.5) / n_f - 0.5
    uu, vv = np.meshgrid(t * eps, t * eps, indexing="ij")
    area = (eps / n_f) ** 2
    pts_per_face = n_f * n_f
    faces_per_block = max(1, block // pts_per_face)
    for start in range(0, len(faces), faces_per_block):
        sub = faces[start:start + faces_per_block]
        pts = np.empty((len(sub), n_f, n_f, 3))
        for k, f in enumerate(sub):
            u_ax, v_ax = [a for a in range(3) if a != f.axis]
            pts[k] = f.center
            pts[k, :, :, u_ax] += uu
            pts[k, :, :, v_ax] += vv
        vals = field.evaluate(pts.reshape(-1, 3)).reshape(len(sub), n_f, n_f, 3)
        for k, f in enumerate(sub):
            f.values = vals[k, :, :, f.axis] * area
            f.total = float(f.values.sum())
    return Skeleton(dec, faces, face_of_cube, n_f)


def bump_kernel(halfwidth: int) -> np.ndarray:
    """1d kernel from the bump (1 - u^2)^4 on (-1, 1), normalized to sum 1."""
    if halfwidth < 1:
        raise InvalidInput("kernel halfwidth must be >= 1")
    u = np.arange(-halfwidth, halfwidth + 1) / (halfwidth + 1.0)
    k = (1.0 - u * u) ** 4
    return k / k.sum()


def smooth_skeleton(skel: Skeleton, halfwidth: int = 2, passes: int = 1) -> Skeleton:
    """Convolve every face's cell values with a bump kernel, conserving totals.

    Renormalization is multiplicative (scale to the stored total) when the
    smoothed total keeps more than half the original magnitude, additive (a
    constant per-cell shift) otherwise; the stored scalar total is carried
    over untouched either way.  Smoothing acts per face; across-face coupling
    is left to the extension steps, which only consume per-face data.
    """
    k1 = bump_kernel(halfwidth)
    kernel = np.outer(k1, k1)
    for f in skel.faces:
        before = f.total
        smoothed = ndimage.convolve(f.values, kernel, mode="reflect")
        s = smoothed.sum()
        if abs(s) > 0.5 * abs(before) and s != 0.0:
            smoothed *= before / s
            f.renorm = "multiplicative"
        else:
            smoothed += (before - s) / smoothed.size
            f.renorm = "additive"
        for _ in range(passes - 1):
            smoothed = ndimage.convolve(smoothed, kernel, mode="reflect")
            s = smoothed.sum()
            if abs(s) > 0.5 * abs(before) and s != 0.0:
                smoothed *= before / s
            else:
                smoothed += (before - s) / smoothed.size
        f.values = smoothed
        f.total = before
    return skel


def balance_totals(skel: Skeleton, flux_unit: float = 1.0) -> float:
    """Shift each face by a constant so every cube total is exact.

    Restriction leaves each cube's boundary total at the midpoint-rule value,
    off the true one (0 for good cubes, degree * flux_unit for bad) by an
    O(h^2) error.  The gauge step would otherwise spread that deficit over the
    cube's cells, turning it into interface divergence that a flux scan across
    many cubes accumulates.  Taking one uniform shift per face, the least-norm
    correction solves the normal equations on the signed cube-face incidence
    A (a graph Laplacian plus outer-face diagonal, positive definite for any
    lattice that touches its boundary).  Returns the largest cube deficit that
    was removed.  Stored totals and cell values move together.
    """
    dec = skel.decomposition
    n = dec.lattice.n_sites
    targets = np.where(dec.good, 0.0, dec.degrees * flux_unit)
    r = np.array([targets[i] - skel.cube_total(i) for i in range(n)])
    rows, cols, vals = [], [], []
    for k, f in enumerate(skel.faces):
        if f.cube_minus >= 0:
            rows.append(f.cube_minus)
            cols.append(k)
            vals.append(1.0)
        if f.cube_plus >= 0:
            rows.append(f.cube_plus)
            cols.append(k)
            vals.append(-1.0)
    a = sparse.csr_matrix((vals, (rows, cols)), shape=(n, len(skel.faces)))
    shifts = a.T @ spsolve((a @ a.T).tocsc(), r)
    for k, f in enumerate(skel.faces):
        f.values = f.values + shifts[k] / f.values.size
        f.total = f.total + shifts[k]
    return float(np.abs(r).max()) if n else 0.0
