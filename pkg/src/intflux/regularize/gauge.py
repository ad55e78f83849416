"""Gauge fixing on the cube surface: a 1-form with prescribed curl, zero div.

Given per-cell fluxes phi with (near-)zero total on the closed surface mesh,
solve L psi = phi with L = D1 @ D1.T (one pinned sparse solve) and set
alpha = D1.T @ psi.  Then d(alpha) = L psi = phi exactly, and the discrete
codifferential D0.T @ alpha vanishes identically because D1 @ D0 = 0, which
is the rotated-gradient analogue of solving a surface Poisson equation for a
potential.  The constant ambiguity in psi is fixed by the pin and never
enters alpha.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInput, NonZeroTotalFlux
from .surface import CubeSurfaceMesh, surface_mesh


@dataclass
class Boundary1Form:
    """Edge circulations alpha on a cube surface with d(alpha) = phi."""

    mesh: CubeSurfaceMesh
    center: np.ndarray
    side: float
    alpha: np.ndarray           # (E,) circulations along canonical edge orientation
    psi: np.ndarray             # (F,) dual potential
    phi: np.ndarray             # (F,) the (adjusted) cell fluxes actually matched
    total_flux: float           # input total before adjustment
    d_residual: float           # max |D1 alpha - phi|
    delta_residual: float       # max |D0.T alpha|

    @property
    def h(self):
        return self.side / self.mesh.n


def gauge_fix(phi, center, side, n_f: int = None, mesh: CubeSurfaceMesh = None,
              tol: float = 1e-3) -> Boundary1Form:
    """Edge 1-form alpha with d(alpha) = phi on the closed cube surface.

    phi: per-cell fluxes, either flat (6*n^2,) in mesh cell order or shaped
    (6, n, n) in FACES order (outward orientation).  |sum(phi)| must not
    exceed tol; the residual total is spread evenly over the cells before
    solving, so the reported d_residual is against the adjusted phi.
    """
    phi = np.asarray(phi, dtype=float)
    if mesh is None:
        if n_f is None:
            if phi.ndim == 3:
                n_f = phi.shape[1]
            else:
                raise InvalidInput("pass n_f or a mesh for flat phi")
        mesh = surface_mesh(n_f)
    phi = phi.reshape(-1)
    if phi.shape[0] != mesh.n_cells:
        raise InvalidInput(
            f"phi has {phi.shape[0]} cells, mesh has {mesh.n_cells}")
    total = float(phi.sum())
    if abs(total) > tol:
        raise NonZeroTotalFlux(
            f"boundary total {total:.3e} exceeds tol {tol:.1e}; "
            "gauge fixing needs (numerically) closed data")
    phi0 = phi - total / phi.shape[0]
    psi = mesh.pinned_lu().solve(phi0)
    alpha = mesh.D1.T @ psi
    d_res = float(np.max(np.abs(mesh.D1 @ alpha - phi0)))
    delta_res = float(np.max(np.abs(mesh.D0.T @ alpha)))
    return Boundary1Form(mesh, np.asarray(center, dtype=float), float(side),
                         alpha, psi, phi0, total, d_res, delta_res)
