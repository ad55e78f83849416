"""Surface and volume quadrature rules on axis-aligned cubes.

All cube-boundary integrals in the toolkit go through here.  A rule is a
QuadratureSpec: tensor Gauss-Legendre (default, n points per face edge) or
composite midpoint.  Points and weights are generated per face; a cube's
boundary integral is the sum over its six faces.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidInput

# face index order used everywhere: (axis, sign) pairs
FACES = ((0, -1), (0, 1), (1, -1), (1, 1), (2, -1), (2, 1))


@dataclass(frozen=True)
class QuadratureSpec:
    """Rule for face integrals: `n` points per edge, rule gauss|midpoint|aligned.

    The aligned rule integrates piecewise-polynomial fields exactly: each face
    is split into panels at the planes origin + k * pitch along both
    tangential axes, with an n-point Gauss rule per panel, so `n` is the
    per-panel order (2 suffices for anything up to bilinear pieces).  pitch
    and origin may be left None when the integrand field carries grid_pitch
    and grid_origin attributes to resolve them from.
    """

    n: int = 32
    rule: str = "gauss"
    pitch: float = None
    origin: tuple = None

    def __post_init__(self):
        if self.n < 2:
            raise InvalidInput(f"quadrature needs n >= 2 points per edge, got {self.n}")
        if self.rule not in ("gauss", "midpoint", "aligned"):
            raise InvalidInput(f"unknown quadrature rule {self.rule!r}")
        if self.pitch is not None and not (self.pitch > 0.0):
            raise InvalidInput(f"panel pitch must be positive, got {self.pitch}")


DEFAULT_QUAD = QuadratureSpec()


@lru_cache(maxsize=64)
def _nodes_1d(n: int, rule: str):
    """Nodes and weights on [-1/2, 1/2]."""
    if rule == "gauss":
        x, w = np.polynomial.legendre.leggauss(n)
        return 0.5 * x, 0.5 * w
    x = (np.arange(n) + 0.5) / n - 0.5
    w = np.full(n, 1.0 / n)
    return x, w


def _aligned_axis_nodes(lo: float, hi: float, pitch: float, org: float, n: int):
    """Composite Gauss nodes on [lo, hi] with panel cuts at org + k * pitch.

    Absolute coordinates; weights sum to hi - lo.
    """
    tol = 1e-12 * (hi - lo)
    k0 = np.ceil((lo - org) / pitch)
    k1 = np.floor((hi - org) / pitch)
    cuts = org + pitch * np.arange(k0, k1 + 1)
    cuts = cuts[(cuts > lo + tol) & (cuts < hi - tol)]
    bounds = np.concatenate([[lo], cuts, [hi]])
    xg, wg = np.polynomial.legendre.leggauss(n)
    mid = 0.5 * (bounds[1:] + bounds[:-1])
    half = 0.5 * (bounds[1:] - bounds[:-1])
    x = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    w = (half[:, None] * wg[None, :]).ravel()
    return x, w


def resolve_aligned(quad: QuadratureSpec, field) -> QuadratureSpec:
    """Fill an aligned spec's pitch/origin from the field when left None."""
    if quad.rule != "aligned" or quad.pitch is not None:
        return quad
    pitch = getattr(field, "grid_pitch", None)
    origin = getattr(field, "grid_origin", None)
    if pitch is None or origin is None:
        raise InvalidInput("aligned quadrature needs pitch/origin, either on "
                           "the spec or as grid_pitch/grid_origin field attributes")
    return QuadratureSpec(quad.n, "aligned", float(pitch),
                          tuple(float(c) for c in origin))


def face_points(center, axis, sign, side, quad=DEFAULT_QUAD):
    """Quadrature points/weights for one cube face.

    center/side describe the cube; the face is the one with outward normal
    sign*e_axis.  Returns (points (n^2,3), weights (n^2,), normal (3,)).
    Weights include the face area.
    """
    center = np.asarray(center, dtype=float)
    u_ax, v_ax = [a for a in range(3) if a != axis]
    if quad.rule == "aligned":
        if quad.pitch is None or quad.origin is None:
            raise InvalidInput("aligned quadrature used without resolved pitch/origin")
        xu, wu = _aligned_axis_nodes(center[u_ax] - side / 2.0,
                                     center[u_ax] + side / 2.0,
                                     quad.pitch, quad.origin[u_ax], quad.n)
        xv, wv = _aligned_axis_nodes(center[v_ax] - side / 2.0,
                                     center[v_ax] + side / 2.0,
                                     quad.pitch, quad.origin[v_ax], quad.n)
        uu, vv = np.meshgrid(xu, xv, indexing="ij")
        wts = np.outer(wu, wv).ravel()
    else:
        x1, w1 = _nodes_1d(quad.n, quad.rule)
        uu, vv = np.meshgrid(center[u_ax] + x1 * side,
                             center[v_ax] + x1 * side, indexing="ij")
        wts = (np.outer(w1, w1).ravel()) * side * side
    pts = np.empty((uu.size, 3))
    pts[:, axis] = center[axis] + sign * side / 2.0
    pts[:, u_ax] = uu.ravel()
    pts[:, v_ax] = vv.ravel()
    normal = np.zeros(3)
    normal[axis] = float(sign)
    return pts, wts, normal


def face_flux(field, center, axis, sign, side, quad=DEFAULT_QUAD):
    """Integral of X . nu over one face."""
    pts, wts, normal = face_points(center, axis, sign, side,
                                   resolve_aligned(quad, field))
    vals = field.evaluate(pts)
    return float(np.dot(wts, vals @ normal))


def boundary_points(center, side, quad=DEFAULT_QUAD):
    """All six faces stacked: (points (6n^2,3), weights, normals (6n^2,3))."""
    pts_all, wts_all, nrm_all = [], [], []
    for axis, sign in FACES:
        pts, wts, normal = face_points(center, axis, sign, side, quad)
        pts_all.append(pts)
        wts_all.append(wts)
        nrm_all.append(np.broadcast_to(normal, pts.shape))
    return np.vstack(pts_all), np.concatenate(wts_all), np.vstack(nrm_all)


def volume_points(center, side, n=4, rule="gauss"):
    """Tensor quadrature points/weights over the solid cube."""
    x1, w1 = _nodes_1d(n, rule)
    center = np.asarray(center, dtype=float)
    g = x1 * side
    X, Y, Z = np.meshgrid(g, g, g, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1) + center
    w = np.einsum("i,j,k->ijk", w1, w1, w1).ravel() * side**3
    return pts, w


def cell_mean(field, center, side, n=4):
    """Volume average of the field over a cube (Gauss tensor rule)."""
    pts, w = volume_points(center, side, n=n)
    vals = field.evaluate(pts)
    return (w[:, None] * vals).sum(axis=0) / side**3


def refined_face_flux(field, center, side, axis, sign, near, n: int = 8,
                      split: float = 1.0, max_depth: int = 9) -> float:
    """Face flux with quadtree refinement towards the given near points.

    A panel splits into four while some near point is closer to it than
    split * panel side (and depth < max_depth), so the final panels have side
    <~ their distance to the nearest point and plain Gauss-n converges fast
    even when a point almost touches the face.  With `near` empty this is a
    single Gauss-n panel.
    """
    c = np.asarray(center, dtype=float)
    near = np.asarray(near, dtype=float).reshape(-1, 3)
    u_ax, v_ax = [t for t in range(3) if t != axis]
    plane = c[axis] + sign * side / 2.0
    x1, w1 = _nodes_1d(n, "gauss")
    uu, vv = np.meshgrid(x1, x1, indexing="ij")
    uu, vv = uu.ravel(), vv.ravel()
    w2 = np.outer(w1, w1).ravel()
    dz2 = (near[:, axis] - plane) ** 2 if len(near) else None
    total = 0.0
    stack = [(c[u_ax], c[v_ax], side, 0)]
    while stack:
        u0, v0, h, depth = stack.pop()
        if len(near) and depth < max_depth:
            du = np.maximum(np.abs(near[:, u_ax] - u0) - h / 2.0, 0.0)
            dv = np.maximum(np.abs(near[:, v_ax] - v0) - h / 2.0, 0.0)
            dist = float(np.sqrt(dz2 + du**2 + dv**2).min())
            if dist < split * h:
                q = h / 4.0
                stack.extend([(u0 - q, v0 - q, h / 2.0, depth + 1),
                              (u0 - q, v0 + q, h / 2.0, depth + 1),
                              (u0 + q, v0 - q, h / 2.0, depth + 1),
                              (u0 + q, v0 + q, h / 2.0, depth + 1)])
                continue
        pts = np.empty((len(uu), 3))
        pts[:, axis] = plane
        pts[:, u_ax] = u0 + uu * h
        pts[:, v_ax] = v0 + vv * h
        vals = field.evaluate(pts)
        total += sign * h * h * float(np.dot(w2, vals[:, axis]))
    return total


def refined_cube_flux(field, center, side, near, n: int = 8,
                      split: float = 1.0, max_depth: int = 9) -> float:
    """Boundary flux via refined_face_flux on all six faces."""
    return sum(refined_face_flux(field, center, side, axis, sign, near,
                                 n=n, split=split, max_depth=max_depth)
               for axis, sign in FACES)


@lru_cache(maxsize=32)
def sphere_grid(n_theta=24, n_phi=48):
    """Product quadrature on the unit sphere: Gauss in cos(theta), uniform phi.

    Returns (directions (N,3), weights (N,)) with weights summing to 4*pi.
    """
    mu, wmu = np.polynomial.legendre.leggauss(n_theta)
    phi = (np.arange(n_phi) + 0.5) * (2.0 * np.pi / n_phi)
    MU, PH = np.meshgrid(mu, phi, indexing="ij")
    st = np.sqrt(1.0 - MU**2)
    dirs = np.stack([st * np.cos(PH), st * np.sin(PH), MU], axis=-1).reshape(-1, 3)
    wts = (np.outer(wmu, np.full(n_phi, 2.0 * np.pi / n_phi))).ravel()
    return dirs, wts


@lru_cache(maxsize=64)
def gauss_panels(a: float, b: float, n_per_panel: int = 16, panels_per_decade: float = 1.0):
    """Composite Gauss nodes on [a, b], panels log-spaced.

    Suited to integrands like 1/r with huge dynamic range; (nodes, weights).
    """
    if not (0.0 < a < b):
        raise InvalidInput(f"need 0 < a < b, got [{a}, {b}]")
    n_panels = max(1, int(np.ceil(np.log10(b / a) * panels_per_decade)))
    edges = np.geomspace(a, b, n_panels + 1)
    x, w = np.polynomial.legendre.leggauss(n_per_panel)
    nodes, wts = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
        nodes.append(mid + half * x)
        wts.append(half * w)
    return np.concatenate(nodes), np.concatenate(wts)
