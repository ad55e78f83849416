"""Cubic decomposition of the unit ball and good/bad cube classification.

The lattice at mesh size eps has sites eps*Z^3 + (eps/2, eps/2, eps/2) kept
when they lie in the ball B_{1-3eps}(0), then all shifted by a translation a
with |a| <= eps; every cube C_eps(site + a) then has closure inside the ball
(|site| + eps + eps*sqrt(3)/2 < 1).  The translation is chosen by randomized
sampling: candidates are discarded when some cube flux is not near a multiple
of flux_unit (or a charge hugs the skeleton); survivors are ranked by the
skeleton deviation score

    eps * sum_faces sum_{adjacent cubes} int_face |X.nu - mean_cube . nu|^p dA

with both adjacent cubes contributing on interior faces.  A cube is good when
|flux| / flux_unit < 1 - label_tol, bad otherwise; bad cubes carry the nearest
integer degree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, NoValidTranslation
from .flux import Cube
from .quadrature import (DEFAULT_QUAD, QuadratureSpec, _nodes_1d,
                         refined_cube_flux, volume_points)

SQRT3 = np.sqrt(3.0)


@dataclass(frozen=True)
class CubeLattice:
    """Sites of the shifted cubic lattice, in lexicographic order."""

    eps: float
    translation: tuple
    sites: np.ndarray  # (N, 3), already shifted by translation

    @property
    def n_sites(self):
        return int(self.sites.shape[0])

    def cube(self, i) -> Cube:
        return Cube(tuple(self.sites[i]), self.eps)

    def index_coords(self):
        """Integer lattice coordinates of each site (for neighbor lookup)."""
        base = (self.sites - np.asarray(self.translation)) / self.eps - 0.5
        return np.round(base).astype(int)

    def locate(self, points):
        """Site index containing each point, or -1.

        Points on cube boundaries resolve to the lexicographically smallest
        adjacent cube (floor on the shifted coordinates).
        """
        pts = np.asarray(points, dtype=float)
        coords = np.floor((pts - np.asarray(self.translation)) / self.eps).astype(int)
        lookup = {tuple(c): i for i, c in enumerate(self.index_coords())}
        flat = coords.reshape(-1, 3)
        out = np.array([lookup.get(tuple(c), -1) for c in flat], dtype=int)
        return out.reshape(pts.shape[:-1])


def build_lattice(eps: float, a=(0.0, 0.0, 0.0), allow_empty: bool = False) -> CubeLattice:
    """Sites of eps*Z^3 + eps/2 + a kept when inside B_{1-3eps} (|a| <= eps).

    The ball filter applies to the already-shifted sites, so any point with
    |x| < 1 - 3*eps - eps*sqrt(3)/2 lies in some kept cube regardless of a.
    """
    if not (0 < eps):
        raise InvalidInput(f"eps must be positive, got {eps}")
    a = np.asarray(a, dtype=float)
    if a.shape != (3,):
        raise InvalidInput("translation must be a 3-vector")
    if np.linalg.norm(a) > eps + 1e-12:
        raise InvalidInput(f"|a| = {np.linalg.norm(a):.6f} exceeds eps = {eps}")
    R = 1.0 - 3.0 * eps
    if R <= 0:
        if allow_empty:
            return CubeLattice(eps, tuple(a), np.zeros((0, 3)))
        raise InvalidInput(f"eps = {eps} leaves no room: 1 - 3*eps = {R:.3f} <= 0")
    kmax = int(np.floor(R / eps + 0.5)) + 2
    ax = eps * (np.arange(-kmax, kmax + 1) + 0.5)
    X, Y, Z = np.meshgrid(ax, ax, ax, indexing="ij")
    sites = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1) + a
    sites = sites[np.linalg.norm(sites, axis=1) < R]
    order = np.lexsort((sites[:, 2], sites[:, 1], sites[:, 0]))
    sites = sites[order]
    if len(sites) == 0 and not allow_empty:
        raise InvalidInput(f"eps = {eps} yields an empty site set")
    return CubeLattice(float(eps), tuple(float(v) for v in a), sites)


# ----------------------------------------------------------------------
# per-cube face samples (shared by flux filter and deviation score)
# ----------------------------------------------------------------------

def _face_normal_samples(field, lattice: CubeLattice, quad: QuadratureSpec):
    """Outward X.nu samples on all 6 faces of every cube in one evaluation.

    Returns (vals (N, 6, n^2), weights (n^2,)) with faces in quadrature.FACES
    order; weights include the face area.
    """
    eps = lattice.eps
    n = quad.n
    x1, w1 = _nodes_1d(n, quad.rule)
    uu, vv = np.meshgrid(x1 * eps, x1 * eps, indexing="ij")
    uu, vv = uu.ravel(), vv.ravel()
    w2 = np.outer(w1, w1).ravel() * eps * eps
    offs = []
    normals = []
    from .quadrature import FACES
    for axis, sign in FACES:
        u_ax, v_ax = [t for t in range(3) if t != axis]
        o = np.zeros((n * n, 3))
        o[:, axis] = sign * eps / 2.0
        o[:, u_ax] = uu
        o[:, v_ax] = vv
        offs.append(o)
        e = np.zeros(3)
        e[axis] = sign
        normals.append(e)
    offs = np.stack(offs)         # (6, n^2, 3)
    normals = np.stack(normals)   # (6, 3)
    pts = lattice.sites[:, None, None, :] + offs[None, :, :, :]
    vals = field.evaluate(pts.reshape(-1, 3)).reshape(lattice.n_sites, 6, n * n, 3)
    vn = np.einsum("cfpi,fi->cfp", vals, normals)
    return vn, w2


@dataclass
class TranslationChoice:
    """Chosen translation with its deviation score and candidate statistics."""

    a: tuple
    score: float
    n_candidates: int
    n_surviving: int
    max_int_deviation: float  # worst flux distance to a flux_unit multiple, chosen candidate
    seed: int


def _neighbor_table(lattice: CubeLattice) -> np.ndarray:
    """(N, 6) site index across each face in FACES order, -1 when absent."""
    from .quadrature import FACES
    coords = lattice.index_coords()
    lookup = {tuple(c): i for i, c in enumerate(coords)}
    nb = np.full((lattice.n_sites, 6), -1, dtype=int)
    for fi, (axis, sign) in enumerate(FACES):
        shifted = coords.copy()
        shifted[:, axis] += sign
        nb[:, fi] = [lookup.get(tuple(c), -1) for c in shifted]
    return nb


def _cell_means(field, lattice: CubeLattice, mean_n: int, block: int = 400000):
    """(N, 3) volume averages, chunked."""
    eps = lattice.eps
    pts, wv = volume_points(np.zeros(3), eps, n=mean_n)
    means = np.empty((lattice.n_sites, 3))
    step = max(1, block // len(pts))
    for i0 in range(0, lattice.n_sites, step):
        chunk = lattice.sites[i0:i0 + step, None, :] + pts[None, :, :]
        vals = field.evaluate(chunk.reshape(-1, 3)).reshape(-1, len(pts), 3)
        means[i0:i0 + step] = np.einsum("q,cqi->ci", wv, vals) / eps**3
    return means


def _deviation_score(field, lattice, quad: QuadratureSpec, p, mean_n=4,
                     block: int = 400000):
    """eps * sum over (face, adjacent cube) of int |X.nu - mean.nu|^p dA.

    Interior faces are enumerated once from the +side owner and contribute
    both adjacent cubes' terms; the neighbor's outward samples are the
    negated owner samples at the same points.
    """
    from .quadrature import FACES
    eps = lattice.eps
    means = _cell_means(field, lattice, mean_n, block)
    nb = _neighbor_table(lattice)
    score = 0.0
    step = max(1, block // (6 * quad.n * quad.n))
    for i0 in range(0, lattice.n_sites, step):
        sub = CubeLattice(eps, lattice.translation, lattice.sites[i0:i0 + step])
        vn, w2 = _face_normal_samples(field, sub, quad)
        for fi, (axis, sign) in enumerate(FACES):
            cj = nb[i0:i0 + step, fi]
            v = vn[:, fi, :]
            own = np.abs(v - (means[i0:i0 + step, axis] * sign)[:, None]) ** p @ w2
            keep = (cj < 0) | (sign > 0)
            score += float(own[keep].sum())
            inner = cj >= 0
            if sign > 0 and inner.any():
                mj = means[cj[inner], axis] * (-sign)
                score += float((np.abs(-v[inner] - mj[:, None]) ** p @ w2).sum())
    return eps * score


def _singularity_boundary_distances(lattice: CubeLattice, spts: np.ndarray):
    """(N,) distance from each cube's boundary to the nearest given point."""
    N = lattice.n_sites
    out = np.full(N, np.inf)
    for p in spts:
        d = np.abs(p - lattice.sites) - lattice.eps / 2.0
        inside = np.max(d, axis=1) <= 0.0
        bdist = np.where(inside, -np.max(d, axis=1),
                         np.linalg.norm(np.maximum(d, 0.0), axis=1))
        out = np.minimum(out, bdist)
    return out


def select_translation(field, eps: float, n_samples: int = 64,
                       quad: QuadratureSpec = QuadratureSpec(12, "gauss"),
                       seed: int = 0, int_tol: float = 1e-5, p: float = 1.0,
                       guard_frac: float = 0.025, refine_frac: float = 0.3,
                       far_cap: int = 4000, score_cap: int = 8) -> TranslationChoice:
    """Sample translations in the closed eps-ball, keep the best integral one.

    A candidate survives when no singularity is within guard_frac*eps of the
    skeleton and every tested cube flux is within int_tol of a flux_unit
    multiple; among survivors the smallest deviation score wins.  Cubes with
    a singularity within refine_frac*eps of their boundary get quadtree-
    refined fluxes, so accuracy does not hinge on the guard.  On lattices
    larger than far_cap the integrality test covers the near cubes plus an
    evenly strided subset (a smooth non-quantized component shows up in every
    cube, so a subset already rejects it); at most score_cap survivors are
    scored.  Raises NoValidTranslation when nothing survives.
    """
    if n_samples < 1:
        raise InvalidInput("need at least one candidate translation")
    rng = np.random.default_rng(seed)
    unit = field.flux_unit
    dirs = rng.normal(size=(n_samples, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    cands = dirs * (eps * rng.uniform(size=(n_samples, 1)) ** (1.0 / 3.0))
    guard = guard_frac * eps
    spts = np.array([s.pos for s in field.singularities()]).reshape(-1, 3)
    best = None
    n_surv = 0
    best_deficit = np.inf
    for a in cands:
        lattice = build_lattice(eps, a)
        N = lattice.n_sites
        bdist = _singularity_boundary_distances(lattice, spts)
        if float(bdist.min(initial=np.inf)) < guard:
            continue
        near = np.nonzero(bdist < refine_frac * eps)[0]
        if N > far_cap:
            far = np.unique(np.round(np.linspace(0, N - 1, far_cap)).astype(int))
            tested = np.union1d(far, near)
        else:
            tested = np.arange(N)
        sub = CubeLattice(eps, lattice.translation, lattice.sites[tested])
        vn, w2 = _face_normal_samples(field, sub, quad)
        fluxes = np.einsum("cfp,p->c", vn, w2)
        refined = np.isin(tested, near)
        for k in np.nonzero(refined)[0]:
            fluxes[k] = refined_cube_flux(field, sub.sites[k], eps, spts, n=8)
        dev = np.abs(fluxes - unit * np.round(fluxes / unit))
        deficit = float(dev.max(initial=0.0))
        best_deficit = min(best_deficit, deficit)
        if deficit > int_tol:
            continue
        n_surv += 1
        if n_surv > score_cap:
            continue
        score = _deviation_score(field, lattice, quad, p)
        if best is None or score < best[1]:
            best = (a, score, deficit)
    if best is None:
        raise NoValidTranslation(
            f"no surviving translation among {n_samples} candidates at eps = {eps} "
            f"(int_tol = {int_tol}, guard = {guard:.3g}, "
            f"best integrality deficit = {best_deficit:.3g})")
    a, score, maxdev = best
    return TranslationChoice(tuple(float(v) for v in a), float(score), n_samples, n_surv,
                             maxdev, int(seed))


# ----------------------------------------------------------------------
# classification
# ----------------------------------------------------------------------

@dataclass
class CubeDecomposition:
    """Per-cube fluxes, good/bad labels, degrees, and cell means."""

    lattice: CubeLattice
    fluxes: np.ndarray       # (N,)
    good: np.ndarray         # (N,) bool
    degrees: np.ndarray      # (N,) int, nearest flux_unit multiple
    cell_means: np.ndarray | None  # (N, 3), None when classify ran with mean_n=0
    flux_unit: float
    ill_conditioned: np.ndarray  # (N,) bool: flux quadrature refused (labelled bad)

    @property
    def n_bad(self):
        return int((~self.good).sum())

    @property
    def bad_indices(self):
        return np.nonzero(~self.good)[0]

    @property
    def bad_volume(self):
        return self.n_bad * self.lattice.eps**3

    def bad_singularities(self):
        """Bad-cube centers with their degrees, as (position, degree) pairs."""
        out = []
        for i in self.bad_indices:
            out.append((tuple(self.lattice.sites[i]), int(self.degrees[i])))
        return out

    def degree_sum(self):
        return int(self.degrees[~self.good].sum())


def classify(field, lattice: CubeLattice, quad: QuadratureSpec = DEFAULT_QUAD,
             label_tol: float = 1e-6, mean_n: int = 4, guard_frac: float = 0.01,
             refine_frac: float = 0.3, block: int = 400000) -> CubeDecomposition:
    """Label every cube good (|flux|/flux_unit < 1 - label_tol) or bad.

    Fluxes come from one chunked vectorized evaluation (same nodes and
    weights as cube_flux); cubes with a singularity within refine_frac*eps of
    their boundary are recomputed with quadtree refinement.  A singularity
    within guard_frac*eps of a cube's boundary marks that cube
    ill-conditioned: labelled bad with degree 0, flux nan.  mean_n = 0 skips
    the cell means.
    """
    unit = field.flux_unit
    N = lattice.n_sites
    eps = lattice.eps
    spts = np.array([s.pos for s in field.singularities()]).reshape(-1, 3)
    bdist = _singularity_boundary_distances(lattice, spts)
    ill = bdist < guard_frac * eps

    fluxes = np.empty(N)
    step = max(1, block // (6 * quad.n * quad.n))
    for i0 in range(0, N, step):
        sub = CubeLattice(eps, lattice.translation, lattice.sites[i0:i0 + step])
        vn, w2 = _face_normal_samples(field, sub, quad)
        fluxes[i0:i0 + step] = np.einsum("cfp,p->c", vn, w2)
    for i in np.nonzero((bdist < refine_frac * eps) & ~ill)[0]:
        fluxes[i] = refined_cube_flux(field, lattice.sites[i], eps, spts, n=8)
    fluxes[ill] = np.nan

    good = np.where(ill, False, np.abs(np.nan_to_num(fluxes)) / unit < 1.0 - label_tol)
    degrees = np.where(ill, 0, np.round(np.nan_to_num(fluxes) / unit)).astype(int)
    means = _cell_means(field, lattice, mean_n, block) if mean_n > 0 else None
    return CubeDecomposition(lattice, fluxes, good, degrees, means, unit, ill)


def decompose(field, eps: float, n_samples: int = 64, seed: int = 0,
              selection_quad: QuadratureSpec = QuadratureSpec(12, "gauss"),
              quad: QuadratureSpec = DEFAULT_QUAD, int_tol: float = 1e-5,
              label_tol: float = 1e-6):
    """select_translation + classify in one step: (choice, decomposition)."""
    choice = select_translation(field, eps, n_samples=n_samples, quad=selection_quad,
                                seed=seed, int_tol=int_tol)
    lattice = build_lattice(eps, choice.a)
    return choice, classify(field, lattice, quad, label_tol=label_tol)


# ----------------------------------------------------------------------
# bad-volume sweep
# ----------------------------------------------------------------------

@dataclass
class SweepResult:
    """Bad-cube counts/volumes per eps and the fitted log-log slope."""

    rows: list  # dicts: eps, a, n_cubes, n_bad, volume
    slope: float | None

    def table(self):
        return [(r["eps"], r["n_bad"], r["volume"]) for r in self.rows]


def bad_volume_sweep(field, eps_list, quad: QuadratureSpec = QuadratureSpec(8, "gauss"),
                     seed: int = 0, n_samples: int = 16, int_tol: float = 1e-3,
                     label_tol: float = 1e-3) -> SweepResult:
    """Bad volume L^3(union of bad cubes) against eps, with log-log slope.

    eps_list needs >= 3 decreasing values.  The slope is fitted over entries
    with positive volume and reported as None when any volume vanishes
    (log undefined); point singularities give slope 3 (count constant).
    """
    eps_list = [float(e) for e in eps_list]
    if len(eps_list) < 3 or any(later >= earlier
                                for later, earlier in zip(eps_list[1:], eps_list[:-1])):
        raise InvalidInput("eps_list must hold >= 3 strictly decreasing values")
    rows = []
    for k, eps in enumerate(eps_list):
        choice = select_translation(field, eps, n_samples=n_samples, quad=quad,
                                    seed=seed + k, int_tol=int_tol)
        lattice = build_lattice(eps, choice.a)
        dec = classify(field, lattice, quad, label_tol=label_tol, mean_n=0)
        rows.append({"eps": eps, "a": choice.a, "n_cubes": lattice.n_sites,
                     "n_bad": dec.n_bad, "volume": dec.bad_volume})
    vols = np.array([r["volume"] for r in rows])
    slope = None
    if np.all(vols > 0):
        slope = float(np.polyfit(np.log([r["eps"] for r in rows]), np.log(vols), 1)[0])
    return SweepResult(rows, slope)
