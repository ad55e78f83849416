"""Integer 1-currents connecting signed point singularities in the unit ball.

Three constructions: a greedy feasible current (iterate over positive nodes
in input order, attach negatives with remainder carrying, route leftovers to
the nearest boundary point), the exact mass minimizer (unit expansion of the
degrees plus a boundary reservoir, solved as a square assignment problem,
hence integral), and the dual Lipschitz-potential value (a finite LP over
potential values at the singularities; pairwise Lipschitz and support
constraints; any feasible finite assignment extends to a compactly supported
1-Lipschitz function, so the finite LP attains the continuum sup).  The
boundary of the ball acts as a free reservoir at cost 1 - |x|, which obeys
the triangle inequality against segment costs, so the assignment optimum and
the LP value coincide and certificates close to ~1e-12.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.optimize import linear_sum_assignment, linprog

from .errors import CertificateInvalid, InvalidInput, SolverFailure
from .fields import Singularity
from .quadrature import gauss_panels, sphere_grid, _nodes_1d

_BOUNDARY_TOL = 1e-9


def nearest_boundary(x) -> np.ndarray:
    """Closest point of the unit sphere; the origin maps to e1."""
    x = np.asarray(x, dtype=float)
    n = np.linalg.norm(x)
    if n < 1e-12:
        return np.array([1.0, 0.0, 0.0])
    return x / n


def _check_sings(sings):
    out = []
    for s in sings:
        if isinstance(s, Singularity):
            out.append(s)
        else:
            pos, deg = s
            out.append(Singularity(tuple(float(v) for v in pos), int(deg)))
    return out


@dataclass(frozen=True)
class CurrentSegment:
    start: tuple
    end: tuple
    multiplicity: int

    def __post_init__(self):
        if self.multiplicity < 1:
            raise InvalidInput("segment multiplicity must be a positive integer")

    @property
    def length(self):
        return float(np.linalg.norm(np.asarray(self.end) - np.asarray(self.start)))

    @property
    def mass(self):
        return self.multiplicity * self.length


@dataclass
class Current1:
    """Formal sum of oriented segments with positive integer multiplicities."""

    segments: list
    mass: float = dc_field(default=None)

    def __post_init__(self):
        self.segments = [s if isinstance(s, CurrentSegment) else CurrentSegment(*s)
                         for s in self.segments]
        if self.mass is None:
            self.mass = sum(s.mass for s in self.segments)

    def recompute_mass(self):
        return sum(s.mass for s in self.segments)

    def boundary_signature(self, decimals: int = 9) -> dict:
        """Net degree at each interior endpoint; sphere points excluded."""
        sig = {}
        for s in self.segments:
            for pt, w in ((s.end, s.multiplicity), (s.start, -s.multiplicity)):
                if np.linalg.norm(pt) >= 1.0 - _BOUNDARY_TOL:
                    continue
                key = tuple(round(float(v), decimals) for v in pt)
                sig[key] = sig.get(key, 0) + w
        return {k: v for k, v in sig.items() if v != 0}

    def pair_with(self, phi, flux_unit: float = 1.0) -> float:
        """<boundary of the current, phi> = sum mult (phi(end) - phi(start))."""
        tot = 0.0
        for s in self.segments:
            tot += s.multiplicity * (phi(np.asarray(s.end)) - phi(np.asarray(s.start)))
        return flux_unit * tot


def _merge(segs) -> list:
    merged = {}
    for start, end, mult in segs:
        a = tuple(round(float(v), 12) for v in start)
        b = tuple(round(float(v), 12) for v in end)
        if a == b:
            continue
        merged[(a, b)] = merged.get((a, b), 0) + mult
    return [CurrentSegment(a, b, m) for (a, b), m in merged.items() if m > 0]


def greedy_connection(sings) -> Current1:
    """Feasible current by the iterative traversal with remainder carrying.

    Positive nodes are visited in input order; each absorbs negatives (also
    in input order) by transfers of min(remaining supply, remaining demand).
    Unmatched remainders go to the nearest boundary point of their own node:
    boundary -> positive, negative -> boundary, so the interior boundary
    signature always equals the input signature.
    """
    sings = _check_sings(sings)
    pos = [(np.asarray(s.pos), s.degree) for s in sings if s.degree > 0]
    neg = [(np.asarray(s.pos), -s.degree) for s in sings if s.degree < 0]
    segs = []
    i = j = 0
    p_rem = [d for _, d in pos]
    n_rem = [d for _, d in neg]
    while i < len(pos) and j < len(neg):
        k = min(p_rem[i], n_rem[j])
        segs.append((neg[j][0], pos[i][0], k))
        p_rem[i] -= k
        n_rem[j] -= k
        if p_rem[i] == 0:
            i += 1
        if n_rem[j] == 0:
            j += 1
    for s in range(i, len(pos)):
        if p_rem[s] > 0:
            segs.append((nearest_boundary(pos[s][0]), pos[s][0], p_rem[s]))
    for s in range(j, len(neg)):
        if n_rem[s] > 0:
            segs.append((neg[s][0], nearest_boundary(neg[s][0]), n_rem[s]))
    return Current1(_merge(segs))


def optimal_connection(sings) -> Current1:
    """Mass-minimizing current with the given boundary signature.

    Unit expansion plus a boundary reservoir turns the problem into a square
    assignment: rows are positive units and q boundary slots, columns are
    negative units and p boundary slots; reservoir legs cost 1 - |x| and
    slot-slot pairs cost 0.  The assignment optimum is integral and, because
    the costs satisfy the triangle inequality through the reservoir, equals
    the Kantorovich dual value.
    """
    sings = _check_sings(sings)
    P = []
    N = []
    for s in sings:
        reps = abs(s.degree)
        (P if s.degree > 0 else N).extend([np.asarray(s.pos)] * reps)
    p, q = len(P), len(N)
    if p == 0 and q == 0:
        return Current1([])
    C = np.zeros((p + q, q + p))
    for i in range(p):
        for j in range(q):
            C[i, j] = np.linalg.norm(P[i] - N[j])
        C[i, q:] = 1.0 - np.linalg.norm(P[i])
    neg_caps = np.array([1.0 - np.linalg.norm(nj) for nj in N])
    C[p:, :q] = neg_caps[None, :]
    # C[p:, q:] stays 0: unused reservoir slots pair off freely
    rows, cols = linear_sum_assignment(C)
    segs = []
    for r, c in zip(rows, cols):
        if r < p and c < q:
            segs.append((N[c], P[r], 1))
        elif r < p:
            segs.append((nearest_boundary(P[r]), P[r], 1))
        elif c < q:
            segs.append((N[c], nearest_boundary(N[c]), 1))
    return Current1(_merge(segs))


@dataclass
class DualCertificate:
    """Potential values at the singularities and the dual objective."""

    positions: np.ndarray       # (n, 3)
    degrees: np.ndarray         # (n,)
    potentials: np.ndarray      # (n,)
    value: float

    def check_feasible(self, tol: float = 1e-9):
        """Raise CertificateInvalid on the first violated constraint."""
        n = len(self.degrees)
        for j in range(n):
            cap = 1.0 - np.linalg.norm(self.positions[j])
            if abs(self.potentials[j]) > cap + tol:
                raise CertificateInvalid(
                    f"support constraint at node {j}: |phi|={abs(self.potentials[j]):.6g} "
                    f"> 1-|x|={cap:.6g}")
        for i in range(n):
            for j in range(i + 1, n):
                lip = np.linalg.norm(self.positions[i] - self.positions[j])
                if abs(self.potentials[i] - self.potentials[j]) > lip + tol:
                    raise CertificateInvalid(
                        f"Lipschitz constraint between nodes {i} and {j}: "
                        f"|dphi|={abs(self.potentials[i]-self.potentials[j]):.6g} > {lip:.6g}")


def dual_value(sings) -> DualCertificate:
    """Max of sum d_j phi_j over 1-Lipschitz potentials vanishing at |x|=1."""
    sings = _check_sings(sings)
    if not sings:
        return DualCertificate(np.zeros((0, 3)), np.zeros(0, dtype=int),
                               np.zeros(0), 0.0)
    X = np.array([s.pos for s in sings])
    d = np.array([s.degree for s in sings], dtype=float)
    n = len(sings)
    rows = []
    rhs = []
    for i in range(n):
        for j in range(i + 1, n):
            lip = np.linalg.norm(X[i] - X[j])
            r = np.zeros(n)
            r[i], r[j] = 1.0, -1.0
            rows.append(r.copy())
            rhs.append(lip)
            r[i], r[j] = -1.0, 1.0
            rows.append(r)
            rhs.append(lip)
    caps = 1.0 - np.linalg.norm(X, axis=1)
    bounds = [(-c, c) for c in caps]
    if rows:
        res = linprog(-d, A_ub=np.array(rows), b_ub=np.array(rhs),
                      bounds=bounds, method="highs-ds")
    else:
        res = linprog(-d, bounds=bounds, method="highs-ds")
    if not res.success:
        raise SolverFailure(f"dual LP failed: {res.message}")
    return DualCertificate(X, np.array([s.degree for s in sings]),
                           res.x, float(-res.fun))


def certify(primal: Current1, dual: DualCertificate, tol: float = 1e-9):
    """(optimal?, gap): gap = mass - dual value; raises on infeasible duals."""
    dual.check_feasible(tol=tol)
    gap = primal.mass - dual.value
    return bool(gap <= tol), float(gap)


# ----------------------------------------------------------------------
# boundary residual: <Div X, phi> against the current's endpoint pairing
# ----------------------------------------------------------------------

def _bump(c, R):
    """Smooth bump supported in |x - c| < R, value exp(1 - 1/(1 - s^2))."""
    c = np.asarray(c, dtype=float)

    def phi(x):
        x = np.asarray(x, dtype=float)
        s2 = np.sum((np.atleast_2d(x) - c) ** 2, axis=-1) / R ** 2
        out = np.zeros(s2.shape)
        inside = s2 < 1.0
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - s2[inside]))
        return out if x.ndim > 1 else float(out[0])

    def grad(x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        dx = x - c
        s2 = np.sum(dx ** 2, axis=-1) / R ** 2
        out = np.zeros_like(dx)
        inside = s2 < 1.0
        f = np.exp(1.0 - 1.0 / (1.0 - s2[inside]))
        out[inside] = (-2.0 / R ** 2) * (f / (1.0 - s2[inside]) ** 2)[:, None] * dx[inside]
        return out

    return phi, grad


def _window(s):
    """C-infinity cutoff: 1 for s <= 1/2, 0 for s >= 1."""
    s = np.asarray(s, dtype=float)
    def g(t):
        out = np.zeros_like(t)
        pos = t > 0
        out[pos] = np.exp(-1.0 / t[pos])
        return out
    a = g(2.0 - 2.0 * s)
    b = g(2.0 * s - 1.0)
    with np.errstate(invalid="ignore"):
        w = np.where(a + b > 0, a / np.where(a + b > 0, a + b, 1.0), 0.0)
    return w


def _field_grad_integral(field, phi_grad, center, R, sings, n_box: int = 48,
                         n_radial: int = 64, chart_radius_cap: float = 0.2):
    """int X . grad(phi) over the ball, charts near singularities + box rule."""
    sing_pos = [np.asarray(s.pos) for s in sings]
    radii = []
    for k, xk in enumerate(sing_pos):
        r = chart_radius_cap
        for l, xl in enumerate(sing_pos):
            if l != k:
                r = min(r, 0.45 * np.linalg.norm(xk - xl))
        radii.append(r)
    total = 0.0
    # charts: smooth window chi_k, integrand (chi_k X . grad phi) s^2 is regular
    om, wom = sphere_grid(24, 48)
    for xk, rk in zip(sing_pos, radii):
        s_nodes, s_wts = gauss_panels(rk * 1e-6, rk, n_per_panel=16,
                                      panels_per_decade=1.0)
        pts = xk[None, None, :] + s_nodes[:, None, None] * om[None, :, :]
        flatp = pts.reshape(-1, 3)
        vals = field.evaluate(flatp)
        gp = phi_grad(flatp)
        chi = _window((np.linalg.norm(flatp - xk, axis=1) / rk))
        integrand = chi * np.einsum("pi,pi->p", vals, gp)
        integrand = integrand.reshape(len(s_nodes), len(om))
        total += float(np.einsum("s,o,so->", s_wts * s_nodes ** 2, wom, integrand))
    # box: the complementary window over the bump's support box
    x1, w1 = _nodes_1d(n_box, "gauss")
    axs = [center[a] + 2.0 * R * x1 for a in range(3)]
    XX, YY, ZZ = np.meshgrid(*axs, indexing="ij")
    pts = np.stack([XX, YY, ZZ], axis=-1).reshape(-1, 3)
    wts = (w1[:, None, None] * w1[None, :, None] * w1[None, None, :]).ravel() * (2.0 * R) ** 3
    vals = field.evaluate(pts)
    gp = phi_grad(pts)
    chi_tot = np.zeros(len(pts))
    for xk, rk in zip(sing_pos, radii):
        chi_tot += _window(np.linalg.norm(pts - xk, axis=1) / rk)
    integrand = (1.0 - np.clip(chi_tot, 0.0, 1.0)) * np.einsum("pi,pi->p", vals, gp)
    total += float(np.dot(wts, integrand))
    return total


def boundary_residual(field, current: Current1, n_test: int = 20, seed: int = 0,
                      n_box: int = 48) -> float:
    """Max over random test bumps of |<Div X, phi> - <boundary of L, phi>|.

    <Div X, phi> = -int X . grad(phi) by parts (phi compactly supported);
    the current pairs by multiplicity-weighted endpoint differences times the
    flux unit.  Bump centers stay in B_{0.6} with support radius keeping the
    bump strictly inside the ball.
    """
    rng = np.random.default_rng(seed)
    sings = field.singularities()
    worst = 0.0
    for _ in range(n_test):
        while True:
            c = rng.uniform(-0.6, 0.6, size=3)
            if np.linalg.norm(c) < 0.6:
                break
        R = rng.uniform(0.15, min(0.35, 0.95 - np.linalg.norm(c)))
        phi, grad = _bump(c, R)
        lhs = -_field_grad_integral(field, grad, c, R, sings, n_box=n_box)
        rhs = current.pair_with(phi, flux_unit=field.flux_unit)
        worst = max(worst, abs(lhs - rhs))
    return worst
