"""The logarithmic test-function mechanism that kills deltas for p >= n/(n-1).

phi_k equals k on the ball of radius e^{-k}/2, -ln(2|x|) on the annulus up to
radius 1/2, and 0 outside; its gradient has L^n norm (n omega_n)^{1/n} k^{1/n}
while the delta pairing <Div X, phi_k> grows like alpha * k, so a field in
L^{n/(n-1)} admits no delta divergence.  This module computes both sides by
quadrature: the gradient norm and the pairing on the annulus (radial
log-spaced Gauss panels times a product sphere rule), the L^p norm of the
field with singular-ball exclusion and geometric-tail extrapolation, and the
resulting Hoelder bound table.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, NormEstimateDiverged
from .quadrature import gauss_panels, sphere_grid

_OMEGA = {2: np.pi, 3: 4.0 * np.pi / 3.0}  # unit ball volumes


@dataclass(frozen=True)
class LogTestFunction:
    """phi_k: k inside B_{e^{-k}/2}, -ln(2|x|) on the annulus, 0 outside B_{1/2}."""

    k: int
    n: int = 3

    def __post_init__(self):
        if self.k < 1:
            raise InvalidInput(f"k must be a positive integer, got {self.k}")
        if self.n not in (2, 3):
            raise InvalidInput(f"dimension must be 2 or 3, got {self.n}")

    @property
    def inner_radius(self):
        return np.exp(-self.k) / 2.0

    def value(self, x):
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(np.atleast_2d(x), axis=-1)
        out = np.zeros_like(r)
        out[r <= self.inner_radius] = float(self.k)
        ann = (r > self.inner_radius) & (r < 0.5)
        out[ann] = -np.log(2.0 * r[ann])
        return out if x.ndim > 1 else float(out[0])

    def grad(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        r = np.linalg.norm(x, axis=-1)
        out = np.zeros_like(x)
        ann = (r > self.inner_radius) & (r < 0.5)
        out[ann] = -x[ann] / (r[ann] ** 2)[:, None]
        return out


def grad_norm_ln(k: int, n: int = 3, panels_per_decade: float = 2.0,
                 n_per_panel: int = 16) -> float:
    """|grad phi_k|_{L^n(B)} by radial quadrature; equals (n omega_n k)^{1/n}."""
    f = LogTestFunction(k, n)
    r, w = gauss_panels(f.inner_radius, 0.5, n_per_panel=n_per_panel,
                        panels_per_decade=panels_per_decade)
    integral = n * _OMEGA[n] * float(np.dot(w, 1.0 / r))
    return integral ** (1.0 / n)


def _grad_dual_norm(k: int, q: float, n: int = 3) -> float:
    """|grad phi_k|_{L^q} on the annulus (the Hoelder partner norm)."""
    f = LogTestFunction(k, n)
    r, w = gauss_panels(f.inner_radius, 0.5, n_per_panel=16, panels_per_decade=2.0)
    integral = n * _OMEGA[n] * float(np.dot(w, r ** (n - 1.0 - q)))
    return integral ** (1.0 / q)


def _require_origin_singularity(field):
    sings = field.singularities()
    for s in sings:
        if np.linalg.norm(s.pos) > 1e-9:
            raise InvalidInput(
                f"singularity at {s.pos} is off-origin; shift the field first")
    return sings


def pairing_growth(field, k_list, n_theta: int = 24, n_phi: int = 48,
                   n_per_panel: int = 16) -> list:
    """Rows (k, pairing, ratio) with pairing = <Div X, phi_k> = -int X.grad(phi_k).

    On the annulus -X.grad(phi_k) = (X.rhat)/r, so the pairing reduces to a
    radial-times-sphere quadrature.  For a degree-alpha origin singularity
    every row's ratio is alpha times the flux unit.
    """
    _require_origin_singularity(field)
    om, wom = sphere_grid(n_theta, n_phi)
    rows = []
    for k in k_list:
        f = LogTestFunction(int(k), 3)
        r, wr = gauss_panels(f.inner_radius, 0.5, n_per_panel=n_per_panel,
                             panels_per_decade=2.0)
        pts = r[:, None, None] * om[None, :, :]
        vals = field.evaluate(pts.reshape(-1, 3)).reshape(len(r), len(om), 3)
        radial = np.einsum("roi,oi->ro", vals, om)
        pairing = float(np.einsum("r,o,ro->", wr * r, wom, radial))
        rows.append({"k": int(k), "pairing": pairing, "ratio": pairing / k})
    return rows


def lp_norm(field, p: float, radii=(0.1, 0.05, 0.025), n_grid: int = 48,
            ball_radius: float = 0.999) -> float:
    """|X|_{L^p(B)} with singular-ball exclusion and tail extrapolation.

    The integral outside fixed charts around the singularities comes from a
    midpoint grid; each chart is integrated on spherical shells down to the
    exclusion radius rho, for rho in `radii` (decreasing).  The tail is
    extrapolated from the geometric decay of the increments; increments that
    fail to decay mean the norm diverges and NormEstimateDiverged is raised.
    """
    if p < 1.0:
        raise InvalidInput(f"p must be >= 1, got {p}")
    radii = tuple(sorted(radii, reverse=True))
    if len(radii) < 3:
        raise InvalidInput("need at least 3 exclusion radii for extrapolation")
    sings = field.singularities()
    h = 2.0 / n_grid
    ax = -1.0 + h * (np.arange(n_grid) + 0.5)
    X, Y, Z = np.meshgrid(ax, ax, ax, indexing="ij")
    pts = np.stack([X, Y, Z], axis=-1).reshape(-1, 3)
    keep = np.linalg.norm(pts, axis=1) <= ball_radius
    caps = []
    for s in sings:
        pos = np.asarray(s.pos)
        r0 = min(0.15, 0.5 * (ball_radius - np.linalg.norm(pos)))
        for t in sings:
            if t is not s:
                r0 = min(r0, 0.45 * np.linalg.norm(pos - np.asarray(t.pos)))
        if r0 <= radii[0]:
            raise InvalidInput(
                "singularities too close to the sphere or to each other for "
                f"the exclusion radii (chart radius {r0:.3g} <= {radii[0]})")
        caps.append((pos, r0))
        keep &= np.linalg.norm(pts - pos, axis=1) > r0
    base = float(np.sum(np.linalg.norm(field.evaluate(pts[keep]), axis=1) ** p) * h ** 3)
    if not caps:
        return base ** (1.0 / p)
    om, wom = sphere_grid(24, 48)
    vals_at = []
    for rho in radii:
        tot = base
        for pos, r0 in caps:
            r, wr = gauss_panels(rho, r0, n_per_panel=16, panels_per_decade=3.0)
            ptsr = pos[None, None, :] + r[:, None, None] * om[None, :, :]
            v = field.evaluate(ptsr.reshape(-1, 3)).reshape(len(r), len(om), 3)
            mag = np.linalg.norm(v, axis=-1) ** p
            tot += float(np.einsum("r,o,ro->", wr * r ** 2, wom, mag))
        vals_at.append(tot)
    d0 = vals_at[1] - vals_at[0]
    d1 = vals_at[2] - vals_at[1]
    if d1 >= d0 * (1.0 - 1e-3) or d0 <= 0.0:
        raise NormEstimateDiverged(
            f"L^{p} increments do not decay (d0={d0:.3e}, d1={d1:.3e}); "
            "the norm appears infinite")
    theta = d1 / d0
    tail = d1 * theta / (1.0 - theta)
    return (vals_at[2] + tail) ** (1.0 / p)


def hoelder_bound_check(field, p: float, k_list, radii=(0.1, 0.05, 0.025)) -> list:
    """Rows (k, pairing, bound, ratio): |pairing| against |X|_p |grad phi_k|_p'.

    The bound is the honest Hoelder pairing estimate with the dual-exponent
    gradient norm computed on the annulus; at p = n/(n-1) it reduces to the
    closed-form C k^{1/n} growth.  Raises NormEstimateDiverged when the field
    is not in L^p (that refusal is the Lemma's hypothesis failing).
    """
    if p < 1.0 + 1e-12:
        raise InvalidInput("p must exceed 1 for a finite dual exponent")
    norm_p = lp_norm(field, p, radii=radii)
    q = p / (p - 1.0)
    rows = pairing_growth(field, k_list)
    out = []
    for row in rows:
        k = row["k"]
        bound = norm_p * _grad_dual_norm(k, q, 3)
        out.append({"k": k, "pairing": abs(row["pairing"]), "bound": bound,
                    "ratio": abs(row["pairing"]) / bound if bound > 0 else np.inf})
    return out
