"""Vector fields on the unit ball with quantized fluxes.

Analytic generators (Coulomb superpositions, D-fields of sphere-valued maps)
carry their singularities as metadata; sampled fields interpolate a node grid.
The flux convention is recorded by FieldConvention: a degree-d singularity
contributes flux d * flux_unit through any enclosing cube boundary, and the
default flux_unit = 1 makes degree and flux numerically equal.

Coulomb superposition:   X(x) = sum_j d_j (x - x_j) / (4 pi |x - x_j|^3)
D-field of u: S^2 -> S^2: D(u) = (u . d2u x d3u, u . d3u x d1u, u . d1u x d2u)
with the hedgehog u(x) = (x - c)/|x - c| giving D(u) = (x - c)/|x - c|^3
(flux 4 pi; normalize=True divides by 4 pi so the flux is 1 * flux_unit).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import FieldDomainError, GridRangeError, InvalidInput

_SING_EVAL_TOL = 1e-12


@dataclass(frozen=True)
class FieldConvention:
    """Unit of quantized flux; degree d means flux d * flux_unit."""

    flux_unit: float = 1.0

    def __post_init__(self):
        if not (self.flux_unit > 0.0):
            raise InvalidInput(f"flux_unit must be positive, got {self.flux_unit}")


DEFAULT_CONVENTION = FieldConvention()


@dataclass(frozen=True)
class Singularity:
    """Point charge: position strictly inside the unit ball, integer degree != 0."""

    position: tuple
    degree: int

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float)
        if pos.shape != (3,):
            raise InvalidInput(f"singularity position must be a 3-vector, got shape {pos.shape}")
        if not np.isfinite(pos).all():
            raise InvalidInput("singularity position must be finite")
        if np.linalg.norm(pos) >= 1.0:
            raise InvalidInput(f"singularity at |x| = {np.linalg.norm(pos):.6f} is not inside the unit ball")
        if int(self.degree) != self.degree or int(self.degree) == 0:
            raise InvalidInput(f"degree must be a nonzero integer, got {self.degree!r}")
        object.__setattr__(self, "position", tuple(float(c) for c in pos))
        object.__setattr__(self, "degree", int(self.degree))

    @property
    def pos(self):
        return np.asarray(self.position, dtype=float)


class Field:
    """Common interface: vectorized evaluate(), singularity metadata, flux unit."""

    convention: FieldConvention = DEFAULT_CONVENTION

    @property
    def flux_unit(self) -> float:
        return self.convention.flux_unit

    def singularities(self):
        return []

    def evaluate(self, points):
        raise NotImplementedError

    def __call__(self, points):
        return self.evaluate(points)


def eval_field(field, x):
    """Evaluate at a single point with domain checks.

    Raises FieldDomainError at a singularity (and GridRangeError off-grid for
    sampled fields, from the field itself).
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (3,):
        raise InvalidInput(f"expected a 3-vector, got shape {x.shape}")
    for s in field.singularities():
        if np.linalg.norm(x - s.pos) < _SING_EVAL_TOL:
            raise FieldDomainError(f"evaluation at singularity {s.position}")
    return field.evaluate(x[None, :])[0]


# ----------------------------------------------------------------------
# backgrounds (divergence-free additive terms for analytic fields)
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class ConstantBackground:
    value: tuple

    def __post_init__(self):
        v = np.asarray(self.value, dtype=float)
        if v.shape != (3,):
            raise InvalidInput("constant background must be a 3-vector")
        object.__setattr__(self, "value", tuple(float(c) for c in v))

    def evaluate(self, pts):
        return np.broadcast_to(np.asarray(self.value), pts.shape).copy()


@dataclass(frozen=True)
class SwirlBackground:
    """Rigid rotation about the z axis, X = amplitude * (-y, x, 0); div X = 0."""

    amplitude: float = 1.0

    def evaluate(self, pts):
        out = np.zeros_like(pts)
        out[..., 0] = -self.amplitude * pts[..., 1]
        out[..., 1] = self.amplitude * pts[..., 0]
        return out


# ----------------------------------------------------------------------
# Coulomb superpositions
# ----------------------------------------------------------------------

class CoulombField(Field):
    """Superposition of unit-ball point charges plus an optional background.

    Divergence-free away from the charges; the flux through any surface equals
    flux_unit times the sum of enclosed degrees (Gauss).
    """

    def __init__(self, charges, background=None, convention=DEFAULT_CONVENTION):
        charges = tuple(charges)
        pos = np.array([c.pos for c in charges], dtype=float).reshape(len(charges), 3)
        for i in range(len(charges)):
            for j in range(i + 1, len(charges)):
                if np.linalg.norm(pos[i] - pos[j]) < 1e-12:
                    raise InvalidInput(f"charges {i} and {j} share position {charges[i].position}")
        self.charges = charges
        self.background = background
        self.convention = convention
        self._pos = pos
        self._deg = np.array([c.degree for c in charges], dtype=float)

    def singularities(self):
        return list(self.charges)

    def evaluate(self, points):
        pts = np.asarray(points, dtype=float)
        out = np.zeros(pts.shape)
        if len(self.charges):
            diff = pts[..., None, :] - self._pos  # (..., m, 3)
            r2 = np.einsum("...mi,...mi->...m", diff, diff)
            with np.errstate(divide="ignore", invalid="ignore"):
                coef = self._deg / (4.0 * np.pi * r2 * np.sqrt(r2))
            out = np.einsum("...m,...mi->...i", coef, diff) * self.flux_unit
        if self.background is not None:
            out = out + self.background.evaluate(pts)
        return out


def coulomb_superposition(charges, background=None, convention=DEFAULT_CONVENTION):
    """Build a CoulombField from (position, degree) pairs or Singularity objects."""
    sings = [c if isinstance(c, Singularity) else Singularity(tuple(c[0]), int(c[1])) for c in charges]
    return CoulombField(sings, background=background, convention=convention)


class MollifiedCoulombField(Field):
    """Coulomb charges smeared at a radial scale: bounded, smooth, zero atom.

    Each charge is replaced by a smooth compactly supported density of the same
    total mass: X = d * m(r/s) / (4 pi r^2) * rhat with m the normalized mass
    function of the bump (1 - t^2)^4 on t < 1.  m(t) ~ t^3 near 0, so X is
    bounded; m = 1 for t >= 1, so the field matches Coulomb outside radius s.
    """

    def __init__(self, charges, scale, convention=DEFAULT_CONVENTION):
        if not (scale > 0):
            raise InvalidInput("mollification scale must be positive")
        base = coulomb_superposition(charges, convention=convention)
        self.charges = base.charges
        self.scale = float(scale)
        self.convention = convention
        self._pos = base._pos
        self._deg = base._deg

    def singularities(self):
        return []  # bounded field: no atoms

    @staticmethod
    def _mass_fraction(t):
        """Integral_0^t u^2 (1-u^2)^4 du / integral_0^1, clipped to t <= 1."""
        t = np.clip(t, 0.0, 1.0)
        # expand u^2 (1-u^2)^4 = u^2 - 4u^4 + 6u^6 - 4u^8 + u^10 and integrate
        num = t**3 / 3 - 4 * t**5 / 5 + 6 * t**7 / 7 - 4 * t**9 / 9 + t**11 / 11
        den = 1.0 / 3 - 4.0 / 5 + 6.0 / 7 - 4.0 / 9 + 1.0 / 11
        return num / den

    def evaluate(self, points):
        pts = np.asarray(points, dtype=float)
        diff = pts[..., None, :] - self._pos
        r = np.sqrt(np.einsum("...mi,...mi->...m", diff, diff))
        m = self._mass_fraction(r / self.scale)
        with np.errstate(divide="ignore", invalid="ignore"):
            coef = np.where(r > 0, self._deg * m / (4.0 * np.pi * r**3), 0.0)
        return np.einsum("...m,...mi->...i", coef, diff) * self.flux_unit


class LinearField(Field):
    """X(x) = M x: diagnostic generator (divergence = trace M, not quantized)."""

    def __init__(self, matrix, convention=DEFAULT_CONVENTION):
        M = np.asarray(matrix, dtype=float)
        if M.shape != (3, 3):
            raise InvalidInput("linear field needs a 3x3 matrix")
        self.matrix = M
        self.convention = convention

    def evaluate(self, points):
        return np.asarray(points, dtype=float) @ self.matrix.T


# ----------------------------------------------------------------------
# D-fields of sphere-valued maps
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class HedgehogMap:
    """u(x) = signs * (x - center) / |x - center| componentwise; degree = prod(signs)."""

    center: tuple = (0.0, 0.0, 0.0)
    signs: tuple = (1, 1, 1)

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        s = tuple(int(v) for v in self.signs)
        if c.shape != (3,) or len(s) != 3 or any(v not in (-1, 1) for v in s):
            raise InvalidInput("hedgehog map needs a 3-vector center and signs in {-1,+1}^3")
        object.__setattr__(self, "center", tuple(float(v) for v in c))
        object.__setattr__(self, "signs", s)

    @property
    def degree(self):
        return self.signs[0] * self.signs[1] * self.signs[2]

    def u(self, pts):
        d = np.asarray(pts, dtype=float) - np.asarray(self.center)
        r = np.linalg.norm(d, axis=-1, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = d / r
        return out * np.asarray(self.signs, dtype=float)

    def partials(self, pts):
        """Exact Jacobian J[..., i, j] = d u_i / d x_j."""
        d = np.asarray(pts, dtype=float) - np.asarray(self.center)
        r = np.linalg.norm(d, axis=-1)
        what = d / r[..., None]
        eye = np.eye(3)
        J = (eye - what[..., :, None] * what[..., None, :]) / r[..., None, None]
        return J * np.asarray(self.signs, dtype=float)[:, None]


@dataclass(frozen=True)
class ConstantMap:
    """Constant sphere-valued map; D(u) = 0."""

    value: tuple = (0.0, 0.0, 1.0)

    def __post_init__(self):
        v = np.asarray(self.value, dtype=float)
        n = np.linalg.norm(v)
        if v.shape != (3,) or n < 1e-12:
            raise InvalidInput("constant map needs a nonzero 3-vector")
        object.__setattr__(self, "value", tuple(float(c) for c in v / n))

    def u(self, pts):
        return np.broadcast_to(np.asarray(self.value), np.asarray(pts, dtype=float).shape).copy()

    def partials(self, pts):
        pts = np.asarray(pts, dtype=float)
        return np.zeros(pts.shape[:-1] + (3, 3))


class DField(Field):
    """D(u) for a built-in map descriptor, optionally normalized by 1/(4 pi).

    partials: "exact" uses the descriptor's analytic Jacobian, "fd" central
    differences with the given step.  The triple-product formula is evaluated
    either way; with normalize=True the unit hedgehog has flux 1 * flux_unit.
    """

    def __init__(self, map_descriptor, normalize=True, partials="exact", fd_step=1e-5,
                 convention=DEFAULT_CONVENTION):
        if not isinstance(map_descriptor, (HedgehogMap, ConstantMap)):
            raise InvalidInput(f"unsupported map descriptor {type(map_descriptor).__name__}")
        if partials not in ("exact", "fd"):
            raise InvalidInput(f"partials must be 'exact' or 'fd', got {partials!r}")
        self.map = map_descriptor
        self.normalize = bool(normalize)
        self.partials = partials
        self.fd_step = float(fd_step)
        self.convention = convention

    def singularities(self):
        if isinstance(self.map, HedgehogMap):
            return [Singularity(self.map.center, self.map.degree)]
        return []

    def _jacobian(self, pts):
        if self.partials == "exact":
            return self.map.partials(pts)
        pts = np.asarray(pts, dtype=float)
        J = np.empty(pts.shape[:-1] + (3, 3))
        h = self.fd_step
        for j in range(3):
            e = np.zeros(3)
            e[j] = h
            J[..., :, j] = (self.map.u(pts + e) - self.map.u(pts - e)) / (2 * h)
        return J

    def evaluate(self, points):
        pts = np.asarray(points, dtype=float)
        u = self.map.u(pts)
        J = self._jacobian(pts)
        d1, d2, d3 = J[..., :, 0], J[..., :, 1], J[..., :, 2]
        out = np.stack([
            np.einsum("...i,...i->...", u, np.cross(d2, d3)),
            np.einsum("...i,...i->...", u, np.cross(d3, d1)),
            np.einsum("...i,...i->...", u, np.cross(d1, d2)),
        ], axis=-1)
        if self.normalize:
            out = out / (4.0 * np.pi)
        return out * self.flux_unit


def d_field(map_descriptor, normalize=True, partials="exact", fd_step=1e-5,
            convention=DEFAULT_CONVENTION):
    """Build the D-field of a supported map descriptor."""
    return DField(map_descriptor, normalize=normalize, partials=partials,
                  fd_step=fd_step, convention=convention)


# ----------------------------------------------------------------------
# sampled fields
# ----------------------------------------------------------------------

class SampledField(Field):
    """Trilinear interpolant of node samples on a regular grid.

    Node (i,j,k) sits at origin + (i,j,k) * spacing; values has shape
    (nx, ny, nz, 3).  Evaluation outside the grid box raises GridRangeError.
    """

    def __init__(self, origin, spacing, values, singularities=(), convention=DEFAULT_CONVENTION):
        origin = np.asarray(origin, dtype=float)
        values = np.asarray(values, dtype=float)
        if origin.shape != (3,):
            raise InvalidInput("origin must be a 3-vector")
        if not (spacing > 0):
            raise InvalidInput(f"spacing must be positive, got {spacing}")
        if values.ndim != 4 or values.shape[3] != 3 or min(values.shape[:3]) < 2:
            raise InvalidInput(f"values must have shape (nx,ny,nz,3) with nx,ny,nz >= 2, got {values.shape}")
        self.origin = origin
        self.spacing = float(spacing)
        self.values = values
        self._sing = tuple(singularities)
        self.convention = convention

    @property
    def dims(self):
        return self.values.shape[:3]

    @property
    def bbox(self):
        hi = self.origin + self.spacing * (np.array(self.dims) - 1)
        return self.origin.copy(), hi

    def singularities(self):
        return list(self._sing)

    def with_singularities(self, singularities):
        return SampledField(self.origin, self.spacing, self.values,
                            singularities=singularities, convention=self.convention)

    def evaluate(self, points):
        pts = np.asarray(points, dtype=float)
        flat = pts.reshape(-1, 3)
        t = (flat - self.origin) / self.spacing
        dims = np.array(self.dims)
        eps = 1e-9
        if np.any(t < -eps) or np.any(t > dims - 1 + eps):
            bad = flat[np.any((t < -eps) | (t > dims - 1 + eps), axis=1)][0]
            raise GridRangeError(f"point {bad} outside sampled grid")
        t = np.clip(t, 0.0, dims - 1 - 1e-12)
        i0 = t.astype(int)
        f = t - i0
        i1 = np.minimum(i0 + 1, dims - 1)
        v = self.values
        out = np.zeros((flat.shape[0], 3))
        for dx, wx in ((0, 1 - f[:, 0]), (1, f[:, 0])):
            ix = np.where(dx == 0, i0[:, 0], i1[:, 0])
            for dy, wy in ((0, 1 - f[:, 1]), (1, f[:, 1])):
                iy = np.where(dy == 0, i0[:, 1], i1[:, 1])
                for dz, wz in ((0, 1 - f[:, 2]), (1, f[:, 2])):
                    iz = np.where(dz == 0, i0[:, 2], i1[:, 2])
                    out += (wx * wy * wz)[:, None] * v[ix, iy, iz]
        return out.reshape(pts.shape)


def sample_field(field, origin, spacing, dims, singularities=None):
    """Sample any field onto a regular grid, producing a SampledField.

    Singularities default to the source field's own list (positions kept).
    """
    origin = np.asarray(origin, dtype=float)
    nx, ny, nz = dims
    ax = [origin[i] + spacing * np.arange(n) for i, n in enumerate((nx, ny, nz))]
    X, Y, Z = np.meshgrid(*ax, indexing="ij")
    pts = np.stack([X, Y, Z], axis=-1)
    vals = field.evaluate(pts.reshape(-1, 3)).reshape(nx, ny, nz, 3)
    vals = np.nan_to_num(vals, nan=0.0, posinf=0.0, neginf=0.0)
    if singularities is None:
        singularities = field.singularities()
    return SampledField(origin, spacing, vals, singularities=singularities,
                        convention=field.convention)
