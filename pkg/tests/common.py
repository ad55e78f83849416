"""Shared oracles and fixed test configurations.

The oracles here deliberately avoid the package's own quadrature and solver
paths: sphere_flux integrates over a sphere (the library only ever integrates
over cube faces), and minimal_mass_by_enumeration solves the connection
problem by exhaustive matching.  Agreement between the two routes is the
point of the tests that use them.
"""

import itertools

import numpy as np

# five fixed charge configurations: degrees in {-2..2}, at most 5 points,
# pairwise separations >= 0.297 so eps = 0.1 sits below half the minimum
FIVE_CONFIGS = [
    [((0.0, 0.0, 0.0), 1)],
    [((0.25, 0.0, 0.0), 1), ((-0.25, 0.0, 0.0), -1)],
    [((0.25, 0.0, 0.0), 2), ((0.0, 0.25, 0.0), -1)],
    [((0.0, 0.0, 0.21), 1), ((0.21, 0.0, 0.0), -2), ((0.0, 0.21, 0.0), 1),
     ((-0.21, 0.0, 0.0), 2)],
    [((0.0, 0.0, 0.21), 1), ((0.21, 0.0, 0.0), -2), ((0.0, 0.21, 0.0), 1),
     ((-0.21, 0.0, 0.0), 2), ((0.0, -0.21, 0.0), -1)],
]


def sphere_flux(field, center, radius, n_theta=48, n_phi=96):
    """Flux through a sphere: Gauss-Legendre in cos(theta) x midpoint in phi.

    Independent of the library's cube-face quadrature; accurate to machine
    precision for fields analytic near the sphere.
    """
    c = np.asarray(center, dtype=float)
    mu, w = np.polynomial.legendre.leggauss(n_theta)
    phi = (np.arange(n_phi) + 0.5) * (2.0 * np.pi / n_phi)
    st = np.sqrt(1.0 - mu ** 2)
    nx = st[:, None] * np.cos(phi)[None, :]
    ny = st[:, None] * np.sin(phi)[None, :]
    nz = np.broadcast_to(mu[:, None], nx.shape).copy()
    normals = np.stack([nx, ny, nz], axis=-1).reshape(-1, 3)
    vals = field.evaluate(c + radius * normals)
    radial = (vals * normals).sum(axis=1)
    weights = np.repeat(w, n_phi) * (2.0 * np.pi / n_phi) * radius ** 2
    return float((radial * weights).sum())


def minimal_mass_by_enumeration(sings):
    """Exact minimal connection mass by exhaustive matching.

    Expands degrees into unit charges; every positive unit either pairs with
    a negative unit (cost = distance) or exits through the sphere (cost =
    1 - |x|), and symmetrically.  Feasible only for small instances; keep the
    total expanded units <= 8.
    """
    pos, neg = [], []
    for s in sings:
        target = pos if s.degree > 0 else neg
        target.extend([np.asarray(s.pos, dtype=float)] * abs(s.degree))

    def exit_cost(x):
        return 1.0 - float(np.linalg.norm(x))

    best = sum(exit_cost(x) for x in pos) + sum(exit_cost(x) for x in neg)
    for k in range(1, min(len(pos), len(neg)) + 1):
        for ip in itertools.combinations(range(len(pos)), k):
            base = sum(exit_cost(pos[i]) for i in range(len(pos)) if i not in ip)
            for jn in itertools.permutations(range(len(neg)), k):
                cost = base + sum(exit_cost(neg[j]) for j in range(len(neg))
                                  if j not in jn)
                cost += sum(float(np.linalg.norm(pos[a] - neg[b]))
                            for a, b in zip(ip, jn))
                best = min(best, cost)
    return best


def random_instance(rng, max_units=8):
    """Random singularity list with total expanded units <= max_units."""
    from intflux import Singularity
    sings = []
    units = 0
    for _ in range(int(rng.integers(1, 7))):
        d = int(rng.integers(-2, 3))
        if d == 0 or units + abs(d) > max_units:
            continue
        x = rng.normal(size=3)
        x *= rng.uniform(0.05, 0.92) / np.linalg.norm(x)
        sings.append(Singularity(tuple(x), d))
        units += abs(d)
    if not sings:
        sings = [Singularity((0.3, 0.0, 0.0), 1)]
    return sings
