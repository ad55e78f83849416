"""Cube-boundary flux quadrature, admissibility, scans, profiles."""

import numpy as np
import pytest

from intflux import (Cube, QuadratureIllConditioned, QuadratureSpec,
                     admissible_radius, coulomb_superposition, cube_flux,
                     divergence_free_check, flux_profile, integer_flux_scan,
                     mollified_divergence)
from intflux.flux import SCAN_COLUMNS

from common import FIVE_CONFIGS, sphere_flux


def test_admissible_radius_formula():
    # largest side with the closed cube still inside the unit ball:
    # |x0| + side * sqrt(3)/2 <= 1
    for x0 in ((0.0, 0.0, 0.0), (0.5, 0.0, 0.0), (0.2, -0.3, 0.4)):
        r = admissible_radius(x0)
        expect = (2.0 / np.sqrt(3.0)) * (1.0 - np.linalg.norm(x0))
        assert abs(r - expect) < 1e-14
        corner = np.linalg.norm(x0) + r * np.sqrt(3.0) / 2.0
        assert corner <= 1.0 + 1e-12


def test_cube_flux_matches_sphere_oracle_per_subset():
    f = coulomb_superposition(FIVE_CONFIGS[3])
    # around one charge, then around all four
    one = cube_flux(f, Cube((0.21, 0.0, 0.0), 0.18), quad=QuadratureSpec(16))
    assert abs(one - (-2.0)) < 1e-9
    assert abs(one - sphere_flux(f, (0.21, 0.0, 0.0), 0.09)) < 1e-9
    allq = cube_flux(f, Cube((0.0, 0.0, 0.0), 0.8), quad=QuadratureSpec(24))
    assert abs(allq - 2.0) < 1e-8


def test_cube_flux_quadrature_convergence():
    f = coulomb_superposition([((0.05, 0.02, 0.0), 1)])
    cube = Cube((0.0, 0.0, 0.0), 0.5)
    errs = [abs(cube_flux(f, cube, quad=QuadratureSpec(n)) - 1.0)
            for n in (4, 8, 16)]
    assert errs[2] < errs[0]
    assert errs[2] < 1e-10


def test_guard_rejects_singularity_on_face():
    f = coulomb_superposition([((0.25, 0.0, 0.0), 1)])
    with pytest.raises(QuadratureIllConditioned):
        cube_flux(f, Cube((0.0, 0.0, 0.0), 0.5), quad=QuadratureSpec(8))


def test_integer_flux_scan_clean_on_coulomb():
    f = coulomb_superposition(FIVE_CONFIGS[1])
    rep = integer_flux_scan(f, 30, 5, tol=1e-6, seed=3)
    assert rep.n_violations == 0
    assert rep.max_deviation < 1e-8
    assert rep.rows.shape[1] == len(SCAN_COLUMNS)
    assert rep.n_samples == 30 * 5
    assert len(rep.kept) == rep.n_samples - rep.n_skipped


def test_scan_is_deterministic_per_seed():
    f = coulomb_superposition(FIVE_CONFIGS[0])
    a = integer_flux_scan(f, 10, 3, seed=11)
    b = integer_flux_scan(f, 10, 3, seed=11)
    c = integer_flux_scan(f, 10, 3, seed=12)
    assert np.array_equal(a.rows, b.rows)
    assert not np.array_equal(a.rows, c.rows)


def test_scan_flags_non_quantized_field():
    from intflux import LinearField
    f = LinearField(np.diag([0.3, 0.1, 0.2]))
    rep = integer_flux_scan(f, 10, 3, tol=1e-6, seed=0)
    assert rep.n_violations > 0


def test_flux_profile_constant_then_step():
    f = coulomb_superposition([((0.0, 0.0, 0.0), 1), ((0.3, 0.3, 0.3), -1)])
    prof = flux_profile(f, (0.0, 0.0, 0.0), 0.3, 0.9, 4, guard_cells=3.0)
    # small cubes see only the origin charge, the big one sees both
    assert abs(prof.values[0] - 1.0) < 1e-9
    assert abs(prof.values[-1] - 0.0) < 1e-9
    steps = prof.steps(1e-6)
    assert len(steps) == 1
    assert abs(steps[0][1] + 1.0) < 1e-9


def test_divergence_free_away_from_charges():
    f = coulomb_superposition(FIVE_CONFIGS[2])
    ok, info = divergence_free_check(f, n_centers=15, radii_per_center=3)
    assert ok
    assert info["max_abs_flux"] < 1e-6


def test_mollified_divergence_localizes_mass():
    f = coulomb_superposition([((0.0, 0.0, 0.0), 1)])
    inside = mollified_divergence(f, (0.0, 0.0, 0.0), 0.3, 0.05)
    outside = mollified_divergence(f, (0.6, 0.0, 0.0), 0.2, 0.05)
    assert abs(inside - 1.0) < 1e-6
    assert abs(outside) < 1e-6
