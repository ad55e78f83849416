"""Minimal connections: exact optima, duality, certificates."""

import numpy as np
from hypothesis import given, settings, strategies as st

from intflux import (Singularity, boundary_residual, certify,
                     coulomb_superposition, dual_value, greedy_connection,
                     nearest_boundary, optimal_connection)

from common import minimal_mass_by_enumeration, random_instance


def test_dipole_mass_exact():
    sings = [Singularity((0.25, 0.0, 0.0), 1), Singularity((-0.25, 0.0, 0.0), -1)]
    assert optimal_connection(sings).mass == 0.5


def test_single_charge_exits_through_boundary():
    sings = [Singularity((0.9, 0.0, 0.0), 1)]
    cur = optimal_connection(sings)
    assert abs(cur.mass - 0.1) < 1e-15
    (seg,) = cur.segments
    # oriented so the boundary acts as the source of a positive unit
    assert seg.start == (1.0, 0.0, 0.0)
    assert seg.end == (0.9, 0.0, 0.0)
    assert seg.multiplicity == 1


def test_spread_pair_prefers_boundary():
    # the direct pairing costs 1.2, two boundary exits cost 0.8
    sings = [Singularity((0.6, 0.0, 0.0), 1), Singularity((-0.6, 0.0, 0.0), -1)]
    opt = optimal_connection(sings)
    gre = greedy_connection(sings)
    assert abs(opt.mass - 0.8) < 1e-12
    assert abs(gre.mass - 1.2) < 1e-12


def test_optimal_matches_enumeration_oracle():
    rng = np.random.default_rng(20)
    for _ in range(30):
        sings = random_instance(rng, max_units=8)
        opt = optimal_connection(sings).mass
        brute = minimal_mass_by_enumeration(sings)
        assert abs(opt - brute) < 1e-9


def test_duality_sandwich():
    rng = np.random.default_rng(21)
    for _ in range(25):
        sings = random_instance(rng, max_units=10)
        opt = optimal_connection(sings)
        dual = dual_value(sings)
        gre = greedy_connection(sings)
        assert dual.value <= opt.mass + 1e-9
        assert opt.mass <= gre.mass + 1e-12
        ok, gap = certify(opt, dual)
        assert ok and gap <= 1e-9


def test_dual_potentials_feasible():
    rng = np.random.default_rng(22)
    sings = random_instance(rng, max_units=10)
    dual = dual_value(sings)
    pos = np.asarray(dual.positions)
    phi = np.asarray(dual.potentials)
    r = np.linalg.norm(pos, axis=1)
    assert np.all(np.abs(phi) <= 1.0 - r + 1e-9)
    for i in range(len(phi)):
        for j in range(i + 1, len(phi)):
            assert abs(phi[i] - phi[j]) <= np.linalg.norm(pos[i] - pos[j]) + 1e-9


def test_boundary_signature_matches_degrees():
    sings = [Singularity((0.3, 0.0, 0.0), 2), Singularity((0.0, 0.3, 0.0), -1),
             Singularity((-0.3, 0.0, 0.0), -1)]
    cur = optimal_connection(sings)
    assert cur.boundary_signature() == {
        (0.3, 0.0, 0.0): 2, (0.0, 0.3, 0.0): -1, (-0.3, 0.0, 0.0): -1}


def test_pairing_against_lipschitz_function():
    # for phi vanishing on the sphere, <boundary of T, phi> = sum d_j phi(x_j)
    sings = [Singularity((0.6, 0.0, 0.0), 1), Singularity((0.0, -0.4, 0.2), -2)]
    cur = optimal_connection(sings)

    def phi(x):
        return (1.0 - np.linalg.norm(x)) * np.cos(0.7 * x[0])

    expect = sum(s.degree * phi(np.asarray(s.pos)) for s in sings)
    assert abs(cur.pair_with(phi) - expect) < 1e-12


def test_mass_is_rotation_invariant():
    rng = np.random.default_rng(23)
    sings = random_instance(rng, max_units=8)
    # random rotation via QR
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q *= np.sign(np.diag(r))
    rotated = [Singularity(tuple(q @ np.asarray(s.pos)), s.degree)
               for s in sings]
    m0 = optimal_connection(sings).mass
    m1 = optimal_connection(rotated).mass
    assert abs(m0 - m1) < 1e-9


def test_multiplicities_are_positive_integers():
    rng = np.random.default_rng(24)
    for _ in range(10):
        cur = optimal_connection(random_instance(rng, max_units=10))
        for seg in cur.segments:
            assert isinstance(seg.multiplicity, int)
            assert seg.multiplicity >= 1
        assert abs(cur.recompute_mass() - cur.mass) < 1e-12


def test_nearest_boundary_projection():
    p = nearest_boundary((0.3, 0.4, 0.0))
    np.testing.assert_allclose(p, [0.6, 0.8, 0.0], atol=1e-14)


def test_boundary_residual_small_for_optimal():
    f = coulomb_superposition([((0.0, 0.0, 0.0), 1)])
    cur = optimal_connection(f.singularities())
    assert boundary_residual(f, cur, n_test=10, seed=1) < 1e-3


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=10 ** 6))
def test_greedy_never_beats_optimal(seed):
    rng = np.random.default_rng(seed)
    sings = random_instance(rng, max_units=8)
    assert greedy_connection(sings).mass >= optimal_connection(sings).mass - 1e-12
