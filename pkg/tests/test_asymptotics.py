"""Logarithmic test functions, pairing growth, norm divergence."""

import numpy as np
import pytest

from intflux import (LogTestFunction, MollifiedCoulombField,
                     NormEstimateDiverged, coulomb_superposition,
                     grad_norm_ln, hoelder_bound_check, lp_norm,
                     pairing_growth)

OMEGA = {2: np.pi, 3: 4.0 * np.pi / 3.0}


def test_grad_norm_closed_form():
    for n in (2, 3):
        for k in range(1, 17):
            expect = (n * OMEGA[n]) ** (1.0 / n) * k ** (1.0 / n)
            got = grad_norm_ln(k, n=n)
            assert abs(got - expect) / expect < 1e-3


def test_log_test_function_shape():
    L = LogTestFunction(4)
    assert L.value((0.5, 0.0, 0.0)) == 0.0        # supported inside r = 1/2
    assert abs(L.value((L.inner_radius, 0.0, 0.0)) - 4.0) < 1e-12
    mid = np.exp(-2.0) * 0.5
    assert abs(L.value((mid, 0.0, 0.0)) - 2.0) < 1e-12
    # gradient vanishes outside the support and on the inner plateau
    assert np.abs(L.grad((0.6, 0.0, 0.0))).max() == 0.0
    assert np.abs(L.grad((L.inner_radius / 2.0, 0.0, 0.0))).max() == 0.0


def test_coulomb_pairing_linear_in_k():
    f = coulomb_superposition([((0.0, 0.0, 0.0), 1)])
    rows = pairing_growth(f, [1, 2, 4, 8])
    for row in rows:
        assert abs(row["pairing"] - row["k"]) < 1e-6 * row["k"]
        assert abs(row["ratio"] - 1.0) < 1e-6


def test_pairing_scales_with_degree():
    f = coulomb_superposition([((0.0, 0.0, 0.0), 2)])
    rows = pairing_growth(f, [1, 4])
    for row in rows:
        assert abs(row["ratio"] - 2.0) < 1e-6


def test_mollified_pairing_ratio_decays():
    f = MollifiedCoulombField([((0.0, 0.0, 0.0), 1)], scale=0.1)
    rows = pairing_growth(f, [1, 2, 4, 8, 16, 32])
    ratios = [row["ratio"] for row in rows]
    assert all(b <= a + 1e-12 for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] < 0.1


def test_lp_norm_diverges_at_critical_order():
    f = coulomb_superposition([((0.0, 0.0, 0.0), 1)])
    with pytest.raises(NormEstimateDiverged):
        lp_norm(f, 1.5)
    with pytest.raises(NormEstimateDiverged):
        lp_norm(f, 2.0)


def test_lp_norm_finite_below_critical_order():
    f = coulomb_superposition([((0.0, 0.0, 0.0), 1)])
    val = lp_norm(f, 1.2)
    assert np.isfinite(val) and val > 0.0


def test_hoelder_product_bound_holds():
    f = coulomb_superposition([((0.0, 0.0, 0.0), 1)])
    rows = hoelder_bound_check(f, 1.4, [1, 2, 4])
    for row in rows:
        assert row["pairing"] <= row["bound"] + 1e-9
        assert 0.0 < row["ratio"] <= 1.0 + 1e-9
