"""Quadrature specs: validation, panel alignment, exactness."""

import numpy as np
import pytest

from intflux import InvalidInput, QuadratureSpec
from intflux.quadrature import face_points


def test_spec_validation():
    with pytest.raises(InvalidInput):
        QuadratureSpec(1)
    with pytest.raises(InvalidInput):
        QuadratureSpec(4, "simpson")
    with pytest.raises(InvalidInput):
        QuadratureSpec(4, "aligned", pitch=-0.1)


def test_face_weights_sum_to_area():
    for spec in (QuadratureSpec(6), QuadratureSpec(6, "midpoint"),
                 QuadratureSpec(2, "aligned", pitch=0.07, origin=(0.01, 0.0, -0.02))):
        pts, w, normal = face_points(np.zeros(3), 2, 1, 0.5, spec)
        assert abs(w.sum() - 0.25) < 1e-12
        np.testing.assert_allclose(pts[:, 2], 0.25)
        np.testing.assert_allclose(normal, [0.0, 0.0, 1.0])


def test_aligned_rule_requires_pitch():
    with pytest.raises(InvalidInput):
        face_points(np.zeros(3), 0, 1, 0.5, QuadratureSpec(2, "aligned"))


def test_aligned_panels_integrate_kinked_density_exactly():
    # |y - 0.03| is piecewise linear with the kink on a panel boundary when
    # the pitch grid passes through 0.03; two-point Gauss is then exact
    pitch, origin = 0.05, (0.03, 0.03, 0.03)
    spec = QuadratureSpec(2, "aligned", pitch=pitch, origin=origin)
    pts, w, normal = face_points(np.zeros(3), 0, 1, 0.6, spec)
    got = (np.abs(pts[:, 1] - 0.03) * w).sum()

    def exact_abs(a, b, c):
        f = lambda t: 0.5 * (t - c) * abs(t - c)
        return f(b) - f(a)

    expect = exact_abs(-0.3, 0.3, 0.03) * 0.6
    assert abs(got - expect) < 1e-14


def test_gauss_rule_exact_on_polynomials():
    spec = QuadratureSpec(4)
    pts, w, normal = face_points(np.zeros(3), 1, -1, 1.0, spec)
    # degree-7 polynomial in each tangential coordinate
    got = ((pts[:, 0] ** 7 + pts[:, 0] ** 2 * pts[:, 2] ** 4) * w).sum()
    expect = 0.0 + (2 * (0.5 ** 3) / 3) * (2 * (0.5 ** 5) / 5)
    assert abs(got - expect) < 1e-15
