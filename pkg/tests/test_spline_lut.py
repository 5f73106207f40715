import json

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import cox_de_boor_basis, spline_weights
from splinedpd.spline_lut import (SplineConfig, SplineLut, basis_matrix, gain_deviation,
                                  inject, region_index, region_indices, regressor)

orders = st.sampled_from([1, 2, 3])


def _random_lut(rng, order, n_points, delta=1.0, scale=0.2):
    cfg = SplineConfig.from_points(order, n_points, delta)
    pts = scale * (rng.standard_normal(n_points) + 1j * rng.standard_normal(n_points))
    return SplineLut(cfg, pts)


def _piece(lut, offset, u, deriv=0):
    """Polynomial of one region (0-based ``offset``) or its derivative at ``u``."""
    order = lut.config.order
    coeffs = lut.basis @ lut.control_points[offset:offset + order + 1]
    poly = np.polynomial.polynomial.Polynomial(coeffs[::-1])
    return complex(poly.deriv(deriv)(u) if deriv else poly(u))


class TestBasisMatrix:
    """Uniform B-spline basis matrices."""

    def test_cubic_reference_matrix(self):
        """Cubic matrix equals the rational reference entry for entry."""
        ref = sp.Matrix([[-1, 3, -3, 1], [3, -6, 3, 0], [-3, 0, 3, 0], [1, 4, 1, 0]]) / 6
        got = basis_matrix(3, 1.0)
        assert np.max(np.abs(got - np.array(ref, dtype=float))) <= 1e-15

    @pytest.mark.parametrize("order", [1, 2, 3])
    def test_matches_cox_de_boor(self, order):
        ref = np.array(cox_de_boor_basis(order), dtype=float)
        assert np.max(np.abs(basis_matrix(order, 1.0) - ref)) <= 1e-15

    def test_linear_and_quadratic_values(self):
        np.testing.assert_array_equal(basis_matrix(1, 1), [[-1, 1], [1, 0]])
        np.testing.assert_allclose(basis_matrix(2, 1),
                                   0.5 * np.array([[1, -2, 1], [-2, 2, 0], [1, 1, 0]]),
                                   atol=1e-16)

    def test_knot_spacing_scales_rows(self):
        b = basis_matrix(3, 0.5)
        np.testing.assert_allclose(b, basis_matrix(3, 1) * np.array([8, 4, 2, 1])[:, None])

    @pytest.mark.parametrize("order", [0, 4])
    def test_unsupported_order(self, order):
        with pytest.raises(ValueError):
            basis_matrix(order, 1.0)

    def test_bad_spacing(self):
        with pytest.raises(ValueError):
            basis_matrix(3, 0.0)


class TestRegionIndex:
    """Span and abscissa lookup."""

    def test_zero(self):
        idx = region_index(0.0, SplineConfig(3, 1.0, 5))
        assert (idx.span, idx.u) == (1, 0.0)

    def test_inside(self):
        idx = region_index(3.6, SplineConfig(3, 1.0, 5))
        assert idx.span == 4
        assert idx.u == pytest.approx(0.6, abs=1e-12)

    def test_saturates_at_top(self):
        cfg = SplineConfig(3, 1.0, 5)
        for a in (5.0, 7.3, 1e9):
            idx = region_index(a, cfg)
            assert idx.span == 5
            assert idx.u == 1.0 - 2.0 ** -40

    def test_saturation_with_spacing(self):
        idx = region_index(10.0, SplineConfig(2, 0.5, 4))
        assert idx.span == 4 and idx.u == 0.5 * (1 - 2.0 ** -40)

    def test_negative(self):
        with pytest.raises(ValueError):
            region_index(-0.1, SplineConfig())

    @settings(max_examples=200, deadline=None)
    @given(a=st.floats(0, 50), delta=st.floats(0.05, 3), k=st.integers(1, 12))
    def test_reconstructs_magnitude(self, a, delta, k):
        cfg = SplineConfig(3, delta, k)
        idx = region_index(a, cfg)
        assert 1 <= idx.span <= k
        assert 0 <= idx.u < delta
        if a < k * delta * (1 - 1e-9):
            assert (idx.span - 1) * delta + idx.u == pytest.approx(a, rel=1e-12, abs=1e-12)

    def test_vectorised_agrees(self):
        cfg = SplineConfig(2, 0.7, 6)
        a = np.linspace(0, 6, 101)
        off, u = region_indices(a, cfg)
        for k, val in enumerate(a):
            idx = region_index(val, cfg)
            assert (idx.offset, idx.u) == (off[k], u[k])


class TestRegressor:
    """Sparse weight vectors."""

    def test_u_zero_is_last_basis_row(self):
        lut = SplineLut(SplineConfig.from_points(3, 9))
        g = regressor(region_index(2.0, lut.config), lut)
        np.testing.assert_allclose(g[2:6], np.array([1, 4, 1, 0]) / 6, atol=1e-16)
        assert np.count_nonzero(g[:2]) == 0 and np.count_nonzero(g[6:]) == 0

    def test_midpoint_weights(self):
        lut = SplineLut(SplineConfig.from_points(3, 8))
        g = regressor(region_index(0.5, lut.config), lut)
        np.testing.assert_allclose(g[:4], np.array([1, 23, 23, 1]) / 48, atol=1e-16)

    def test_placement_in_nine_point_table(self):
        """Span 3 of a 9-point cubic table occupies entries 2..5."""
        lut = SplineLut(SplineConfig.from_points(3, 9))
        g = regressor(region_index(2.3, lut.config), lut)
        assert list(np.flatnonzero(g)) == [2, 3, 4, 5]

    @settings(max_examples=150, deadline=None)
    @given(order=orders, n_points=st.integers(5, 16), frac=st.floats(0, 0.999999),
           delta=st.floats(0.1, 2))
    def test_contiguous_nonzeros_and_oracle(self, order, n_points, frac, delta):
        lut = SplineLut(SplineConfig.from_points(order, n_points, delta))
        a = frac * lut.config.max_amplitude
        idx = region_index(a, lut.config)
        g = regressor(idx, lut)
        ref = np.array([float(w) for w in spline_weights(a, order, n_points, delta)])
        np.testing.assert_allclose(g, ref, atol=1e-12)
        block = g[idx.offset:idx.offset + order + 1]
        assert np.all(np.delete(g, range(idx.offset, idx.offset + order + 1)) == 0)
        assert block.size == order + 1


class TestSplineProperties:
    """Partition of unity, continuity and locality."""

    @settings(max_examples=200, deadline=None)
    @given(order=orders, u=st.floats(0, 1, exclude_max=True), delta=st.floats(0.1, 4))
    def test_partition_of_unity(self, order, u, delta):
        lut = SplineLut(SplineConfig(order, delta, 3))
        g = regressor(region_index(u * delta, lut.config), lut)
        assert abs(g.sum() - 1) < 1e-12

    @settings(max_examples=60, deadline=None)
    @given(order=orders, n_points=st.integers(5, 16), seed=st.integers(0, 2**32 - 1))
    def test_knot_continuity(self, order, n_points, seed):
        """The pieces on either side of every knot meet (one-sided limits agree)."""
        lut = _random_lut(np.random.default_rng(seed), order, n_points)
        for span in range(1, lut.config.region_count):
            jump = _piece(lut, span - 1, 1.0) - _piece(lut, span, 0.0)
            assert abs(jump) < 1e-8

    @settings(max_examples=60, deadline=None)
    @given(order=orders, n_points=st.integers(5, 16), seed=st.integers(0, 2**32 - 1))
    def test_values_close_to_knots(self, order, n_points, seed):
        """Values at knot -/+ eps differ by no more than the slope allows."""
        lut = _random_lut(np.random.default_rng(seed), order, n_points)
        eps = 1e-6
        knots = np.arange(1, lut.config.region_count, dtype=float)
        slope = 2 * np.max(np.abs(np.diff(lut.control_points)))
        gap = np.abs(lut.evaluate(knots - eps) - lut.evaluate(knots + eps))
        assert np.all(gap < 2 * eps * slope + 1e-8)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_cubic_derivative_continuity(self, seed):
        """First and second derivatives match across knots for cubic tables."""
        lut = _random_lut(np.random.default_rng(seed), 3, 10)
        for span in range(1, lut.config.region_count):
            for deriv in (1, 2):
                jump = _piece(lut, span - 1, 1.0, deriv) - _piece(lut, span, 0.0, deriv)
                assert abs(jump) < 1e-8

    @settings(max_examples=60, deadline=None)
    @given(order=orders, n_points=st.integers(5, 16), seed=st.integers(0, 2**32 - 1),
           data=st.data())
    def test_locality(self, order, n_points, seed, data):
        rng = np.random.default_rng(seed)
        lut = _random_lut(rng, order, n_points)
        j = data.draw(st.integers(0, n_points - 1))
        bumped = lut.copy()
        bumped.control_points[j] += 0.5 - 0.25j
        a = np.linspace(0, lut.config.max_amplitude, 2001)[:-1]
        changed = np.abs(bumped.evaluate(a) - lut.evaluate(a)) > 0
        offset, _ = region_indices(a, lut.config)
        support = (offset <= j) & (j <= offset + order)
        assert not np.any(changed & ~support)
        assert np.unique(offset[changed]).size <= order + 1


class TestInjection:
    """Gain deviation and the injection nonlinearity."""

    @settings(max_examples=60, deadline=None)
    @given(order=orders, n_points=st.integers(5, 16), seed=st.integers(0, 2**32 - 1))
    def test_zero_table_is_identity(self, order, n_points, seed):
        rng = np.random.default_rng(seed)
        lut = SplineLut(SplineConfig.from_points(order, n_points))
        z = 3 * (rng.standard_normal(300) + 1j * rng.standard_normal(300))
        np.testing.assert_array_equal(lut.apply(z), z)
        assert inject(complex(z[0]), lut) == z[0]

    def test_zero_input(self):
        lut = _random_lut(np.random.default_rng(0), 3, 7)
        assert inject(0j, lut) == 0

    @pytest.mark.parametrize("order", [1, 2, 3])
    def test_constant_table(self, order):
        gamma = 0.3 - 0.1j
        cfg = SplineConfig.from_points(order, 8)
        lut = SplineLut(cfg, np.full(cfg.n_points, gamma))
        z = np.array([0.1, 1.5j, -2.2 + 1j, 4.9])
        np.testing.assert_allclose(lut.evaluate(np.abs(z)), gamma, atol=1e-12)
        np.testing.assert_allclose(lut.apply(z), z * (1 + gamma), atol=1e-12)

    def test_dense_oracle(self):
        cfg = SplineConfig.from_points(3, 8)
        pts = np.zeros(8, complex)
        pts[1], pts[2] = 0.1, 0.2j
        lut = SplineLut(cfg, pts)
        w = np.array([float(v) for v in spline_weights(1.5, 3, 8)])
        assert gain_deviation(1.5, lut) == pytest.approx(w @ pts, abs=1e-15)
        assert gain_deviation(-1.5j, lut) == pytest.approx(w @ pts, abs=1e-15)


class TestSerialization:
    def test_round_trip(self):
        lut = _random_lut(np.random.default_rng(4), 2, 9, 0.75)
        doc = json.loads(lut.to_json())
        assert set(doc) == {"order", "knot_spacing", "region_count", "control_points"}
        back = SplineLut.from_json(lut.to_json())
        assert back.config == lut.config
        np.testing.assert_array_equal(back.control_points, lut.control_points)
        np.testing.assert_array_equal(back.basis, lut.basis)

    def test_wrong_point_count(self):
        with pytest.raises(ValueError):
            SplineLut(SplineConfig(3, 1.0, 4), np.zeros(5))
