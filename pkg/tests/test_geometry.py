import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from brinkflow import geometry
from brinkflow.errors import SelfIntersection, TooFewMarkers
from brinkflow.geometry import (
    SideTag, build_curve, classify, classify_bulk, density_interp,
    enclosed_area, frame_at, nearest_marker, reparametrize_by_arclength,
)

from conftest import circle_markers, flower_markers


class TestBuildCurve:
    def test_interpolates_markers_exactly(self, unit_circle_64):
        c = unit_circle_64
        pts = c.point(c.marker_params)
        assert np.allclose(pts, c.markers, atol=1e-14)

    def test_flower_closes_smoothly(self):
        c = build_curve(flower_markers(128, amp=0.1, reparam=False))
        # periodic spline: derivatives match across the seam
        d_lo = c.velocity(1e-13)
        d_hi = c.velocity(2.0 * np.pi - 1e-13)
        assert np.allclose(d_lo, d_hi, atol=1e-9)

    def test_midpoint_radius_error_fourth_order(self):
        errs = []
        for m in (32, 64):
            c = build_curve(circle_markers(m))
            mids = c.marker_params + c.ds / 2
            r = np.hypot(*c.point(mids).T)
            errs.append(np.abs(r - 1.0).max())
        # cubic spline: O(ds^4), so halving ds cuts the error ~16x
        assert errs[0] / errs[1] > 10.0
        assert errs[1] < 1e-5

    def test_too_few_markers(self):
        with pytest.raises(TooFewMarkers):
            build_curve(circle_markers(7))

    def test_self_intersection_detected(self):
        bowtie = np.array([[0, 0], [1, 1], [1, 0], [0, 1],
                           [-0.5, 1], [-1, 0.8], [-1, 0.2], [-0.5, 0.1]], dtype=float)
        with pytest.raises(SelfIntersection):
            build_curve(bowtie)


class TestFrames:
    def test_unit_circle_frame_at_zero(self, unit_circle_64):
        fr = frame_at(unit_circle_64, 0.0)
        assert np.allclose(fr.point, [1, 0], atol=1e-14)
        assert np.allclose(fr.tangent, [0, 1], atol=1e-10)
        assert np.allclose(fr.normal, [1, 0], atol=1e-10)
        assert abs(fr.curvature - 1.0) < 2e-3

    def test_half_radius_curvature(self):
        c = build_curve(circle_markers(64, radius=0.5))
        for s in np.linspace(0, 2 * np.pi, 17):
            assert abs(frame_at(c, s).curvature - 2.0) < 4e-3

    def test_circle_curvature_second_order(self):
        # interpolating cubic splines carry O(ds^2) curvature error; check
        # the rate and the absolute level at two resolutions
        errs = []
        for m in (64, 256):
            c = build_curve(circle_markers(m))
            ss = np.linspace(0, 2 * np.pi, 33)
            curv = np.array([frame_at(c, s).curvature for s in ss])
            errs.append(np.abs(curv - 1.0).max())
        assert errs[0] / errs[1] > 10.0
        assert errs[1] < 1e-4

    def test_orthonormal_frame(self, unit_circle_64):
        for s in np.random.default_rng(0).uniform(0, 2 * np.pi, 20):
            fr = frame_at(unit_circle_64, s)
            assert abs(fr.tangent @ fr.normal) < 1e-12
            assert abs(np.hypot(*fr.tangent) - 1) < 1e-12
            assert abs(np.hypot(*fr.normal) - 1) < 1e-12

    def test_flower_curvature_vs_finite_difference(self):
        c = build_curve(flower_markers(256, amp=0.1, reparam=False))
        # independent oracle: finite difference of the tangent angle along
        # the spline; sample mid-interval, away from knot kinks in X'''
        ds = c.ds
        for s0 in (10.5 * ds, 60.5 * ds, 201.5 * ds):
            eps = 1e-5
            frm = frame_at(c, s0 - eps)
            frp = frame_at(c, s0 + eps)
            cross = frm.tangent[0] * frp.tangent[1] - frm.tangent[1] * frp.tangent[0]
            dth = np.arctan2(cross, frm.tangent @ frp.tangent)
            darc = 2 * eps * frame_at(c, s0).speed
            assert abs(frame_at(c, s0).curvature - dth / darc) < 1e-6


class TestClassify:
    def test_origin_inside(self, unit_circle_64):
        assert classify(unit_circle_64, (0.0, 0.0)) == SideTag.PLUS

    def test_outside_point(self, unit_circle_64):
        assert classify(unit_circle_64, (1.5, 0.0)) == SideTag.MINUS

    def test_on_interface(self, unit_circle_64):
        p = unit_circle_64.markers[5]
        assert classify(unit_circle_64, p, tol=1e-9) == SideTag.ON_INTERFACE

    def test_grid_against_analytic_circle(self, unit_circle_64):
        xs = np.linspace(-2, 2, 128)
        xx, yy = np.meshgrid(xs, xs)
        pts = np.column_stack([xx.ravel(), yy.ravel()])
        got = classify_bulk(unit_circle_64, pts)
        rr = np.hypot(pts[:, 0], pts[:, 1])
        want = np.where(rr < 1.0, 1, -1)
        band = np.abs(rr - 1.0) < 1e-3  # spline-vs-circle band
        assert np.array_equal(got[~band], want[~band])

    def test_outward_normal_orientation(self, unit_circle_64):
        c = unit_circle_64
        eps = 0.01 * c.diameter()
        for i in (0, 13, 40):
            fr = frame_at(c, i * c.ds)
            assert classify(c, fr.point + eps * fr.normal) == SideTag.MINUS
            assert classify(c, fr.point - eps * fr.normal) == SideTag.PLUS

    @given(st.floats(-1.8, 1.8), st.floats(-1.8, 1.8))
    @settings(max_examples=40, deadline=None)
    def test_projection_consistency(self, px, py):
        c = build_curve(circle_markers(64))
        if abs(np.hypot(px, py) - 1.0) < 1e-3:
            return
        want = SideTag.PLUS if np.hypot(px, py) < 1.0 else SideTag.MINUS
        assert classify(c, (px, py)) == want


class TestNearestMarker:
    def test_exact_marker(self, unit_circle_64):
        assert nearest_marker(unit_circle_64, unit_circle_64.markers[3]) == 3

    def test_tie_breaks_to_smaller_index(self, unit_circle_64):
        mid = 0.5 * (unit_circle_64.markers[0] + unit_circle_64.markers[1])
        assert nearest_marker(unit_circle_64, mid) == 0

    def test_against_brute_force(self, unit_circle_64):
        rng = np.random.default_rng(7)
        pts = rng.uniform(-1.5, 1.5, size=(50, 2))
        for p in pts:
            d = np.hypot(*(unit_circle_64.markers - p).T)
            assert nearest_marker(unit_circle_64, p) == int(np.argmin(d))


class TestEnclosedArea:
    def test_unit_circle(self, unit_circle_64):
        # spline-vs-circle representation bias is O(ds^4); the quadrature
        # itself is exact for the spline
        assert abs(enclosed_area(unit_circle_64) - np.pi) < 2e-6

    def test_unit_circle_fourth_order(self):
        errs = [abs(enclosed_area(build_curve(circle_markers(m))) - np.pi)
                for m in (64, 128)]
        assert errs[0] / errs[1] > 10.0
        assert errs[1] < 1e-7

    def test_half_circle_scaling(self):
        c = build_curve(circle_markers(64, radius=0.5))
        assert abs(enclosed_area(c) - np.pi / 4) < 1e-6

    def test_flower_against_polar_quadrature(self):
        m = 256
        th = np.arange(m) * (2 * np.pi / m)
        r = 1.0 + 0.2 * np.cos(6 * th)
        c = build_curve(np.column_stack([r * np.cos(th), r * np.sin(th)]))
        exact = quad(lambda t: 0.5 * (1 + 0.2 * np.cos(6 * t)) ** 2, 0, 2 * np.pi,
                     limit=200)[0]
        assert abs(enclosed_area(c) - exact) < 5e-6

    def test_ccw_orientation_positive(self, unit_circle_64):
        assert enclosed_area(unit_circle_64) > 0


class TestDensityInterp:
    def test_constant_reproduced(self, unit_circle_64):
        vals = np.full((64, 2), 3.7)
        out = density_interp(unit_circle_64, vals, np.linspace(0, 6.0, 11))
        assert np.allclose(out, 3.7, atol=1e-13)

    def test_nodal_values_exact(self, unit_circle_64):
        rng = np.random.default_rng(3)
        vals = rng.normal(size=(64, 2))
        out = density_interp(unit_circle_64, vals, unit_circle_64.marker_params)
        assert np.allclose(out, vals, atol=1e-12)

    def test_sine_midpoint_accuracy(self):
        errs = []
        for m in (32, 64):
            c = build_curve(circle_markers(m))
            s = c.marker_params
            vals = np.sin(s)[:, None]
            mids = s + c.ds / 2
            out = density_interp(c, vals, mids)[:, 0]
            errs.append(np.abs(out - np.sin(mids)).max())
        assert errs[0] / errs[1] > 10.0
        assert errs[1] < 1e-5


class TestReparametrize:
    def test_equalizes_arc_spacing(self):
        c0 = build_curve(flower_markers(128, amp=0.2, reparam=False))
        seg0 = geometry.marker_arc_spacing(c0)
        c1 = reparametrize_by_arclength(c0)
        seg1 = geometry.marker_arc_spacing(c1)
        assert seg1.max() / seg1.min() < 1.01
        assert seg1.max() / seg1.min() < seg0.max() / seg0.min()

    def test_preserves_shape(self, unit_circle_64):
        c1 = reparametrize_by_arclength(unit_circle_64)
        r = np.hypot(*c1.markers.T)
        assert np.abs(r - 1.0).max() < 1e-6


class TestMarkerIO:
    def test_roundtrip(self, tmp_path, unit_circle_64):
        path = tmp_path / "markers.csv"
        geometry.write_markers_csv(path, unit_circle_64)
        c2 = geometry.read_markers_csv(path)
        assert np.allclose(c2.markers, unit_circle_64.markers, atol=1e-15)
        with open(path) as fh:
            assert fh.readline().strip() == "s,x,y"
