import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brinkflow import geometry, macgrid
from brinkflow.errors import InterfaceTouchesBoundary, SizeMismatch
from brinkflow.macgrid import BoundaryData, MacField, MacGrid, apply_L, classify_nodes

from conftest import circle_markers


def sample_field(grid, f1, f2, fp):
    x1, y1 = grid.u1_nodes()
    x2, y2 = grid.u2_nodes()
    xp, yp = grid.node_xy(3)
    return MacField(f1(x1, y1), f2(x2, y2), fp(xp, yp))


class TestApplyL:
    def test_zero_field_zero_output(self):
        g = MacGrid(-2.0, 2.0, 16)
        r1, r2, r3 = apply_L(g, 1.0, MacField.zeros(g))
        assert not r1.any() and not r2.any() and not r3.any()

    def test_linear_velocity_exact(self):
        g = MacGrid(-2.0, 2.0, 16)
        fld = sample_field(g, lambda x, y: x, lambda x, y: 0 * x, lambda x, y: 0 * x)
        bc = BoundaryData.from_function(g, lambda x, y: (x, 0.0 * x))
        r1, r2, r3 = apply_L(g, 0.0, fld, bc)
        assert np.abs(r1).max() < 1e-12
        assert np.abs(r3 - 1.0).max() < 1e-12

    def test_sine_laplacian_second_order(self):
        # analytic oracle: L1 of u1 = sin(pi x) sin(pi y) with c2 = 0 is
        # -2 pi^2 u1; Richardson between N=64 and N=128 pins the rate
        errs = []
        for n in (64, 128):
            g = MacGrid(-2.0, 2.0, n)
            fld = sample_field(g, lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y),
                               lambda x, y: 0 * x, lambda x, y: 0 * x)
            bc = BoundaryData.from_function(
                g, lambda x, y: (np.sin(np.pi * x) * np.sin(np.pi * y), 0.0 * x))
            r1, _, _ = apply_L(g, 0.0, fld, bc)
            x1, y1 = g.u1_nodes()
            exact = -2 * np.pi**2 * np.sin(np.pi * x1) * np.sin(np.pi * y1)
            j, i = g.n // 2, g.n // 2  # fixed interior physical location
            errs.append(abs(r1[j, i] - exact[j, i]))
        assert errs[0] / errs[1] > 3.0
        assert errs[0] < 0.1

    def test_size_mismatch(self):
        g = MacGrid(-2.0, 2.0, 16)
        bad = MacField.zeros(MacGrid(-2.0, 2.0, 32))
        with pytest.raises(SizeMismatch):
            apply_L(g, 0.0, bad)

    @given(st.integers(0, 10**6))
    @settings(max_examples=10, deadline=None)
    def test_linearity(self, seed):
        rng = np.random.default_rng(seed)
        g = MacGrid(-1.0, 1.0, 8)
        f = MacField(rng.normal(size=(8, 7)), rng.normal(size=(7, 8)),
                     rng.normal(size=(8, 8)))
        k = MacField(rng.normal(size=(8, 7)), rng.normal(size=(7, 8)),
                     rng.normal(size=(8, 8)))
        a, b = rng.normal(size=2)
        comb = MacField(a * f.u1 + b * k.u1, a * f.u2 + b * k.u2, a * f.p + b * k.p)
        rc = apply_L(g, 2.0, comb)
        rf = apply_L(g, 2.0, f)
        rk = apply_L(g, 2.0, k)
        for c, x, y in zip(rc, rf, rk):
            assert np.allclose(c, a * x + b * y, atol=1e-10)

    def test_gradient_divergence_adjoint(self):
        # <grad p, u> = -<p, div u> with homogeneous walls: the duality that
        # makes the block operator's off-diagonal pair transposes
        rng = np.random.default_rng(42)
        g = MacGrid(-2.0, 2.0, 16)
        n = g.n
        u = MacField(rng.normal(size=(n, n - 1)), rng.normal(size=(n - 1, n)),
                     np.zeros((n, n)))
        p = rng.normal(size=(n, n))
        pf = MacField(np.zeros((n, n - 1)), np.zeros((n - 1, n)), p)
        # gradient appears in the momentum rows with u = 0: L1 = -d+ p
        g1, g2, _ = apply_L(g, 0.0, pf)
        _, _, div = apply_L(g, 0.0, u)
        lhs = (g1 * u.u1).sum() + (g2 * u.u2).sum()  # <-grad p, u>
        rhs = (p * div).sum()  # <p, div u>
        assert abs(lhs - rhs) < 1e-12 * max(1.0, abs(lhs))


class TestClassifyNodes:
    def test_irregular_count_scales_with_perimeter(self):
        curve = geometry.build_curve(circle_markers(64))
        g = MacGrid(-2.0, 2.0, 64)
        cls = classify_nodes(g, curve)
        count = int(cls.irregular[3].sum())
        est = 2 * np.pi * 1.0 / g.h
        assert 0.8 * est <= count <= 1.2 * est

    def test_irregular_against_brute_force(self):
        curve = geometry.build_curve(circle_markers(32))
        g = MacGrid(-2.0, 2.0, 32)
        cls = classify_nodes(g, curve)
        # brute force for component 3: stencil = the four face nodes
        x1, y1 = g.u1_nodes()
        x2, y2 = g.u2_nodes()

        def side(x, y):
            return 1 if np.hypot(x, y) < 1.0 else -1

        n = g.n
        for j in range(n):
            for i in range(n):
                s = []
                if i > 0:
                    s.append(side(x1[j, i - 1], y1[j, i - 1]))
                else:
                    s.append(-1)
                if i < n - 1:
                    s.append(side(x1[j, i], y1[j, i]))
                else:
                    s.append(-1)
                if j > 0:
                    s.append(side(x2[j - 1, i], y2[j - 1, i]))
                else:
                    s.append(-1)
                if j < n - 1:
                    s.append(side(x2[j, i], y2[j, i]))
                else:
                    s.append(-1)
                assert cls.irregular[3][j, i] == (max(s) != min(s))

    def test_clearance_violation(self):
        curve = geometry.build_curve(circle_markers(64, radius=1.95))
        with pytest.raises(InterfaceTouchesBoundary):
            classify_nodes(MacGrid(-2.0, 2.0, 32), curve)

    def test_reflection_symmetry(self):
        # mirroring the circle across the x axis mirrors the irregular sets
        up = geometry.build_curve(circle_markers(64, center=(0.0, 0.3)))
        dn = geometry.build_curve(circle_markers(64, center=(0.0, -0.3)))
        g = MacGrid(-2.0, 2.0, 32)
        cu = classify_nodes(g, up)
        cd = classify_nodes(g, dn)
        # pressure nodes are symmetric about y = 0: row j <-> row n-1-j
        assert np.array_equal(cu.irregular[3], cd.irregular[3][::-1, :])
        # u1 nodes likewise
        assert np.array_equal(cu.irregular[1], cd.irregular[1][::-1, :])


class TestBoundaryData:
    def test_compatibility_check(self):
        g = MacGrid(-2.0, 2.0, 16)
        bc = BoundaryData.from_function(g, lambda x, y: (x, -y))  # div-free
        assert bc.check_compatibility(g)
        bad = BoundaryData.from_function(g, lambda x, y: (x, y))  # net outflow
        assert not bad.check_compatibility(g)

    def test_kernels_residual_matches_apply_L(self):
        from brinkflow import _kernels
        rng = np.random.default_rng(5)
        g = MacGrid(-2.0, 2.0, 16)
        n = g.n
        fld = MacField(rng.normal(size=(n, n - 1)), rng.normal(size=(n - 1, n)),
                       rng.normal(size=(n, n)))
        bc = BoundaryData.from_function(g, lambda x, y: (np.cos(y) * x, np.sin(x)))
        b = MacField(rng.normal(size=(n, n - 1)), rng.normal(size=(n - 1, n)),
                     rng.normal(size=(n, n)))
        r1 = np.empty_like(fld.u1); r2 = np.empty_like(fld.u2); r3 = np.empty_like(fld.p)
        _kernels.residual(g.h, 3.0, fld.u1, fld.u2, fld.p, b.u1, b.u2, b.p,
                          *bc.arrays(), r1, r2, r3)
        a1, a2, a3 = apply_L(g, 3.0, fld, bc)
        assert np.allclose(r1, b.u1 - a1, atol=1e-12)
        assert np.allclose(r2, b.u2 - a2, atol=1e-12)
        assert np.allclose(r3, b.p - a3, atol=1e-12)

    def test_fallback_matches_compiled(self):
        from brinkflow._kernels import impl, pyfallback
        if impl is pyfallback:
            pytest.skip("compiled backend unavailable")
        rng = np.random.default_rng(11)
        g = MacGrid(-1.0, 1.0, 8)
        n = g.n
        args_c, args_p = [], []
        for shape in [(n, n - 1), (n - 1, n), (n, n)] * 2:
            arr = rng.normal(size=shape)
            args_c.append(arr.copy())
            args_p.append(arr.copy())
        bc = BoundaryData.from_function(g, lambda x, y: (y * 0 + 1.0, x))
        w2c = np.zeros((n, n)); w2p = np.zeros((n, n))
        impl.dgs_sweep(g.h, 2.0, *args_c, *bc.arrays(), w2c)
        pyfallback.dgs_sweep(g.h, 2.0, *args_p, *bc.arrays(), w2p)
        for a, b in zip(args_c[:3] + [w2c], args_p[:3] + [w2p]):
            assert np.allclose(a, b, atol=1e-14)
