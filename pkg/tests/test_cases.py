import numpy as np
import pytest

from brinkflow import cases, geometry
from brinkflow.cases import convergence_orders, error_norms, manufactured_eval
from brinkflow.macgrid import MacField, MacGrid

from conftest import circle_markers, flower_markers


ALL_CASES = [
    cases.example1(0.001, 1.0),
    cases.example1(10.0, 1000.0),
    cases.example2(10.0, 1.0, 1.0),
    cases.example2(0.1, 100.0, 1.0),
]


def fd_gradient(fn, pts, step=1e-5):
    """Central-difference gradient of a scalar/vector field, (..., comp, 2)."""
    pts = np.asarray(pts, dtype=float)
    out = []
    for axis in range(2):
        dp = np.zeros_like(pts)
        dp[..., axis] = step
        out.append((fn(pts + dp) - fn(pts - dp)) / (2 * step))
    return np.stack(out, axis=-1)


def fd_laplacian(fn, pts, step=1e-4):
    pts = np.asarray(pts, dtype=float)
    acc = -4.0 * fn(pts)
    for axis in range(2):
        dp = np.zeros_like(pts)
        dp[..., axis] = step
        acc = acc + fn(pts + dp) + fn(pts - dp)
    return acc / step**2


class TestSpotValues:
    def test_example1_exterior_point(self):
        case = cases.example1(0.001, 1.0)
        u, p, _ = manufactured_eval(case, (2.0, 0.0), -1)
        assert np.allclose(u, [0.0, 2.5], atol=1e-14)
        assert abs(p) < 1e-14

    def test_example1_interior_pressure(self):
        case = cases.example1(0.001, 1.0)
        for pt in [(0.0, 0.0), (0.3, -0.4), (0.6, 0.1)]:
            _, p, _ = manufactured_eval(case, pt, 1)
            assert p == 5.0

    def test_example1_velocity_continuous_on_circle(self):
        case = cases.example1(10.0, 1.0)
        th = np.linspace(0, 2 * np.pi, 17)
        pts = np.column_stack([np.cos(th), np.sin(th)])
        up = case.velocity(pts, 1)
        um = case.velocity(pts, -1)
        assert np.abs(up - um).max() < 1e-14

    def test_example2_velocity_jumps_on_flower(self):
        case = cases.example2(10.0, 1.0, 1.0)
        curve = geometry.build_curve(flower_markers(64))
        g1 = case.g1_nodal(curve)
        assert np.abs(g1).max() > 0.1


class TestForceValidation:
    @pytest.mark.parametrize("case", ALL_CASES, ids=lambda c: f"{c.name}-{c.mu_plus}-{c.kappa_plus}")
    @pytest.mark.parametrize("side", [1, -1])
    def test_body_force_matches_finite_differences(self, case, side):
        rng = np.random.default_rng(0)
        if side > 0:
            r = rng.uniform(0.2, 0.9, 100)
        else:
            r = rng.uniform(1.1, 1.8, 100)
        th = rng.uniform(0, 2 * np.pi, 100)
        pts = np.column_stack([r * np.cos(th), r * np.sin(th)])
        mu = case.mu_plus if side > 0 else case.mu_minus
        kap = case.kappa_plus if side > 0 else case.kappa_minus
        lap = fd_laplacian(lambda p: case.velocity(p, side), pts)
        gp = fd_gradient(lambda p: case.pressure(p, side), pts)
        want = mu * lap - kap * case.velocity(pts, side) - gp
        got = case.body_force(pts, side)
        scale = np.abs(want).max() + 1.0
        assert np.abs(got - want).max() / scale < 1e-6

    @pytest.mark.parametrize("case", ALL_CASES[:2], ids=["ex1a", "ex1b"])
    @pytest.mark.parametrize("side", [1, -1])
    def test_two_d_matches_finite_differences(self, case, side):
        rng = np.random.default_rng(1)
        r = rng.uniform(0.3, 0.9, 50) if side > 0 else rng.uniform(1.1, 1.8, 50)
        th = rng.uniform(0, 2 * np.pi, 50)
        pts = np.column_stack([r * np.cos(th), r * np.sin(th)])
        grad = fd_gradient(lambda p: case.velocity(p, side), pts)
        want = grad + np.swapaxes(grad, -1, -2)
        assert np.abs(case.two_d(pts, side) - want).max() < 1e-6

    def test_divergence_free(self):
        rng = np.random.default_rng(2)
        pts = np.column_stack([rng.uniform(-1.9, 1.9, 200),
                               rng.uniform(-1.9, 1.9, 200)])
        for case in ALL_CASES[:1] + ALL_CASES[2:3]:
            for side in (1, -1):
                keep = np.hypot(pts[:, 0], pts[:, 1]) > 0.1
                grad = fd_gradient(lambda p: case.velocity(p, side), pts[keep])
                div = grad[:, 0, 0] + grad[:, 1, 1]
                assert np.abs(div).max() < 1e-6

    def test_boundary_data_compatible(self):
        case = cases.example1(0.001, 1.0)
        grid = MacGrid(-2.0, 2.0, 64)
        bc = case.boundary_data(grid)
        assert bc.check_compatibility(grid, tol=1e-4)  # midpoint-rule flux


class TestErrorNorms:
    def test_exact_field_gives_roundoff(self):
        case = cases.example1(1.0, 1.0)
        grid = MacGrid(-2.0, 2.0, 32)
        curve = geometry.build_curve(circle_markers(16))
        from brinkflow.macgrid import classify_nodes
        cls = classify_nodes(grid, curve)
        exact = case.exact_field_nodal(grid, cls)
        fld = MacField(exact[0].copy(), exact[1].copy(), exact[2].copy())
        eu, eg, ep = error_norms(grid, fld, exact)
        assert eu < 1e-13 and eg < 1e-13 and ep < 1e-13

    def test_unit_error_weight(self):
        grid = MacGrid(0.0, 1.0, 8)
        exact = (np.zeros((8, 7)), np.zeros((7, 8)), np.zeros((8, 8)))
        fld = MacField(np.zeros((8, 7)), np.zeros((7, 8)), np.ones((8, 8)))
        _, _, ep = error_norms(grid, fld, exact, align_pressure=False)
        assert abs(ep - 1.0) < 1e-14

    def test_order_extraction_exact(self):
        errs = [7.3 * n**-2.0 for n in (64, 128, 256)]
        orders = convergence_orders(errs)
        assert np.allclose(orders, 2.0, atol=1e-12)
