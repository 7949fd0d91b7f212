"""Manufactured solutions and discrete error norms.

Two families of exact solutions on the box (-2, 2)^2, both with the same
minus-side (exterior) fields:

* smooth-polynomial interior fields with constant interior pressure,
  continuous velocity across the unit circle;
* trigonometric interior fields with genuinely discontinuous velocity,
  posed on a six-lobed flower interface.

The body forces are the closed forms of mu*Lap(u) - kappa*u - grad p per
side (validated against finite differences in the test suite), and the
interface data are the exact velocity and traction jumps.
"""

from dataclasses import dataclass

import numpy as np

from . import geometry
from .macgrid import BoundaryData


def _minus_velocity(pts):
    x, y = pts[..., 0], pts[..., 1]
    r = np.hypot(x, y)
    return np.stack([y / r - 0.75 * y, -x / r + 0.25 * x * (3.0 + x * x)],
                    axis=-1)


def _minus_pressure(pts):
    x, y = pts[..., 0], pts[..., 1]
    return y * (-0.75 * x**3 + 0.375 * x)


def _minus_force(pts, mu, kappa):
    x, y = pts[..., 0], pts[..., 1]
    r = np.hypot(x, y)
    r3 = r**3
    f1 = -mu * y / r3 - kappa * (y / r - 0.75 * y) + 2.25 * x * x * y - 0.375 * y
    f2 = mu * (x / r3 + 1.5 * x) - kappa * (-x / r + 0.25 * x * (3.0 + x * x)) \
        + 0.75 * x**3 - 0.375 * x
    return np.stack([f1, f2], axis=-1)


def _minus_two_d(pts):
    x, y = pts[..., 0], pts[..., 1]
    r3 = np.hypot(x, y) ** 3
    d11 = -2.0 * x * y / r3
    off = (x * x - y * y) / r3 + 0.75 * x * x
    return np.stack([np.stack([d11, off], axis=-1),
                     np.stack([off, -d11], axis=-1)], axis=-2)


@dataclass
class ManufacturedCase:
    name: str
    mu_plus: float
    mu_minus: float
    kappa_plus: float
    kappa_minus: float
    shape: str  # "circle" or "flower"

    # -- exact fields ------------------------------------------------

    def velocity(self, pts, side):
        pts = np.asarray(pts, dtype=float)
        if side < 0:
            return _minus_velocity(pts)
        x, y = pts[..., 0], pts[..., 1]
        if self.name == "example1":
            return np.stack([0.25 * y * (x * x + y * y), -0.25 * x * y * y],
                            axis=-1)
        return np.stack([np.sin(x) * np.cos(y), -np.cos(x) * np.sin(y)],
                        axis=-1)

    def pressure(self, pts, side):
        pts = np.asarray(pts, dtype=float)
        x, y = pts[..., 0], pts[..., 1]
        if side < 0:
            return _minus_pressure(pts)
        if self.name == "example1":
            return np.full_like(x, 5.0)
        return np.sin(x) * np.sin(y)

    def body_force(self, pts, side):
        pts = np.asarray(pts, dtype=float)
        if side < 0:
            return _minus_force(pts, self.mu_minus, self.kappa_minus)
        x, y = pts[..., 0], pts[..., 1]
        mu, kap = self.mu_plus, self.kappa_plus
        if self.name == "example1":
            f1 = 2.0 * mu * y - 0.25 * kap * y * (x * x + y * y)
            f2 = -0.5 * mu * x + 0.25 * kap * x * y * y
            return np.stack([f1, f2], axis=-1)
        f1 = -(kap + 2.0 * mu) * np.sin(x) * np.cos(y) - np.cos(x) * np.sin(y)
        f2 = (kap + 2.0 * mu) * np.cos(x) * np.sin(y) - np.sin(x) * np.cos(y)
        return np.stack([f1, f2], axis=-1)

    def two_d(self, pts, side):
        """Rate-of-deformation tensor doubled: grad u + grad u^T."""
        pts = np.asarray(pts, dtype=float)
        if side < 0:
            return _minus_two_d(pts)
        x, y = pts[..., 0], pts[..., 1]
        if self.name == "example1":
            d11 = x * y
            off = 0.25 * (x * x + 2.0 * y * y)
        else:
            d11 = 2.0 * np.cos(x) * np.cos(y)
            off = np.zeros_like(x)
        return np.stack([np.stack([d11, off], axis=-1),
                         np.stack([off, -d11], axis=-1)], axis=-2)

    def stress_normal(self, pts, normals, side):
        """Physical traction sigma_mu n = mu (grad u + grad u^T) n - p n."""
        mu = self.mu_plus if side > 0 else self.mu_minus
        td = self.two_d(pts, side)
        p = self.pressure(pts, side)
        return mu * np.einsum("...ab,...b->...a", td, normals) \
            - p[..., None] * normals

    # -- solver-facing data -------------------------------------------

    def g1_nodal(self, curve):
        pts = curve.markers
        return self.velocity(pts, 1) - self.velocity(pts, -1)

    def g2_nodal(self, curve):
        pts = curve.markers
        _, _, normals, _, _ = geometry.frames_at(curve, curve.marker_params)
        return self.stress_normal(pts, normals, 1) \
            - self.stress_normal(pts, normals, -1)

    def boundary_data(self, grid):
        return BoundaryData.from_function(
            grid, lambda x, y: tuple(np.moveaxis(
                self.velocity(np.stack([x, y], axis=-1), -1), -1, 0)))

    def ftilde_arrays(self, grid, cls, chi=None):
        """Nodal f/mu, optionally masked to one side (chi = +1 or -1)."""
        out = []
        for comp in (1, 2):
            xx, yy = grid.node_xy(comp)
            pts = np.stack([xx, yy], axis=-1)
            side = cls.side(comp)
            vals = np.where((side == 1)[..., None],
                            self.body_force(pts, 1) / self.mu_plus,
                            self.body_force(pts, -1) / self.mu_minus)
            if chi is not None:
                vals = np.where((side == chi)[..., None], vals, 0.0)
            out.append(vals[..., comp - 1])
        return tuple(out)

    def ftilde_jump(self, chi=None):
        """Evaluator of the two-sided difference of f/mu near the interface.

        chi = +1 keeps only the plus-side field (jump = +f/mu_plus); chi =
        -1 keeps only the minus side (jump = -f/mu_minus); None is the full
        piecewise field.
        """

        def fhat(pts):
            pts = np.asarray(pts, dtype=float)
            plus = self.body_force(pts, 1) / self.mu_plus
            minus = self.body_force(pts, -1) / self.mu_minus
            if chi == 1:
                return plus
            if chi == -1:
                return -minus
            return plus - minus

        return fhat

    def exact_field_nodal(self, grid, cls):
        """(u1, u2, p) exact values at the staggered nodes, per node side."""
        vals = []
        for comp in (1, 2, 3):
            xx, yy = grid.node_xy(comp)
            pts = np.stack([xx, yy], axis=-1)
            side = cls.side(comp)
            if comp == 3:
                v = np.where(side == 1, self.pressure(pts, 1),
                             self.pressure(pts, -1))
            else:
                v = np.where(side == 1, self.velocity(pts, 1)[..., comp - 1],
                             self.velocity(pts, -1)[..., comp - 1])
            vals.append(v)
        return tuple(vals)


def example1(omega, eta):
    """Equal coefficient ratios: mu+ = omega, kappa/mu = eta on both sides."""
    return ManufacturedCase("example1", mu_plus=float(omega), mu_minus=1.0,
                            kappa_plus=float(omega * eta),
                            kappa_minus=float(eta), shape="circle")


def example2(mu_plus, kappa_plus, kappa_minus):
    """Generic ratios on the six-lobed flower interface."""
    return ManufacturedCase("example2", mu_plus=float(mu_plus), mu_minus=1.0,
                            kappa_plus=float(kappa_plus),
                            kappa_minus=float(kappa_minus), shape="flower")


def manufactured_eval(case, point, side):
    """Exact (u, p, f) of a case at one point on the given side."""
    pts = np.asarray(point, dtype=float)[None, :]
    s = 1 if int(side) > 0 else -1
    return (case.velocity(pts, s)[0], float(case.pressure(pts, s)[0]),
            case.body_force(pts, s)[0])


def error_norms(grid, fld, exact, align_pressure=True):
    """Discrete l2 norms of the velocity error, its staggered gradient and
    the pressure error.

    exact = (u1, u2, p) nodal arrays.  Wall-adjacent gradient terms use the
    reflected-ghost error with weight 1/2 (trapezoidal closure); pressure
    errors are compared after aligning grid means, since the pressure is
    only determined up to a constant.
    """
    h = grid.h
    e1 = fld.u1 - exact[0]
    e2 = fld.u2 - exact[1]
    ep = fld.p - exact[2]
    if align_pressure:
        ep = ep - ep.mean()

    eu = np.sqrt(h * h * ((e1**2).sum() + (e2**2).sum()))
    epn = np.sqrt(h * h * (ep**2).sum())

    # normal-direction differences vanish at the walls (error is zero on
    # the Dirichlet wall values)
    d1x = np.diff(np.pad(e1, ((0, 0), (1, 1))), axis=1) / h
    d2y = np.diff(np.pad(e2, ((1, 1), (0, 0))), axis=0) / h
    # tangential-direction differences: interior plus half-weight wall
    # terms from the reflected ghost (e_ghost = -e_interior)
    d1y = np.diff(e1, axis=0) / h
    d2x = np.diff(e2, axis=1) / h
    grad2 = (d1x**2).sum() + (d2y**2).sum() + (d1y**2).sum() + (d2x**2).sum()
    grad2 += 0.5 * ((2.0 * e1[0, :] / h)**2).sum() \
        + 0.5 * ((2.0 * e1[-1, :] / h)**2).sum() \
        + 0.5 * ((2.0 * e2[:, 0] / h)**2).sum() \
        + 0.5 * ((2.0 * e2[:, -1] / h)**2).sum()
    egrad = np.sqrt(h * h * grad2)
    return float(eu), float(egrad), float(epn)


def convergence_orders(errors):
    """log2 ratios of successive error levels (halved mesh sizes)."""
    errors = np.asarray(errors, dtype=float)
    return list(np.log2(errors[:-1] / errors[1:]))
