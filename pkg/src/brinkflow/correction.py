"""Correction functions on interface patches.

Near the interface the solution has one smooth branch per side; stencils
that straddle the interface mix branches and lose consistency.  The
repair term is the branch difference (velocity jump polynomial + pressure
jump polynomial), determined per marker by collocating the two-sided
interface data on a ball of radius R:

* quadratic velocity (6 monomials per component), linear pressure (3),
* 15 unknowns matched by 15 rows: velocity data at 3 on-curve points,
  traction data at 2, the momentum equation at 1, and the divergence-free
  condition at 3 points (two on the curve, one offset along the normal).

Rows are scaled by powers of R (traction by R, momentum by R^2) and
coordinates are rotated/stretched into the local frame, which keeps the
matrix conditioned uniformly as R shrinks and makes it R-independent for
a straight interface.
"""

from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .errors import OutsideBand, PointOutsidePatch, SingularSystem

COND_FALLBACK = 1e6

# least-squares fallback point sets (only used when the square system is
# badly conditioned, e.g. R too large for the local curvature)
_LS_ETA_D = (-0.9, -0.45, 0.0, 0.45, 0.9)
_LS_ETA_N = (-0.6, -0.2, 0.2, 0.6)
_LS_ETA_P = (-0.3, 0.0, 0.3)
_LS_ETA_V = (-0.75, -0.25, 0.25, 0.75)


@dataclass
class JumpData:
    """Two-sided interface data driving the correction solve.

    phi/psi are the plus-minus trace differences of the velocity and of
    the scaled traction: nodal marker values (interpolated along the
    interface by periodic splines) or exact point evaluators taking (k, 2)
    positions.  fhat evaluates the body-force jump at near-interface
    points.
    """

    phi: object = None
    psi: object = None
    fhat: object = None

    def validate(self, m):
        for name, arr in (("phi", self.phi), ("psi", self.psi)):
            if arr is not None and not callable(arr) \
                    and np.asarray(arr).shape != (m, 2):
                raise ValueError(f"{name} must have shape ({m}, 2)")

    def is_zero(self):
        return (
            (self.phi is None or (not callable(self.phi) and not np.any(self.phi)))
            and (self.psi is None or (not callable(self.psi) and not np.any(self.psi)))
            and self.fhat is None
        )


@dataclass(frozen=True)
class CollocationLayout:
    eta_dirichlet: tuple = (-0.8, 0.0, 0.8)
    eta_neumann: tuple = (-0.4, 0.4)
    eta_pde: float = 0.0
    eta_div: tuple = (-0.6, 0.6)
    div_normal_offset: float = 0.5

    def validate(self):
        if len(set(self.eta_dirichlet)) != 3 or len(set(self.eta_neumann)) != 2:
            raise ValueError("collocation arc parameters must be distinct")
        if self.div_normal_offset == 0.0:
            raise ValueError("off-curve divergence point must leave the curve")
        if max(map(abs, (*self.eta_dirichlet, *self.eta_neumann,
                         self.eta_pde, *self.eta_div))) > 1.0:
            raise ValueError("collocation points must stay within the patch ball")


def basis6(xi):
    x, y = xi[..., 0], xi[..., 1]
    return np.stack([np.ones_like(x), x, y, x * x, y * y, x * y], axis=-1)


def grad6(xi):
    x, y = xi[..., 0], xi[..., 1]
    z = np.zeros_like(x)
    o = np.ones_like(x)
    gx = np.stack([z, o, z, 2 * x, z, y], axis=-1)
    gy = np.stack([z, z, o, z, 2 * y, x], axis=-1)
    return np.stack([gx, gy], axis=-1)  # (..., 6, 2)


LAP6 = np.array([0.0, 0.0, 0.0, 2.0, 2.0, 0.0])


def basis3(xi):
    x, y = xi[..., 0], xi[..., 1]
    return np.stack([np.ones_like(x), x, y], axis=-1)


GRAD3 = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])  # (3, 2)


@dataclass
class PatchGeometry:
    """Localized collocation geometry of one patch (or a batch of them).

    All point coordinates are in the rotated/scaled frame xi = Q(x-X)/R;
    normals are rotated.  Shapes carry a leading batch axis.
    """

    center: np.ndarray        # (m, 2)
    rot: np.ndarray           # (m, 2, 2), rows = (tangent, normal)
    radius: float
    xi_d: np.ndarray          # (m, 3, 2)
    xi_n: np.ndarray          # (m, 2, 2)
    n_loc: np.ndarray         # (m, 2, 2) unit normals at the traction points
    xi_p: np.ndarray          # (m, 2)
    xi_v: np.ndarray          # (m, 3, 2)
    s_d: np.ndarray | None = None   # arc parameters for data interpolation
    s_n: np.ndarray | None = None
    p_d: np.ndarray | None = None   # physical collocation points
    p_n: np.ndarray | None = None
    p_pde: np.ndarray | None = None


def line_patch_geometry(radius, layout=None, origin=(0.0, 0.0), angle=0.0):
    """The straight-interface configuration (batch of one)."""
    layout = layout or CollocationLayout()
    layout.validate()
    t = np.array([np.cos(angle), np.sin(angle)])
    n = np.array([t[1], -t[0]])
    rot = np.stack([t, n])[None]
    center = np.asarray(origin, dtype=float)[None]

    def on_line(etas):
        return np.array([[e, 0.0] for e in etas])[None]

    xi_d = on_line(layout.eta_dirichlet)
    xi_n = on_line(layout.eta_neumann)
    n_loc = np.tile(np.array([0.0, 1.0]), (1, 2, 1))
    xi_p = np.array([[layout.eta_pde, 0.0]])
    xi_v = np.concatenate(
        [on_line(layout.eta_div),
         np.array([[[0.0, layout.div_normal_offset]]])], axis=1)

    def phys(xi_batch):
        return center[:, None, :] + radius * np.einsum("ka,mab->mkb",
                                                       xi_batch[0], rot)

    return PatchGeometry(center, rot, radius, xi_d, xi_n, n_loc, xi_p, xi_v,
                         p_d=phys(xi_d), p_n=phys(xi_n),
                         p_pde=phys(xi_p[:, None, :])[:, 0, :])


def curve_patch_geometry(curve, radius, layout=None):
    """Collocation geometry for every marker patch of a curve.

    Arc offsets eta*R are converted to parameter offsets through the local
    speed, so the points spread a fixed fraction of the patch radius along
    the interface regardless of the parameterization scale.
    """
    layout = layout or CollocationLayout()
    layout.validate()
    m = curve.m
    s0 = curve.marker_params
    _, tang, nrm, speed, _ = geometry.frames_at(curve, s0)
    centers = curve.markers
    rot = np.stack([tang, nrm], axis=1)  # (m, 2, 2)

    def colloc(etas):
        etas = np.asarray(etas, dtype=float)
        s = s0[:, None] + etas[None, :] * radius / speed[:, None]
        pts, _, normals, _, _ = geometry.frames_at(curve, s.ravel())
        pts = pts.reshape(m, len(etas), 2)
        normals = normals.reshape(m, len(etas), 2)
        rel = pts - centers[:, None, :]
        dist = np.hypot(rel[..., 0], rel[..., 1])
        if np.any(dist > radius * (1 + 1e-9)):
            raise PointOutsidePatch(
                f"collocation point {dist.max():.3g} from center exceeds R={radius:.3g}")
        xi = np.einsum("mab,mkb->mka", rot, rel) / radius
        n_loc = np.einsum("mab,mkb->mka", rot, normals)
        return s, pts, xi, n_loc

    s_d, p_d, xi_d, _ = colloc(layout.eta_dirichlet)
    s_n, p_n, xi_n, n_loc = colloc(layout.eta_neumann)
    _, p_pde, xi_p, _ = colloc([layout.eta_pde])
    _, _, xi_v_curve, _ = colloc(layout.eta_div)
    xi_off = np.tile(np.array([0.0, layout.div_normal_offset]), (m, 1, 1))
    xi_v = np.concatenate([xi_v_curve, xi_off], axis=1)
    return PatchGeometry(centers, rot, radius, xi_d, xi_n, n_loc,
                         xi_p[:, 0, :], xi_v, s_d=s_d, s_n=s_n,
                         p_d=p_d, p_n=p_n, p_pde=p_pde[:, 0, :])


def assemble_matrices(geom, c2):
    """Batched 15x15 collocation matrices.

    Row order: velocity data (3 pts x 2), traction (2 x 2), momentum (2),
    divergence (3).  Column order: c1x c1y ... c6x c6y d1 d2 d3.
    """
    m = geom.center.shape[0]
    r = geom.radius
    mat = np.zeros((m, 15, 15))

    b = basis6(geom.xi_d)                                # (m, 3, 6)
    for k in range(3):
        mat[:, 2 * k, 0:12:2] = b[:, k]
        mat[:, 2 * k + 1, 1:12:2] = b[:, k]

    g = grad6(geom.xi_n)                                 # (m, 2, 6, 2)
    b6n = basis3(geom.xi_n)                              # (m, 2, 3)
    nl = geom.n_loc
    gdn = np.einsum("mkjd,mkd->mkj", g, nl)              # grad(phi_j) . n
    for k in range(2):
        rx, ry = 6 + 2 * k, 7 + 2 * k
        mat[:, rx, 0:12:2] = gdn[:, k] + g[:, k, :, 0] * nl[:, k, 0:1]
        mat[:, rx, 1:12:2] = g[:, k, :, 0] * nl[:, k, 1:2]
        mat[:, rx, 12:15] = -b6n[:, k] * nl[:, k, 0:1]
        mat[:, ry, 0:12:2] = g[:, k, :, 1] * nl[:, k, 0:1]
        mat[:, ry, 1:12:2] = gdn[:, k] + g[:, k, :, 1] * nl[:, k, 1:2]
        mat[:, ry, 12:15] = -b6n[:, k] * nl[:, k, 1:2]

    mom = LAP6[None, :] - (c2 * r * r) * basis6(geom.xi_p)  # (m, 6)
    mat[:, 10, 0:12:2] = mom
    mat[:, 10, 12:15] = -GRAD3[:, 0]
    mat[:, 11, 1:12:2] = mom
    mat[:, 11, 12:15] = -GRAD3[:, 1]

    gv = grad6(geom.xi_v)                                # (m, 3, 6, 2)
    for k in range(3):
        mat[:, 12 + k, 0:12:2] = gv[:, k, :, 0]
        mat[:, 12 + k, 1:12:2] = gv[:, k, :, 1]
    return mat


def assemble_rhs(geom, phi_d, psi_n, fhat_p):
    """Batched right-hand sides from data sampled at the collocation points.

    phi_d: (m, 3, 2) velocity jumps, psi_n: (m, 2, 2) traction jumps,
    fhat_p: (m, 2) body-force jumps, all in global components.
    """
    m = geom.center.shape[0]
    r = geom.radius
    rhs = np.zeros((m, 15))
    loc_d = np.einsum("mab,mkb->mka", geom.rot, phi_d)
    rhs[:, 0:6] = loc_d.reshape(m, 6)
    loc_n = np.einsum("mab,mkb->mka", geom.rot, psi_n)
    rhs[:, 6:10] = r * loc_n.reshape(m, 4)
    loc_p = np.einsum("mab,mb->ma", geom.rot, fhat_p)
    rhs[:, 10:12] = r * r * loc_p
    return rhs


class PatchSet:
    """All marker patches of a curve for one value of c^2.

    Matrices and their conditioning are assembled once; repeated solves
    for new jump data reuse them and return independent PatchSolution
    objects.  Patch construction and evaluation are independent across
    markers.
    """

    def __init__(self, curve, radius, c2, layout=None):
        self.curve = curve
        self.layout = layout or CollocationLayout()
        self.radius = float(radius)
        self.c2 = float(c2)
        self.geom = curve_patch_geometry(curve, self.radius, self.layout)
        self.matrices = assemble_matrices(self.geom, self.c2)
        self.cond = np.linalg.cond(self.matrices)
        self._bad = np.where(self.cond > COND_FALLBACK)[0]
        self._ls = [
            _ls_system(curve, i, self.radius, self.c2) for i in self._bad
        ]

    def solve(self, jumps):
        """Collocation coefficients for the given jump data."""
        jumps.validate(self.curve.m)
        geom = self.geom
        m = self.curve.m
        if jumps.phi is None:
            phi_d = np.zeros((m, 3, 2))
        elif callable(jumps.phi):
            phi_d = np.asarray(jumps.phi(geom.p_d.reshape(-1, 2))).reshape(m, 3, 2)
        else:
            phi_d = geometry.density_spline(self.curve, jumps.phi)(
                np.mod(geom.s_d.ravel(), 2 * np.pi)).reshape(m, 3, 2)
        if jumps.psi is None:
            psi_n = np.zeros((m, 2, 2))
        elif callable(jumps.psi):
            psi_n = np.asarray(jumps.psi(geom.p_n.reshape(-1, 2))).reshape(m, 2, 2)
        else:
            psi_n = geometry.density_spline(self.curve, jumps.psi)(
                np.mod(geom.s_n.ravel(), 2 * np.pi)).reshape(m, 2, 2)
        if jumps.fhat is not None:
            fhat_p = np.asarray(jumps.fhat(geom.p_pde), dtype=float).reshape(m, 2)
        else:
            fhat_p = np.zeros((m, 2))
        rhs = assemble_rhs(geom, phi_d, psi_n, fhat_p)
        try:
            coeffs = np.linalg.solve(self.matrices, rhs[..., None])[..., 0]
        except np.linalg.LinAlgError as exc:
            raise SingularSystem(str(exc)) from exc
        for ls, i in zip(self._ls, self._bad):
            coeffs[i] = _ls_solve(ls, jumps, self.curve)
        return PatchSolution(self, coeffs)


@dataclass
class PatchSolution:
    """Solved correction polynomials, evaluable anywhere near the interface."""

    patches: PatchSet
    coeffs: np.ndarray  # (m, 15)

    @property
    def curve(self):
        return self.patches.curve

    def evaluate(self, pts, marker_idx=None):
        """(vhat, qhat) at arbitrary points via the nearest-marker patch."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        geom = self.patches.geom
        if marker_idx is None:
            marker_idx = geometry.nearest_markers(self.curve, pts)
        rot = geom.rot[marker_idx]
        rel = pts - geom.center[marker_idx]
        xi = np.einsum("kab,kb->ka", rot, rel) / self.patches.radius
        c = self.coeffs[marker_idx, :12].reshape(-1, 6, 2)
        d = self.coeffs[marker_idx, 12:15]
        v_loc = np.einsum("kj,kjd->kd", basis6(xi), c)
        vhat = np.einsum("kda,kd->ka", rot, v_loc)
        qhat = np.einsum("kj,kj->k", basis3(xi), d) / self.patches.radius
        return vhat, qhat


def _ls_system(curve, i, radius, c2):
    """Over-determined fallback rows for one badly conditioned patch."""
    s0 = curve.marker_params[i]
    _, tang, nrm, speed, _ = geometry.frames_at(curve, np.array([s0]))
    rot = np.stack([tang[0], nrm[0]])
    center = curve.markers[i]

    def local(etas):
        s = s0 + np.asarray(etas) * radius / speed[0]
        pts, _, normals, _, _ = geometry.frames_at(curve, s)
        rel = pts - center
        return (s, np.einsum("ab,kb->ka", rot, rel) / radius,
                np.einsum("ab,kb->ka", rot, normals), pts)

    s_d, xi_d, _, p_d = local(_LS_ETA_D)
    s_n, xi_n, n_loc, p_n = local(_LS_ETA_N)
    _, xi_p, _, p_pde = local(_LS_ETA_P)
    _, xi_v, _, _ = local(_LS_ETA_V)
    xi_v = np.vstack([xi_v, [[0.0, 0.5]]])

    nrow = 2 * len(_LS_ETA_D) + 2 * len(_LS_ETA_N) + 2 * len(_LS_ETA_P) + len(xi_v)
    mat = np.zeros((nrow, 15))
    row = 0
    b = basis6(xi_d)
    for k in range(len(_LS_ETA_D)):
        mat[row, 0:12:2] = b[k]
        mat[row + 1, 1:12:2] = b[k]
        row += 2
    g = grad6(xi_n)
    b3n = basis3(xi_n)
    gdn = np.einsum("kjd,kd->kj", g, n_loc)
    for k in range(len(_LS_ETA_N)):
        mat[row, 0:12:2] = gdn[k] + g[k, :, 0] * n_loc[k, 0]
        mat[row, 1:12:2] = g[k, :, 0] * n_loc[k, 1]
        mat[row, 12:15] = -b3n[k] * n_loc[k, 0]
        mat[row + 1, 0:12:2] = g[k, :, 1] * n_loc[k, 0]
        mat[row + 1, 1:12:2] = gdn[k] + g[k, :, 1] * n_loc[k, 1]
        mat[row + 1, 12:15] = -b3n[k] * n_loc[k, 1]
        row += 2
    mom = LAP6[None, :] - (c2 * radius * radius) * basis6(xi_p)
    for k in range(len(_LS_ETA_P)):
        mat[row, 0:12:2] = mom[k]
        mat[row, 12:15] = -GRAD3[:, 0]
        mat[row + 1, 1:12:2] = mom[k]
        mat[row + 1, 12:15] = -GRAD3[:, 1]
        row += 2
    gv = grad6(xi_v)
    for k in range(len(xi_v)):
        mat[row, 0:12:2] = gv[k, :, 0]
        mat[row, 1:12:2] = gv[k, :, 1]
        row += 1
    return {"mat": mat, "rot": rot, "radius": radius, "s_d": s_d, "s_n": s_n,
            "p_d": p_d, "p_n": p_n, "p_pde": p_pde,
            "nd": len(_LS_ETA_D), "nn": len(_LS_ETA_N), "np": len(_LS_ETA_P)}


def _ls_solve(ls, jumps, curve):
    r = ls["radius"]
    rhs = np.zeros(ls["mat"].shape[0])
    nd, nn, npd = ls["nd"], ls["nn"], ls["np"]
    if jumps.phi is not None:
        vals = (np.asarray(jumps.phi(ls["p_d"])) if callable(jumps.phi)
                else geometry.density_interp(curve, jumps.phi, ls["s_d"]))
        rhs[0:2 * nd] = (vals @ ls["rot"].T).ravel()
    row = 2 * nd
    if jumps.psi is not None:
        vals = (np.asarray(jumps.psi(ls["p_n"])) if callable(jumps.psi)
                else geometry.density_interp(curve, jumps.psi, ls["s_n"]))
        rhs[row:row + 2 * nn] = r * (vals @ ls["rot"].T).ravel()
    row += 2 * nn
    if jumps.fhat is not None:
        vals = np.asarray(jumps.fhat(ls["p_pde"]), dtype=float)
        rhs[row:row + 2 * npd] = r * r * (vals @ ls["rot"].T).ravel()
    sol, *_ = np.linalg.lstsq(ls["mat"], rhs, rcond=None)
    return sol


def solve_patch(matrix, rhs):
    """Dense solve of one assembled collocation system (spec-level helper)."""
    matrix = np.asarray(matrix, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    if np.linalg.cond(matrix) > COND_FALLBACK:
        raise SingularSystem(
            "collocation matrix badly conditioned; reduce the patch radius")
    return np.linalg.solve(matrix, rhs)


def correction_at(patches, node, band=None):
    """Correction values (vhat, qhat) at one near-interface node."""
    node = np.asarray(node, dtype=float)
    if band is not None:
        dist = patches.curve.dense_tree().query(node)[0]
        if dist > band:
            raise OutsideBand(f"node {dist:.3g} from interface exceeds band {band:.3g}")
    vhat, qhat = patches.evaluate(node[None, :])
    return vhat[0], float(qhat[0])


def default_radius(curve, h):
    """Patch radius: covers the stencil band and a slice of the interface."""
    spacing = geometry.arclength(curve) / curve.m
    return max(2.0 * h, 1.2 * spacing)


# stencil tables for the corrected right-hand side:
# (neighbor component, dj, di, coefficient factory(h))
_CROSS_STENCILS = {
    1: (
        (1, 0, -1, lambda h: 1.0 / h**2),
        (1, 0, 1, lambda h: 1.0 / h**2),
        (1, -1, 0, lambda h: 1.0 / h**2),
        (1, 1, 0, lambda h: 1.0 / h**2),
        (3, 0, 0, lambda h: 1.0 / h),
        (3, 0, 1, lambda h: -1.0 / h),
    ),
    2: (
        (2, 0, -1, lambda h: 1.0 / h**2),
        (2, 0, 1, lambda h: 1.0 / h**2),
        (2, -1, 0, lambda h: 1.0 / h**2),
        (2, 1, 0, lambda h: 1.0 / h**2),
        (3, 0, 0, lambda h: 1.0 / h),
        (3, 1, 0, lambda h: -1.0 / h),
    ),
    3: (
        (1, 0, 0, lambda h: 1.0 / h),
        (1, 0, -1, lambda h: -1.0 / h),
        (2, 0, 0, lambda h: 1.0 / h),
        (2, -1, 0, lambda h: -1.0 / h),
    ),
}


def corrected_rhs(grid, cls, patches, force=None, shift_mean=True):
    """Right-hand side of the corrected scheme.

    Starts from the sampled body force; wherever a stencil leg crosses the
    interface, the leg's contribution is evaluated on the branch difference
    (the patch polynomials) and moved to the right-hand side with the sign
    of the node's own side.  The divergence component is shifted to zero
    mean afterwards so the saddle-point system stays compatible.
    """
    from .macgrid import MacField

    h = grid.h
    n = grid.n
    rhs = MacField.zeros(grid)
    if force is not None:
        f1, f2 = force
        rhs.u1 += f1
        rhs.u2 += f2

    sides = (cls.side1, cls.side2, cls.side3)
    node_x = {}
    node_y = {}
    for comp in (1, 2, 3):
        xx, yy = grid.node_xy(comp)
        node_x[comp], node_y[comp] = xx, yy

    targets = (rhs.u1, rhs.u2, rhs.p)
    all_pts = []
    all_kind = []
    all_flat = []
    all_w = []
    for comp in (1, 2, 3):
        own = sides[comp - 1]
        njo, nio = own.shape
        for (nc, dj, di, coef_fn) in _CROSS_STENCILS[comp]:
            src = sides[nc - 1]
            njs, nis = src.shape
            jlo, jhi = max(0, -dj), min(njo, njs - dj)
            ilo, ihi = max(0, -di), min(nio, nis - di)
            if jhi <= jlo or ihi <= ilo:
                continue
            own_win = own[jlo:jhi, ilo:ihi]
            nb_win = src[jlo + dj:jhi + dj, ilo + di:ihi + di]
            mask = own_win != nb_win
            if not mask.any():
                continue
            jj, ii = np.nonzero(mask)
            jj = jj + jlo
            ii = ii + ilo
            pts = np.column_stack([
                node_x[nc][jj + dj, ii + di], node_y[nc][jj + dj, ii + di]])
            flat = (jj * nio + ii) + comp * 10**9  # tag with component
            w = -own[jj, ii].astype(float) * coef_fn(h)
            all_pts.append(pts)
            all_kind.append(np.full(len(jj), nc))
            all_flat.append(flat)
            all_w.append(w)

    if all_pts:
        pts = np.concatenate(all_pts)
        kind = np.concatenate(all_kind)
        flat = np.concatenate(all_flat)
        w = np.concatenate(all_w)
        vhat, qhat = patches.evaluate(pts)
        vals = np.where(kind == 3, qhat, np.where(kind == 1, vhat[:, 0], vhat[:, 1]))
        contrib = w * vals
        for comp in (1, 2, 3):
            sel = (flat // 10**9) == comp
            if sel.any():
                np.add.at(targets[comp - 1].ravel(), flat[sel] - comp * 10**9,
                          contrib[sel])

    if shift_mean:
        rhs.p -= rhs.p.mean()
    return rhs
