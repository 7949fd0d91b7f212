"""Geometric multigrid for the staggered saddle-point system.

V(2,2) cycles with a distributive Gauss-Seidel smoother: momentum rows are
relaxed directly, the divergence residual is relaxed through the
transformed pressure block ``c2*I - Lap_c`` and distributed back.  Wall
data is folded into the right-hand side up front so that every level
smooths the homogeneous-wall operator.

Velocity transfers are partition-of-unity bilinear stencils at the
staggered positions (mirror extension at walls); pressure prolongation is
piecewise constant.  Restriction is the scaled transpose, built literally
from the sparse prolongation matrix.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .errors import LevelMismatch, NoConvergence
from .macgrid import BoundaryData, MacField, MacGrid, apply_L

COARSEST_N = 8
COARSE_SWEEPS = 512


def _u1_prolongation(nc):
    """Sparse bilinear prolongation for the u1 component, (2nc grid <- nc)."""
    nf = 2 * nc
    jf, if_ = np.meshgrid(np.arange(nf), np.arange(nf - 1), indexing="ij")
    jf = jf.ravel()
    if_ = if_.ravel()
    # x direction: fine faces alternate between coarse faces (odd) and
    # midpoints (even); two half-weight entries cover both cases
    m = if_ // 2
    odd = if_ % 2 == 1
    ic_a = np.where(odd, (if_ - 1) // 2, np.clip(m - 1, 0, nc - 2))
    ic_b = np.where(odd, (if_ - 1) // 2, np.clip(m, 0, nc - 2))
    wx = np.full_like(if_, 0.5, dtype=float)
    # y direction: fine centers sit at quarter offsets from coarse centers
    my = jf // 2
    odd_j = jf % 2 == 1
    jc_a = np.where(odd_j, my, np.clip(my - 1, 0, nc - 1))
    jc_b = np.where(odd_j, np.clip(my + 1, 0, nc - 1), my)
    wy_a = np.where(odd_j, 0.75, 0.25)
    wy_b = np.where(odd_j, 0.25, 0.75)

    rows, cols, vals = [], [], []
    for jc, wy in ((jc_a, wy_a), (jc_b, wy_b)):
        for ic in (ic_a, ic_b):
            rows.append(jf * (nf - 1) + if_)
            cols.append(jc * (nc - 1) + ic)
            vals.append(wy * wx)
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(nf * (nf - 1), nc * (nc - 1)),
    )


def _u2_prolongation(nc):
    """u2 is the mirror image of u1 (roles of x and y swapped)."""
    nf = 2 * nc
    jf, if_ = np.meshgrid(np.arange(nf - 1), np.arange(nf), indexing="ij")
    jf = jf.ravel()
    if_ = if_.ravel()
    mx = if_ // 2
    odd_i = if_ % 2 == 1
    ic_a = np.where(odd_i, mx, np.clip(mx - 1, 0, nc - 1))
    ic_b = np.where(odd_i, np.clip(mx + 1, 0, nc - 1), mx)
    wx_a = np.where(odd_i, 0.75, 0.25)
    wx_b = np.where(odd_i, 0.25, 0.75)
    m = jf // 2
    odd_j = jf % 2 == 1
    jc_a = np.where(odd_j, (jf - 1) // 2, np.clip(m - 1, 0, nc - 2))
    jc_b = np.where(odd_j, (jf - 1) // 2, np.clip(m, 0, nc - 2))
    wy = np.full_like(jf, 0.5, dtype=float)

    rows, cols, vals = [], [], []
    for jc in (jc_a, jc_b):
        for ic, wx in ((ic_a, wx_a), (ic_b, wx_b)):
            rows.append(jf * nf + if_)
            cols.append(jc * nc + ic)
            vals.append(wy * wx)
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(nf * (nf - 1), nc * (nc - 1)),
    )


def _p_prolongation(nc):
    nf = 2 * nc
    jf, if_ = np.meshgrid(np.arange(nf), np.arange(nf), indexing="ij")
    rows = (jf * nf + if_).ravel()
    cols = ((jf // 2) * nc + if_ // 2).ravel()
    return sp.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(nf * nf, nc * nc))


@dataclass
class SolveReport:
    cycles: int
    final_residual: float
    converged: bool
    residual_history: list = field(default_factory=list)


class MgHierarchy:
    """Grids from the finest N down to N0 = 8, with cached transfers."""

    def __init__(self, grid, c2, bc=None):
        n = grid.n
        levels = []
        while n >= COARSEST_N:
            levels.append(n)
            if n == COARSEST_N:
                break
            if n % 2:
                raise ValueError(f"N={grid.n} is not a power of 2 times {COARSEST_N}")
            n //= 2
        if levels[-1] != COARSEST_N:
            raise ValueError(f"N={grid.n} is not a power of 2 times {COARSEST_N}")
        self.grids = [MacGrid(grid.a, grid.b, m) for m in levels]
        self.c2 = float(c2)
        self.bc = bc if bc is not None else BoundaryData.zero(grid)
        self._zero_bc = [BoundaryData.zero(g).arrays() for g in self.grids]
        self._p_u1 = [_u1_prolongation(m // 2) for m in levels[:-1]]
        self._p_u2 = [_u2_prolongation(m // 2) for m in levels[:-1]]
        self._p_p = [_p_prolongation(m // 2) for m in levels[:-1]]
        self._r_u1 = [0.25 * p.T.tocsr() for p in self._p_u1]
        self._r_u2 = [0.25 * p.T.tocsr() for p in self._p_u2]
        self._r_p = [0.25 * p.T.tocsr() for p in self._p_p]
        self._scratch = [np.zeros((g.n, g.n)) for g in self.grids]

    @property
    def nlevels(self):
        return len(self.grids)


def prolong(hier, level, coarse):
    """Interpolate a level+1 field up to `level` (0 = finest)."""
    gf, gc = hier.grids[level], hier.grids[level + 1]
    nf, nc = gf.n, gc.n
    if coarse.u1.shape != (nc, nc - 1):
        raise LevelMismatch(f"expected coarse N={nc}, got {coarse.u1.shape}")
    return MacField(
        (hier._p_u1[level] @ coarse.u1.ravel()).reshape(nf, nf - 1),
        (hier._p_u2[level] @ coarse.u2.ravel()).reshape(nf - 1, nf),
        (hier._p_p[level] @ coarse.p.ravel()).reshape(nf, nf),
    )


def restrict(hier, level, fine):
    """Transpose-scaled restriction of a `level` field down to level+1."""
    gf, gc = hier.grids[level], hier.grids[level + 1]
    nf, nc = gf.n, gc.n
    if fine.u1.shape != (nf, nf - 1):
        raise LevelMismatch(f"expected fine N={nf}, got {fine.u1.shape}")
    return MacField(
        (hier._r_u1[level] @ fine.u1.ravel()).reshape(nc, nc - 1),
        (hier._r_u2[level] @ fine.u2.ravel()).reshape(nc - 1, nc),
        (hier._r_p[level] @ fine.p.ravel()).reshape(nc, nc),
    )


def dgs_smooth(grid, c2, fld, rhs, sweeps, bc=None, scratch=None):
    """Apply `sweeps` distributive Gauss-Seidel passes in place."""
    bc_arrays = (bc.arrays() if isinstance(bc, BoundaryData) else bc) \
        if bc is not None else BoundaryData.zero(grid).arrays()
    if scratch is None:
        scratch = np.zeros((grid.n, grid.n))
    for _ in range(sweeps):
        _kernels.dgs_sweep(grid.h, c2, fld.u1, fld.u2, fld.p,
                           rhs.u1, rhs.u2, rhs.p, *bc_arrays, scratch)
    return fld


def _residual(hier, level, fld, rhs):
    g = hier.grids[level]
    out = MacField.zeros(g)
    _kernels.residual(g.h, hier.c2, fld.u1, fld.u2, fld.p,
                      rhs.u1, rhs.u2, rhs.p, *hier._zero_bc[level],
                      out.u1, out.u2, out.p)
    return out


def _norm(fld):
    return float(np.sqrt(
        np.dot(fld.u1.ravel(), fld.u1.ravel())
        + np.dot(fld.u2.ravel(), fld.u2.ravel())
        + np.dot(fld.p.ravel(), fld.p.ravel())))


def _vcycle(hier, level, fld, rhs):
    g = hier.grids[level]
    zb = hier._zero_bc[level]
    w2 = hier._scratch[level]
    if level == hier.nlevels - 1:
        for _ in range(COARSE_SWEEPS):
            _kernels.dgs_sweep(g.h, hier.c2, fld.u1, fld.u2, fld.p,
                               rhs.u1, rhs.u2, rhs.p, *zb, w2)
        fld.p -= fld.p[0, 0]
        return
    for _ in range(2):
        _kernels.dgs_sweep(g.h, hier.c2, fld.u1, fld.u2, fld.p,
                           rhs.u1, rhs.u2, rhs.p, *zb, w2)
    res = _residual(hier, level, fld, rhs)
    coarse_rhs = restrict(hier, level, res)
    coarse = MacField.zeros(hier.grids[level + 1])
    _vcycle(hier, level + 1, coarse, coarse_rhs)
    corr = prolong(hier, level, coarse)
    fld.u1 += corr.u1
    fld.u2 += corr.u2
    fld.p += corr.p
    for _ in range(2):
        _kernels.dgs_sweep(g.h, hier.c2, fld.u1, fld.u2, fld.p,
                           rhs.u1, rhs.u2, rhs.p, *zb, w2)


def mg_solve(hier, rhs, tol=1e-9, max_cycles=60, raise_on_fail=True, bc=None):
    """V(2,2) iteration to a relative residual.

    Wall data (`bc` or the hierarchy default) is folded into the
    right-hand side; the divergence rows are then shifted to zero mean
    (discrete compatibility) and the returned pressure is shifted to zero
    mean.
    """
    grid = hier.grids[0]
    rhs.check_sizes(grid)
    lift = apply_L(grid, hier.c2, MacField.zeros(grid), bc if bc is not None else hier.bc)
    b = MacField(rhs.u1 - lift[0], rhs.u2 - lift[1], rhs.p - lift[2])
    b.p -= b.p.mean()

    x = MacField.zeros(grid)
    bnorm = _norm(b)
    if bnorm == 0.0:
        return x, SolveReport(0, 0.0, True, [])

    history = []
    for cycle in range(1, max_cycles + 1):
        _vcycle(hier, 0, x, b)
        relres = _norm(_residual(hier, 0, x, b)) / bnorm
        history.append(relres)
        if relres <= tol:
            x.p -= x.p.mean()
            return x, SolveReport(cycle, relres, True, history)
    report = SolveReport(max_cycles, history[-1], False, history)
    if raise_on_fail:
        raise NoConvergence(report)
    x.p -= x.p.mean()
    return x, report
