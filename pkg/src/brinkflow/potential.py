"""Constant-coefficient interface solves and interface traces.

This is the realization of every layer/volume potential: instead of
quadrature against a singular kernel, the potential is obtained by solving
the constant-coefficient interface problem (jumps as data) with the
corrected scheme, and its one-sided boundary values are interpolated from
the grid.

Traces are always interpolated from the minus side, where grid nodes are
plentiful; plus-side nodes entering the interpolation stencils are shifted
onto the minus branch by subtracting the patch corrections.  Averages then
follow from the exact jump identities avg = minus + jump/2.
"""

from dataclasses import dataclass

import numpy as np

from . import geometry
from .correction import JumpData, PatchSet, corrected_rhs, default_radius
from .errors import InsufficientNodes
from .macgrid import classify_nodes
from .multigrid import MgHierarchy, mg_solve

# tensor-quadratic fit basis on 4x4 staggered neighborhoods
_FIT_POWERS = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2),
               (2, 1), (1, 2), (2, 2)]


@dataclass
class ConstantIpProblem:
    """Data of one constant-coefficient interface solve."""

    c2: float
    jumps: JumpData
    force: tuple | None = None    # sampled (f1, f2) nodal arrays
    bc: object = None             # BoundaryData; None = homogeneous


@dataclass
class TraceSet:
    velocity_avg: np.ndarray
    stress_avg: np.ndarray
    velocity_minus: np.ndarray
    stress_minus: np.ndarray


def _jump_values_at_markers(curve, data):
    if data is None:
        return np.zeros((curve.m, 2))
    if callable(data):
        return np.asarray(data(curve.markers), dtype=float)
    return np.asarray(data, dtype=float)


class InterfaceOperator:
    """Repeated constant-coefficient solves on one (grid, curve, c^2).

    Caches the node classification, the multigrid hierarchy, the patch
    collocation matrices and the trace-interpolation indexing, so that a
    boundary-integral iteration pays only for right-hand sides and cycles.
    """

    def __init__(self, grid, curve, c2, mg_tol=1e-9, radius=None, cls=None,
                 hier=None):
        self.grid = grid
        self.curve = curve
        self.c2 = float(c2)
        self.mg_tol = mg_tol
        self.cls = cls if cls is not None else classify_nodes(grid, curve)
        self.hier = hier if hier is not None else MgHierarchy(grid, c2)
        self.patches = PatchSet(
            curve, radius if radius is not None else default_radius(curve, grid.h),
            c2)
        self._fit = _build_fit_indexing(grid, curve, self.cls)

    def solve(self, jumps, force=None, bc=None, tol=None):
        """Corrected solve; returns (field, patch solution, mg report)."""
        patch_sol = self.patches.solve(jumps)
        rhs = corrected_rhs(self.grid, self.cls, patch_sol, force=force)
        x, report = mg_solve(self.hier, rhs, tol=tol or self.mg_tol, bc=bc)
        return x, patch_sol, report

    def solve_problem(self, problem, tol=None):
        return self.solve(problem.jumps, force=problem.force, bc=problem.bc,
                          tol=tol)

    def traces(self, fld, patch_sol, jumps):
        """Minus-side traces of (v, q) at all markers and their averages."""
        vals = {}
        derivs = {}
        for comp in (1, 2, 3):
            arr = (fld.u1, fld.u2, fld.p)[comp - 1]
            idx = self._fit[comp]
            data = arr[idx["jj"], idx["ii"]].copy()  # (m, 16)
            plus = idx["plus"]
            if plus.any():
                vhat, qhat = patch_sol.evaluate(idx["pts"][plus.ravel()])
                shift = qhat if comp == 3 else vhat[:, comp - 1]
                data[plus] -= shift
            atb = np.einsum("mkr,mk->mr", idx["vand"], data)
            coef = np.linalg.solve(idx["ata"], atb[..., None])[..., 0]
            vals[comp] = coef[:, 0]
            derivs[comp] = coef[:, 1:3] / self.grid.h  # d/dx, d/dy
        m = self.curve.m
        velocity_minus = np.column_stack([vals[1], vals[2]])
        _, _, normals, _, _ = geometry.frames_at(self.curve,
                                                 self.curve.marker_params)
        # sigma(v, q) n = (grad v + grad v^T) n - q n
        du = np.empty((m, 2, 2))
        du[:, 0, :] = derivs[1]
        du[:, 1, :] = derivs[2]
        sym = du + np.swapaxes(du, 1, 2)
        stress_minus = np.einsum("mab,mb->ma", sym, normals) \
            - vals[3][:, None] * normals
        phi = _jump_values_at_markers(self.curve, jumps.phi)
        psi = _jump_values_at_markers(self.curve, jumps.psi)
        return TraceSet(
            velocity_avg=velocity_minus + 0.5 * phi,
            stress_avg=stress_minus + 0.5 * psi,
            velocity_minus=velocity_minus,
            stress_minus=stress_minus,
        )


def _build_fit_indexing(grid, curve, cls):
    """4x4 neighborhood indices, scaled Vandermonde and normal matrices."""
    out = {}
    h, a = grid.h, grid.a
    markers = curve.markers
    m = len(markers)
    for comp in (1, 2, 3):
        xx, yy = grid.node_xy(comp)
        nj, ni = xx.shape
        # nearest node index of the marker in each direction, window of 4
        x_off = 1.0 if comp == 1 else 0.5
        y_off = 0.5 if comp != 2 else 1.0
        ic = np.rint((markers[:, 0] - a) / h - x_off).astype(int)
        jc = np.rint((markers[:, 1] - a) / h - y_off).astype(int)
        if np.any(ic < -1) or np.any(ic > ni) or np.any(jc < -1) or np.any(jc > nj):
            raise InsufficientNodes("marker too close to the outer wall")
        i0 = np.clip(ic - 1, 0, ni - 4)
        j0 = np.clip(jc - 1, 0, nj - 4)
        dj, di = np.meshgrid(np.arange(4), np.arange(4), indexing="ij")
        jj = j0[:, None] + dj.ravel()[None, :]  # (m, 16)
        ii = i0[:, None] + di.ravel()[None, :]
        px = xx[jj, ii]
        py = yy[jj, ii]
        plus = cls.side(comp)[jj, ii] == 1
        xi = (px - markers[:, None, 0]) / h
        eta = (py - markers[:, None, 1]) / h
        vand = np.stack([xi**p * eta**q for p, q in _FIT_POWERS], axis=-1)
        ata = np.einsum("mkr,mks->mrs", vand, vand)
        out[comp] = {
            "jj": jj, "ii": ii,
            "pts": np.stack([px, py], axis=-1).reshape(m * 16, 2),
            "plus": plus, "vand": vand, "ata": ata,
        }
    return out


def solve_constant_ip(grid, curve, c2, jumps, force=None, bc=None, tol=1e-9):
    """One-shot corrected interface solve (builds and discards the caches)."""
    op = InterfaceOperator(grid, curve, c2, mg_tol=tol)
    fld, patch_sol, report = op.solve(jumps, force=force, bc=bc)
    return fld, patch_sol, report


def extract_traces(op, fld, patch_sol, jumps):
    return op.traces(fld, patch_sol, jumps)
