"""Staggered MAC grid: geometry, fields, discrete operators and
irregular-node bookkeeping.

Unknown layout on an N x N cell grid over the square [a, b]^2
(arrays indexed [j, i] = [y, x]):

* ``u1`` (N, N-1), x-velocity on interior vertical faces,
* ``u2`` (N-1, N), y-velocity on interior horizontal faces,
* ``p``  (N, N),   pressure at cell centers.

Velocity values on the outer walls are boundary data, not unknowns;
tangential wall conditions enter through reflected ghosts.
"""

from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .errors import InterfaceTouchesBoundary, SizeMismatch


@dataclass(frozen=True)
class MacGrid:
    a: float
    b: float
    n: int

    def __post_init__(self):
        if self.n < 8:
            raise ValueError("need at least 8 cells per direction")
        if self.b <= self.a:
            raise ValueError("empty box")

    @property
    def h(self):
        return (self.b - self.a) / self.n

    # node coordinate vectors
    def face_coords(self):
        """Interior face positions a+(i+1)h, i = 0..n-2."""
        return self.a + self.h * np.arange(1, self.n)

    def center_coords(self):
        """Cell-center positions a+(i+1/2)h, i = 0..n-1."""
        return self.a + self.h * (np.arange(self.n) + 0.5)

    def u1_nodes(self):
        x = self.face_coords()
        y = self.center_coords()
        return np.meshgrid(x, y)  # shapes (n, n-1)

    def u2_nodes(self):
        x = self.center_coords()
        y = self.face_coords()
        return np.meshgrid(x, y)  # shapes (n-1, n)

    def node_xy(self, component):
        if component == 1:
            return self.u1_nodes()
        if component == 2:
            return self.u2_nodes()
        if component == 3:
            c = self.center_coords()
            return np.meshgrid(c, c)
        raise ValueError(component)


@dataclass
class MacField:
    u1: np.ndarray
    u2: np.ndarray
    p: np.ndarray

    @classmethod
    def zeros(cls, grid):
        n = grid.n
        return cls(np.zeros((n, n - 1)), np.zeros((n - 1, n)), np.zeros((n, n)))

    def copy(self):
        return MacField(self.u1.copy(), self.u2.copy(), self.p.copy())

    def check_sizes(self, grid):
        n = grid.n
        if self.u1.shape != (n, n - 1) or self.u2.shape != (n - 1, n) or self.p.shape != (n, n):
            raise SizeMismatch(
                f"field shapes {self.u1.shape}/{self.u2.shape}/{self.p.shape} "
                f"do not match N={n}"
            )

    def components(self):
        return self.u1, self.u2, self.p


@dataclass
class BoundaryData:
    """Velocity samples on the four walls.

    Normal components live at wall nodes (u1 on left/right at cell-center
    heights; u2 on bottom/top at cell-center abscissae).  Tangential
    components live at the wall positions matching the interior stagger
    and define ghosts by reflection.
    """

    u1_left: np.ndarray
    u1_right: np.ndarray
    u1_bottom: np.ndarray
    u1_top: np.ndarray
    u2_left: np.ndarray
    u2_right: np.ndarray
    u2_bottom: np.ndarray
    u2_top: np.ndarray

    @classmethod
    def zero(cls, grid):
        n = grid.n
        return cls(
            np.zeros(n), np.zeros(n), np.zeros(n - 1), np.zeros(n - 1),
            np.zeros(n - 1), np.zeros(n - 1), np.zeros(n), np.zeros(n),
        )

    @classmethod
    def from_function(cls, grid, fn):
        """Sample a velocity function fn(x, y) -> (u1, u2) on the walls."""
        ctr = grid.center_coords()
        fc = grid.face_coords()
        a, b = grid.a, grid.b

        def f1(x, y):
            return np.asarray(fn(x, y))[0]

        def f2(x, y):
            return np.asarray(fn(x, y))[1]

        return cls(
            u1_left=f1(np.full_like(ctr, a), ctr),
            u1_right=f1(np.full_like(ctr, b), ctr),
            u1_bottom=f1(fc, np.full_like(fc, a)),
            u1_top=f1(fc, np.full_like(fc, b)),
            u2_left=f2(np.full_like(fc, a), fc),
            u2_right=f2(np.full_like(fc, b), fc),
            u2_bottom=f2(ctr, np.full_like(ctr, a)),
            u2_top=f2(ctr, np.full_like(ctr, b)),
        )

    def arrays(self):
        return (self.u1_left, self.u1_right, self.u1_bottom, self.u1_top,
                self.u2_left, self.u2_right, self.u2_bottom, self.u2_top)

    def boundary_flux(self, grid):
        """Midpoint quadrature of the outward velocity flux on the walls."""
        h = grid.h
        return h * (
            self.u1_right.sum() - self.u1_left.sum()
            + self.u2_top.sum() - self.u2_bottom.sum()
        )

    def check_compatibility(self, grid, tol=1e-10):
        scale = max(1.0, max(np.abs(a).max(initial=0.0) for a in self.arrays()))
        return abs(self.boundary_flux(grid)) <= tol * scale * (grid.b - grid.a)


def apply_L(grid, c2, fld, bc=None):
    """Discrete operator triple (momentum x, momentum y, divergence).

    Vectorized reference implementation; the multigrid inner loops use the
    fused kernel with identical stencils.
    """
    fld.check_sizes(grid)
    n, h = grid.n, grid.h
    if bc is None:
        bc = BoundaryData.zero(grid)
    u1, u2, p = fld.u1, fld.u2, fld.p
    ih = 1.0 / h
    ih2 = ih * ih

    # x-momentum
    uw = np.empty_like(u1); ue = np.empty_like(u1)
    us = np.empty_like(u1); un = np.empty_like(u1)
    uw[:, 1:] = u1[:, :-1]; uw[:, 0] = bc.u1_left
    ue[:, :-1] = u1[:, 1:]; ue[:, -1] = bc.u1_right
    us[1:, :] = u1[:-1, :]; us[0, :] = 2.0 * bc.u1_bottom - u1[0, :]
    un[:-1, :] = u1[1:, :]; un[-1, :] = 2.0 * bc.u1_top - u1[-1, :]
    r1 = (uw + ue + us + un - 4.0 * u1) * ih2 - c2 * u1 - (p[:, 1:] - p[:, :-1]) * ih

    # y-momentum
    uw = np.empty_like(u2); ue = np.empty_like(u2)
    us = np.empty_like(u2); un = np.empty_like(u2)
    uw[:, 1:] = u2[:, :-1]; uw[:, 0] = 2.0 * bc.u2_left - u2[:, 0]
    ue[:, :-1] = u2[:, 1:]; ue[:, -1] = 2.0 * bc.u2_right - u2[:, -1]
    us[1:, :] = u2[:-1, :]; us[0, :] = bc.u2_bottom
    un[:-1, :] = u2[1:, :]; un[-1, :] = bc.u2_top
    r2 = (uw + ue + us + un - 4.0 * u2) * ih2 - c2 * u2 - (p[1:, :] - p[:-1, :]) * ih

    # divergence
    u1f = np.empty((n, n + 1))
    u1f[:, 1:-1] = u1; u1f[:, 0] = bc.u1_left; u1f[:, -1] = bc.u1_right
    u2f = np.empty((n + 1, n))
    u2f[1:-1, :] = u2; u2f[0, :] = bc.u2_bottom; u2f[-1, :] = bc.u2_top
    r3 = (u1f[:, 1:] - u1f[:, :-1]) * ih + (u2f[1:, :] - u2f[:-1, :]) * ih
    return r1, r2, r3


# five-point stencil offsets of each operator, as (component, dj, di)
# relative to a node of the operator's own component
_STENCILS = {
    1: (
        (1, 0, 0), (1, 0, -1), (1, 0, 1), (1, -1, 0), (1, 1, 0),
        (3, 0, 0), (3, 0, 1),
    ),
    2: (
        (2, 0, 0), (2, 0, -1), (2, 0, 1), (2, -1, 0), (2, 1, 0),
        (3, 0, 0), (3, 1, 0),
    ),
    3: (
        (1, 0, 0), (1, 0, -1), (2, 0, 0), (2, -1, 0),
    ),
}


@dataclass
class NodeClassification:
    """Side tags (+1 plus / -1 minus) per node set, plus irregular flags."""

    side1: np.ndarray
    side2: np.ndarray
    side3: np.ndarray
    irregular: dict = field(default_factory=dict)

    def side(self, component):
        return (self.side1, self.side2, self.side3)[component - 1]


def classify_nodes(grid, curve, clearance=2.0):
    """Side tags for all three node sets and per-operator irregular flags.

    Raises InterfaceTouchesBoundary when the curve comes within
    ``clearance * h`` of the outer walls.
    """
    h = grid.h
    pts = curve.dense_samples()[1]
    gap = min(
        pts[:, 0].min() - grid.a, grid.b - pts[:, 0].max(),
        pts[:, 1].min() - grid.a, grid.b - pts[:, 1].max(),
    )
    if gap < clearance * h:
        raise InterfaceTouchesBoundary(
            f"interface-wall gap {gap:.3g} < {clearance} h = {clearance * h:.3g}"
        )

    sides = []
    for comp in (1, 2, 3):
        xx, yy = grid.node_xy(comp)
        tags = geometry.classify_bulk(curve, np.column_stack([xx.ravel(), yy.ravel()]))
        sides.append(tags.reshape(xx.shape))

    cls = NodeClassification(*sides)
    for comp in (1, 2, 3):
        xx, _ = grid.node_xy(comp)
        own = sides[comp - 1]
        any_plus = np.zeros(own.shape, dtype=bool)
        any_minus = np.zeros(own.shape, dtype=bool)
        # stencil shifts between staggered components:
        # a comp-d node (j, i) couples to comp-c nodes per _STENCILS, where
        # the (dj, di) offsets are already expressed in comp-c indexing
        for c, dj, di in _STENCILS[comp]:
            sh = _stencil_side(sides, comp, c, dj, di)
            any_plus |= sh == 1
            any_minus |= sh == -1
        cls.irregular[comp] = any_plus & any_minus
    return cls


def _stencil_side(sides, comp, c, dj, di):
    """Side of the comp-c stencil node offset (dj, di) from comp-comp nodes.

    Offsets in _STENCILS are stored against the index alignment used by
    the operators: same-component offsets are plain shifts; the pressure
    neighbors of u1/u2 and the velocity neighbors of p share index (j, i)
    or the +1 shifts listed.  Out-of-range neighbors (wall values) take
    the minus side, which is exact because of the wall-clearance guard.
    """
    src = sides[c - 1]
    own = sides[comp - 1]
    out = np.full(own.shape, np.int8(-1))
    njs, nis = src.shape
    njo, nio = own.shape
    jlo, jhi = max(0, -dj), min(njo, njs - dj)
    ilo, ihi = max(0, -di), min(nio, nis - di)
    if jhi > jlo and ihi > ilo:
        out[jlo:jhi, ilo:ihi] = src[jlo + dj:jhi + dj, ilo + di:ihi + di]
    return out
