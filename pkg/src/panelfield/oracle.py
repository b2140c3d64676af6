"""Brute-force evaluations used as ground truth and as the comparator.

`potential_quadrature` / `force_quadrature` integrate the defining surface
integrals (1/r and r̂/r²) with an adaptive quadtree of tensor Gauss-Legendre
rules, independent of the closed-form kernel.  `point_source_influence` is
the conventional nodal approximation: the panel replaced by an m-by-m grid of
point sources at sub-cell centroids, total strength exactly the panel area.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import CoincidentSource
from .kernel import InfluenceValues, PanelExtent

_GL_LO = np.polynomial.legendre.leggauss(8)
_GL_HI = np.polynomial.legendre.leggauss(12)

PLAIN = "plain"
SUBDIVIDE = "subdivide-toward-singularity"


@dataclass(frozen=True)
class QuadratureSpec:
    """Adaptive quadrature controls.

    ``max_subdivisions`` caps the number of quadtree cells.  The near-field
    mode seeds the decomposition with a split under the projection of the
    evaluation point, which is what makes nearly-singular integrands
    tractable; ``plain`` starts from the whole panel.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-13
    max_subdivisions: int = 20000
    near_field_mode: str = PLAIN

    def __post_init__(self):
        if not (self.rel_tol > 0.0):
            raise ValueError(f"rel_tol must be > 0, got {self.rel_tol}")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if self.near_field_mode not in (PLAIN, SUBDIVIDE):
            raise ValueError(f"unknown near_field_mode {self.near_field_mode!r}")

    @classmethod
    def default(cls) -> "QuadratureSpec":
        return cls(near_field_mode=SUBDIVIDE)

    @classmethod
    def near_surface(cls) -> "QuadratureSpec":
        """Relaxed tolerance for points within ~1e-3 of the panel; plain
        adaptive quadrature stalls on the near-singular integrand there."""
        return cls(rel_tol=1e-6, abs_tol=1e-9, max_subdivisions=60000,
                   near_field_mode=SUBDIVIDE)

    @classmethod
    def for_point(cls, panel: PanelExtent, p) -> "QuadratureSpec":
        d = panel_distance(panel, p)
        return cls.near_surface() if d < 1e-3 else cls.default()


@dataclass(frozen=True)
class QuadratureResult:
    """Integral estimate with its error estimate and convergence flag."""

    value: np.ndarray
    error_estimate: np.ndarray
    cells: int
    converged: bool

    def scalar(self) -> float:
        return float(self.value[0])


def panel_distance(panel: PanelExtent, p) -> float:
    """Distance from a local point to the (closed) panel rectangle."""
    X, Y, Z = (float(v) for v in p)
    dx = max(panel.x1 - X, 0.0, X - panel.x2)
    dz = max(panel.z1 - Z, 0.0, Z - panel.z2)
    return math.sqrt(dx * dx + Y * Y + dz * dz)


def _cell_values(X, Y, Z, cx1, cz1, cx2, cz2, rule):
    """Tensor Gauss-Legendre estimate of (phi, fx, fy, fz) over one cell."""
    nodes, weights = rule
    hx = 0.5 * (cx2 - cx1)
    hz = 0.5 * (cz2 - cz1)
    xs = 0.5 * (cx2 + cx1) + hx * nodes
    zs = 0.5 * (cz2 + cz1) + hz * nodes
    dx = X - xs[:, None]
    dz = Z - zs[None, :]
    r2 = dx * dx + (Y * Y + dz * dz)
    r = np.sqrt(r2)
    ww = (weights[:, None] * weights[None, :]) * (hx * hz)
    inv_r = 1.0 / r
    inv_r3 = inv_r / r2
    return np.array(
        [
            np.sum(ww * inv_r),
            np.sum(ww * dx * inv_r3),
            Y * np.sum(ww * inv_r3),
            np.sum(ww * dz * inv_r3),
        ]
    )


def _seed_cells(panel: PanelExtent, X, Z, mode):
    if mode == SUBDIVIDE:
        xs = sorted({panel.x1, min(max(X, panel.x1), panel.x2), panel.x2})
        zs = sorted({panel.z1, min(max(Z, panel.z1), panel.z2), panel.z2})
    else:
        xs, zs = [panel.x1, panel.x2], [panel.z1, panel.z2]
    return [
        (xs[i], zs[k], xs[i + 1], zs[k + 1])
        for i in range(len(xs) - 1)
        for k in range(len(zs) - 1)
    ]


def influence_quadrature(panel: PanelExtent, p, spec: QuadratureSpec | None = None) -> QuadratureResult:
    """Adaptive quadrature of all four influence components at once.

    Cells are refined worst-first until every component's accumulated error
    estimate (|high - low| rule difference) meets max(abs_tol,
    rel_tol * |value|), or the cell budget is exhausted (converged=False).
    """
    X, Y, Z = (float(v) for v in p)
    if spec is None:
        spec = QuadratureSpec.for_point(panel, (X, Y, Z))
    if panel_distance(panel, (X, Y, Z)) == 0.0:
        raise ValueError("quadrature point must not lie on the panel surface")

    heap = []
    total = np.zeros(4)
    err_total = np.zeros(4)
    counter = 0
    for c in _seed_cells(panel, X, Z, spec.near_field_mode):
        hi = _cell_values(X, Y, Z, *c, _GL_HI)
        lo = _cell_values(X, Y, Z, *c, _GL_LO)
        err = np.abs(hi - lo)
        total += hi
        err_total += err
        heapq.heappush(heap, (-float(err.max()), counter, c, hi, err))
        counter += 1

    cells = len(heap)
    while cells < spec.max_subdivisions:
        bound = np.maximum(spec.abs_tol, spec.rel_tol * np.abs(total))
        if np.all(err_total <= bound):
            break
        neg_err, _, c, hi, err = heapq.heappop(heap)
        if -neg_err <= 0.0:
            heapq.heappush(heap, (neg_err, counter, c, hi, err))
            counter += 1
            break
        total -= hi
        err_total -= err
        cx1, cz1, cx2, cz2 = c
        mx = 0.5 * (cx1 + cx2)
        mz = 0.5 * (cz1 + cz2)
        for sub in (
            (cx1, cz1, mx, mz),
            (mx, cz1, cx2, mz),
            (cx1, mz, mx, cz2),
            (mx, mz, cx2, cz2),
        ):
            hi = _cell_values(X, Y, Z, *sub, _GL_HI)
            lo = _cell_values(X, Y, Z, *sub, _GL_LO)
            err = np.abs(hi - lo)
            total += hi
            err_total += err
            heapq.heappush(heap, (-float(err.max()), counter, sub, hi, err))
            counter += 1
        cells += 3

    bound = np.maximum(spec.abs_tol, spec.rel_tol * np.abs(total))
    return QuadratureResult(
        value=total,
        error_estimate=err_total,
        cells=cells,
        converged=bool(np.all(err_total <= bound)),
    )


def potential_quadrature(panel: PanelExtent, p, spec: QuadratureSpec | None = None) -> QuadratureResult:
    """Adaptive quadrature of the 1/r potential integral."""
    res = influence_quadrature(panel, p, spec)
    return QuadratureResult(
        value=res.value[:1],
        error_estimate=res.error_estimate[:1],
        cells=res.cells,
        converged=res.converged,
    )


def force_quadrature(panel: PanelExtent, p, spec: QuadratureSpec | None = None) -> QuadratureResult:
    """Adaptive quadrature of the r̂/r² force integral, componentwise."""
    res = influence_quadrature(panel, p, spec)
    return QuadratureResult(
        value=res.value[1:],
        error_estimate=res.error_estimate[1:],
        cells=res.cells,
        converged=res.converged,
    )


@dataclass(frozen=True)
class PointSourceGrid:
    """m-by-m nodal comparator: one point source per sub-cell centroid."""

    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"subdivision count must be >= 1, got {self.m}")


def point_source_influence(panel: PanelExtent, grid: PointSourceGrid, p) -> InfluenceValues:
    """Influence of the panel approximated by grid.m² centroid point sources.

    Source strength is sub-area * density (unit density), so total strength
    equals the panel area exactly.
    """
    X, Y, Z = (float(v) for v in p)
    m = grid.m
    xs = panel.x1 + panel.a * (np.arange(m) + 0.5) / m
    zs = panel.z1 + panel.b * (np.arange(m) + 0.5) / m
    s = (panel.a / m) * (panel.b / m)
    dx = X - xs[:, None]
    dz = Z - zs[None, :]
    r2 = dx * dx + (Y * Y + dz * dz)
    rmin2 = float(r2.min())
    if rmin2 <= (1e-14 * max(panel.diagonal, 1.0)) ** 2:
        raise CoincidentSource(
            f"evaluation point ({X}, {Y}, {Z}) coincides with a point source"
        )
    r = np.sqrt(r2)
    inv_r = 1.0 / r
    inv_r3 = inv_r / r2
    return InfluenceValues(
        phi=float(s * np.sum(inv_r)),
        fx=float(s * np.sum(dx * inv_r3)),
        fy=float(s * Y * np.sum(inv_r3)),
        fz=float(s * np.sum(dz * inv_r3)),
    )


def point_source_strengths(panel: PanelExtent, grid: PointSourceGrid) -> np.ndarray:
    """Per-source strengths (all equal); sums to the panel area exactly."""
    s = (panel.a / grid.m) * (panel.b / grid.m)
    return np.full(grid.m * grid.m, s)


def normalized_error(approx, exact, zero_tol: float = 1e-12):
    """Comparator error metric: (approx - exact)/exact, switching to the
    absolute error where |exact| <= zero_tol (flag returned alongside)."""
    approx = np.asarray(approx, dtype=np.float64)
    exact = np.asarray(exact, dtype=np.float64)
    absolute = np.abs(exact) <= zero_tol
    safe = np.where(absolute, 1.0, exact)
    err = np.where(absolute, approx - exact, (approx - exact) / safe)
    return err, absolute
