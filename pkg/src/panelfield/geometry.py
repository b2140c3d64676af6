"""Framed panels in global space and mesh builders for the plate and cube.

Frames are right-handed orthonormal triads; the local +Y axis is the panel
normal.  Mesh builders emit panels in deterministic lexicographic order
(face, row, column) with the extent centered on the frame origin, so results
are bit-reproducible run to run.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidGrading
from .kernel import PanelExtent

_ORTHO_TOL = 1e-14


@dataclass(frozen=True)
class Frame:
    """Rigid placement of a local panel frame in global coordinates.

    ``basis`` rows are the local x, y (normal) and z axes expressed in global
    coordinates.
    """

    origin: np.ndarray
    basis: np.ndarray

    def __post_init__(self):
        origin = np.asarray(self.origin, dtype=np.float64).reshape(3)
        basis = np.asarray(self.basis, dtype=np.float64).reshape(3, 3)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "basis", basis)
        gram = basis @ basis.T
        if not np.allclose(gram, np.eye(3), atol=_ORTHO_TOL, rtol=0.0):
            raise ValueError("frame basis is not orthonormal to 1e-14")
        if np.linalg.det(basis) < 0.0:
            raise ValueError("frame basis must be right-handed")

    @classmethod
    def identity(cls) -> "Frame":
        return cls(np.zeros(3), np.eye(3))

    @property
    def normal(self) -> np.ndarray:
        return self.basis[1]


def to_local(frame: Frame, global_point) -> np.ndarray:
    """Global point -> panel-local coordinates (X, Y, Z)."""
    g = np.asarray(global_point, dtype=np.float64)
    return (g - frame.origin) @ frame.basis.T


def to_global(frame: Frame, local_point) -> np.ndarray:
    """Panel-local coordinates -> global point; inverse of `to_local`."""
    l = np.asarray(local_point, dtype=np.float64)
    return frame.origin + l @ frame.basis


@dataclass(frozen=True)
class GradingSpec:
    """Mesh grading: ``ratio`` is the center-to-edge cell size ratio."""

    mode: str = "uniform"
    ratio: float = 1.0

    def __post_init__(self):
        if self.mode not in ("uniform", "geometric"):
            raise InvalidGrading(f"unknown grading mode {self.mode!r}")
        if not (math.isfinite(self.ratio) and self.ratio >= 1.0):
            raise InvalidGrading(f"grading ratio must be >= 1, got {self.ratio}")
        if self.mode == "uniform" and self.ratio != 1.0:
            raise InvalidGrading("uniform grading requires ratio == 1")
        if self.mode == "geometric" and self.ratio == 1.0:
            object.__setattr__(self, "mode", "uniform")

    @classmethod
    def uniform(cls) -> "GradingSpec":
        return cls("uniform", 1.0)

    @classmethod
    def geometric(cls, ratio: float) -> "GradingSpec":
        return cls("geometric", float(ratio)) if ratio != 1.0 else cls.uniform()


@dataclass(frozen=True)
class Panel:
    """One framed rectangular panel.

    The extent is expressed in the panel's local frame (mesh builders center
    it on the frame origin).  ``collocation_offset`` is the fractional
    position of the collocation point within the half-sides, (0, 0) being the
    centroid; it must stay strictly inside the extent.
    """

    extent: PanelExtent
    frame: Frame
    collocation_offset: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        u, v = self.collocation_offset
        if not (-1.0 < u < 1.0 and -1.0 < v < 1.0):
            raise ValueError(
                f"collocation offset {self.collocation_offset} is not strictly inside"
            )

    @property
    def area(self) -> float:
        return self.extent.area

    @property
    def collocation_local(self) -> np.ndarray:
        cx, cz = self.extent.center
        u, v = self.collocation_offset
        return np.array([cx + 0.5 * u * self.extent.a, 0.0, cz + 0.5 * v * self.extent.b])

    @property
    def collocation_point(self) -> np.ndarray:
        return to_global(self.frame, self.collocation_local)

    @property
    def centroid_global(self) -> np.ndarray:
        cx, cz = self.extent.center
        return to_global(self.frame, np.array([cx, 0.0, cz]))

    def corners_global(self) -> np.ndarray:
        e = self.extent
        loc = np.array(
            [[e.x1, 0.0, e.z1], [e.x2, 0.0, e.z1], [e.x2, 0.0, e.z2], [e.x1, 0.0, e.z2]]
        )
        return np.array([to_global(self.frame, p) for p in loc])


@dataclass
class Mesh:
    """Ordered collection of framed panels plus packed arrays for the solver."""

    panels: list[Panel]
    shape_tag: str = "custom"
    grading: GradingSpec = field(default_factory=GradingSpec.uniform)

    def __len__(self) -> int:
        return len(self.panels)

    @property
    def total_area(self) -> float:
        return math.fsum(p.area for p in self.panels)

    def packed(self):
        """Contiguous arrays for assembly: collocation points, frame origins,
        axes, local corner coordinates, areas."""
        n = len(self.panels)
        colloc = np.empty((n, 3))
        origin = np.empty((n, 3))
        ax_x = np.empty((n, 3))
        ax_y = np.empty((n, 3))
        ax_z = np.empty((n, 3))
        ex1 = np.empty(n)
        ez1 = np.empty(n)
        ex2 = np.empty(n)
        ez2 = np.empty(n)
        areas = np.empty(n)
        for i, p in enumerate(self.panels):
            colloc[i] = p.collocation_point
            origin[i] = p.frame.origin
            ax_x[i], ax_y[i], ax_z[i] = p.frame.basis
            ex1[i], ez1[i] = p.extent.x1, p.extent.z1
            ex2[i], ez2[i] = p.extent.x2, p.extent.z2
            areas[i] = p.area
        return colloc, origin, ax_x, ax_y, ax_z, ex1, ez1, ex2, ez2, areas

    def to_json(self) -> str:
        payload = {
            "shape": self.shape_tag,
            "grading": {"mode": self.grading.mode, "ratio": self.grading.ratio},
            "n_panels": len(self.panels),
            "total_area": self.total_area,
            "panels": [
                {
                    "extent": [p.extent.x1, p.extent.z1, p.extent.x2, p.extent.z2],
                    "origin": p.frame.origin.tolist(),
                    "basis": p.frame.basis.tolist(),
                    "area": p.area,
                    "corners": p.corners_global().tolist(),
                    "collocation_point": p.collocation_point.tolist(),
                }
                for p in self.panels
            ],
        }
        return json.dumps(payload, indent=2)


def grade_breakpoints(n: int, grading: GradingSpec) -> np.ndarray:
    """n+1 breakpoints on [0, 1], symmetric about 0.5.

    Geometric mode lays cell widths in geometric progression per half-side,
    largest at the center, edge cells ``ratio`` times smaller than the center
    cell; odd n gets a center cell flanked by mirrored progressions.
    """
    if n < 1:
        raise InvalidGrading(f"cell count must be >= 1, got {n}")
    if grading.mode == "uniform" or n == 1:
        return np.linspace(0.0, 1.0, n + 1)
    ratio = grading.ratio
    if n % 2 == 0:
        m = n // 2
        if m == 1:
            # one cell per half: no interior width to grade
            return np.linspace(0.0, 1.0, n + 1)
        q = ratio ** (-1.0 / (m - 1))
        w = q ** np.arange(m)
        w *= 0.5 / w.sum()
        half = np.concatenate([[0.0], np.cumsum(w)])
        half[-1] = 0.5
        return np.concatenate([0.5 - half[::-1], 0.5 + half[1:]])
    # odd n: center cell of width wc straddles 0.5, flanked by mirrored
    # geometric progressions of m cells each
    m = (n - 1) // 2
    q = ratio ** (-1.0 / m)
    w = q ** np.arange(1, m + 1)
    wc = 0.5 / (0.5 + w.sum())
    w = w * wc
    half = np.concatenate([[0.0], [0.5 * wc], 0.5 * wc + np.cumsum(w)])
    half *= 0.5 / half[-1]
    return np.concatenate([(0.5 - half[::-1])[:-1], 0.5 + half[1:]])


def _axis_cells(lo: float, hi: float, n: int, grading: GradingSpec):
    pts = lo + (hi - lo) * grade_breakpoints(n, grading)
    pts[0] = lo
    pts[-1] = hi
    centers = 0.5 * (pts[:-1] + pts[1:])
    widths = pts[1:] - pts[:-1]
    return centers, widths


def mesh_plate(nx: int, nz: int, grading: GradingSpec | None = None) -> Mesh:
    """nx-by-nz panel mesh of the unit plate spanning [-0.5, 0.5]^2 in the
    global XZ plane (normal +Y), graded toward all four edges."""
    grading = grading or GradingSpec.uniform()
    if nx < 1 or nz < 1:
        raise InvalidGrading(f"panel counts must be >= 1, got ({nx}, {nz})")
    cx, wx = _axis_cells(-0.5, 0.5, nx, grading)
    cz, wz = _axis_cells(-0.5, 0.5, nz, grading)
    basis = np.eye(3)
    panels = []
    for i in range(nx):
        for k in range(nz):
            extent = PanelExtent(
                -0.5 * wx[i], -0.5 * wz[k], 0.5 * wx[i], 0.5 * wz[k]
            )
            frame = Frame(np.array([cx[i], 0.0, cz[k]]), basis)
            panels.append(Panel(extent=extent, frame=frame))
    return Mesh(panels=panels, shape_tag="plate", grading=grading)


# face order: +x, -x, +y, -y, +z, -z; each face's local x axis is the next
# cyclic global axis and local z completes the right-handed triad.
_FACES = [(0, 1.0), (0, -1.0), (1, 1.0), (1, -1.0), (2, 1.0), (2, -1.0)]


def mesh_cube(n: int, grading: GradingSpec | None = None) -> Mesh:
    """6*n^2 panel mesh of the unit cube spanning [-0.5, 0.5]^3 with outward
    normals, graded toward every face edge."""
    grading = grading or GradingSpec.uniform()
    if n < 1:
        raise InvalidGrading(f"panels per face side must be >= 1, got {n}")
    cu, wu = _axis_cells(-0.5, 0.5, n, grading)
    panels = []
    for axis, sign in _FACES:
        ey = np.zeros(3)
        ey[axis] = sign
        ex = np.zeros(3)
        ex[(axis + 1) % 3] = 1.0
        ez = np.cross(ex, ey)
        basis = np.vstack([ex, ey, ez])
        for i in range(n):
            for k in range(n):
                origin = 0.5 * ey + cu[i] * ex + cu[k] * ez
                extent = PanelExtent(
                    -0.5 * wu[i], -0.5 * wu[k], 0.5 * wu[i], 0.5 * wu[k]
                )
                panels.append(Panel(extent=extent, frame=Frame(origin, basis)))
    return Mesh(panels=panels, shape_tag="cube", grading=grading)
