"""Closed-form potential and force of a uniform unit-density rectangular panel.

The panel lies in its local XZ plane with corners ``(x1, z1)`` and
``(x2, z2)``; evaluation points are given in the same local frame, with Y the
normal offset.  The kernel is the ``1/r`` inverse-distance law with unit
source density and no ``4*pi*eps0`` factor, so a solved capacitance is the
dimensionless value (multiply by ``4*pi*eps0`` for SI).

Two evaluation paths are provided:

* the production path (`potential_exact`, `force_exact`, the batch
  evaluators): the closed form with all complex-arctanh branch constants
  resolved algebraically into real logarithm pairs plus a four-corner
  arctangent sum.  Log arguments of the form ``D - h`` are rationalized to
  ``(D*D - h*h)/(D + h)`` whenever they would cancel catastrophically, and
  shared factors are cancelled inside each log pair, so the path needs no
  perturbation anywhere outside the edge tolerance tube and keeps full
  relative precision into the far field.

* the literal grouped complex-arctanh form (`potential_complex_form`,
  `force_complex_form`): principal-branch ``arctanh`` of the eight complex
  arguments, a purely imaginary aggregate multiplied by ``i|Y|/2`` (potential)
  or ``-i/2 * sign(Y)`` (normal force), plus the footprint constant.  The
  discarded imaginary residue is reported and bounded.  Degenerate arguments
  (vanishing ``|Z - z_k|`` denominators, ``|Y|`` or ``|X - x_k|`` below the
  geometric tolerance) are handled by evaluating at a point offset by
  ``eps_geo`` along the degenerate coordinate; the offset is flagged in the
  result.

Both paths agree with adaptive quadrature of the defining surface integrals
to near machine precision; the test suite pins that equivalence.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .backend import numba_available
from .errors import EdgeSingularity, NonFinite, OnSurfaceAmbiguity

TWO_PI = 2.0 * math.pi

# Relative geometric tolerance: points closer than eps_geo to an edge segment
# are rejected (EdgeSingularity); the complex-form path also uses it as the
# perturbation size for degenerate coordinates.
EPS_GEO_FACTOR = 1e-12


class FootprintClass(enum.Enum):
    """Where the projection of a point onto the panel plane falls."""

    INSIDE = "inside"
    OUTSIDE = "outside"
    ON_EDGE_PROJECTION = "on_edge_projection"


@dataclass(frozen=True)
class PanelExtent:
    """Rectangle in the local XZ plane, corners (x1, z1) and (x2, z2)."""

    x1: float
    z1: float
    x2: float
    z2: float

    def __post_init__(self):
        for name in ("x1", "z1", "x2", "z2"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"panel corner {name}={v} is not finite")
        if not (self.x1 < self.x2 and self.z1 < self.z2):
            raise ValueError(
                f"panel corners must satisfy x1 < x2 and z1 < z2, got "
                f"({self.x1}, {self.z1}), ({self.x2}, {self.z2})"
            )

    @property
    def a(self) -> float:
        """Side length along local x."""
        return self.x2 - self.x1

    @property
    def b(self) -> float:
        """Side length along local z."""
        return self.z2 - self.z1

    @property
    def area(self) -> float:
        return self.a * self.b

    @property
    def diagonal(self) -> float:
        return math.hypot(self.a, self.b)

    @property
    def center(self) -> tuple[float, float]:
        return (0.5 * (self.x1 + self.x2), 0.5 * (self.z1 + self.z2))


UNIT_PANEL = PanelExtent(-0.5, -0.5, 0.5, 0.5)


@dataclass(frozen=True)
class EvalPoint:
    """Evaluation point in panel-local coordinates; Y is the normal offset."""

    X: float
    Y: float
    Z: float

    def __iter__(self):
        return iter((self.X, self.Y, self.Z))


@dataclass(frozen=True)
class KernelIntermediates:
    """Corner distances and helper products entering the closed forms."""

    D11: float
    D12: float
    D21: float
    D22: float
    R1: float
    R2: float
    I1: float
    I2: float
    S1: float
    S2: float


@dataclass(frozen=True)
class InfluenceValues:
    """Potential and force of a unit-density panel at one point.

    ``perturbed`` marks evaluations where a degenerate coordinate was handled
    by an on-plane limit (production path) or an eps_geo offset (complex
    path).
    """

    phi: float
    fx: float
    fy: float
    fz: float
    perturbed: bool = False

    def force(self) -> tuple[float, float, float]:
        return (self.fx, self.fy, self.fz)


def _point(p) -> tuple[float, float, float]:
    X, Y, Z = (float(v) for v in p)
    if not (math.isfinite(X) and math.isfinite(Y) and math.isfinite(Z)):
        raise ValueError(f"evaluation point {p!r} has non-finite components")
    return X, Y, Z


def eps_geo(panel: PanelExtent, p) -> float:
    """Geometric tolerance at point p: 1e-12 * max(panel diagonal, |p|, 1)."""
    X, Y, Z = _point(p)
    return EPS_GEO_FACTOR * max(panel.diagonal, math.sqrt(X * X + Y * Y + Z * Z), 1.0)


def intermediates(panel: PanelExtent, p) -> KernelIntermediates:
    """Corner distances D_ij, normal-plane distances R, products I, signs S."""
    X, Y, Z = _point(p)
    xi1, xi2 = X - panel.x1, X - panel.x2
    e1, e2 = Z - panel.z1, Z - panel.z2
    Y2 = Y * Y
    aY = abs(Y)
    return KernelIntermediates(
        D11=math.sqrt(xi1 * xi1 + Y2 + e1 * e1),
        D12=math.sqrt(xi1 * xi1 + Y2 + e2 * e2),
        D21=math.sqrt(xi2 * xi2 + Y2 + e1 * e1),
        D22=math.sqrt(xi2 * xi2 + Y2 + e2 * e2),
        R1=Y2 + e1 * e1,
        R2=Y2 + e2 * e2,
        I1=xi1 * aY,
        I2=xi2 * aY,
        S1=1.0 if panel.z1 - Z >= 0.0 else -1.0,
        S2=1.0 if panel.z2 - Z >= 0.0 else -1.0,
    )


def edge_distance(panel: PanelExtent, p) -> float:
    """3-D distance from p to the nearest of the four panel edge segments."""
    X, Y, Z = _point(p)
    return math.sqrt(
        _edge_dist2(X, Y, Z, panel.x1, panel.z1, panel.x2, panel.z2)
    )


def _edge_dist2(X, Y, Z, x1, z1, x2, z2):
    dx = max(x1 - X, 0.0, X - x2)
    dz = max(z1 - Z, 0.0, Z - z2)
    xi1, xi2 = X - x1, X - x2
    e1, e2 = Z - z1, Z - z2
    Y2 = Y * Y
    d2 = dx * dx + Y2 + e1 * e1
    d2 = min(d2, dx * dx + Y2 + e2 * e2)
    d2 = min(d2, xi1 * xi1 + Y2 + dz * dz)
    d2 = min(d2, xi2 * xi2 + Y2 + dz * dz)
    return d2


def classify_footprint(panel: PanelExtent, p) -> FootprintClass:
    """Classify the projection of p onto the panel plane.

    The projection ignores Y.  Points within ``eps_geo`` of a footprint
    boundary segment classify as ON_EDGE_PROJECTION.
    """
    X, _, Z = _point(p)
    eps = eps_geo(panel, p)
    on_x = (abs(X - panel.x1) <= eps or abs(X - panel.x2) <= eps) and (
        panel.z1 - eps <= Z <= panel.z2 + eps
    )
    on_z = (abs(Z - panel.z1) <= eps or abs(Z - panel.z2) <= eps) and (
        panel.x1 - eps <= X <= panel.x2 + eps
    )
    if on_x or on_z:
        return FootprintClass.ON_EDGE_PROJECTION
    if panel.x1 < X < panel.x2 and panel.z1 < Z < panel.z2:
        return FootprintClass.INSIDE
    return FootprintClass.OUTSIDE


def potential_centroid(a: float, b: float) -> float:
    """Exact potential at the centroid of an a-by-b unit-density panel."""
    if not (a > 0.0 and b > 0.0):
        raise ValueError(f"side lengths must be positive, got a={a}, b={b}")
    d = math.hypot(a, b)
    return 2.0 * (a * math.log((d + b) / a) + b * math.log((d + a) / b))


# ---------------------------------------------------------------------------
# Vectorized numpy evaluation (reference / fallback backend)
# ---------------------------------------------------------------------------

def _core_numpy(x1, z1, x2, z2, X, Y, Z):
    """Vectorized closed form.  Returns (phi, fx, fy_omega, fz, on_plane).

    fy_omega is the solid-angle corner sum; it equals Fy away from the plane
    and is 0 in the on-plane limit (callers decide its meaning inside the
    footprint).  No validity checks: callers exclude the edge tube first.
    """
    xi1, xi2 = X - x1, X - x2
    e1, e2 = Z - z1, Z - z2
    Y2 = Y * Y
    p1 = xi1 * xi1 + Y2
    p2 = xi2 * xi2 + Y2
    q1 = Y2 + e1 * e1
    q2 = Y2 + e2 * e2
    D11 = np.sqrt(p1 + e1 * e1)
    D12 = np.sqrt(p1 + e2 * e2)
    D21 = np.sqrt(p2 + e1 * e1)
    D22 = np.sqrt(p2 + e2 * e2)

    # log((D12 - e2)/(D11 - e1)) etc. with each "D - h" rationalized via the
    # shared p/q factor, which cancels inside a pair.  e1 > e2 and xi1 > xi2
    # always, so each pair has three sign cases; discarded np.where lanes may
    # produce inf/nan and are masked by the caller's errstate.
    l_11pe = np.log(D11 + e1)
    l_12pe = np.log(D12 + e2)
    l_21pe = np.log(D21 + e1)
    l_22pe = np.log(D22 + e2)
    l_11me = np.log(D11 - e1)
    l_12me = np.log(D12 - e2)
    l_21me = np.log(D21 - e1)
    l_22me = np.log(D22 - e2)
    both_pos_e = e2 > 0.0
    both_neg_e = e1 <= 0.0
    l_p1 = np.log(p1)
    l_p2 = np.log(p2)
    dla1 = np.where(
        both_pos_e, l_11pe - l_12pe,
        np.where(both_neg_e, l_12me - l_11me, l_11pe + l_12me - l_p1),
    )
    dla2 = np.where(
        both_pos_e, l_22pe - l_21pe,
        np.where(both_neg_e, l_21me - l_22me, l_p2 - l_21pe - l_22me),
    )
    l_11px = np.log(D11 + xi1)
    l_21px = np.log(D21 + xi2)
    l_12px = np.log(D12 + xi1)
    l_22px = np.log(D22 + xi2)
    l_11mx = np.log(D11 - xi1)
    l_21mx = np.log(D21 - xi2)
    l_12mx = np.log(D12 - xi1)
    l_22mx = np.log(D22 - xi2)
    both_pos_x = xi2 > 0.0
    both_neg_x = xi1 <= 0.0
    l_q1 = np.log(q1)
    l_q2 = np.log(q2)
    dlb1 = np.where(
        both_pos_x, l_11px - l_21px,
        np.where(both_neg_x, l_21mx - l_11mx, l_11px + l_21mx - l_q1),
    )
    dlb2 = np.where(
        both_pos_x, l_22px - l_12px,
        np.where(both_neg_x, l_12mx - l_22mx, l_q2 - l_12px - l_22mx),
    )

    phi_logs = xi1 * dla1 + xi2 * dla2 + e1 * dlb1 + e2 * dlb2
    fx = -dla1 - dla2
    fz = -dlb1 - dlb2

    on_plane = Y == 0.0
    Ysafe = np.where(on_plane, 1.0, Y)
    omega = np.where(
        on_plane,
        0.0,
        np.arctan(xi2 * e2 / (Ysafe * D22))
        - np.arctan(xi1 * e2 / (Ysafe * D12))
        - np.arctan(xi2 * e1 / (Ysafe * D21))
        + np.arctan(xi1 * e1 / (Ysafe * D11)),
    )
    phi = phi_logs - Y * omega
    return phi, fx, omega, fz, on_plane


def _core_numpy_masked(x1, z1, x2, z2, X, Y, Z):
    """_core_numpy with log-branch warnings suppressed (np.where evaluates
    both branches; the discarded one may hit log of a negative/zero value)."""
    with np.errstate(invalid="ignore", divide="ignore"):
        return _core_numpy(x1, z1, x2, z2, X, Y, Z)


def influence_batch(panel: PanelExtent, points, edge_action: str = "raise"):
    """Evaluate phi and force at many points of one panel.

    Parameters
    ----------
    panel : PanelExtent
    points : (N, 3) array-like, panel-local coordinates
    edge_action : "raise" rejects points inside the edge tolerance tube with
        EdgeSingularity; "nan" returns NaN rows for them instead.

    Returns
    -------
    phi, fx, fy, fz : (N,) arrays
    on_plane : (N,) bool array, True where |Y| fell below eps_geo and the
        on-plane limit was used (fy is NaN there when the footprint is
        inside the panel: the normal force jumps across the surface)
    near_edge : (N,) bool array (all False unless edge_action="nan")
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if pts.shape[1] != 3:
        raise ValueError(f"points must be (N, 3), got {pts.shape}")
    X, Y, Z = pts[:, 0], pts[:, 1], pts[:, 2]
    if not np.all(np.isfinite(pts)):
        raise ValueError("evaluation points contain non-finite components")

    eps = EPS_GEO_FACTOR * np.maximum(
        panel.diagonal, np.maximum(np.sqrt(X * X + Y * Y + Z * Z), 1.0)
    )
    d2 = _edge_dist2_arr(X, Y, Z, panel.x1, panel.z1, panel.x2, panel.z2)
    near_edge = d2 < eps * eps
    if near_edge.any() and edge_action == "raise":
        i = int(np.argmax(near_edge))
        raise EdgeSingularity(
            f"point {pts[i]} is within eps_geo={eps[i]:.3e} of a panel edge"
        )

    # on-plane limit: |Y| < eps evaluates at the plane (the bounded solid-angle
    # term vanishes there); phi keeps full accuracy, fy is ambiguous inside.
    on_plane = np.abs(Y) < eps
    Yeff = np.where(on_plane, 0.0, Y)

    phi, fx, omega, fz, _ = _core_numpy_masked(
        panel.x1, panel.z1, panel.x2, panel.z2, X, Yeff, Z
    )
    fy = omega
    inside = (
        (panel.x1 < X) & (X < panel.x2) & (panel.z1 < Z) & (Z < panel.z2)
    )
    fy = np.where(on_plane & inside, np.nan, fy)
    if near_edge.any():
        for arr in (phi, fx, fy, fz):
            arr[near_edge] = np.nan
    if not np.all(np.isfinite(phi[~near_edge])):
        raise NonFinite("potential evaluation produced a non-finite value")
    return phi, fx, fy, fz, on_plane, near_edge


def _edge_dist2_arr(X, Y, Z, x1, z1, x2, z2):
    dx = np.maximum(x1 - X, np.maximum(0.0, X - x2))
    dz = np.maximum(z1 - Z, np.maximum(0.0, Z - z2))
    xi1, xi2 = X - x1, X - x2
    e1, e2 = Z - z1, Z - z2
    Y2 = Y * Y
    d2 = dx * dx + Y2 + e1 * e1
    d2 = np.minimum(d2, dx * dx + Y2 + e2 * e2)
    d2 = np.minimum(d2, xi1 * xi1 + Y2 + dz * dz)
    d2 = np.minimum(d2, xi2 * xi2 + Y2 + dz * dz)
    return d2


def potential_batch(panel: PanelExtent, points):
    """Potential only, vectorized; raises EdgeSingularity inside the tube."""
    if numba_available():
        from . import _kernel_numba as nb

        pts = np.ascontiguousarray(np.atleast_2d(np.asarray(points, dtype=np.float64)))
        phi, status = nb.potential_points(
            panel.x1, panel.z1, panel.x2, panel.z2, pts
        )
        if np.any(status == 1):
            i = int(np.argmax(status == 1))
            raise EdgeSingularity(f"point {pts[i]} is within eps_geo of a panel edge")
        return phi
    phi, *_ = influence_batch(panel, points)
    return phi


# ---------------------------------------------------------------------------
# Scalar API
# ---------------------------------------------------------------------------

def _check_edge(panel: PanelExtent, X, Y, Z):
    eps = EPS_GEO_FACTOR * max(
        panel.diagonal, math.sqrt(X * X + Y * Y + Z * Z), 1.0
    )
    d2 = _edge_dist2(X, Y, Z, panel.x1, panel.z1, panel.x2, panel.z2)
    if d2 < eps * eps:
        raise EdgeSingularity(
            f"point ({X}, {Y}, {Z}) is within eps_geo={eps:.3e} of a panel edge"
        )
    return eps


def influence(panel: PanelExtent, p) -> InfluenceValues:
    """Potential and force at one local point; see `influence_batch`.

    Raises OnSurfaceAmbiguity (carrying fx, fz) when the point lies on the
    panel inside its extent, where the normal force is undefined.
    """
    X, Y, Z = _point(p)
    eps = _check_edge(panel, X, Y, Z)
    on_plane = abs(Y) < eps
    Yeff = 0.0 if on_plane else Y
    phi, fx, omega, fz, _ = _core_numpy_masked(
        panel.x1, panel.z1, panel.x2, panel.z2,
        np.float64(X), np.float64(Yeff), np.float64(Z),
    )
    phi, fx, fy, fz = float(phi), float(fx), float(omega), float(fz)
    if not math.isfinite(phi):
        raise NonFinite(f"non-finite potential at ({X}, {Y}, {Z})")
    if on_plane and classify_footprint(panel, p) is FootprintClass.INSIDE:
        raise OnSurfaceAmbiguity(
            f"normal force undefined on the panel surface at ({X}, {Y}, {Z})",
            fx=fx, fz=fz,
        )
    return InfluenceValues(phi=phi, fx=fx, fy=fy, fz=fz, perturbed=bool(on_plane))


def potential_exact(panel: PanelExtent, p) -> float:
    """Exact potential of the unit-density panel at local point p."""
    X, Y, Z = _point(p)
    eps = _check_edge(panel, X, Y, Z)
    Yeff = 0.0 if abs(Y) < eps else Y
    phi, *_ = _core_numpy_masked(
        panel.x1, panel.z1, panel.x2, panel.z2,
        np.float64(X), np.float64(Yeff), np.float64(Z),
    )
    phi = float(phi)
    if not math.isfinite(phi):
        raise NonFinite(f"non-finite potential at ({X}, {Y}, {Z})")
    return phi


def force_exact(panel: PanelExtent, p) -> tuple[float, float, float]:
    """Exact force (fx, fy, fz) of the unit-density panel at local point p."""
    v = influence(panel, p)
    return v.force()


# ---------------------------------------------------------------------------
# Literal grouped complex-arctanh form (validation twin)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComplexFormResult:
    phi: float
    fy: float
    imag_residue: float
    perturbed: bool


def _group_aggregate(xi1, xi2, e1, e2, Y, D11, D12, D21, D22):
    """S1/S2-grouped conjugate arctanh differences; purely imaginary."""
    aY = abs(Y)
    R1 = Y * Y + e1 * e1
    R2 = Y * Y + e2 * e2
    I1 = xi1 * aY
    I2 = xi2 * aY
    S1 = 1.0 if -e1 >= 0.0 else -1.0
    S2 = 1.0 if -e2 >= 0.0 else -1.0
    at = np.arctanh
    d1 = D11 * abs(e1)
    d2 = D21 * abs(e1)
    d3 = D22 * abs(e2)
    d4 = D12 * abs(e2)
    t11 = at((R1 + 1j * I1) / d1) - at((R1 - 1j * I1) / d1)
    t21 = at((R1 + 1j * I2) / d2) - at((R1 - 1j * I2) / d2)
    t22 = at((R2 + 1j * I2) / d3) - at((R2 - 1j * I2) / d3)
    t12 = at((R2 + 1j * I1) / d4) - at((R2 - 1j * I1) / d4)
    return S1 * (t11 - t21) + S2 * (t22 - t12)


def _perturb_degenerate(panel: PanelExtent, X, Y, Z, eps):
    """Offset degenerate coordinates by eps_geo; returns new coords + flag."""
    perturbed = False
    if abs(Y) < eps:
        Y = eps
        perturbed = True
    if abs(X - panel.x1) < eps:
        X = panel.x1 + eps
        perturbed = True
    elif abs(X - panel.x2) < eps:
        X = panel.x2 + eps
        perturbed = True
    if abs(Z - panel.z1) < eps:
        Z = panel.z1 + eps
        perturbed = True
    elif abs(Z - panel.z2) < eps:
        Z = panel.z2 + eps
        perturbed = True
    return X, Y, Z, perturbed


def potential_complex_form(panel: PanelExtent, p) -> ComplexFormResult:
    """Potential via the literal grouped complex-arctanh expression.

    The aggregate of conjugate arctanh differences is purely imaginary; its
    product with ``i|Y|/2`` is real up to rounding, and the discarded
    imaginary residue is returned (and bounded by 1e-12 * (1 + |phi|)).
    The constant term ``-2*pi*|Y|`` applies when the point projects inside
    the footprint; this resolves the branch constants so the value matches
    brute-force quadrature of the defining integral on both sides of the
    panel and in the far field.
    """
    X, Y, Z = _point(p)
    eps = _check_edge(panel, X, Y, Z)
    X, Y, Z, perturbed = _perturb_degenerate(panel, X, Y, Z, eps)

    xi1, xi2 = X - panel.x1, X - panel.x2
    e1, e2 = Z - panel.z1, Z - panel.z2
    Y2 = Y * Y
    p1 = xi1 * xi1 + Y2
    p2 = xi2 * xi2 + Y2
    q1 = Y2 + e1 * e1
    q2 = Y2 + e2 * e2
    D11 = math.sqrt(p1 + e1 * e1)
    D12 = math.sqrt(p1 + e2 * e2)
    D21 = math.sqrt(p2 + e1 * e1)
    D22 = math.sqrt(p2 + e2 * e2)

    def lg(num, den):
        return math.log(num) - math.log(den)

    # same stable log pairs as the production path
    if e2 > 0.0:
        dla1 = lg(D11 + e1, D12 + e2)
        dla2 = lg(D22 + e2, D21 + e1)
    elif e1 <= 0.0:
        dla1 = lg(D12 - e2, D11 - e1)
        dla2 = lg(D21 - e1, D22 - e2)
    else:
        dla1 = math.log(D11 + e1) + math.log(D12 - e2) - math.log(p1)
        dla2 = math.log(p2) - math.log(D21 + e1) - math.log(D22 - e2)
    if xi2 > 0.0:
        dlb1 = lg(D11 + xi1, D21 + xi2)
        dlb2 = lg(D22 + xi2, D12 + xi1)
    elif xi1 <= 0.0:
        dlb1 = lg(D21 - xi2, D11 - xi1)
        dlb2 = lg(D12 - xi1, D22 - xi2)
    else:
        dlb1 = math.log(D11 + xi1) + math.log(D21 - xi2) - math.log(q1)
        dlb2 = math.log(q2) - math.log(D12 + xi1) - math.log(D22 - xi2)

    logs = xi1 * dla1 + xi2 * dla2 + e1 * dlb1 + e2 * dlb2
    agg = _group_aggregate(xi1, xi2, e1, e2, Y, D11, D12, D21, D22)
    val = (0.5j * abs(Y)) * agg
    inside = panel.x1 < X < panel.x2 and panel.z1 < Z < panel.z2
    const = -TWO_PI * abs(Y) if inside else 0.0
    phi = logs + val.real + const
    residue = abs(float(val.imag))
    if not math.isfinite(phi):
        raise NonFinite(f"non-finite complex-form potential at ({X}, {Y}, {Z})")
    if residue > 1e-12 * (1.0 + abs(phi)):
        raise NonFinite(
            f"imaginary residue {residue:.3e} exceeds bound at ({X}, {Y}, {Z})"
        )
    return ComplexFormResult(phi=phi, fy=math.nan, imag_residue=residue,
                             perturbed=perturbed)


def force_complex_form(panel: PanelExtent, p) -> ComplexFormResult:
    """Normal force via the grouped complex-arctanh expression.

    Applies the integration constant C = 0 outside the footprint and
    C = +-2*pi (sign of Y) inside it.
    """
    X, Y, Z = _point(p)
    eps = _check_edge(panel, X, Y, Z)
    X, Y, Z, perturbed = _perturb_degenerate(panel, X, Y, Z, eps)

    xi1, xi2 = X - panel.x1, X - panel.x2
    e1, e2 = Z - panel.z1, Z - panel.z2
    Y2 = Y * Y
    D11 = math.sqrt(xi1 * xi1 + Y2 + e1 * e1)
    D12 = math.sqrt(xi1 * xi1 + Y2 + e2 * e2)
    D21 = math.sqrt(xi2 * xi2 + Y2 + e1 * e1)
    D22 = math.sqrt(xi2 * xi2 + Y2 + e2 * e2)
    agg = _group_aggregate(xi1, xi2, e1, e2, Y, D11, D12, D21, D22)
    sgn = 1.0 if Y > 0 else -1.0
    val = (-0.5j * sgn) * agg
    inside = panel.x1 < X < panel.x2 and panel.z1 < Z < panel.z2
    C = TWO_PI * sgn if inside else 0.0
    fy = val.real + C
    residue = abs(float(val.imag))
    if not math.isfinite(fy):
        raise NonFinite(f"non-finite complex-form force at ({X}, {Y}, {Z})")
    if residue > 1e-12 * (1.0 + abs(fy)):
        raise NonFinite(
            f"imaginary residue {residue:.3e} exceeds bound at ({X}, {Y}, {Z})"
        )
    return ComplexFormResult(phi=math.nan, fy=fy, imag_residue=residue,
                             perturbed=perturbed)
