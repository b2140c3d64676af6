"""Numba-compiled hot kernels: scalar closed form, point batches, assembly.

Operation ordering mirrors the numpy path in `kernel.py` so both backends
agree to the last ulp wherever libm allows.  Status codes instead of
exceptions keep the prange loops simple: 0 ok, 1 inside the edge tolerance
tube, 2 on-plane inside the footprint (fy invalid).
"""

import math

import numpy as np
from numba import njit, prange

EPS_GEO_FACTOR = 1e-12

STATUS_OK = 0
STATUS_EDGE = 1
STATUS_ON_SURFACE = 2


@njit(cache=True)
def _edge_dist2(X, Y, Z, x1, z1, x2, z2):
    dx = max(x1 - X, 0.0, X - x2)
    dz = max(z1 - Z, 0.0, Z - z2)
    xi1 = X - x1
    xi2 = X - x2
    e1 = Z - z1
    e2 = Z - z2
    Y2 = Y * Y
    d2 = dx * dx + Y2 + e1 * e1
    d2 = min(d2, dx * dx + Y2 + e2 * e2)
    d2 = min(d2, xi1 * xi1 + Y2 + dz * dz)
    d2 = min(d2, xi2 * xi2 + Y2 + dz * dz)
    return d2


@njit(cache=True)
def _eval_scalar(x1, z1, x2, z2, X, Y, Z):
    """Full influence at one local point.

    Returns (phi, fx, fy, fz, status).  The caller is responsible for acting
    on the status; values other than phi/fx/fz are garbage when status != 0.
    """
    diag = math.hypot(x2 - x1, z2 - z1)
    eps = EPS_GEO_FACTOR * max(diag, math.sqrt(X * X + Y * Y + Z * Z), 1.0)
    if _edge_dist2(X, Y, Z, x1, z1, x2, z2) < eps * eps:
        return 0.0, 0.0, 0.0, 0.0, STATUS_EDGE

    on_plane = abs(Y) < eps
    if on_plane:
        Y = 0.0

    xi1 = X - x1
    xi2 = X - x2
    e1 = Z - z1
    e2 = Z - z2
    Y2 = Y * Y
    p1 = xi1 * xi1 + Y2
    p2 = xi2 * xi2 + Y2
    q1 = Y2 + e1 * e1
    q2 = Y2 + e2 * e2
    D11 = math.sqrt(p1 + e1 * e1)
    D12 = math.sqrt(p1 + e2 * e2)
    D21 = math.sqrt(p2 + e1 * e1)
    D22 = math.sqrt(p2 + e2 * e2)

    if e2 > 0.0:
        dla1 = math.log(D11 + e1) - math.log(D12 + e2)
        dla2 = math.log(D22 + e2) - math.log(D21 + e1)
    elif e1 <= 0.0:
        dla1 = math.log(D12 - e2) - math.log(D11 - e1)
        dla2 = math.log(D21 - e1) - math.log(D22 - e2)
    else:
        dla1 = math.log(D11 + e1) + math.log(D12 - e2) - math.log(p1)
        dla2 = math.log(p2) - math.log(D21 + e1) - math.log(D22 - e2)
    if xi2 > 0.0:
        dlb1 = math.log(D11 + xi1) - math.log(D21 + xi2)
        dlb2 = math.log(D22 + xi2) - math.log(D12 + xi1)
    elif xi1 <= 0.0:
        dlb1 = math.log(D21 - xi2) - math.log(D11 - xi1)
        dlb2 = math.log(D12 - xi1) - math.log(D22 - xi2)
    else:
        dlb1 = math.log(D11 + xi1) + math.log(D21 - xi2) - math.log(q1)
        dlb2 = math.log(q2) - math.log(D12 + xi1) - math.log(D22 - xi2)

    phi_logs = xi1 * dla1 + xi2 * dla2 + e1 * dlb1 + e2 * dlb2
    fx = -dla1 - dla2
    fz = -dlb1 - dlb2

    if Y != 0.0:
        omega = (
            math.atan(xi2 * e2 / (Y * D22))
            - math.atan(xi1 * e2 / (Y * D12))
            - math.atan(xi2 * e1 / (Y * D21))
            + math.atan(xi1 * e1 / (Y * D11))
        )
    else:
        omega = 0.0
    phi = phi_logs - Y * omega

    status = STATUS_OK
    if on_plane and (x1 < X < x2 and z1 < Z < z2):
        status = STATUS_ON_SURFACE
    return phi, fx, omega, fz, status


@njit(cache=True, parallel=True)
def potential_points(x1, z1, x2, z2, pts):
    """Potential of one panel at many local points; (N,) values + statuses."""
    n = pts.shape[0]
    phi = np.empty(n)
    status = np.zeros(n, dtype=np.int8)
    for i in prange(n):
        v, _, _, _, st = _eval_scalar(x1, z1, x2, z2, pts[i, 0], pts[i, 1], pts[i, 2])
        phi[i] = v
        if st == STATUS_EDGE:
            status[i] = STATUS_EDGE
    return phi, status


@njit(cache=True, parallel=True)
def influence_points(x1, z1, x2, z2, pts):
    """phi, fx, fy, fz of one panel at many local points + status codes."""
    n = pts.shape[0]
    out = np.empty((n, 4))
    status = np.zeros(n, dtype=np.int8)
    for i in prange(n):
        phi, fx, fy, fz, st = _eval_scalar(
            x1, z1, x2, z2, pts[i, 0], pts[i, 1], pts[i, 2]
        )
        out[i, 0] = phi
        out[i, 1] = fx
        out[i, 2] = fy
        out[i, 3] = fz
        status[i] = st
    return out, status


@njit(cache=True, parallel=True)
def assemble_matrix(colloc, origin, ax_x, ax_y, ax_z, ex1, ez1, ex2, ez2):
    """Dense influence matrix: entry (i, j) is the potential at collocation
    point i of unit density on panel j, evaluated in panel j's local frame.

    Rows are independent, so the result is bit-identical for any thread
    count.  Returns (matrix, row_status) where row_status[i] != 0 flags an
    edge-tube hit in row i (mesh bug).
    """
    n = colloc.shape[0]
    m = origin.shape[0]
    A = np.empty((n, m))
    row_status = np.zeros(n, dtype=np.int8)
    for i in prange(n):
        px = colloc[i, 0]
        py = colloc[i, 1]
        pz = colloc[i, 2]
        for j in range(m):
            gx = px - origin[j, 0]
            gy = py - origin[j, 1]
            gz = pz - origin[j, 2]
            X = gx * ax_x[j, 0] + gy * ax_x[j, 1] + gz * ax_x[j, 2]
            Y = gx * ax_y[j, 0] + gy * ax_y[j, 1] + gz * ax_y[j, 2]
            Z = gx * ax_z[j, 0] + gy * ax_z[j, 1] + gz * ax_z[j, 2]
            phi, _, _, _, st = _eval_scalar(ex1[j], ez1[j], ex2[j], ez2[j], X, Y, Z)
            A[i, j] = phi
            if st == STATUS_EDGE:
                row_status[i] = STATUS_EDGE
    return A, row_status


@njit(cache=True, parallel=True)
def field_superposition(points, density, origin,
                        ax_x, ax_y, ax_z, ex1, ez1, ex2, ez2):
    """Density-weighted sum of panel influences at arbitrary global points.

    The closed form already integrates over each panel, so the weight per
    panel is its density alone.  Force components are rotated back into the
    global frame.  Returns (values[N, 4], status[N]) with columns
    phi, fx, fy, fz.
    """
    n = points.shape[0]
    m = origin.shape[0]
    out = np.zeros((n, 4))
    status = np.zeros(n, dtype=np.int8)
    for i in prange(n):
        px = points[i, 0]
        py = points[i, 1]
        pz = points[i, 2]
        acc_phi = 0.0
        acc_fx = 0.0
        acc_fy = 0.0
        acc_fz = 0.0
        st_row = 0
        for j in range(m):
            gx = px - origin[j, 0]
            gy = py - origin[j, 1]
            gz = pz - origin[j, 2]
            X = gx * ax_x[j, 0] + gy * ax_x[j, 1] + gz * ax_x[j, 2]
            Y = gx * ax_y[j, 0] + gy * ax_y[j, 1] + gz * ax_y[j, 2]
            Z = gx * ax_z[j, 0] + gy * ax_z[j, 1] + gz * ax_z[j, 2]
            phi, fx, fy, fz, st = _eval_scalar(
                ex1[j], ez1[j], ex2[j], ez2[j], X, Y, Z
            )
            if st != 0 and st_row == 0:
                st_row = st
            w = density[j]
            acc_phi += w * phi
            gfx = fx * ax_x[j, 0] + fy * ax_y[j, 0] + fz * ax_z[j, 0]
            gfy = fx * ax_x[j, 1] + fy * ax_y[j, 1] + fz * ax_z[j, 1]
            gfz = fx * ax_x[j, 2] + fy * ax_y[j, 2] + fz * ax_z[j, 2]
            acc_fx += w * gfx
            acc_fy += w * gfy
            acc_fz += w * gfz
        out[i, 0] = acc_phi
        out[i, 1] = acc_fx
        out[i, 2] = acc_fy
        out[i, 3] = acc_fz
        status[i] = st_row
    return out, status
