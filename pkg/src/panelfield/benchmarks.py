"""Timing comparison of the numba and numpy kernel backends.

Measures batched point evaluation and dense matrix assembly with each
backend on the same inputs, checks that they agree, and prints a table.
"""

from __future__ import annotations

import time

import numpy as np

from . import backend
from .geometry import GradingSpec, mesh_cube
from .kernel import UNIT_PANEL, influence_batch


def _time(fn, repeats):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _assemble_numpy(mesh):
    from . import solver

    have = backend._HAVE_NUMBA
    backend._HAVE_NUMBA = False
    try:
        return solver.assemble(mesh).values
    finally:
        backend._HAVE_NUMBA = have


def _assemble_numba(mesh):
    from . import solver

    return solver.assemble(mesh).values


def run_benchmark(n_points=200000, n_mesh=24, repeats=3):
    rng = np.random.default_rng(0)
    pts = rng.uniform(-2.0, 2.0, (n_points, 3))
    pts[:, 1] = np.where(np.abs(pts[:, 1]) < 1e-3, 0.25, pts[:, 1])

    print(f"backend available: numba={backend.numba_available()}")
    print(f"batch influence, {n_points} points of one panel:")

    t_np, ref = _time(lambda: influence_batch(UNIT_PANEL, pts)[0], repeats)
    print(f"  numpy : {t_np * 1e3:9.1f} ms  ({n_points / t_np / 1e6:.2f} M evals/s)")

    if backend.numba_available():
        from . import _kernel_numba as nb

        p = UNIT_PANEL
        nb.influence_points(p.x1, p.z1, p.x2, p.z2, pts[:10])  # warm the JIT
        t_nb, out = _time(
            lambda: nb.influence_points(p.x1, p.z1, p.x2, p.z2, pts)[0], repeats
        )
        dev = float(np.max(np.abs(out[:, 0] - ref)))
        print(
            f"  numba : {t_nb * 1e3:9.1f} ms  ({n_points / t_nb / 1e6:.2f} M evals/s)"
            f"  speedup x{t_np / t_nb:.1f}  max |dphi| {dev:.1e}"
        )

    mesh = mesh_cube(n_mesh, GradingSpec.geometric(4.0))
    n = len(mesh)
    print(f"matrix assembly, {n} x {n} cube mesh:")
    t_np, A_np = _time(lambda: _assemble_numpy(mesh), 1)
    print(f"  numpy : {t_np * 1e3:9.1f} ms")
    if backend.numba_available():
        _assemble_numba(mesh_cube(2, GradingSpec.uniform()))  # warm the JIT
        t_nb, A_nb = _time(lambda: _assemble_numba(mesh), 1)
        dev = float(np.max(np.abs(A_nb - A_np)))
        print(f"  numba : {t_nb * 1e3:9.1f} ms  speedup x{t_np / t_nb:.1f}  max |dA| {dev:.1e}")


if __name__ == "__main__":
    run_benchmark()
