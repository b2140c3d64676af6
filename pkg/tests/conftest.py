import numpy as np
import pytest

from panelfield import UNIT_PANEL, GradingSpec, assemble, mesh_plate, potential_batch, solve


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def warm_jit():
    """Compile (or load from cache) the hot kernels before any timed test."""
    potential_batch(UNIT_PANEL, np.array([[0.0, 1.0, 0.0], [0.3, 0.4, -0.2]]))
    solve(assemble(mesh_plate(2, 2, GradingSpec.uniform())))
    return True


def random_points_away_from_panel(rng, n, min_dist, box=2.0):
    """Uniform points in [-box, box]^3 at least min_dist from the unit panel."""
    pts = []
    while len(pts) < n:
        cand = rng.uniform(-box, box, (n, 3))
        dx = np.maximum(np.abs(cand[:, 0]) - 0.5, 0.0)
        dz = np.maximum(np.abs(cand[:, 2]) - 0.5, 0.0)
        d = np.sqrt(dx * dx + cand[:, 1] ** 2 + dz * dz)
        for row in cand[d >= min_dist]:
            pts.append(row)
            if len(pts) == n:
                break
    return np.array(pts)
