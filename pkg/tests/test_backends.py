import os
import subprocess
import sys

import numpy as np
import pytest

import panelfield
from panelfield import UNIT_PANEL, GradingSpec, assemble, backend, mesh_cube, mesh_plate
from panelfield.kernel import influence_batch
from conftest import random_points_away_from_panel

needs_numba = pytest.mark.skipif(
    not backend.numba_available(), reason="numba backend not active"
)


@needs_numba
class TestBackendAgreement:
    def test_batch_influence_matches_numpy(self, rng):
        from panelfield import _kernel_numba as nb

        pts = random_points_away_from_panel(rng, 5000, 1e-4)
        p = UNIT_PANEL
        out, status = nb.influence_points(p.x1, p.z1, p.x2, p.z2, pts)
        phi, fx, fy, fz, on_plane, _ = influence_batch(p, pts)
        assert np.all(status == 0)
        scale = 1.0 + np.abs(phi)
        assert np.max(np.abs(out[:, 0] - phi) / scale) < 1e-14
        for k, ref in ((1, fx), (2, fy), (3, fz)):
            assert np.max(np.abs(out[:, k] - ref) / (1.0 + np.abs(ref))) < 1e-14

    def test_assembly_matches_numpy(self):
        mesh = mesh_cube(3, GradingSpec.geometric(2.0))
        A_nb = assemble(mesh).values
        have = backend._HAVE_NUMBA
        backend._HAVE_NUMBA = False
        try:
            A_np = assemble(mesh).values
        finally:
            backend._HAVE_NUMBA = have
        assert np.max(np.abs(A_nb - A_np)) < 1e-14 * float(np.max(np.abs(A_np)))

    def test_assembly_thread_count_invariance(self):
        import numba

        mesh = mesh_plate(6, 6, GradingSpec.geometric(4.0))
        before = numba.get_num_threads()
        try:
            backend.set_num_threads(1)
            A1 = assemble(mesh).values
            backend.set_num_threads(min(8, numba.config.NUMBA_NUM_THREADS))
            A8 = assemble(mesh).values
        finally:
            numba.set_num_threads(before)
        assert np.array_equal(A1, A8)


class TestEnvFlag:
    def test_disable_via_env(self):
        code = (
            "import panelfield; print(panelfield.active_backend())"
        )
        env = dict(os.environ, PANELFIELD_NUMBA="0")
        out = subprocess.run(
            [sys.executable, "-c", code], env=env, capture_output=True, text=True
        )
        assert out.stdout.strip() == "numpy"

    def test_default_state_reported(self):
        assert panelfield.active_backend() in ("numba", "numpy")

    def test_numpy_fallback_solves(self):
        code = (
            "import panelfield as pf\n"
            "m = pf.mesh_plate(4, 4, pf.GradingSpec.geometric(2.0))\n"
            "s = pf.solve(pf.assemble(m))\n"
            "print(repr(s.capacitance))\n"
        )
        env = dict(os.environ, PANELFIELD_NUMBA="0")
        out = subprocess.run(
            [sys.executable, "-c", code], env=env, capture_output=True, text=True
        )
        assert out.returncode == 0, out.stderr
        cap_np = float(out.stdout.strip())
        m = mesh_plate(4, 4, GradingSpec.geometric(2.0))
        cap = panelfield.solve(assemble(m)).capacitance
        assert abs(cap_np - cap) < 1e-13


def test_set_num_threads_validation():
    with pytest.raises(ValueError):
        backend.set_num_threads(0)


def test_threads_from_env(monkeypatch):
    monkeypatch.setenv("PANELFIELD_THREADS", "3")
    assert backend.threads_from_env() == 3
    monkeypatch.setenv("PANELFIELD_THREADS", "junk")
    assert backend.threads_from_env(default=2) == 2
    monkeypatch.delenv("PANELFIELD_THREADS")
    assert backend.threads_from_env() == 0
