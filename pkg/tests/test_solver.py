import math

import numpy as np
import pytest

from panelfield import (
    BoundaryCondition,
    GradingSpec,
    SingularMatrix,
    assemble,
    build_mesh,
    capacitance,
    convergence_study,
    densities_csv,
    field_at,
    field_at_many,
    mesh_cube,
    mesh_plate,
    potential_centroid,
    solution_summary,
    solve,
    summary_json,
)

CENTROID_VALUE = 4.0 * math.log(1.0 + math.sqrt(2.0))
SINGLE_PANEL_CAP = 1.0 / CENTROID_VALUE  # one-unknown solve by hand


class TestAssemble:
    def test_single_panel_matrix(self):
        A = assemble(mesh_plate(1, 1)).values
        assert A.shape == (1, 1)
        assert A[0, 0] == pytest.approx(CENTROID_VALUE, rel=1e-13)

    def test_two_panel_symmetry(self):
        A = assemble(mesh_plate(2, 1)).values
        assert A.shape == (2, 2)
        assert A[0, 0] == pytest.approx(A[1, 1], rel=1e-14)
        assert A[0, 1] == pytest.approx(A[1, 0], rel=1e-14)
        assert A[0, 0] > A[0, 1] > 0

    def test_six_panel_cube_classes(self):
        A = assemble(mesh_cube(1)).values
        assert A.shape == (6, 6)
        diag = np.diag(A)
        assert np.allclose(diag, diag[0], rtol=1e-13)
        # row 0 (+x face): one opposite-face entry, four adjacent-face entries
        opposite = A[0, 1]
        adjacent = [A[0, j] for j in range(2, 6)]
        assert np.allclose(adjacent, adjacent[0], rtol=1e-12)
        assert opposite != pytest.approx(adjacent[0], rel=1e-3)
        assert np.all(A > 0)

    def test_diagonal_is_centroid_potential(self):
        mesh = mesh_plate(4, 4, GradingSpec.geometric(3.0))
        A = assemble(mesh).values
        for i, p in enumerate(mesh.panels):
            assert A[i, i] == pytest.approx(
                potential_centroid(p.extent.a, p.extent.b), rel=1e-12
            )

    def test_assembly_deterministic(self):
        A1 = assemble(mesh_cube(3)).values
        A2 = assemble(mesh_cube(3)).values
        assert np.array_equal(A1, A2)


class TestSolve:
    def test_single_panel_hand_solve(self):
        # one unknown: density = 1 / potential_centroid(1, 1) = 0.28364816...
        sol = solve(assemble(mesh_plate(1, 1)))
        assert sol.densities[0] == pytest.approx(SINGLE_PANEL_CAP, rel=1e-13)
        assert sol.capacitance == pytest.approx(0.2837, abs=1e-4)

    def test_linearity_in_bc(self):
        m = assemble(mesh_plate(3, 3))
        s1 = solve(m, BoundaryCondition(1.0))
        s2 = solve(m, BoundaryCondition(2.0))
        assert np.allclose(s2.densities, 2.0 * s1.densities, rtol=1e-12)

    def test_uniform_10x10_bracket(self):
        sol = solve(assemble(mesh_plate(10, 10)))
        assert 0.2837 < sol.capacitance < 0.3668

    def test_residual_and_condition(self):
        for mesh in (mesh_plate(8, 8), mesh_cube(4)):
            sol = solve(assemble(mesh))
            n = len(mesh)
            assert sol.solve_residual <= 1e-10 * n
            assert 1.0 <= sol.condition_estimate < 1e6

    def test_capacitance_recompute(self):
        mesh = mesh_plate(5, 5)
        sol = solve(assemble(mesh))
        assert capacitance(sol, mesh) == sol.capacitance

    @pytest.mark.filterwarnings("ignore::scipy.linalg.LinAlgWarning")
    def test_singular_matrix_raises(self):
        from panelfield.solver import InfluenceMatrix

        mesh = mesh_plate(2, 1)
        bad = InfluenceMatrix(values=np.ones((2, 2)), mesh=mesh)
        with pytest.raises(SingularMatrix):
            solve(bad)

    def test_plate_symmetry_classes(self):
        # densities respect the 8-fold dihedral symmetry of the square
        mesh = mesh_plate(6, 6)
        sol = solve(assemble(mesh))
        d = sol.densities.reshape(6, 6)
        for t in (d[::-1, :], d[:, ::-1], d.T):
            assert np.max(np.abs(d - t)) < 1e-10

    def test_cube_symmetry_classes(self):
        # all six faces carry the same density pattern up to the square's
        # dihedral symmetries (48-fold octahedral group overall)
        n = 4
        sol = solve(assemble(mesh_cube(n)))
        faces = sol.densities.reshape(6, n, n)
        ref = faces[0]
        variants = [
            ref, ref[::-1, :], ref[:, ::-1], ref[::-1, ::-1],
            ref.T, ref.T[::-1, :], ref.T[:, ::-1], ref.T[::-1, ::-1],
        ]
        for f in faces[1:]:
            best = min(np.max(np.abs(f - v)) for v in variants)
            assert best < 1e-10
        for v in variants[1:]:
            assert np.max(np.abs(ref - v)) < 1e-10

    def test_monotone_refinement_uniform_plate(self):
        caps = [
            solve(assemble(mesh_plate(n, n))).capacitance
            for n in (1, 2, 4, 8, 16, 32)
        ]
        for a, b in zip(caps, caps[1:]):
            assert b >= a - 1e-10

    def test_density_concentrates_at_edges(self):
        n = 8
        mesh = mesh_plate(n, n, GradingSpec.geometric(4.0))
        sol = solve(assemble(mesh))
        d = sol.densities.reshape(n, n)
        ring = np.concatenate([d[0, :], d[-1, :], d[1:-1, 0], d[1:-1, -1]])
        center = d[n // 2 - 1 : n // 2 + 1, n // 2 - 1 : n // 2 + 1]
        assert ring.mean() > center.mean()


class TestFieldAt:
    def test_bc_satisfied_at_collocation_points(self):
        mesh = mesh_plate(6, 6, GradingSpec.geometric(2.0))
        sol = solve(assemble(mesh))
        pts = np.array([p.collocation_point for p in mesh.panels])
        vals, status = field_at_many(mesh, sol, pts)
        assert np.max(np.abs(vals[:, 0] - 1.0)) <= 10 * max(sol.solve_residual, 1e-15)
        assert np.all(status == 2)  # on-surface evaluations

    def test_midcell_bc_violation_shrinks_with_refinement(self):
        # piecewise-constant collocation satisfies the BC exactly only at the
        # collocation points; the mid-cell sag is O(h) and stays percent-level
        # at desk-scale meshes
        sags = []
        for n in (8, 16, 32):
            mesh = mesh_plate(n, n, GradingSpec.geometric(4.0))
            sol = solve(assemble(mesh))
            colloc = np.array([p.collocation_point for p in mesh.panels])
            grid = colloc.reshape(n, n, 3)
            # quarter points stay strictly inside a cell (plain midpoints of
            # equal-width neighbours would land on the shared panel edge)
            probes = grid[n // 2, : n - 1] + 0.25 * (
                grid[n // 2, 1:] - grid[n // 2, : n - 1]
            )
            vals, status = field_at_many(mesh, sol, probes)
            assert not np.any(status == 1)
            sags.append(float(np.max(np.abs(vals[:, 0] - 1.0))))
        assert sags[0] > sags[1] > sags[2]
        assert sags[2] < 0.06

    def test_far_field_monopole_of_solution(self):
        mesh = mesh_plate(8, 8)
        sol = solve(assemble(mesh))
        v = field_at(mesh, sol, (0.0, 1e3, 0.0))
        assert v.phi * 1e3 == pytest.approx(sol.capacitance, rel=1e-3)

    def test_force_points_away_from_plate(self):
        mesh = mesh_plate(4, 4)
        sol = solve(assemble(mesh))
        up = field_at(mesh, sol, (0.0, 0.5, 0.0))
        dn = field_at(mesh, sol, (0.0, -0.5, 0.0))
        assert up.fy > 0 > dn.fy
        assert up.fy == pytest.approx(-dn.fy, rel=1e-12)


class TestConvergenceStudy:
    def test_single_panel_row(self):
        rows = convergence_study("plate", [1], GradingSpec.uniform())
        assert rows[0].elements == 1
        assert rows[0].capacitance == pytest.approx(SINGLE_PANEL_CAP, rel=1e-13)
        assert math.isnan(rows[0].delta)

    def test_plate_trend(self):
        rows = convergence_study("plate", [2, 4, 8], GradingSpec.geometric(4.0))
        caps = [r.capacitance for r in rows]
        assert caps[0] < caps[1] < caps[2] < 0.3668
        assert rows[1].delta > rows[2].delta > 0

    def test_rejects_non_increasing(self):
        with pytest.raises(ValueError):
            convergence_study("plate", [4, 4], GradingSpec.uniform())

    def test_unknown_shape(self):
        with pytest.raises(ValueError):
            build_mesh("sphere", 4, GradingSpec.uniform())


class TestExports:
    def test_summary_json(self):
        import json

        mesh = mesh_plate(2, 2)
        sol = solve(assemble(mesh))
        doc = json.loads(summary_json(solution_summary("plate", 2, GradingSpec.uniform(), sol)))
        for key in ("shape", "n", "grading_ratio", "elements", "capacitance",
                    "solve_residual", "condition_estimate"):
            assert key in doc
        assert doc["elements"] == 4

    def test_densities_csv(self):
        mesh = mesh_plate(2, 2)
        sol = solve(assemble(mesh))
        text = densities_csv(sol)
        lines = text.strip().split("\n")
        assert lines[0] == "panel,cx,cy,cz,area,density"
        assert len(lines) == 5
        row = lines[1].split(",")
        assert int(row[0]) == 0
        assert float(row[5]) == sol.densities[0]
