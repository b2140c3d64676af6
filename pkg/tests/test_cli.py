import json
import math

import numpy as np
import pytest

from panelfield.cli import main


def run_cli(args, capsys):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestEval:
    def test_exact_centroid(self, capsys):
        code, out, _ = run_cli(["eval", "--point", "0,0,0"], capsys)
        assert code == 0
        phi = float(out.split("phi=")[1].split()[0])
        assert phi == pytest.approx(3.5254943, abs=1e-6)

    def test_monopole(self, capsys):
        code, out, _ = run_cli(["eval", "--point", "0,1e6,0"], capsys)
        assert code == 0
        phi = float(out.split("phi=")[1].split()[0])
        assert phi == pytest.approx(1e-6, abs=1e-12)

    def test_corner_point_exits_2(self, capsys):
        code, out, err = run_cli(
            ["eval", "--point", "0.5,0,0.5", "--method", "exact"], capsys
        )
        assert code == 2
        assert "edge" in err.lower()

    def test_quadrature_method(self, capsys):
        code, out, _ = run_cli(
            ["eval", "--point", "0.3,0.4,-0.2", "--method", "quadrature"], capsys
        )
        assert code == 0
        assert "method=quadrature" in out

    def test_point_source_method(self, capsys):
        code, out, _ = run_cli(
            ["eval", "--point", "0,2,0", "--method", "point_source:1"], capsys
        )
        assert code == 0
        phi = float(out.split("phi=")[1].split()[0])
        assert phi == 0.5

    def test_complex_form_method(self, capsys):
        code, out, _ = run_cli(
            ["eval", "--point", "0.3,0.4,-0.2", "--method", "complex-form"], capsys
        )
        assert code == 0
        phi = float(out.split("phi=")[1].split()[0])
        # frozen from adaptive quadrature of the defining integral
        assert phi == pytest.approx(1.6368771163717302, rel=1e-12)

    def test_bad_point_exits_2(self, capsys):
        code, _, err = run_cli(["eval", "--point", "1,2"], capsys)
        assert code == 2


class TestScan:
    def test_line_scan_csv(self, capsys, tmp_path):
        out_file = tmp_path / "scan.csv"
        code, _, _ = run_cli(
            [
                "scan", "--start=-1.5,-1.5,-1.5", "--end", "1.5,1.5,1.5",
                "--samples", "11", "--methods", "exact,point_source:10",
                "--output", str(out_file),
            ],
            capsys,
        )
        assert code == 0
        lines = out_file.read_text().strip().split("\n")
        assert lines[0] == "x,y,z,method,phi,fx,fy,fz,err_phi,err_f,flag"
        assert len(lines) == 1 + 2 * 11
        body = [l.split(",") for l in lines[1:]]
        for row in body:
            for v in row[4:10]:
                assert math.isfinite(float(v))
        methods = {row[3] for row in body}
        assert methods == {"exact", "point_source:10"}
        exact_rows = [row for row in body if row[3] == "exact"]
        assert all(float(r[8]) == 0.0 for r in exact_rows)

    def test_on_surface_sample_is_perturbed_and_finite(self, capsys):
        # sample through the panel center: the midpoint lands on the surface
        code, out, _ = run_cli(
            ["scan", "--start=0,-1,0", "--end", "0,1,0", "--samples", "3"],
            capsys,
        )
        assert code == 0
        rows = [l.split(",") for l in out.strip().split("\n")[1:]]
        mid = rows[1]
        assert "perturbed" in mid[10]
        assert all(math.isfinite(float(v)) for v in mid[4:10])

    def test_edge_parallel_scan_smooth_vs_oscillatory(self, capsys):
        # the nodal comparator oscillates along a line 1e-8 off an edge;
        # the closed form does not
        code, out, _ = run_cli(
            [
                "scan", "--start=-0.5,1e-8,0.5", "--end", "0.5,1e-8,0.5",
                "--samples", "41", "--methods", "exact,point_source:10",
            ],
            capsys,
        )
        assert code == 0
        rows = [l.split(",") for l in out.strip().split("\n")[1:]]
        exact = np.array([float(r[4]) for r in rows if r[3] == "exact"])
        ps = np.array([float(r[4]) for r in rows if r[3] == "point_source:10"])
        d2_exact = np.diff(np.sign(np.diff(exact)))
        d2_ps = np.diff(np.sign(np.diff(ps)))
        assert np.count_nonzero(d2_ps) > 5 * max(1, np.count_nonzero(d2_exact))

    def test_grid_scan(self, capsys):
        code, out, _ = run_cli(
            [
                "scan", "--grid=-1,-1,1,1", "--grid-samples", "5,4",
                "--offset", "1e-8",
            ],
            capsys,
        )
        assert code == 0
        lines = out.strip().split("\n")
        assert len(lines) == 1 + 20
        ys = {float(l.split(",")[1]) for l in lines[1:]}
        assert ys == {1e-8}

    def test_determinism_across_runs(self, capsys, tmp_path):
        f1, f2 = tmp_path / "a.csv", tmp_path / "b.csv"
        args = [
            "scan", "--start=-1.5,-1.5,-1.5", "--end", "1.5,1.5,1.5",
            "--samples", "31", "--methods", "exact,point_source:7,quadrature",
        ]
        assert main(args + ["--output", str(f1)]) == 0
        assert main(args + ["--output", str(f2)]) == 0
        capsys.readouterr()
        assert f1.read_bytes() == f2.read_bytes()

    def test_invalid_spec_exits_2(self, capsys):
        code, _, err = run_cli(
            ["scan", "--start", "0,0,0", "--end", "0,0,0", "--samples", "5"], capsys
        )
        assert code == 2

    def test_samples_lower_bound(self, capsys):
        code, _, _ = run_cli(
            ["scan", "--start", "0,1,0", "--end", "0,2,0", "--samples", "1"], capsys
        )
        assert code == 2


class TestCapacitance:
    def test_single_panel(self, capsys, tmp_path):
        code, out, _ = run_cli(
            ["capacitance", "--shape", "plate", "--n", "1",
             "--output-dir", str(tmp_path)],
            capsys,
        )
        assert code == 0
        doc = json.loads((tmp_path / "capacitance_plate.json").read_text())
        assert doc["capacitance"] == pytest.approx(0.2837, abs=1e-4)
        assert doc["elements"] == 1
        csv_text = (tmp_path / "densities_plate.csv").read_text()
        assert csv_text.startswith("panel,cx,cy,cz,area,density")

    def test_convergence_table(self, capsys, tmp_path):
        code, out, _ = run_cli(
            ["capacitance", "--shape", "plate", "--n", "2,4,8", "--grading", "4",
             "--output-dir", str(tmp_path)],
            capsys,
        )
        assert code == 0
        doc = json.loads((tmp_path / "capacitance_plate.json").read_text())
        rows = doc["convergence"]
        assert [r["n"] for r in rows] == [2, 4, 8]
        assert rows[0]["delta"] is None
        assert rows[2]["delta"] > 0
        assert doc["grading_ratio"] == 4.0

    def test_cube_small(self, capsys, tmp_path):
        code, out, _ = run_cli(
            ["capacitance", "--shape", "cube", "--n", "2",
             "--output-dir", str(tmp_path)],
            capsys,
        )
        assert code == 0
        doc = json.loads((tmp_path / "capacitance_cube.json").read_text())
        assert doc["elements"] == 24
        assert 0.5 < doc["capacitance"] < 0.6606746

    def test_config_file_with_flag_override(self, capsys, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({
            "shape": "plate", "n": [2], "grading_ratio": 2.0,
            "output_dir": str(tmp_path / "from_config"),
        }))
        code, _, _ = run_cli(["capacitance", "--config", str(cfg)], capsys)
        assert code == 0
        assert (tmp_path / "from_config" / "capacitance_plate.json").exists()

        code, _, _ = run_cli(
            ["capacitance", "--config", str(cfg), "--grading", "3",
             "--output-dir", str(tmp_path / "flag_wins")],
            capsys,
        )
        assert code == 0
        doc = json.loads((tmp_path / "flag_wins" / "capacitance_plate.json").read_text())
        assert doc["grading_ratio"] == 3.0

    def test_json_determinism(self, capsys, tmp_path):
        d1, d2 = tmp_path / "r1", tmp_path / "r2"
        args = ["capacitance", "--shape", "plate", "--n", "2,4", "--grading", "2"]
        assert main(args + ["--output-dir", str(d1)]) == 0
        assert main(args + ["--output-dir", str(d2)]) == 0
        capsys.readouterr()
        assert (d1 / "capacitance_plate.json").read_bytes() == (d2 / "capacitance_plate.json").read_bytes()
        assert (d1 / "densities_plate.csv").read_bytes() == (d2 / "densities_plate.csv").read_bytes()

    def test_bad_config_exits_2(self, capsys, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text("[1, 2, 3]")
        code, _, err = run_cli(["capacitance", "--config", str(cfg)], capsys)
        assert code == 2


def test_bench_smoke(capsys):
    code, out, _ = run_cli(
        ["bench", "--points", "2000", "--mesh-n", "3", "--repeats", "1"], capsys
    )
    assert code == 0
    assert "numpy" in out


def test_threads_flag(capsys):
    code, out, _ = run_cli(["--threads", "2", "eval", "--point", "0,1,0"], capsys)
    assert code == 0


def test_threads_flag_invalid(capsys):
    code, _, err = run_cli(["--threads", "0", "eval", "--point", "0,1,0"], capsys)
    assert code == 2
