"""Command-line driver: point evaluations, line/grid scans, capacitance runs.

Exit codes: 0 success, 2 input or geometry error, 3 numerical failure.
Scans emit RFC-4180-style CSV with full round-trip float formatting, so
repeated runs with the same configuration are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import backend
from .errors import (
    CoincidentSource,
    EdgeSingularity,
    OnSurfaceAmbiguity,
    PanelFieldError,
    SingularMatrix,
)
from .geometry import GradingSpec
from .kernel import (
    PanelExtent,
    eps_geo,
    force_complex_form,
    influence,
    influence_batch,
    potential_complex_form,
)
from .oracle import (
    PointSourceGrid,
    influence_quadrature,
    normalized_error,
    panel_distance,
    point_source_influence,
)
from .solver import (
    build_mesh,
    convergence_study,
    densities_csv,
    solution_summary,
    solve,
    assemble,
    summary_json,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3


def _parse_floats(text, n, what):
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != n:
        raise ValueError(f"{what} needs {n} comma-separated values, got {text!r}")
    return [float(p) for p in parts]


def _panel_from(text) -> PanelExtent:
    x1, z1, x2, z2 = _parse_floats(text, 4, "--panel")
    return PanelExtent(x1, z1, x2, z2)


def _fmt(x: float) -> str:
    return repr(float(x))


def _parse_methods(text):
    methods = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if tok in ("exact", "quadrature", "complex-form"):
            methods.append((tok, 0))
        elif tok.startswith("point_source:"):
            methods.append(("point_source", int(tok.split(":", 1)[1])))
        else:
            raise ValueError(f"unknown method {tok!r}")
    if not methods:
        raise ValueError("no methods given")
    return methods


def _method_name(kind, m):
    return f"point_source:{m}" if kind == "point_source" else kind


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------

def cmd_eval(args) -> int:
    panel = _panel_from(args.panel)
    point = _parse_floats(args.point, 3, "--point")
    kind, m = _parse_methods(args.method)[0]
    note = ""
    if kind == "exact":
        from .kernel import potential_exact

        try:
            v = influence(panel, point)
            vals = (v.phi, v.fx, v.fy, v.fz)
        except OnSurfaceAmbiguity as exc:
            # on the panel inside its extent: the potential and tangential
            # force are well defined, the normal force jumps
            vals = (potential_exact(panel, point), exc.fx, math.nan, exc.fz)
            note = " note=on-surface"
    elif kind == "complex-form":
        pr = potential_complex_form(panel, point)
        fr = force_complex_form(panel, point)
        try:
            v = influence(panel, point)
            fx, fz = v.fx, v.fz
        except OnSurfaceAmbiguity as exc:
            fx, fz = exc.fx, exc.fz
        vals = (pr.phi, fx, fr.fy, fz)
        if pr.perturbed or fr.perturbed:
            note = " note=perturbed"
    elif kind == "quadrature":
        res = influence_quadrature(panel, point)
        vals = tuple(res.value)
        if not res.converged:
            note = " note=tolerance-not-met"
    else:
        ps = point_source_influence(panel, PointSourceGrid(m or 1), point)
        vals = (ps.phi, ps.fx, ps.fy, ps.fz)
    name = _method_name(kind, m)
    print(
        f"method={name} phi={_fmt(vals[0])} fx={_fmt(vals[1])} "
        f"fy={_fmt(vals[2])} fz={_fmt(vals[3])}{note}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# scan
# ---------------------------------------------------------------------------

def _scan_points(args):
    if args.grid:
        gx1, gz1, gx2, gz2 = _parse_floats(args.grid, 4, "--grid")
        nx, nz = (int(v) for v in _parse_floats(args.grid_samples, 2, "--grid-samples"))
        if nx < 2 or nz < 2:
            raise ValueError("--grid-samples must be >= 2 in each direction")
        xs = np.linspace(gx1, gx2, nx)
        zs = np.linspace(gz1, gz2, nz)
        X, Z = np.meshgrid(xs, zs, indexing="ij")
        Y = np.full_like(X, args.offset)
        return np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])
    start = np.array(_parse_floats(args.start, 3, "--start"))
    end = np.array(_parse_floats(args.end, 3, "--end"))
    if args.samples < 2:
        raise ValueError("--samples must be >= 2")
    if np.array_equal(start, end):
        raise ValueError("--start and --end must differ")
    t = np.linspace(0.0, 1.0, args.samples)
    return start[None, :] + t[:, None] * (end - start)[None, :]


def _exact_rows(panel, pts):
    """Exact influence at scan points; near-edge and on-surface rows are
    re-evaluated at an eps_geo normal offset and flagged."""
    phi, fx, fy, fz, on_plane, near_edge = influence_batch(
        panel, pts, edge_action="nan"
    )
    flags = [""] * len(pts)
    redo = set(np.nonzero(near_edge)[0].tolist())
    redo |= set(np.nonzero(~np.isfinite(fy))[0].tolist())
    for i in sorted(redo):
        p = pts[i].copy()
        eps = eps_geo(panel, p)
        p[1] = p[1] + eps if p[1] >= 0.0 else p[1] - eps
        d = 2.0
        while True:  # an edge-tube hit needs at most a couple of doublings
            try:
                v = influence(panel, p)
                break
            except (EdgeSingularity, OnSurfaceAmbiguity):
                p[1] = p[1] + eps * d if p[1] >= 0.0 else p[1] - eps * d
                d *= 2.0
                if d > 1e6:
                    raise
        phi[i], fx[i], fy[i], fz[i] = v.phi, v.fx, v.fy, v.fz
        flags[i] = "perturbed;near-edge" if near_edge[i] else "perturbed"
    for i in np.nonzero(on_plane)[0]:
        if not flags[i]:
            flags[i] = "on-plane"
    return phi, fx, fy, fz, flags


def cmd_scan(args) -> int:
    panel = _panel_from(args.panel)
    pts = _scan_points(args)
    methods = _parse_methods(args.methods)

    phi_e, fx_e, fy_e, fz_e, flags_e = _exact_rows(panel, pts)
    exact = {"phi": phi_e, "fx": fx_e, "fy": fy_e, "fz": fz_e}

    lines = ["x,y,z,method,phi,fx,fy,fz,err_phi,err_f,flag"]
    for kind, m in methods:
        name = _method_name(kind, m)
        if kind == "exact":
            cols = (phi_e, fx_e, fy_e, fz_e)
            flags = list(flags_e)
        elif kind == "quadrature":
            vals = []
            flags = []
            for p in pts:
                q = p
                flag = ""
                if panel_distance(panel, p) == 0.0:
                    q = p.copy()
                    eps = eps_geo(panel, q)
                    q[1] = q[1] + eps if q[1] >= 0.0 else q[1] - eps
                    flag = "perturbed"
                res = influence_quadrature(panel, q)
                if not res.converged:
                    flag = f"{flag};tolerance-not-met" if flag else "tolerance-not-met"
                vals.append(res.value)
                flags.append(flag)
            vals = np.array(vals)
            cols = (vals[:, 0], vals[:, 1], vals[:, 2], vals[:, 3])
        else:
            grid = PointSourceGrid(m or 1)
            vals = []
            flags = []
            for p in pts:
                try:
                    v = point_source_influence(panel, grid, p)
                    flags.append("")
                except CoincidentSource:
                    q = p.copy()
                    eps = eps_geo(panel, q)
                    q[1] = q[1] + eps if q[1] >= 0.0 else q[1] - eps
                    v = point_source_influence(panel, grid, q)
                    flags.append("perturbed;coincident-source")
                vals.append((v.phi, v.fx, v.fy, v.fz))
            vals = np.array(vals)
            cols = (vals[:, 0], vals[:, 1], vals[:, 2], vals[:, 3])

        err_phi, abs_phi = normalized_error(cols[0], exact["phi"])
        f_errs = []
        f_abs = []
        for k, key in enumerate(("fx", "fy", "fz")):
            e, a = normalized_error(cols[1 + k], exact[key])
            f_errs.append(np.abs(e))
            f_abs.append(a)
        err_f = np.maximum.reduce(f_errs)
        any_abs = abs_phi | np.logical_or.reduce(f_abs)

        for i, p in enumerate(pts):
            flag = flags[i]
            if any_abs[i]:
                flag = f"{flag};abs-err" if flag else "abs-err"
            lines.append(
                ",".join(
                    [_fmt(p[0]), _fmt(p[1]), _fmt(p[2]), name]
                    + [_fmt(c[i]) for c in cols]
                    + [_fmt(err_phi[i]), _fmt(err_f[i]), flag]
                )
            )
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# capacitance
# ---------------------------------------------------------------------------

def _load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValueError("config file must contain a JSON object")
    return cfg


def cmd_capacitance(args) -> int:
    cfg = _load_config(args.config) if args.config else {}
    shape = args.shape if args.shape is not None else cfg.get("shape", "plate")
    if args.n is not None:
        n_list = [int(v) for v in _parse_floats(args.n, len(args.n.split(",")), "--n")]
    else:
        n_list = cfg.get("n", [8, 16, 32, 64])
        if isinstance(n_list, (int, float)):
            n_list = [int(n_list)]
        n_list = [int(v) for v in n_list]
    ratio = args.grading if args.grading is not None else float(cfg.get("grading_ratio", 1.0))
    out_dir = Path(args.output_dir if args.output_dir is not None else cfg.get("output_dir", "."))

    grading = GradingSpec.geometric(ratio) if ratio != 1.0 else GradingSpec.uniform()
    rows = convergence_study(shape, n_list, grading)

    mesh = build_mesh(shape, n_list[-1], grading)
    sol = solve(assemble(mesh))
    summary = solution_summary(shape, n_list[-1], grading, sol)
    summary["convergence"] = [
        {
            "n": r.n,
            "elements": r.elements,
            "capacitance": r.capacitance,
            "delta": None if math.isnan(r.delta) else r.delta,
            "solve_residual": r.solve_residual,
            "condition_estimate": r.condition_estimate,
        }
        for r in rows
    ]

    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / f"capacitance_{shape}.json"
    csv_path = out_dir / f"densities_{shape}.csv"
    json_path.write_text(summary_json(summary) + "\n")
    csv_path.write_text(densities_csv(sol))

    print(f"{'n':>5} {'elements':>9} {'capacitance':>14} {'delta':>10}")
    for r in rows:
        d = "-" if math.isnan(r.delta) else f"{r.delta:.2e}"
        print(f"{r.n:>5} {r.elements:>9} {r.capacitance:>14.7f} {d:>10}")
    print(f"wrote {json_path} and {csv_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------

def cmd_bench(args) -> int:
    from .benchmarks import run_benchmark

    run_benchmark(n_points=args.points, n_mesh=args.mesh_n, repeats=args.repeats)
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="panelfield",
        description="Exact rectangular-panel influence fields and capacitance runs",
    )
    ap.add_argument(
        "--threads",
        type=int,
        default=None,
        help="worker threads for assembly/scans (falls back to PANELFIELD_THREADS)",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="influence of one panel at one point")
    p.add_argument("--panel", default="-0.5,-0.5,0.5,0.5",
                   help="x1,z1,x2,z2 of the panel in its plane")
    p.add_argument("--point", required=True, help="X,Y,Z evaluation point")
    p.add_argument("--method", default="exact",
                   help="exact | complex-form | quadrature | point_source:M")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("scan", help="line or grid scan to CSV")
    p.add_argument("--panel", default="-0.5,-0.5,0.5,0.5")
    p.add_argument("--start", help="X,Y,Z of the line start")
    p.add_argument("--end", help="X,Y,Z of the line end")
    p.add_argument("--samples", type=int, default=301)
    p.add_argument("--grid", help="x1,z1,x2,z2 of a surface grid scan")
    p.add_argument("--grid-samples", default="41,41", help="nx,nz grid samples")
    p.add_argument("--offset", type=float, default=1e-8,
                   help="normal offset of the grid plane")
    p.add_argument("--methods", default="exact",
                   help="comma list: exact, quadrature, point_source:M")
    p.add_argument("--output", help="CSV path (stdout if omitted)")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("capacitance", help="convergence study + capacitance export")
    p.add_argument("--shape", choices=("plate", "cube"), default=None)
    p.add_argument("--n", default=None, help="comma list of per-side panel counts")
    p.add_argument("--grading", type=float, default=None,
                   help="center-to-edge cell size ratio (1 = uniform)")
    p.add_argument("--output-dir", default=None)
    p.add_argument("--config", default=None, help="JSON run configuration; flags win")
    p.set_defaults(func=cmd_capacitance)

    p = sub.add_parser("bench", help="compare numba and numpy kernel backends")
    p.add_argument("--points", type=int, default=200000)
    p.add_argument("--mesh-n", type=int, default=24)
    p.add_argument("--repeats", type=int, default=3)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    threads = args.threads if args.threads is not None else backend.threads_from_env()
    try:
        if threads:
            backend.set_num_threads(threads)
        elif args.threads is not None:
            raise ValueError(f"thread count must be >= 1, got {args.threads}")
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except (SingularMatrix,) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (EdgeSingularity, OnSurfaceAmbiguity) as exc:
        print(f"geometry error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PanelFieldError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
