"""Run the backend benchmark from a checkout: python benchmarks/bench_backends.py"""
import argparse

from panelfield.benchmarks import run_benchmark

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=200000)
    ap.add_argument("--mesh-n", type=int, default=24)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    run_benchmark(n_points=args.points, n_mesh=args.mesh_n, repeats=args.repeats)
