"""Compiled vs pure-Python kernels on baseline random instances.

    python benchmarks/bench_kernels.py [--sizes 25,50,100] [--perms 10] [--methods fp,fr,ss]

Prints one CSV line per (size, method) with the median per-permutation
decode time of each backend and the speedup, and checks that both backends
return identical solutions.
"""
from __future__ import annotations

import argparse
import statistics
import sys
import time

from evdecode import _backend, charging_graph, fixed_route, fp_fla
from evdecode.harness import InstanceParams, generate_instance
from evdecode.permgen import PermGenConfig
from evdecode.split import split


def time_backend(inst, F, perms, method, backend):
    if method == "fp":
        ctx = fp_fla.make_context(inst, F, backend=backend)
        run = lambda p: fp_fla.decode(inst, F, p, context=ctx)
    else:
        ctx = fixed_route.make_context(inst, F, single_station=method == "ss", backend=backend)
        run = lambda p: fixed_route._decode(inst, F, split(inst, p), ctx, method)
    samples, solutions = [], []
    for p in perms:
        start = time.perf_counter()
        res = run(p)
        samples.append(time.perf_counter() - start)
        solutions.append(res.solution)
    return statistics.median(samples), solutions


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="25,50,100,200")
    ap.add_argument("--stations", type=int, default=10)
    ap.add_argument("--perms", type=int, default=10)
    ap.add_argument("--methods", default="fp,fr,ss")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if "compiled" not in _backend.available():
        print("compiled kernels are not built; nothing to compare", file=sys.stderr)
        return 1
    print("customers,method,compiled_s,python_s,speedup,identical")
    mismatches = 0
    for n in (int(v) for v in args.sizes.split(",")):
        inst = generate_instance(InstanceParams(customer_count=n, station_count=args.stations), args.seed)
        F = charging_graph.build(inst)
        perms = PermGenConfig("knn", 2, args.perms, args.seed).generate(inst)
        for method in args.methods.split(","):
            fast, sol_fast = time_backend(inst, F, perms, method, "compiled")
            slow, sol_slow = time_backend(inst, F, perms, method, "python")
            same = sol_fast == sol_slow
            mismatches += not same
            print(f"{n},{method},{fast:.6f},{slow:.6f},{slow / fast:.1f},{int(same)}", flush=True)
    return 1 if mismatches else 0


if __name__ == "__main__":
    sys.exit(main())
