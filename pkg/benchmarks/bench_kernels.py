#!/usr/bin/env python3
"""Compare the compiled float-lane kernels against the numpy fallback.

Runs the same workloads through both backends (the fallback is forced with
``VLDSRC_PURE_PYTHON=1`` in a subprocess) and prints a side-by-side table.
The exact-rational lane never touches these kernels, so it is not timed here.

Usage: python benchmarks/bench_kernels.py [--spectra 400] [--atoms 64]
"""

import argparse
import json
import os
import random
import subprocess
import sys
import time


def workloads(n_spectra, max_atoms, seed=99):
    rng = random.Random(seed)
    specs = []
    for _ in range(n_spectra):
        k = rng.randint(2, max_atoms)
        values = sorted(rng.sample(range(1, 1 << 20), k))
        values = [v / float(1 << 16) for v in values]
        weights = [rng.random() + 1e-3 for _ in range(k)]
        total = sum(weights)
        specs.append((values, [w / total for w in weights]))
    return specs


def run_suite(n_spectra, max_atoms, repeats):
    from vldsrc import backend

    specs = workloads(n_spectra, max_atoms)
    eps_grid = [k / 1000 for k in range(1000)]
    timings = {}

    t0 = time.perf_counter()
    for _ in range(repeats):
        for values, masses in specs:
            backend.batch_expected_cutoff(values, masses, eps_grid)
    timings["batch_expected_cutoff"] = time.perf_counter() - t0

    noisy = []
    rng = random.Random(7)
    for values, masses in specs:
        dup_v = values + [v + 1e-15 for v in values]
        dup_m = [m / 2 for m in masses] * 2
        order = list(range(len(dup_v)))
        rng.shuffle(order)
        noisy.append(([dup_v[i] for i in order], [dup_m[i] for i in order]))
    t0 = time.perf_counter()
    for _ in range(repeats):
        for values, masses in noisy:
            backend.merge_float_atoms(values, masses)
    timings["merge_float_atoms"] = time.perf_counter() - t0

    classes = []
    for values, masses in specs:
        l2 = sorted((-v for v in values))  # descending likelihood
        counts = [float(1 + (i % 5)) for i in range(len(l2))]
        classes.append((l2, counts))
    t0 = time.perf_counter()
    for _ in range(repeats):
        for l2, counts in classes:
            backend.split_rank_classes_float(l2, counts, 16)
    timings["split_rank_classes_float"] = time.perf_counter() - t0

    return {"backend": backend.BACKEND, "timings": timings}


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--spectra", type=int, default=400)
    parser.add_argument("--atoms", type=int, default=64)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--emit-json", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args(argv)

    if args.emit_json:
        print(json.dumps(run_suite(args.spectra, args.atoms, args.repeats)))
        return 0

    results = []
    for env_extra in ({}, {"VLDSRC_PURE_PYTHON": "1"}):
        env = dict(os.environ, **env_extra)
        proc = subprocess.run(
            [sys.executable, __file__, "--emit-json", "--spectra", str(args.spectra),
             "--atoms", str(args.atoms), "--repeats", str(args.repeats)],
            capture_output=True, text=True, env=env, check=True,
        )
        results.append(json.loads(proc.stdout))

    a, b = results
    if a["backend"] == b["backend"]:
        print(f"only one backend available ({a['backend']}); nothing to compare")

    names = sorted(a["timings"])
    width = max(len(n) for n in names)
    print(f"{args.spectra} spectra x up to {args.atoms} atoms, {args.repeats} repeats")
    print(f"{'kernel':<{width}}  {a['backend']:>10}  {b['backend']:>10}  speedup")
    for name in names:
        ta, tb = a["timings"][name], b["timings"][name]
        print(f"{name:<{width}}  {ta:>9.3f}s  {tb:>9.3f}s  {tb / ta:>6.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
