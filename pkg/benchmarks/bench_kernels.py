#!/usr/bin/env python3
"""Compare the numba kernels against the pure-numpy fallback.

Each backend runs in its own interpreter because the switch is read at import
time. Usage:

    python3 benchmarks/bench_kernels.py            # both backends, summary table
    python3 benchmarks/bench_kernels.py --worker   # one backend, JSON on stdout
"""
import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

EXAMPLE_BASE = [[0, 0, 0], [14 / 33, 0, 0], [8 / 33, 4 / 33, 0], [7 / 33, 29 / 33, 32 / 33], [0.5, -0.25, 2 / 3]]
EXAMPLE_PLATFORM = [0, 0.4, 1, 1.3, 1.8]


def best_of(fn, repeat):
    fn()  # first call pays for compilation
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def run_worker(repeat):
    from pentapod_asd import _accel, kernels, polysys, solvers
    from pentapod_asd.cases import CaseId, CaseProblem, enumerate_combinations
    from pentapod_asd.geometry import PentapodDesign

    design = PentapodDesign(EXAMPLE_BASE, EXAMPLE_PLATFORM)
    problem = CaseProblem.create(CaseId.C9, enumerate_combinations(CaseId.C9)[0], design)
    system = polysys.problem_system(problem)
    compiled = system.compiled()
    config = solvers.SolveConfig(multistart_count=256)
    seeds = solvers.multistart_seeds(problem, config)
    params = np.asarray(system.param_values, dtype=float)
    points = [system.full_point(s) for s in seeds[:200]]

    def evaluate():
        for z in points:
            kernels.eval_system_jacobian(compiled, z)

    def newton():
        kernels.newton_batch(compiled, seeds, params, config.newton_tol, config.newton_max_steps)

    def track():
        solvers.ab_initio(CaseId.C2, True, solvers.SolveConfig(seed=1))

    return {
        "numba": _accel.USE_NUMBA,
        "eval_jacobian_200": best_of(evaluate, repeat),
        "newton_batch_%d" % len(seeds): best_of(newton, repeat),
        "track_c2_planar": best_of(track, repeat),
    }


def spawn(flag, repeat):
    env = dict(os.environ, PENTAPOD_ASD_NUMBA=flag)
    out = subprocess.run(
        [sys.executable, __file__, "--worker", "--repeat", str(repeat)],
        env=env,
        check=True,
        capture_output=True,
        text=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--worker", action="store_true")
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    if args.worker:
        print(json.dumps(run_worker(args.repeat)))
        return

    fast = spawn("1", args.repeat)
    slow = spawn("0", args.repeat)
    if not fast.pop("numba"):
        print("numba is not importable; both columns use numpy")
    slow.pop("numba")
    print(f"{'workload':<22}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for key in fast:
        print(f"{key:<22}{fast[key]:>12.4f}{slow[key]:>12.4f}{slow[key] / fast[key]:>9.1f}x")


if __name__ == "__main__":
    main()
