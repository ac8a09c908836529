"""Compiled versus pure-Python integrator kernel.

Integrates a small libration about L4 with both backends, reports the best
of ``--repeat`` wall-clock times after one warm-up call (which also pays the
compilation cost of the numba path) and the largest difference between the
two trajectories.

Usage::

    python3 benchmarks/bench_kernels.py --t-end 500 --repeat 3
"""

import argparse
import json
import time

import numpy as np

from lpnorm._backend import HAVE_NUMBA
from lpnorm.dynamics import State, integrate
from lpnorm.equilibria import triangular_point
from lpnorm.params import PerturbationParams


def best_time(func, repeat):
    times = []
    result = None
    for _ in range(repeat):
        start = time.perf_counter()
        result = func()
        times.append(time.perf_counter() - start)
    return min(times), result


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--mu", type=float, default=0.01)
    parser.add_argument("--A2", type=float, default=0.0)
    parser.add_argument("--t-end", type=float, default=500.0)
    parser.add_argument("--dt-out", type=float, default=0.05)
    parser.add_argument("--tol", type=float, default=1e-12)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--json", action="store_true", help="print a JSON record instead of a table")
    args = parser.parse_args(argv)

    p = PerturbationParams(mu=args.mu, A2=args.A2)
    pt = triangular_point(p)
    s0 = State(pt.x + 1e-4, pt.y, 0.0, 0.0)

    def run(backend):
        return integrate(s0, p, args.t_end, args.dt_out, tol=args.tol, backend=backend)

    record = {"t_end": args.t_end, "samples": None, "python_s": None, "numba_s": None,
              "numba_first_call_s": None, "speedup": None, "max_abs_diff": None}
    py_time, py_traj = best_time(lambda: run("python"), args.repeat)
    record["python_s"] = py_time
    record["samples"] = len(py_traj)
    if HAVE_NUMBA:
        start = time.perf_counter()
        run("numba")
        record["numba_first_call_s"] = time.perf_counter() - start
        nb_time, nb_traj = best_time(lambda: run("numba"), args.repeat)
        record["numba_s"] = nb_time
        record["speedup"] = py_time / nb_time
        record["max_abs_diff"] = float(np.abs(nb_traj.states - py_traj.states).max())

    if args.json:
        print(json.dumps(record))
        return
    print(f"samples           {record['samples']}")
    print(f"python backend    {py_time:.3f} s")
    if HAVE_NUMBA:
        print(f"numba first call  {record['numba_first_call_s']:.3f} s (includes compile or cache load)")
        print(f"numba backend     {record['numba_s']:.3f} s")
        print(f"speedup           {record['speedup']:.1f}x")
        print(f"max |difference|  {record['max_abs_diff']:.3e}")
    else:
        print("numba unavailable; compiled path skipped")


if __name__ == "__main__":
    main()
