"""Compare the compiled and interpreted kernel paths on the same workload.

Usage:
    python benchmarks/integrator_benchmark.py [--orbits 2] [--tolerance 1e-10]
        [--e 0.2056] [--repeats 3] [--skip-pure]

Both paths run the identical source (ncorbit._kernels_impl); the compiled
path is numba nopython mode, the interpreted path is what you get with
NCORBIT_JIT=0.  Trajectories are checked to match before timing.
"""

import argparse
import time

import numpy as np

from ncorbit._kernels import load_kernels
from ncorbit.core import NCParams, OrbitElements, kepler_state_at_perihelion
from ncorbit.integrator import integrate_orbit


def run(kernels, elem, nc, orbits, tolerance):
    state = kepler_state_at_perihelion(elem)
    return integrate_orbit(state, elem, nc, orbits, tolerance, kernels=kernels)


def time_path(kernels, elem, nc, orbits, tolerance, repeats):
    best = float("inf")
    traj = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        traj = run(kernels, elem, nc, orbits, tolerance)
        best = min(best, time.perf_counter() - t0)
    return best, traj


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--orbits", type=int, default=2)
    ap.add_argument("--tolerance", type=float, default=1e-10)
    ap.add_argument("--e", type=float, default=0.2056)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--skip-pure", action="store_true",
                    help="time only the compiled path")
    args = ap.parse_args()

    elem = OrbitElements(a=1.0, e=args.e, k=1.0, m=1.0)
    nc = NCParams(theta_sq=2e-5, eta_sq=1e-5, mass=1.0)

    jit = load_kernels(True)
    t0 = time.perf_counter()
    traj_jit = run(jit, elem, nc, args.orbits, args.tolerance)
    compile_wall = time.perf_counter() - t0
    print(f"numba compile + first run: {compile_wall:.2f} s "
          f"({traj_jit.stats.n_steps} steps)")

    jit_time, traj_jit = time_path(jit, elem, nc, args.orbits, args.tolerance,
                                   args.repeats)
    rows = [("numba @njit", jit_time, traj_jit.stats.n_steps)]

    if not args.skip_pure:
        pure = load_kernels(False)
        pure_time, traj_pure = time_path(pure, elem, nc, args.orbits,
                                         args.tolerance, max(1, args.repeats // 3))
        if traj_pure.stats.n_steps != traj_jit.stats.n_steps or not np.allclose(
            traj_pure.y, traj_jit.y, rtol=0, atol=1e-13
        ):
            raise RuntimeError("paths diverged; benchmark numbers would be meaningless")
        rows.append(("pure numpy/python", pure_time, traj_pure.stats.n_steps))

    print(f"\nworkload: {args.orbits} orbits, e={args.e}, tolerance={args.tolerance:g}")
    print(f"{'path':<20} {'wall [s]':>10} {'steps':>8} {'steps/s':>12}")
    for name, wall, steps in rows:
        print(f"{name:<20} {wall:>10.4f} {steps:>8d} {steps / wall:>12.0f}")
    if len(rows) == 2:
        print(f"\nspeedup: {rows[1][1] / rows[0][1]:.0f}x")


if __name__ == "__main__":
    main()
