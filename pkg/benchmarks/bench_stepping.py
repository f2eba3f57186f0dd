"""Time the stepping backends against each other on one fixed problem.

Runs every available backend (compiled extension and plain numpy) through
the same number of steps on the same initial field and reports steps/s and
the speedup over numpy.  Also verifies that the backends agree to near
machine precision before timing, so a fast-but-wrong kernel cannot look
good here.

Usage:
    python3 benchmarks/bench_stepping.py [--n 4] [--nx 4000] [--steps 400]
                                         [--scheme imex]
"""

import argparse
import time

import numpy as np

from kppfronts import SystemSpec, make_discrete_laplacian
from kppfronts.stepping import Stepper, available_backends, stable_dt


def build_problem(n: int, nx: int):
    M = make_discrete_laplacian(np.full(n, 0.8), boundary="periodic")
    C = 0.6 * np.eye(n) + np.full((n, n), 0.4 / n)
    spec = SystemSpec(np.linspace(1.0, 2.0, n), M, C)
    x = np.linspace(0.0, 100.0, nx)
    u0 = np.minimum(1.0, np.exp(-(x - 10.0)))[None, :] * np.ones((n, 1))
    return spec, np.ascontiguousarray(u0)


def run(impl, spec, u0, dx, dt, scheme, steps):
    u = u0.copy()
    stepper = Stepper(spec, dx, u.shape[1], dt, scheme, impl=impl)
    t0 = time.perf_counter()
    stepper.advance(u, steps)
    return time.perf_counter() - t0, u


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=4, help="number of components")
    parser.add_argument("--nx", type=int, default=4000, help="grid points")
    parser.add_argument("--steps", type=int, default=400, help="steps to time")
    parser.add_argument("--scheme", default="imex", choices=("imex", "rk4"))
    parser.add_argument("--repeats", type=int, default=3,
                        help="timing repeats; the best one counts")
    args = parser.parse_args(argv)

    spec, u0 = build_problem(args.n, args.nx)
    dx = 100.0 / (args.nx - 1)
    dt = 0.5 * stable_dt(spec, dx, args.scheme, sup_u=2.0)
    backends = available_backends()
    print(f"problem: n={args.n} nx={args.nx} scheme={args.scheme} "
          f"dt={dt:.3e} steps={args.steps}")
    print(f"backends: {', '.join(sorted(backends))}")

    # agreement gate: a handful of steps, compared across all backends
    fields = {name: run(impl, spec, u0, dx, dt, args.scheme, 10)[1]
              for name, impl in backends.items()}
    reference = fields["numpy"]
    for name, field in fields.items():
        gap = float(np.abs(field - reference).max())
        print(f"agreement {name:>8s}: max |u - u_numpy| = {gap:.2e}")
        if gap > 1e-10:
            print("backends disagree; refusing to time")
            return 1

    timings = {}
    for name, impl in backends.items():
        best = min(run(impl, spec, u0, dx, dt, args.scheme, args.steps)[0]
                   for _ in range(args.repeats))
        timings[name] = best
    width = max(len(k) for k in timings)
    for name in sorted(timings):
        t = timings[name]
        rate = args.steps / t
        speedup = timings["numpy"] / t
        print(f"{name:>{width}s}: {t:8.4f} s  {rate:10.1f} steps/s  "
              f"{speedup:5.2f}x vs numpy")
    if "compiled" not in timings:
        print("note: compiled extension not importable; numpy fallback only")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
