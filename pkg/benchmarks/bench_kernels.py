"""Compare the compiled and numpy RK4 backends.

Usage::

    python benchmarks/bench_kernels.py [--repeat N]

Prints wall time per backend for GKSL integrations of growing dimension and
the largest state difference between the two backends.
"""
import argparse
import timeit

import numpy as np

from quantumlike import kernels
from quantumlike.open_systems import GkslGenerator, amplitude_damping, local_depolarizing


def random_generator(rng, d, n_jumps=2):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    jumps = [0.3 * (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) for _ in range(n_jumps)]
    return GkslGenerator((a + a.conj().T) / 2, jumps)


def cases(rng):
    yield "damping d=2", amplitude_damping(1.0), 10_000
    yield "depolarizing d=4", local_depolarizing(0.1), 5_000
    yield "random d=8", random_generator(rng, 8), 2_000
    yield "random d=16", random_generator(rng, 16), 500


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if "compiled" not in kernels.BACKENDS:
        print("compiled extension not built; only the python backend is available")
    rng = np.random.default_rng(0)
    print(f"{'case':<20}{'steps':>7}{'python [s]':>12}{'compiled [s]':>14}{'speedup':>9}{'max diff':>11}")
    for name, gen, steps in cases(rng):
        d = gen.dim
        rho0 = np.eye(d, dtype=complex) / d
        rho0[0, -1] = rho0[-1, 0] = 0.1 / d
        times, outs = {}, {}
        for backend, fn in kernels.BACKENDS.items():
            call = lambda: fn(gen.hamiltonian, gen.jump_ops, rho0, 1e-3, steps)  # noqa: E731
            outs[backend] = call()
            times[backend] = min(timeit.repeat(call, number=1, repeat=args.repeat))
        if "compiled" in times:
            diff = np.max(np.abs(outs["compiled"] - outs["python"]))
            print(f"{name:<20}{steps:>7}{times['python']:>12.4f}{times['compiled']:>14.4f}"
                  f"{times['python'] / times['compiled']:>8.1f}x{diff:>11.1e}")
        else:
            print(f"{name:<20}{steps:>7}{times['python']:>12.4f}{'-':>14}{'-':>9}{'-':>11}")


if __name__ == "__main__":
    main()
