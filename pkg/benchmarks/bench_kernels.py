"""Time the compiled and numpy kernel backends on the workloads the package runs.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints the best-of-``repeat`` wall time per backend and the speedup.
"""
import argparse
import timeit

import numpy as np

from ntoslab import kernels

AXIS = np.linspace(-4.0, 4.0, 161)
ENERGIES = np.linspace(-1.0, 1.0, 4001)
N_AXIS = np.arange(2.0, 120.0, 0.25)
E_AXIS = np.linspace(-0.4, 0.4, 321)

WORKLOADS = {
    "winding_grid 161x161": lambda: kernels.winding_grid(AXIS, AXIS, 1.0, 256),
    "charpoly_real N=80, 4001 E": lambda: kernels.charpoly_real(2.8, 1.5, 1.0, 1e-9, 1e-9, 80, ENERGIES),
    "log_delta_grid 472x321": lambda: kernels.log_delta_grid(2.5, 2.8, 1.0, 1e-5, N_AXIS, E_AXIS, True),
}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = kernels.available_backends()
    start = kernels.BACKEND
    print(f"backends: {', '.join(backends)}")
    print(f"{'workload':32s}" + "".join(f"{b:>12s}" for b in backends) + ("     speedup" if len(backends) == 2 else ""))
    for name, job in WORKLOADS.items():
        times = {}
        for backend in backends:
            kernels.use_backend(backend)
            job()  # warm up
            times[backend] = min(timeit.repeat(job, number=1, repeat=args.repeat))
        row = f"{name:32s}" + "".join(f"{times[b] * 1e3:10.2f}ms" for b in backends)
        if len(backends) == 2:
            row += f"{times['python'] / times['cython']:11.1f}x"
        print(row)
    kernels.use_backend(start)


if __name__ == "__main__":
    main()
