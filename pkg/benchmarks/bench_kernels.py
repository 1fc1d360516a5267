#!/usr/bin/env python3
"""Time the eigenvalue kernels on the numba and numpy backends.

Matrices are discretised Hamiltonians of the tanh preset, so the timings
reflect the workload of ``pseudospec spectrum``.

    python benchmarks/bench_kernels.py --sizes 101 201 401 --repeat 3
"""

import argparse
import os
import time

import numpy as np

from pseudospec import _kernels
from pseudospec.eigen import eigenvalues
from pseudospec.grid import ComplexField, Grid
from pseudospec.linop import discretize_hamiltonian
from pseudospec.model import potential
from pseudospec.presets import preset_spec


def hamiltonian(n: int) -> np.ndarray:
    spec = preset_spec("example3")
    grid = Grid(-12.0, 12.0, n)
    return discretize_hamiltonian(ComplexField(grid, potential(spec, grid.x, grid.h)))


def time_stages(H: np.ndarray) -> dict[str, float]:
    a = np.array(H, dtype=np.complex128)
    out = {}
    t0 = time.perf_counter()
    _kernels.balance(a)
    out["balance"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    _kernels.hessenberg(a)
    out["hessenberg"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    _kernels.hqr(a)
    out["qr"] = time.perf_counter() - t0
    out["total"] = out["balance"] + out["hessenberg"] + out["qr"]
    return out


def run(backend: str, sizes, repeat: int) -> dict[int, dict[str, float]]:
    if backend == "numpy":
        os.environ["PSEUDOSPEC_DISABLE_NUMBA"] = "1"
    else:
        os.environ.pop("PSEUDOSPEC_DISABLE_NUMBA", None)
        eigenvalues(hamiltonian(11))  # JIT warm-up
    results = {}
    for n in sizes:
        H = hamiltonian(n)
        best = min((time_stages(H) for _ in range(repeat)), key=lambda r: r["total"])
        results[n] = best
        print(f"{backend:>6} n={n:<5} balance {best['balance']:8.3f}s  "
              f"hessenberg {best['hessenberg']:8.3f}s  qr {best['qr']:8.3f}s  "
              f"total {best['total']:8.3f}s", flush=True)
    return results


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[101, 201, 401])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)

    # the numpy path is slow, so it gets fewer repeats
    fast = run("numba", args.sizes, args.repeat)
    slow = run("numpy", args.sizes, max(1, args.repeat // 3))

    print()
    print(f"{'n':>6} {'numba':>10} {'numpy':>10} {'speedup':>8}")
    for n in args.sizes:
        a, b = fast[n]["total"], slow[n]["total"]
        print(f"{n:>6} {a:>9.3f}s {b:>9.3f}s {b / a:>7.1f}x")

    # both backends must agree on the spectrum
    H = hamiltonian(args.sizes[0])
    os.environ.pop("PSEUDOSPEC_DISABLE_NUMBA", None)
    w_fast = eigenvalues(H)
    os.environ["PSEUDOSPEC_DISABLE_NUMBA"] = "1"
    w_slow = eigenvalues(H)
    print(f"\nmax |numba - numpy| eigenvalue difference at n={args.sizes[0]}: "
          f"{np.abs(w_fast - w_slow).max():.2e}")


if __name__ == "__main__":
    main()
