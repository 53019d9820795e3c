"""Timing comparison of the two kernel backends.

Runs the hot paths (cyclic-Jacobi eigensolver, two-level gate application)
under SPINQEC_BACKEND=numpy and =numba and prints a small table.  Numba is
warmed up before timing so compilation is not counted.

    python3 benchmarks/bench_backends.py [--repeats 5] [--pulses 400]
"""

import argparse
import os
import time

import numpy as np

from spinqec.backend import ENV_FLAG, HAVE_NUMBA
from spinqec.linalg import hermitian_eigendecompose
from spinqec.register import QuditRegister, TOTAL_DIM, apply_gates, rotation


def random_hermitian(rng, dim):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (m + m.conj().T) / 2.0


def random_pulse_sequence(rng, n):
    axes = ("A", "B", "C")
    gates = []
    for _ in range(n):
        qudit = axes[rng.integers(0, 3)]
        lp, lq = rng.choice(8, size=2, replace=False)
        controls = []
        if rng.integers(0, 2):
            other = [a for a in axes if a != qudit][rng.integers(0, 2)]
            controls.append((other, int(rng.integers(0, 8))))
        gates.append(rotation(qudit, int(lp), int(lq),
                              float(rng.uniform(-np.pi, np.pi)), controls))
    return gates


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--pulses", type=int, default=400)
    parser.add_argument("--dims", type=int, nargs="+", default=[16, 20, 64])
    args = parser.parse_args()

    rng = np.random.default_rng(7)
    mats = {d: random_hermitian(rng, d) for d in args.dims}
    gates = random_pulse_sequence(rng, args.pulses)
    state = rng.normal(size=TOTAL_DIM) + 1j * rng.normal(size=TOTAL_DIM)
    state /= np.linalg.norm(state)

    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    if not HAVE_NUMBA:
        print("numba not importable; timing the numpy backend only")

    workloads = {f"eigh dim={d}": (lambda m=m: hermitian_eigendecompose(m))
                 for d, m in mats.items()}
    workloads[f"{args.pulses} pulses @ dim {TOTAL_DIM}"] = (
        lambda: apply_gates(QuditRegister(state.copy()), gates))

    results = {}
    for backend in backends:
        os.environ[ENV_FLAG] = backend
        for fn in workloads.values():
            fn()  # warm-up (numba compilation, caches)
        for name, fn in workloads.items():
            results[(backend, name)] = best_of(fn, args.repeats)
    os.environ.pop(ENV_FLAG, None)

    width = max(len(n) for n in workloads)
    header = f"{'workload':<{width}}  " + "".join(f"{b:>12}" for b in backends)
    if len(backends) == 2:
        header += f"{'speed-up':>12}"
    print(header)
    print("-" * len(header))
    for name in workloads:
        row = f"{name:<{width}}  "
        for backend in backends:
            row += f"{results[(backend, name)] * 1e3:>10.3f}ms"
        if len(backends) == 2:
            ratio = results[("numpy", name)] / results[("numba", name)]
            row += f"{ratio:>11.2f}x"
        print(row)


if __name__ == "__main__":
    main()
