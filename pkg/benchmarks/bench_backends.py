"""Compare the compiled kernels against the pure-Python fallback.

Times both engine paths on representative models and prints a table.
Run from the repo root:

    python benchmarks/bench_backends.py [--repeats 3]
"""

import argparse
import time

import numpy as np

from tlsbath.engine import IntegratorConfig, dp54
from tlsbath.model import ModelMatrices, initial_state

try:
    from tlsbath.engine import _kernels
except ImportError:
    _kernels = None


def make_model(rng, k, t1_min=0.05):
    dim = k + 2
    det = rng.uniform(-62.8, 62.8, k)
    om = rng.uniform(-0.3, 0.3, k)
    d0 = rng.uniform(0.01, 1.0, k)
    h = np.zeros((dim, dim), complex)
    h[1, 2:] = om
    h[2:, 1] = om
    h[np.arange(2, dim), np.arange(2, dim)] = det
    return ModelMatrices(dim=dim, hamiltonian=h, collapse_rates=d0**2 / t1_min)


def bench(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--horizon", type=float, default=100.0)
    args = parser.parse_args()

    if _kernels is None:
        print("compiled kernels unavailable; nothing to compare")
        return

    rng = np.random.default_rng(0)
    cfg = IntegratorConfig(horizon=args.horizon, output_points=500)
    grid = cfg.time_grid()

    print(f"{'case':<28}{'python':>12}{'compiled':>12}{'speedup':>10}")
    for k in (10, 50, 200):
        m = make_model(rng, k)
        a = -1j * m.hamiltonian[1:, 1:] - 0.5 * np.diag(
            m.rates_by_basis()[1:]
        ).astype(complex)
        y0 = initial_state("excited", m.dim).amplitude_vector()[1:]
        tp = bench(lambda: dp54.solve_linear(a, y0, grid, 1e-8, 1e-10), args.repeats)
        tc = bench(
            lambda: _kernels.solve_linear(a, y0, grid, 1e-8, 1e-10), args.repeats
        )
        print(f"{f'fast engine K={k}':<28}{tp:>11.3f}s{tc:>11.3f}s{tp / tc:>9.1f}x")

    for k in (5, 25):
        m = make_model(rng, k)
        rho0 = initial_state("excited", m.dim).rho
        rb = m.rates_by_basis()
        tp = bench(
            lambda: dp54.solve_lindblad(m.hamiltonian, rb, rho0, grid, 1e-8, 1e-10),
            args.repeats,
        )
        tc = bench(
            lambda: _kernels.solve_lindblad(m.hamiltonian, rb, rho0, grid, 1e-8, 1e-10),
            args.repeats,
        )
        print(f"{f'full engine K={k}':<28}{tp:>11.3f}s{tc:>11.3f}s{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
