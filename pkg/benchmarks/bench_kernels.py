#!/usr/bin/env python3
"""Compare the numba and pure-numpy kernel backends.

Times the two hot kernels (batched correlation quadrature and table
interpolation) plus one end-to-end block-rate evaluation, under whichever
backend this process runs.  Run it twice to get both columns:

    python benchmarks/bench_kernels.py
    AFTN_NOMA_BACKEND=numpy python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from aftn_noma import BlockRateEngine, CorrTable, FtnConfig, PulseParams, backend
from aftn_noma import _kernels
from aftn_noma.pulse import spectrum_quad_nodes


def timeit(fn, repeat=5):
    fn()  # warm-up (includes jit compilation)
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    p = PulseParams(beta=0.3)
    rng = np.random.default_rng(0)

    freqs, sw = spectrum_quad_nodes(p, 8192)
    x = rng.uniform(0.0, 100.0, 20_000)
    t_quad = timeit(lambda: _kernels.corr_quad_batch(x, freqs, sw))

    table = CorrTable(p, x_max=110.0)
    xl = rng.uniform(0.0, 100.0, 200_000)
    t_interp = timeit(lambda: table(xl))

    z = FtnConfig(0.75)
    engine = BlockRateEngine(p, z, 100, table)
    gains = np.sort(rng.uniform(0.01, 1.0, 8))[::-1]
    es = np.full(8, 40.0)
    delays = rng.uniform(0.0, 2.0, 8)

    def block_rates():
        engine.mutual_information(gains, es, engine.products(delays))

    t_block = timeit(block_rates, repeat=3)

    print(f"backend: {backend()}")
    print(f"{'kernel':<42}{'best time':>12}")
    print("-" * 54)
    print(f"{'correlation quadrature (20k lags x 4097f)':<42}{t_quad * 1e3:>10.1f} ms")
    print(f"{'table interpolation (200k lags)':<42}{t_interp * 1e3:>10.1f} ms")
    print(f"{'block rates (K=8, N=100, one draw)':<42}{t_block * 1e3:>10.1f} ms")


if __name__ == "__main__":
    main()
