"""Benchmark of the pairwise kernels: compiled extension vs numpy fallback."""

from __future__ import annotations

import time

import numpy as np

from varioscreen import kernels


def _time_it(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run_bench(sizes: list[int], repeats: int = 5) -> None:
    compiled = kernels._fastpath
    if compiled is None:
        print("compiled extension not available; showing numpy only")
    print(f"{'K':>6} {'pairs':>10} {'numpy':>12} {'compiled':>12} {'speedup':>8}")
    rng = np.random.Generator(np.random.Philox(key=7))
    for k in sizes:
        fixed = rng.uniform(0.0, 100.0, (k, 3))
        disp = rng.normal(0.0, 2.0, (k, 3))
        t_np = _time_it(
            lambda: kernels.pairwise_cloud_numpy(fixed, disp), repeats)
        row = f"{k:>6} {k * (k - 1) // 2:>10} {t_np * 1e3:>10.3f}ms"
        if compiled is not None:
            t_c = _time_it(
                lambda: compiled.pairwise_cloud(fixed, disp), repeats)
            row += f" {t_c * 1e3:>10.3f}ms {t_np / t_c:>7.2f}x"
            i1, j1, h1, e1 = kernels.pairwise_cloud_numpy(fixed, disp)
            i2, j2, h2, e2 = compiled.pairwise_cloud(fixed, disp)
            assert (h1 == h2).all() and (e1 == e2).all(), "backends disagree"
        print(row)


if __name__ == "__main__":
    run_bench([50, 200, 1000, 2000])
