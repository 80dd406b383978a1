"""Time the numba episode kernels against the NumPy fallback.

    python benchmarks/bench_kernels.py [--horizon 20000] [--cap 100] [--repeat 5]

Both paths are checked for identical regret and pull traces before timing.
"""

import argparse
import time

import numpy as np

from blmab import kernels
from blmab._accel import USE_NUMBA
from blmab.arrivals import TailModel, build_instance


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--horizon", type=int, default=20_000)
    ap.add_argument("--cap", type=int, default=100)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not USE_NUMBA:
        raise SystemExit("numba disabled (BLMAB_DISABLE_NUMBA set or numba missing); nothing to compare")

    T, cap = args.horizon, min(args.cap, args.horizon)
    rng = np.random.default_rng(0)
    inst = build_instance(TailModel("subpareto", T, 0.5), rng)
    u = rng.random(T)
    bonus = kernels.moss_bonus_table(T, cap)
    p_jit = np.empty(T, dtype=np.int64)
    p_np = np.empty(T, dtype=np.int64)

    cases = {
        "blmoss": (
            lambda p: kernels.capped_moss_jit(inst.arrival, inst.quality, u, T, cap, cap, False, p, bonus),
            lambda p: kernels.capped_moss_numpy(inst.arrival, inst.quality, u, T, cap, cap, False, p, bonus),
        ),
        "ucb1": (
            lambda p: kernels.ucb1_jit(inst.arrival, inst.quality, u, T, p),
            lambda p: kernels.ucb1_numpy(inst.arrival, inst.quality, u, T, p),
        ),
    }
    print(f"T={T} cap={cap}")
    print(f"{'kernel':<8} {'numba [ms]':>11} {'numpy [ms]':>11} {'speedup':>8}")
    for name, (fast, slow) in cases.items():
        r_jit, r_np = fast(p_jit), slow(p_np)  # also triggers compilation
        assert r_jit == r_np and np.array_equal(p_jit, p_np), name
        t_jit = _time(lambda: fast(p_jit), args.repeat)
        t_np = _time(lambda: slow(p_np), max(1, args.repeat // 2))
        print(f"{name:<8} {1e3 * t_jit:>11.2f} {1e3 * t_np:>11.2f} {t_np / t_jit:>7.0f}x")


if __name__ == "__main__":
    main()
