#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure numpy fallback.

Run:  python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from retime.kernels import _pure

try:
    from retime.kernels import _fast
except ImportError:
    _fast = None


def timeit(fn, *args, repeat=5, min_time=0.2):
    # warm up, then run enough iterations to fill min_time
    fn(*args)
    n = 1
    while True:
        start = time.perf_counter()
        for _ in range(n):
            fn(*args)
        elapsed = time.perf_counter() - start
        if elapsed >= min_time:
            return elapsed / n
        n = max(n * 2, int(n * min_time / max(elapsed, 1e-9)))


def bench(name, args_fn):
    args = args_fn()
    t_pure = timeit(getattr(_pure, name), *args)
    row = f"{name:20s} pure {t_pure * 1e3:9.3f} ms"
    if _fast is not None:
        t_fast = timeit(getattr(_fast, name), *args)
        row += f"   fast {t_fast * 1e3:9.3f} ms   speedup {t_pure / t_fast:5.2f}x"
        out_p = getattr(_pure, name)(*args)
        out_f = getattr(_fast, name)(*args)
        assert np.array_equal(out_p, out_f), f"{name}: backends disagree"
    print(row)


def main():
    rng = np.random.default_rng(0)
    print(f"compiled extension available: {_fast is not None}\n")

    # index plans for a long clip
    bench("eq1_indices", lambda: (250, 64, 1.7))

    # temporal blend of a 250-frame 224x224x3 clip down to 64 frames
    frames = rng.uniform(0, 255, size=(250, 224 * 224 * 3))
    positions = np.linspace(1, 250, 64)
    bench("linear_resample", lambda: (frames, positions))

    # one 480x640 frame resized to min-side 256
    img = rng.uniform(0, 255, size=(480, 640, 3))
    bench("bilinear_resize", lambda: (img, 256, 341))

    if _fast is not None:
        print("\nbackends agree bit-for-bit on all benchmarked calls")


if __name__ == "__main__":
    main()
