"""Micro-benchmarks for the hot kernels: JIT backend vs pure-numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from panowalk import _kernels_numpy as pure
from panowalk import walkability

try:
    from panowalk import _kernels_numba as jit
except ImportError:
    jit = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    rng = np.random.default_rng(5)
    img = rng.uniform(0, 255, size=(960, 1920, 3))
    us = rng.uniform(-10, 1930, size=(960, 1920))
    vs = rng.uniform(-10, 970, size=(960, 1920))
    yield "sample_bilinear 1920x960x3", lambda m: (lambda: m.sample_bilinear(img, us, vs))

    img8 = (img.astype(np.uint8))
    yield "sample_nearest 1920x960x3", lambda m: (lambda: m.sample_nearest(img8, us, vs))

    band = rng.uniform(0, 255, size=(128, 512))
    hole = np.zeros((128, 512), bool)
    hole[40:90, 100:400] = True
    yield "harmonic_fill 512x128", lambda m: (
        lambda: m.harmonic_fill(band.copy(), hole, 2000, 1e-3)
    )

    street = np.zeros((960, 1920), np.uint8)
    street[600:, :] = 1
    street[:, 400:900] = 1
    flat = street.reshape(-1)
    runs = pure.rle_encode(flat)
    yield "rle_encode 1.8 Mpx", lambda m: (lambda: m.rle_encode(flat))
    yield "rle_decode 1.8 Mpx", lambda m: (lambda: m.rle_decode(runs, flat.size))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    if jit is None:
        print("JIT backend unavailable; benchmarking the fallback only.")
    header = f"{'kernel':<28}{'numpy':>12}{'jit':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, make in cases():
        run_pure = make(pure)
        t_pure = best_of(run_pure, args.repeat)
        if jit is not None:
            run_jit = make(jit)
            run_jit()  # compile outside the timed region
            t_jit = best_of(run_jit, args.repeat)
            print(f"{name:<28}{t_pure * 1e3:>10.1f}ms{t_jit * 1e3:>10.1f}ms{t_pure / t_jit:>9.1f}x")
        else:
            print(f"{name:<28}{t_pure * 1e3:>10.1f}ms{'-':>12}{'-':>10}")

    # sanity: both backends agree on a round trip
    probe = np.random.default_rng(6).integers(0, 2, 4096, dtype=np.uint8)
    assert np.array_equal(pure.rle_decode(pure.rle_encode(probe), probe.size), probe)
    print("\nagreement probe: ok")


if __name__ == "__main__":
    main()
