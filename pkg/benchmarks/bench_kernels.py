#!/usr/bin/env python3
"""Benchmark the compiled kernels against the NumPy reference.

Run after `pip install -e .`:

    python3 benchmarks/bench_kernels.py

The workload mirrors a 10 s utterance at the default analysis settings
(2000 frames, 551-sample window, 221 lags; 12 CWT scales).
"""
from __future__ import annotations

import time

import numpy as np

from prosign.kernels import reference

try:
    from prosign import _accel
except ImportError:
    _accel = None


def timeit(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rng = np.random.default_rng(0)

    frames = rng.normal(size=(2000, 551))
    max_lag = 221

    signal = rng.normal(size=2000)
    kernels_by_scale = []
    for k in range(12):
        scale = 0.02 * 2 ** (k / 2) / 0.005
        half = int(np.ceil(5 * scale))
        t = np.arange(-half, half + 1) / scale
        psi = (1 - t**2) * np.exp(-0.5 * t**2)
        kernels_by_scale.append(psi - psi.mean())

    freqs = rng.uniform(80, 400, size=(2000, 5))
    freqs[:, 0] = 0
    strengths = rng.uniform(0, 1, size=(2000, 5))

    def cwt_all(impl):
        for psi in kernels_by_scale:
            pad = (len(psi) - 1) // 2
            padded = np.pad(signal, pad, mode="reflect")
            impl.correlate_valid(padded, psi)

    cases = [
        ("autocorr_frames (2000x551, 221 lags)", lambda impl: impl.autocorr_frames(frames, max_lag)),
        ("cwt correlate (12 scales, 2000 frames)", cwt_all),
        ("viterbi_pitch (2000 frames, 5 cands)", lambda impl: impl.viterbi_pitch(freqs, strengths, 0.35, 0.14)),
    ]

    print(f"{'kernel':<42}{'numpy-reference':>18}{'cython':>12}{'speedup':>10}")
    for name, fn in cases:
        t_ref = timeit(lambda: fn(reference))
        if _accel is not None:
            t_acc = timeit(lambda: fn(_accel))
            print(f"{name:<42}{t_ref * 1e3:>15.1f} ms{t_acc * 1e3:>9.1f} ms{t_ref / t_acc:>9.1f}x")
        else:
            print(f"{name:<42}{t_ref * 1e3:>15.1f} ms{'n/a':>12}{'':>10}")
    if _accel is None:
        print("\ncompiled extension not available; showing reference timings only")


if __name__ == "__main__":
    main()
