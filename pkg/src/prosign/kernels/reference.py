"""Pure-NumPy reference implementations of the hot kernels.

The compiled twin in ``prosign._accel`` computes the same quantities with
direct loops; both must agree to floating-point reassociation tolerance.
"""
from __future__ import annotations

import numpy as np

IMPL_NAME = "numpy-reference"


def autocorr_frames(frames: np.ndarray, max_lag: int) -> np.ndarray:
    """Raw autocorrelation r[i, l] = sum_j frames[i, j] * frames[i, j + l].

    ``frames`` is (n_frames, window); returns (n_frames, max_lag + 1).
    FFT-based: r = irfft(|rfft(x)|^2) with zero padding past window+max_lag.
    """
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 2:
        raise ValueError("frames must be 2-D")
    window = frames.shape[1]
    if not 0 <= max_lag < window:
        raise ValueError(f"max_lag {max_lag} out of range for window {window}")
    nfft = 1
    while nfft < window + max_lag + 1:
        nfft *= 2
    spec = np.fft.rfft(frames, n=nfft, axis=1)
    corr = np.fft.irfft(spec * np.conj(spec), n=nfft, axis=1)
    return np.ascontiguousarray(corr[:, : max_lag + 1])


def correlate_valid(signal: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Sliding dot product (no kernel flip), 'valid' extent."""
    signal = np.asarray(signal, dtype=np.float64)
    kernel = np.asarray(kernel, dtype=np.float64)
    if len(kernel) > len(signal):
        raise ValueError("kernel longer than signal")
    return np.correlate(signal, kernel, mode="valid")


def viterbi_pitch(
    freqs: np.ndarray,
    strengths: np.ndarray,
    octave_cost: float,
    vu_cost: float,
) -> np.ndarray:
    """Best candidate index per frame under a continuity penalty.

    ``freqs``/``strengths`` are (n_frames, n_candidates); frequency 0 marks
    the unvoiced candidate.  The path maximizes the summed strengths minus
    transition costs: ``vu_cost`` for a voiced/unvoiced switch and
    ``octave_cost * |log2(f1 / f2)|`` between voiced frames.
    """
    freqs = np.asarray(freqs, dtype=np.float64)
    strengths = np.asarray(strengths, dtype=np.float64)
    n, k = freqs.shape
    if n == 0:
        return np.zeros(0, dtype=np.int64)

    back = np.zeros((n, k), dtype=np.int64)
    score = strengths[0].copy()
    voiced = freqs > 0

    for t in range(1, n):
        f_prev = freqs[t - 1]
        f_cur = freqs[t]
        v_prev = voiced[t - 1][:, None]  # (k, 1)
        v_cur = voiced[t][None, :]  # (1, k)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.abs(np.log2(f_prev[:, None]) - np.log2(f_cur[None, :]))
        trans = np.where(
            v_prev & v_cur,
            octave_cost * ratio,
            np.where(v_prev ^ v_cur, vu_cost, 0.0),
        )
        total = score[:, None] - trans  # (k_prev, k_cur)
        back[t] = np.argmax(total, axis=0)
        score = total[back[t], np.arange(k)] + strengths[t]

    path = np.zeros(n, dtype=np.int64)
    path[-1] = int(np.argmax(score))
    for t in range(n - 1, 0, -1):
        path[t - 1] = back[t, path[t]]
    return path
