"""Continuous wavelet transform of the composite signal and word prominence.

Mexican-hat (Ricker) mother wavelet over dyadic scales ``base * 2^(k/2)``.
The sampled kernel is mean-corrected so a constant input yields exactly zero
response, and each scale's coefficients are normalized by ``scale^(-1/2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..corpus import WordAlignment
from ..errors import ValidationError
from .tracks import FrameTrack

_TRUNCATE_SIGMAS = 5.0


@dataclass(frozen=True)
class Scalogram:
    """CWT coefficients over time x scale for one utterance."""

    coefficients: np.ndarray  # (n_scales, n_frames)
    scales_s: tuple[float, ...]
    frame_shift_s: float
    start_s: float

    def __post_init__(self):
        if list(self.scales_s) != sorted(set(self.scales_s)):
            raise ValidationError("scales must be strictly increasing")
        if not np.all(np.isfinite(self.coefficients)):
            raise ValidationError("scalogram contains non-finite coefficients")


def ricker_kernel(sigma_frames: float) -> np.ndarray:
    """Sampled Ricker wavelet, mean-corrected to kill DC response."""
    half = max(1, int(math.ceil(_TRUNCATE_SIGMAS * sigma_frames)))
    t = np.arange(-half, half + 1, dtype=np.float64)
    u = t / sigma_frames
    psi = (1.0 - u**2) * np.exp(-0.5 * u**2)
    return psi - psi.mean()


def mirror_pad(values: np.ndarray, pad: int) -> np.ndarray:
    """Reflect-pad without repeating the edge sample."""
    return np.pad(np.asarray(values, dtype=np.float64), pad, mode="reflect")


def cwt(signal: FrameTrack, n_scales: int = 12, base_scale_s: float = 0.02) -> Scalogram:
    """Mexican-hat CWT over dyadic scales of a frame track."""
    values = np.asarray(signal.values, dtype=np.float64)
    if len(values) < 8:
        raise ValidationError(f"signal too short for CWT ({len(values)} frames < 8)")
    scales = tuple(base_scale_s * 2.0 ** (k / 2.0) for k in range(n_scales))
    rows = []
    for scale_s in scales:
        sigma = scale_s / signal.frame_shift_s
        kernel = ricker_kernel(sigma)
        pad = (len(kernel) - 1) // 2
        padded = mirror_pad(values, pad)
        rows.append(kernels.correlate_valid(padded, kernel) * scale_s**-0.5)
    return Scalogram(
        coefficients=np.vstack(rows),
        scales_s=scales,
        frame_shift_s=signal.frame_shift_s,
        start_s=signal.start_s,
    )


def band_salience(scalogram: Scalogram, scale_band: tuple[float, float]) -> np.ndarray:
    """Sum of coefficient rows whose scale lies inside the band."""
    lo, hi = scale_band
    idx = [i for i, s in enumerate(scalogram.scales_s) if lo - 1e-12 <= s <= hi + 1e-12]
    if not idx:
        raise ValidationError(f"scale band [{lo}, {hi}] matches none of {scalogram.scales_s}")
    return scalogram.coefficients[idx].sum(axis=0)


def _frame_range(
    start_s: float, end_s: float, t0: float, shift: float, n: int
) -> tuple[int, int]:
    lo = int(math.ceil((start_s - t0) / shift - 1e-9))
    hi = int(math.floor((end_s - t0) / shift + 1e-9))
    lo = max(lo, 0)
    hi = min(hi, n - 1)
    if lo > hi:
        # interval narrower than one frame: use the nearest frame center
        center = (start_s + end_s) / 2.0
        nearest = min(max(int(round((center - t0) / shift)), 0), n - 1)
        return nearest, nearest
    return lo, hi


def word_prominence(
    scalogram: Scalogram,
    alignment: list[WordAlignment],
    scale_band: tuple[float, float] = (0.08, 0.6),
) -> list[tuple[int, float]]:
    """Continuous per-word prominence: band salience maximum inside the word."""
    salience = band_salience(scalogram, scale_band)
    n = len(salience)
    t0 = scalogram.start_s
    shift = scalogram.frame_shift_s
    extent_end = t0 + (n - 1) * shift
    out = []
    for i, w in enumerate(alignment):
        if w.end_s < t0 - shift or w.start_s > extent_end + shift:
            raise ValidationError(
                f"word {w.word!r} [{w.start_s}, {w.end_s}] outside signal extent "
                f"[{t0}, {extent_end}]"
            )
        lo, hi = _frame_range(w.start_s, w.end_s, t0, shift, n)
        out.append((i, float(np.max(salience[lo : hi + 1]))))
    return out
