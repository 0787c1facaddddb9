"""Frame-level signal tracks: f0, log-energy, duration, and their combination.

All tracks share one framing (25 ms window, 5 ms shift by default); a frame's
timestamp is the center of its analysis window.
"""
from __future__ import annotations

import math
import wave
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import kernels
from ..corpus import WordAlignment
from ..errors import ConfigError, ValidationError
from ..words import normalize_word
from .config import ProminenceConfig

_SILENT_PHONES = frozenset({"", "sil", "sp", "spn", "pau", "br"})


@dataclass(frozen=True)
class FrameTrack:
    """A sampled curve over analysis frames."""

    values: np.ndarray
    frame_shift_s: float
    start_s: float
    voiced_mask: np.ndarray | None = None

    def __post_init__(self):
        if self.frame_shift_s <= 0:
            raise ValidationError("frame_shift_s must be positive")
        if self.voiced_mask is not None and len(self.voiced_mask) != len(self.values):
            raise ValidationError("voiced_mask and values must have equal length")

    def __len__(self) -> int:
        return len(self.values)

    def times(self) -> np.ndarray:
        return self.start_s + np.arange(len(self.values)) * self.frame_shift_s

    def same_framing(self, other: "FrameTrack", tol: float = 1e-9) -> bool:
        return (
            len(self) == len(other)
            and abs(self.frame_shift_s - other.frame_shift_s) < tol
            and abs(self.start_s - other.start_s) < tol
        )


def read_wav_mono(path: str | Path) -> tuple[np.ndarray, int]:
    """Read 16-bit PCM mono WAV into float64 in [-1, 1]."""
    with wave.open(str(path), "rb") as wf:
        if wf.getnchannels() != 1:
            raise ValidationError(f"{path}: expected mono audio")
        if wf.getsampwidth() != 2:
            raise ValidationError(f"{path}: expected 16-bit PCM")
        sr = wf.getframerate()
        raw = wf.readframes(wf.getnframes())
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    return samples, sr


def write_wav_mono(path: str | Path, samples: np.ndarray, sr: int) -> None:
    clipped = np.clip(samples, -1.0, 1.0)
    pcm = np.round(clipped * 32767.0).astype("<i2")
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(sr)
        wf.writeframes(pcm.tobytes())


def _frame_signal(audio: np.ndarray, win: int, hop: int) -> np.ndarray:
    if len(audio) < win:
        return np.zeros((0, win))
    frames = np.lib.stride_tricks.sliding_window_view(audio, win)[::hop]
    return np.ascontiguousarray(frames, dtype=np.float64)


def _parabolic_refine(r: np.ndarray, lags: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sub-sample peak location/value via parabolic fit at integer lags."""
    rows = np.arange(len(lags))
    y0 = r[rows, lags - 1]
    y1 = r[rows, lags]
    y2 = r[rows, lags + 1]
    denom = y0 - 2.0 * y1 + y2
    delta = np.where(np.abs(denom) > 1e-300, 0.5 * (y0 - y2) / denom, 0.0)
    delta = np.clip(delta, -0.5, 0.5)
    val = y1 - 0.25 * (y0 - y2) * delta
    return lags + delta, val


def extract_f0(audio: np.ndarray, sr: int, cfg: ProminenceConfig | None = None) -> FrameTrack:
    """Autocorrelation pitch track with continuity-smoothed candidate selection.

    Per frame the unbiased normalized autocorrelation is peak-picked into up
    to ``n_candidates`` voiced candidates (parabolic lag refinement) plus an
    unvoiced candidate whose strength is the voicing threshold; the final
    path minimizes octave jumps and voicing flips.  Unvoiced frames carry
    value 0 and a False mask entry.
    """
    cfg = cfg or ProminenceConfig()
    if sr < 16000:
        raise ValidationError(f"sample rate {sr} < 16 kHz")
    if len(audio) == 0:
        raise ValidationError("empty audio")
    win = int(round(cfg.window_s * sr))
    hop = int(round(cfg.frame_shift_s * sr))
    if len(audio) < win:
        warnings.warn("audio shorter than one analysis window; empty f0 track")
        return FrameTrack(
            values=np.zeros(0),
            frame_shift_s=hop / sr,
            start_s=win / (2 * sr),
            voiced_mask=np.zeros(0, dtype=bool),
        )

    frames = _frame_signal(np.asarray(audio, dtype=np.float64), win, hop)
    n = frames.shape[0]
    lag_min = max(2, int(math.floor(sr / cfg.f0_max_hz)))
    max_lag = int(math.ceil(sr / cfg.f0_min_hz)) + 1
    if max_lag >= win - 1:
        raise ConfigError(f"f0_min_hz {cfg.f0_min_hz} too low for window of {win} samples")

    frame_peak = np.max(np.abs(frames), axis=1)
    global_peak = float(np.max(np.abs(audio)))
    centered = frames - frames.mean(axis=1, keepdims=True)

    r = kernels.autocorr_frames(centered, max_lag)
    # unbias the triangular taper, then normalize by lag-0 power
    taper = win - np.arange(max_lag + 1)
    r = r / taper
    r0 = r[:, 0].copy()
    valid = r0 > 1e-14
    r = np.where(valid[:, None], r / np.where(valid, r0, 1.0)[:, None], 0.0)

    k = cfg.n_candidates
    cand_freq = np.zeros((n, k + 1))
    cand_strength = np.full((n, k + 1), -1e9)
    cand_strength[:, 0] = cfg.voicing_threshold  # unvoiced candidate

    interior = r[:, 1:-1]
    is_peak = (interior > r[:, :-2]) & (interior >= r[:, 2:])
    lags_all = np.arange(1, max_lag)
    in_range = (lags_all >= lag_min) & (lags_all <= max_lag - 1)
    is_peak &= in_range[None, :]

    peak_vals = np.where(is_peak, interior, -np.inf)
    top = np.argsort(-peak_vals, axis=1)[:, :k]  # candidate lag-1 indices

    silent = frame_peak < cfg.silence_ratio * max(global_peak, 1e-12)
    for c in range(k):
        lag_idx = top[:, c] + 1
        vals = peak_vals[np.arange(n), top[:, c]]
        ok = np.isfinite(vals) & valid & ~silent
        if not np.any(ok):
            continue
        lag_ref, val_ref = _parabolic_refine(r, lag_idx)
        freq = np.where(ok, sr / np.maximum(lag_ref, 1e-9), 0.0)
        freq = np.where((freq >= cfg.f0_min_hz * 0.9) & (freq <= cfg.f0_max_hz * 1.1), freq, 0.0)
        ok &= freq > 0
        # prefer shorter lags so exact subharmonics of a tone lose the tie
        strength = val_ref - cfg.octave_cost * np.log2(
            np.maximum(lag_ref, 1.0) * cfg.f0_min_hz / sr * 2.0
        )
        cand_freq[:, c + 1] = np.where(ok, freq, 0.0)
        cand_strength[:, c + 1] = np.where(ok, strength, -1e9)

    path = kernels.viterbi_pitch(
        cand_freq, cand_strength, cfg.octave_jump_cost, cfg.voiced_unvoiced_cost
    )
    f0 = cand_freq[np.arange(n), path]
    voiced = f0 > 0
    return FrameTrack(
        values=f0,
        frame_shift_s=hop / sr,
        start_s=win / (2 * sr),
        voiced_mask=voiced,
    )


def extract_energy(audio: np.ndarray, sr: int, cfg: ProminenceConfig | None = None) -> FrameTrack:
    """Log RMS energy (dB) per frame, floored ``energy_floor_db`` below peak."""
    cfg = cfg or ProminenceConfig()
    if len(audio) == 0:
        raise ValidationError("empty audio")
    win = int(round(cfg.window_s * sr))
    hop = int(round(cfg.frame_shift_s * sr))
    frames = _frame_signal(np.asarray(audio, dtype=np.float64), win, hop)
    rms = np.sqrt(np.mean(frames**2, axis=1)) if len(frames) else np.zeros(0)
    peak = float(rms.max()) if len(rms) else 0.0
    if peak <= 0.0:
        values = np.zeros(len(rms))
    else:
        floor_db = 20.0 * math.log10(peak) - cfg.energy_floor_db
        with np.errstate(divide="ignore"):
            values = 20.0 * np.log10(np.where(rms > 0, rms, 1e-300))
        values = np.maximum(values, floor_db)
    return FrameTrack(values=values, frame_shift_s=hop / sr, start_s=win / (2 * sr))


def duration_signal(alignment: list[WordAlignment], framing: FrameTrack) -> FrameTrack:
    """Continuous duration curve sampled on an existing framing.

    Each non-silent phone contributes its duration (seconds) at its temporal
    center; values between centers are linear interpolations, edges extend.
    """
    centers = []
    durations = []
    for w in alignment:
        for p in w.phones:
            if normalize_word(p.label) in _SILENT_PHONES:
                continue
            centers.append((p.start_s + p.end_s) / 2.0)
            durations.append(p.end_s - p.start_s)
    if not centers:
        raise ValidationError("alignment contains no phones")
    order = np.argsort(centers)
    centers = np.asarray(centers)[order]
    durations = np.asarray(durations)[order]
    values = np.interp(framing.times(), centers, durations)
    return FrameTrack(values=values, frame_shift_s=framing.frame_shift_s, start_s=framing.start_s)


def interpolate_f0(track: FrameTrack) -> np.ndarray:
    """Fill unvoiced gaps linearly, edge-extending at utterance boundaries."""
    if track.voiced_mask is None:
        return np.asarray(track.values, dtype=np.float64).copy()
    mask = np.asarray(track.voiced_mask, dtype=bool)
    values = np.asarray(track.values, dtype=np.float64)
    if not mask.any():
        return np.zeros_like(values)
    idx = np.arange(len(values))
    return np.interp(idx, idx[mask], values[mask])


def semitone_scale(f0_hz: np.ndarray) -> np.ndarray:
    """Log-domain (semitone-like) pitch: 12 * log2(f0), zeros pass through."""
    safe = np.where(f0_hz > 0, f0_hz, 1.0)
    return 12.0 * np.log2(safe)


def znorm(values: np.ndarray) -> np.ndarray:
    """Utterance-level z-score; zero-variance input maps to zeros."""
    values = np.asarray(values, dtype=np.float64)
    sd = float(np.std(values))
    if sd < 1e-12:
        return np.zeros_like(values)
    return (values - float(np.mean(values))) / sd


def normalized_tracks(f0: FrameTrack, energy: FrameTrack) -> tuple[np.ndarray, np.ndarray]:
    """Utterance-normalized pitch (semitone z-units) and intensity (z-units)."""
    f0_z = znorm(semitone_scale(interpolate_f0(f0)))
    energy_z = znorm(np.asarray(energy.values, dtype=np.float64))
    return f0_z, energy_z


def combine_signals(
    f0: FrameTrack,
    energy: FrameTrack,
    dur: FrameTrack,
    weights: tuple[float, float, float] = (1.0, 1.0, 1.0),
) -> FrameTrack:
    """Weighted sum of the z-normalized tracks on the f0 framing."""
    if not f0.same_framing(energy):
        raise ValidationError("f0 and energy tracks must share framing")
    if not f0.same_framing(dur):
        dur_values = np.interp(f0.times(), dur.times(), np.asarray(dur.values, dtype=np.float64))
    else:
        dur_values = np.asarray(dur.values, dtype=np.float64)
    f0_z, energy_z = normalized_tracks(f0, energy)
    dur_z = znorm(dur_values)
    composite = weights[0] * f0_z + weights[1] * energy_z + weights[2] * dur_z
    return FrameTrack(values=composite, frame_shift_s=f0.frame_shift_s, start_s=f0.start_s)
