"""Word-level prosodic measures and the per-utterance analysis entry point."""
from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping

import numpy as np

from ..corpus import WordAlignment
from ..errors import ValidationError
from .config import ProminenceConfig
from .tracks import (
    FrameTrack,
    combine_signals,
    duration_signal,
    extract_energy,
    extract_f0,
    normalized_tracks,
    read_wav_mono,
)
from .wavelet import _frame_range, cwt, word_prominence


@dataclass(frozen=True)
class WordProsody:
    """Signal-based word measures in utterance-normalized units."""

    segment_id: str
    word_index: int
    word: str
    prominence: float
    duration_s: float
    f0_mean: float
    f0_sd: float
    intensity_mean: float
    intensity_sd: float
    voiced_flag: bool = True


def word_measures(
    f0: FrameTrack,
    energy: FrameTrack,
    alignment: list[WordAlignment],
    prominences: Mapping[int, float] | None = None,
    segment_id: str = "",
) -> list[WordProsody]:
    """Per-word duration, pitch and intensity statistics.

    Pitch statistics are taken over voiced frames inside the word on the
    normalized semitone-domain track; words with no voiced frame fall back to
    the gap-interpolated track and are flagged.
    """
    if not f0.same_framing(energy):
        raise ValidationError("f0 and energy tracks must share framing")
    if len(f0) == 0:
        raise ValidationError("empty tracks")
    f0_z, energy_z = normalized_tracks(f0, energy)
    voiced = (
        np.asarray(f0.voiced_mask, dtype=bool)
        if f0.voiced_mask is not None
        else np.ones(len(f0), dtype=bool)
    )
    prominences = prominences or {}
    n = len(f0)
    out = []
    for i, w in enumerate(alignment):
        lo, hi = _frame_range(w.start_s, w.end_s, f0.start_s, f0.frame_shift_s, n)
        sl = slice(lo, hi + 1)
        word_voiced = voiced[sl]
        if word_voiced.any():
            pitch_vals = f0_z[sl][word_voiced]
            flag = True
        else:
            pitch_vals = f0_z[sl]
            flag = False
        intensity_vals = energy_z[sl]
        out.append(
            WordProsody(
                segment_id=segment_id,
                word_index=i,
                word=w.word,
                prominence=float(prominences.get(i, 0.0)),
                duration_s=w.end_s - w.start_s,
                f0_mean=float(np.mean(pitch_vals)),
                f0_sd=float(np.std(pitch_vals)),
                intensity_mean=float(np.mean(intensity_vals)),
                intensity_sd=float(np.std(intensity_vals)),
                voiced_flag=flag,
            )
        )
    return out


def analyze_utterance(
    audio: np.ndarray,
    sr: int,
    alignment: list[WordAlignment],
    cfg: ProminenceConfig | None = None,
    segment_id: str = "",
) -> list[WordProsody]:
    """Full per-utterance prominence pipeline: tracks -> CWT -> word measures."""
    cfg = cfg or ProminenceConfig()
    if not alignment:
        raise ValidationError(f"segment {segment_id!r}: empty alignment")
    f0 = extract_f0(audio, sr, cfg)
    if len(f0) == 0:
        raise ValidationError(f"segment {segment_id!r}: audio shorter than one analysis window")
    energy = extract_energy(audio, sr, cfg)
    dur = duration_signal(alignment, f0)
    composite = combine_signals(f0, energy, dur, cfg.weights)
    scalogram = cwt(composite, cfg.n_scales, cfg.base_scale_s)
    prom = dict(word_prominence(scalogram, alignment, (cfg.scale_band_lo_s, cfg.scale_band_hi_s)))
    return word_measures(f0, energy, alignment, prominences=prom, segment_id=segment_id)


def analyze_wav(
    wav_path: str | Path,
    alignment: list[WordAlignment],
    cfg: ProminenceConfig | None = None,
    segment_id: str = "",
) -> list[WordProsody]:
    audio, sr = read_wav_mono(wav_path)
    return analyze_utterance(audio, sr, alignment, cfg, segment_id=segment_id)


# ---------------------------------------------------------------------------
# Table persistence
# ---------------------------------------------------------------------------

PROSODY_HEADER = [
    "segment_id",
    "word_index",
    "word",
    "prominence",
    "duration_s",
    "f0_mean",
    "f0_sd",
    "int_mean",
    "int_sd",
    "voiced_flag",
]


def save_prosody_csv(rows: list[WordProsody], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PROSODY_HEADER)
        for r in rows:
            writer.writerow(
                [
                    r.segment_id,
                    r.word_index,
                    r.word,
                    repr(r.prominence),
                    repr(r.duration_s),
                    repr(r.f0_mean),
                    repr(r.f0_sd),
                    repr(r.intensity_mean),
                    repr(r.intensity_sd),
                    int(r.voiced_flag),
                ]
            )


def load_prosody_csv(path: str | Path) -> list[WordProsody]:
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(
                WordProsody(
                    segment_id=rec["segment_id"],
                    word_index=int(rec["word_index"]),
                    word=rec["word"],
                    prominence=float(rec["prominence"]),
                    duration_s=float(rec["duration_s"]),
                    f0_mean=float(rec["f0_mean"]),
                    f0_sd=float(rec["f0_sd"]),
                    intensity_mean=float(rec["int_mean"]),
                    intensity_sd=float(rec["int_sd"]),
                    voiced_flag=bool(int(rec["voiced_flag"])),
                )
            )
    return rows


def reindex_to_text_words(
    rows: list[WordProsody], pairs: Mapping[int, int], words: Mapping[int, str]
) -> list[WordProsody]:
    """Map alignment-side word indices to text-side indices after matching.

    ``pairs`` maps alignment index -> text word index; unmatched alignment
    words are dropped (they have no text-side record to join with).
    """
    out = []
    for r in rows:
        if r.word_index not in pairs:
            continue
        tw = pairs[r.word_index]
        out.append(replace(r, word_index=tw, word=words.get(tw, r.word)))
    out.sort(key=lambda r: r.word_index)
    return out
