"""Continuous word-prominence estimation from speech.

f0, energy and duration tracks are combined into a composite signal; a
Mexican-hat CWT over dyadic scales is integrated across the word-to-phrase
scale band and reduced to one continuous value per word.
"""
from .config import ProminenceConfig, parse_kv_file, prominence_config_from_kv
from .measures import (
    WordProsody,
    analyze_utterance,
    analyze_wav,
    load_prosody_csv,
    reindex_to_text_words,
    save_prosody_csv,
    word_measures,
)
from .tracks import (
    FrameTrack,
    combine_signals,
    duration_signal,
    extract_energy,
    extract_f0,
    interpolate_f0,
    normalized_tracks,
    read_wav_mono,
    semitone_scale,
    write_wav_mono,
    znorm,
)
from .wavelet import Scalogram, band_salience, cwt, mirror_pad, ricker_kernel, word_prominence

__all__ = [
    "ProminenceConfig",
    "parse_kv_file",
    "prominence_config_from_kv",
    "WordProsody",
    "analyze_utterance",
    "analyze_wav",
    "word_measures",
    "save_prosody_csv",
    "load_prosody_csv",
    "reindex_to_text_words",
    "FrameTrack",
    "extract_f0",
    "extract_energy",
    "duration_signal",
    "combine_signals",
    "interpolate_f0",
    "normalized_tracks",
    "semitone_scale",
    "znorm",
    "read_wav_mono",
    "write_wav_mono",
    "Scalogram",
    "cwt",
    "word_prominence",
    "band_salience",
    "ricker_kernel",
    "mirror_pad",
]
