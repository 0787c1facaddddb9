"""Shared test utilities: synthetic corpora, audio, and scored-text factories."""
from __future__ import annotations

import hashlib
import math
from pathlib import Path

import numpy as np

from prosign.corpus import CorpusManifest, Phone, Segment, WordAlignment, chapter_of
from prosign.lm_backend import ScoredText, TokenLogProb
from prosign.prominence import write_wav_mono

SR = 22050


def make_manifest(rows: list[tuple[str, str]], stopwords: frozenset[str] = frozenset()) -> CorpusManifest:
    """Manifest from (segment_id, text) rows; ids must already be sorted."""
    segments = []
    prev_chapter = None
    order = 0
    for seg_id, text in rows:
        chap = chapter_of(seg_id)
        if chap != prev_chapter:
            prev_chapter = chap
            order = 0
        segments.append(
            Segment(id=seg_id, chapter_id=chap, order_index=order, text=text)
        )
        order += 1
    return CorpusManifest(segments=segments, stopword_lexicon=stopwords)


def make_scored(
    text: str,
    token_texts: list[str],
    logprobs: list[float | None],
    model_id: str = "m",
    context_sentences: int = 0,
    context_char_len: int = 0,
) -> ScoredText:
    """ScoredText with spans derived from the token texts (must tile text)."""
    tokens = []
    pos = 0
    for t, lp in zip(token_texts, logprobs):
        b = len(t.encode("utf-8"))
        tokens.append(TokenLogProb(token_text=t, logprob_e=lp, char_span=(pos, pos + b)))
        pos += b
    assert "".join(token_texts) == text, "token texts must reconstruct the text"
    return ScoredText(
        model_id=model_id,
        context_sentences=context_sentences,
        context_char_len=context_char_len,
        text=text,
        tokens=tuple(tokens),
    )


def simple_tokenize(text: str) -> list[str]:
    """Deterministic GPT-style toy tokenization: ' word' pieces split in two."""
    out = []
    for i, chunk in enumerate(text.split(" ")):
        piece = chunk if i == 0 else " " + chunk
        if len(piece) > 4:
            half = len(piece) // 2
            out.extend([piece[:half], piece[half:]])
        elif piece:
            out.append(piece)
    return out


def build_alignment(
    words: list[str],
    start_s: float = 0.12,
    seconds_per_char: float = 0.055,
    gap_s: float = 0.04,
) -> list[WordAlignment]:
    """Deterministic word/phone intervals: duration scales with word length."""
    out = []
    t = start_s
    for w in words:
        dur = max(0.12, seconds_per_char * max(len(w), 2))
        n_phones = max(1, math.ceil(len(w) / 2))
        step = dur / n_phones
        phones = tuple(
            Phone(label=w[2 * i : 2 * i + 2] or w[-1], start_s=t + i * step, end_s=t + (i + 1) * step)
            for i in range(n_phones)
        )
        out.append(WordAlignment(word=w, start_s=t, end_s=t + dur, phones=phones))
        t += dur + gap_s
    return out


def _seed_from(name: str) -> int:
    return int.from_bytes(hashlib.sha256(name.encode()).digest()[:4], "big")


def synth_utterance(alignment: list[WordAlignment], sr: int = SR, seed_name: str = "seg") -> np.ndarray:
    """Speech-like synthetic audio matching an alignment.

    Each word is a harmonic complex with a word-specific f0 contour and
    amplitude; gaps between words are near-silent.  Deterministic given the
    seed name.
    """
    rng = np.random.default_rng(_seed_from(seed_name))
    total = alignment[-1].end_s + 0.15
    n = int(total * sr)
    t = np.arange(n) / sr
    audio = np.zeros(n)
    for w in alignment:
        f0 = 140.0 + 80.0 * rng.random()
        drift = 30.0 * (rng.random() - 0.5)
        amp = 0.25 + 0.5 * rng.random()
        i0, i1 = int(w.start_s * sr), min(int(w.end_s * sr), n)
        seg_t = t[i0:i1] - w.start_s
        dur = max(w.end_s - w.start_s, 1e-3)
        inst_f0 = f0 + drift * seg_t / dur
        phase = 2 * np.pi * np.cumsum(inst_f0) / sr
        wave = np.sin(phase) + 0.5 * np.sin(2 * phase) + 0.25 * np.sin(3 * phase)
        env = np.minimum(1.0, np.minimum(seg_t, dur - seg_t) / 0.03)
        audio[i0:i1] += amp * env * wave / 1.75
    audio += 1e-4 * rng.standard_normal(n)
    peak = np.max(np.abs(audio))
    return 0.8 * audio / peak if peak > 0 else audio


def fake_scored_records(manifest, contexts, model_id="m", joiner=" "):
    """Offline scored records covering every (segment x context) request."""
    from prosign.surprisal import ContextSpec, scored_request
    from stub_server import fake_score

    records = []
    seen = set()
    for seg in manifest.segments:
        for k in contexts:
            text, ccl, _ = scored_request(manifest, seg.id, ContextSpec(k), joiner)
            key = (model_id, k, text)
            if key in seen:
                continue
            seen.add(key)
            records.append(ScoredText.from_json_obj(fake_score(model_id, text, k, ccl)))
    return records


def write_corpus_tree(
    root: Path, rows: list[tuple[str, str]], with_audio: bool = True
) -> tuple[Path, Path, Path]:
    """Write metadata + alignments (+ audio) for (id, text) rows under root."""
    import json

    root.mkdir(parents=True, exist_ok=True)
    audio_dir = root / "wavs"
    align_dir = root / "alignments"
    audio_dir.mkdir(exist_ok=True)
    align_dir.mkdir(exist_ok=True)
    metadata = root / "metadata.txt"
    with open(metadata, "w", encoding="utf-8") as fh:
        for seg_id, text in rows:
            fh.write(f"{seg_id}|{text}|{text}\n")
    for seg_id, text in rows:
        words = text.split()
        alignment = build_alignment(words)
        doc = {
            "words": [
                {
                    "word": w.word,
                    "start": round(w.start_s, 4),
                    "end": round(w.end_s, 4),
                    "phones": [
                        {"label": p.label, "start": round(p.start_s, 4), "end": round(p.end_s, 4)}
                        for p in w.phones
                    ],
                }
                for w in alignment
            ]
        }
        (align_dir / f"{seg_id}.json").write_text(json.dumps(doc), encoding="utf-8")
        if with_audio:
            audio = synth_utterance(alignment, SR, seed_name=seg_id)
            write_wav_mono(audio_dir / f"{seg_id}.wav", audio, SR)
    return metadata, audio_dir, align_dir
