"""Word surprisal from token log-probabilities.

Context for a target segment is built from up to N immediately preceding
segments of the same chapter (never crossing a chapter boundary; empty at
chapter starts).  Token surprisal is ``-logprob_e / ln 2`` bits; word bits are
the left-to-right sum over the tokens assigned to the word.

Token-to-word assignment: a token belongs to the word whose byte span
contains the token's span midpoint.  Punctuation tokens adjacent to a word
fall inside that word's whitespace-delimited span and therefore attach to it;
tokens whose midpoint lands between words (e.g. bare separator tokens) go to
an explicit orphan bucket so that token mass is never silently dropped.
"""
from __future__ import annotations

import csv
import math
from bisect import bisect_right
from dataclasses import dataclass
from pathlib import Path

from .corpus import CorpusManifest, Segment
from .errors import CoverageError, ValidationError
from .lm_backend import ScoredText, TokenLogProb, UnigramModel, unigram_surprisal
from .words import word_byte_spans

_LN2 = math.log(2.0)

DEFAULT_JOINER = " "


@dataclass(frozen=True)
class ContextSpec:
    """Number of preceding same-chapter segments to prepend."""

    n_segments: int

    def __post_init__(self):
        if self.n_segments < 0:
            raise ValidationError(f"n_segments must be >= 0, got {self.n_segments}")

    @property
    def variant(self) -> str:
        return f"sup_{self.n_segments}"


@dataclass(frozen=True)
class WordSurprisal:
    """One word occurrence under one (variant, model) configuration."""

    segment_id: str
    word_index: int
    word: str
    variant: str
    model_id: str
    bits: float
    n_tokens: int


@dataclass(frozen=True)
class OrphanBucket:
    """Target tokens assigned to no word (separator/punctuation-only tokens)."""

    token_indices: tuple[int, ...]
    bits: float


def build_context(
    manifest: CorpusManifest, segment_id: str, spec: ContextSpec, joiner: str = DEFAULT_JOINER
) -> tuple[str, str]:
    """Return (context_text, target_text) for a segment.

    The context is the joiner-separated concatenation of up to
    ``spec.n_segments`` segments immediately preceding the target within its
    chapter; fewer when the chapter start intervenes, empty at chapter start.
    """
    target = manifest.segment(segment_id)
    if spec.n_segments == 0:
        return "", target.text
    chapter = manifest.chapter(target.chapter_id)
    lo = max(0, target.order_index - spec.n_segments)
    preceding = [s.text for s in chapter if lo <= s.order_index < target.order_index]
    return joiner.join(preceding), target.text


def scored_request(
    manifest: CorpusManifest, segment_id: str, spec: ContextSpec, joiner: str = DEFAULT_JOINER
) -> tuple[str, int, int]:
    """Full text to score plus (context_char_len, target_base) byte offsets.

    ``context_char_len`` excludes the joiner, so tokenizers that attach a
    leading separator to the following token still classify the first target
    token as target; ``target_base`` is where target word spans start.
    """
    context, target = build_context(manifest, segment_id, spec, joiner)
    if not context:
        return target, 0, 0
    full = context + joiner + target
    ccl = len(context.encode("utf-8"))
    base = ccl + len(joiner.encode("utf-8"))
    return full, ccl, base


def target_word_spans(segment: Segment, target_base: int) -> list[tuple[str, int, int]]:
    """Byte spans of the target segment's whitespace-delimited words."""
    return [(w, target_base + s, target_base + e) for w, s, e in word_byte_spans(segment.text)]


def token_surprisal_bits(token: TokenLogProb) -> float:
    """Token surprisal in bits: -logprob_e / ln 2."""
    lp = token.logprob_e
    if lp is None:
        raise ValidationError(f"token {token.token_text!r} has no logprob")
    if lp > 0:
        raise ValidationError(f"token {token.token_text!r} has positive logprob {lp}")
    return -lp / _LN2


def aggregate_word_surprisal(
    scored: ScoredText,
    word_spans: list[tuple[str, int, int]],
    segment_id: str = "",
    variant: str = "",
) -> tuple[list[WordSurprisal], OrphanBucket]:
    """Sum token surprisal into per-word bits by midpoint containment.

    ``word_spans`` are (word, start, end) byte spans inside the target
    region.  Every target token lands either in exactly one word or in the
    orphan bucket; a word that attracts no scoreable token raises
    CoverageError.
    """
    starts = []
    prev_end = scored.context_char_len
    for word, s, e in word_spans:
        if s < scored.context_char_len:
            raise ValidationError(f"word {word!r} span starts inside the context region")
        if s < prev_end or e <= s:
            raise ValidationError(f"word {word!r} has an overlapping or empty span")
        prev_end = e
        starts.append(s)

    bits = [0.0] * len(word_spans)
    n_tokens = [0] * len(word_spans)
    orphan_indices: list[int] = []
    orphan_bits = 0.0

    for i, tok in enumerate(scored.tokens):
        s, e = tok.char_span
        if s < scored.context_char_len:
            continue
        mid = (s + e) / 2.0
        j = bisect_right(starts, mid) - 1
        if j >= 0 and word_spans[j][1] <= mid < word_spans[j][2]:
            if tok.logprob_e is not None:
                bits[j] += token_surprisal_bits(tok)
                n_tokens[j] += 1
        else:
            orphan_indices.append(i)
            if tok.logprob_e is not None:
                orphan_bits += token_surprisal_bits(tok)

    results = []
    for j, (word, s, e) in enumerate(word_spans):
        if n_tokens[j] == 0:
            raise CoverageError(
                f"word {word!r} (span {s}:{e}) in segment {segment_id!r} matched no scoreable token"
            )
        results.append(
            WordSurprisal(
                segment_id=segment_id,
                word_index=j,
                word=word,
                variant=variant,
                model_id=scored.model_id,
                bits=bits[j],
                n_tokens=n_tokens[j],
            )
        )
    return results, OrphanBucket(token_indices=tuple(orphan_indices), bits=orphan_bits)


def surprisal_table(
    manifest: CorpusManifest,
    scorer,
    specs: list[ContextSpec],
    model_id: str,
    unigram: UnigramModel | None = None,
    joiner: str = DEFAULT_JOINER,
) -> list[WordSurprisal]:
    """One row per (word occurrence x variant), in segment order.

    ``scorer`` is any backend exposing
    ``score(text, model_id, context_sentences, context_char_len)``.
    Unigram rows (variant ``unigram``, model_id ``unigram``) are added when a
    unigram model is supplied.
    """
    rows: list[WordSurprisal] = []
    for segment in manifest.segments:
        spans_cache: list[tuple[str, int, int]] | None = None
        for spec in specs:
            text, ccl, base = scored_request(manifest, segment.id, spec, joiner)
            scored = scorer.score(
                text, model_id=model_id, context_sentences=spec.n_segments, context_char_len=ccl
            )
            spans = target_word_spans(segment, base)
            words, _orphans = aggregate_word_surprisal(
                scored, spans, segment_id=segment.id, variant=spec.variant
            )
            rows.extend(words)
            spans_cache = spans
        if unigram is not None:
            spans = spans_cache or target_word_spans(segment, 0)
            for j, (word, _s, _e) in enumerate(spans):
                rows.append(
                    WordSurprisal(
                        segment_id=segment.id,
                        word_index=j,
                        word=word,
                        variant="unigram",
                        model_id="unigram",
                        bits=unigram_surprisal(word, unigram),
                        n_tokens=1,
                    )
                )
    return rows


# ---------------------------------------------------------------------------
# Table persistence
# ---------------------------------------------------------------------------

SURPRISAL_HEADER = ["segment_id", "word_index", "word", "variant", "model_id", "bits", "n_tokens"]


def save_surprisal_csv(rows: list[WordSurprisal], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SURPRISAL_HEADER)
        for r in rows:
            writer.writerow(
                [r.segment_id, r.word_index, r.word, r.variant, r.model_id, repr(r.bits), r.n_tokens]
            )


def load_surprisal_csv(path: str | Path) -> list[WordSurprisal]:
    rows: list[WordSurprisal] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            rows.append(
                WordSurprisal(
                    segment_id=rec["segment_id"],
                    word_index=int(rec["word_index"]),
                    word=rec["word"],
                    variant=rec["variant"],
                    model_id=rec["model_id"],
                    bits=float(rec["bits"]),
                    n_tokens=int(rec["n_tokens"]),
                )
            )
    return rows


def variant_key(variant: str, model_id: str) -> str:
    """Canonical single-string variant identifier used in joined records."""
    if variant == "unigram" or not model_id or model_id == "unigram":
        return variant
    return f"{model_id}:{variant}"
