"""Givenness distances and novelty normalization.

Each word occurrence gets the distance (in segments of running text) to its
previous occurrence: 0 for a repeat within the same segment, 1 for the
previous segment, and so on.  Occurrences with no prior mention inside the
lookback window are NOVEL; the NOVEL population defines the normalization
used to compare prominence and surprisal across givenness distances.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Hashable, Mapping

from .corpus import CorpusManifest
from .errors import ValidationError
from .words import normalize_word, split_words

RecordKey = tuple[str, int]  # (segment_id, word_index)

DEFAULT_LOOKBACK = 10


@dataclass(frozen=True)
class GivennessRecord:
    segment_id: str
    word_index: int
    word: str  # case-folded, punctuation-stripped
    distance: int | None  # None = NOVEL
    is_content: bool

    @property
    def key(self) -> RecordKey:
        return (self.segment_id, self.word_index)


def assign_distances(
    manifest: CorpusManifest,
    lookback_sentences: int = DEFAULT_LOOKBACK,
    reset_at_chapter: bool = True,
) -> list[GivennessRecord]:
    """Distance-to-previous-occurrence for every word of the running text.

    Punctuation-only chunks produce no record.  History never reaches into
    future text, and (by default) resets at chapter boundaries.
    """
    records: list[GivennessRecord] = []
    last_seen: dict[str, int] = {}  # word -> global running segment position
    prev_chapter: str | None = None
    for pos, seg in enumerate(manifest.segments):
        if reset_at_chapter and seg.chapter_id != prev_chapter:
            last_seen.clear()
            prev_chapter = seg.chapter_id
        for idx, raw in enumerate(split_words(seg.text)):
            word = normalize_word(raw)
            if not word:
                continue
            prior = last_seen.get(word)
            distance: int | None = None
            if prior is not None and pos - prior <= lookback_sentences:
                distance = pos - prior
            records.append(
                GivennessRecord(
                    segment_id=seg.id,
                    word_index=idx,
                    word=word,
                    distance=distance,
                    is_content=word not in manifest.stopword_lexicon,
                )
            )
            last_seen[word] = pos
    return records


def novelty_normalize(
    values: Mapping[Hashable, float], records: list[GivennessRecord]
) -> dict[Hashable, float]:
    """Z-score all values against the NOVEL population (population SD)."""
    novel = [
        values[r.key]
        for r in records
        if r.distance is None and r.key in values and math.isfinite(values[r.key])
    ]
    if len(novel) < 2:
        raise ValidationError(f"need >= 2 finite NOVEL values, got {len(novel)}")
    mean = sum(novel) / len(novel)
    sd = math.sqrt(sum((v - mean) ** 2 for v in novel) / len(novel))
    if sd == 0.0:
        raise ValidationError("NOVEL values have zero standard deviation")
    return {k: (v - mean) / sd for k, v in values.items()}


@dataclass(frozen=True)
class ProfileBucket:
    label: str  # "0".."10" or "NOVEL"
    mean: float | None
    count: int


def givenness_profile(
    normalized_values: Mapping[Hashable, float],
    records: list[GivennessRecord],
    max_distance: int = DEFAULT_LOOKBACK,
    content_only: bool = True,
) -> list[ProfileBucket]:
    """Mean normalized value and count per distance bucket (plus NOVEL)."""
    sums: dict[str, float] = {}
    counts: dict[str, int] = {}
    for r in records:
        if content_only and not r.is_content:
            continue
        if r.key not in normalized_values:
            continue
        label = "NOVEL" if r.distance is None else str(min(r.distance, max_distance))
        sums[label] = sums.get(label, 0.0) + normalized_values[r.key]
        counts[label] = counts.get(label, 0) + 1
    out = []
    for label in [str(d) for d in range(max_distance + 1)] + ["NOVEL"]:
        c = counts.get(label, 0)
        out.append(ProfileBucket(label=label, mean=(sums[label] / c) if c else None, count=c))
    return out


# ---------------------------------------------------------------------------
# Table persistence
# ---------------------------------------------------------------------------

GIVENNESS_HEADER = ["segment_id", "word_index", "word", "distance", "is_content"]


def save_givenness_csv(records: list[GivennessRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(GIVENNESS_HEADER)
        for r in records:
            writer.writerow(
                [
                    r.segment_id,
                    r.word_index,
                    r.word,
                    "NOVEL" if r.distance is None else r.distance,
                    int(r.is_content),
                ]
            )


def load_givenness_csv(path: str | Path) -> list[GivennessRecord]:
    records = []
    with open(path, encoding="utf-8", newline="") as fh:
        for rec in csv.DictReader(fh):
            records.append(
                GivennessRecord(
                    segment_id=rec["segment_id"],
                    word_index=int(rec["word_index"]),
                    word=rec["word"],
                    distance=None if rec["distance"] == "NOVEL" else int(rec["distance"]),
                    is_content=bool(int(rec["is_content"])),
                )
            )
    return records


def save_profile_csv(
    profiles: dict[str, list[ProfileBucket]], path: str | Path, count_from: str | None = None
) -> None:
    """Plot-ready profile table: one mean column per named value series.

    Column order follows the given dict order (e.g. prom, sup0, sup5); the
    shared count column comes from ``count_from`` (default: first series).
    """
    names = list(profiles)
    if not names:
        raise ValidationError("no profiles to save")
    count_from = count_from or names[0]
    labels = [b.label for b in profiles[names[0]]]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["distance"] + [f"mean_{n}" for n in names] + ["count"])
        for i, label in enumerate(labels):
            row: list[object] = [label]
            for n in names:
                bucket = profiles[n][i]
                row.append("" if bucket.mean is None else repr(bucket.mean))
            row.append(profiles[count_from][i].count)
            writer.writerow(row)
