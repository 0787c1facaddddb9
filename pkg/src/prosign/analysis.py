"""Joined word records and the correlation / scatter analyses.

The correlation grid reports Spearman's rho per (surprisal variant x
prosodic measure x word group), with word groups "all", "stop" and
"content".  Cells with fewer than three complete pairs are undefined and
reported with an empty rho.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import CorpusManifest
from .errors import JoinError, ValidationError
from .givenness import GivennessRecord
from .prominence import WordProsody
from .stats import spearman_or_none
from .surprisal import WordSurprisal, variant_key
from .words import normalize_word

MEASURES = ("prominence", "duration", "f0-mean", "f0-sd", "intensity-mean", "intensity-sd")
GROUPS = ("all", "stop", "content")

_MEASURE_ATTR = {
    "prominence": "prominence",
    "duration": "duration_s",
    "f0-mean": "f0_mean",
    "f0-sd": "f0_sd",
    "intensity-mean": "intensity_mean",
    "intensity-sd": "intensity_sd",
}


@dataclass(frozen=True)
class WordRecord:
    """One word occurrence with every joined quantity."""

    segment_id: str
    word_index: int
    word: str
    is_stopword: bool
    surprisal: dict[str, float]  # variant key -> bits
    prosody: WordProsody
    givenness: GivennessRecord | None = None

    @property
    def key(self) -> tuple[str, int]:
        return (self.segment_id, self.word_index)

    def measure(self, name: str) -> float:
        return getattr(self.prosody, _MEASURE_ATTR[name])


@dataclass(frozen=True)
class JoinReport:
    joined: int
    surprisal_total: int
    prosody_total: int
    givenness_total: int
    surprisal_dropped: int
    prosody_dropped: int


@dataclass(frozen=True)
class CorrelationCell:
    variant: str
    measure: str
    group: str
    rho: float | None
    n: int


@dataclass(frozen=True)
class CorrelationReport:
    entries: tuple[CorrelationCell, ...]

    def cell(self, variant: str, measure: str, group: str) -> CorrelationCell:
        for e in self.entries:
            if (e.variant, e.measure, e.group) == (variant, measure, group):
                return e
        raise LookupError(f"no cell ({variant}, {measure}, {group})")


def join_records(
    surprisal_rows: Iterable[WordSurprisal],
    prosody_rows: Iterable[WordProsody],
    givenness_rows: Iterable[GivennessRecord],
    manifest: CorpusManifest,
    loss_threshold: float = 0.05,
) -> tuple[list[WordRecord], JoinReport]:
    """Inner join of the three word tables on (segment_id, word_index).

    Join losses are counted per table; losing more than ``loss_threshold`` of
    either required table aborts.
    """
    surprisal: dict[tuple[str, int], dict[str, float]] = {}
    words: dict[tuple[str, int], str] = {}
    n_surprisal_rows = 0
    for row in surprisal_rows:
        n_surprisal_rows += 1
        key = (row.segment_id, row.word_index)
        vk = variant_key(row.variant, row.model_id)
        per_word = surprisal.setdefault(key, {})
        if vk in per_word:
            raise ValidationError(f"duplicate surprisal key {key} variant {vk!r}")
        per_word[vk] = row.bits
        words[key] = row.word

    prosody: dict[tuple[str, int], WordProsody] = {}
    for row in prosody_rows:
        key = (row.segment_id, row.word_index)
        if key in prosody:
            raise ValidationError(f"duplicate prosody key {key}")
        prosody[key] = row

    givenness: dict[tuple[str, int], GivennessRecord] = {}
    for row in givenness_rows:
        if row.key in givenness:
            raise ValidationError(f"duplicate givenness key {row.key}")
        givenness[row.key] = row

    for seg_id, word_index in list(surprisal) + list(prosody):
        segment = manifest.segment(seg_id)  # raises LookupError for unknown segments
        if word_index >= len(segment.text.split()):
            raise ValidationError(
                f"word_index {word_index} out of range for segment {seg_id!r}"
            )

    joined_keys = sorted(set(surprisal) & set(prosody))
    records = []
    for key in joined_keys:
        word = words[key]
        records.append(
            WordRecord(
                segment_id=key[0],
                word_index=key[1],
                word=word,
                is_stopword=manifest.is_stopword(word),
                surprisal=surprisal[key],
                prosody=prosody[key],
                givenness=givenness.get(key),
            )
        )

    report = JoinReport(
        joined=len(records),
        surprisal_total=len(surprisal),
        prosody_total=len(prosody),
        givenness_total=len(givenness),
        surprisal_dropped=len(surprisal) - len(records),
        prosody_dropped=len(prosody) - len(records),
    )
    for name, dropped, total in (
        ("surprisal", report.surprisal_dropped, report.surprisal_total),
        ("prosody", report.prosody_dropped, report.prosody_total),
    ):
        if total and dropped / total > loss_threshold:
            raise JoinError(
                f"{name} table lost {dropped}/{total} rows in the join "
                f"(threshold {loss_threshold:.0%})"
            )
    return records, report


def spearman_rho(x: Sequence[float], y: Sequence[float]) -> float | None:
    """Spearman correlation (midranks for ties); None when undefined."""
    return spearman_or_none(np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64))


def _group_records(records: list[WordRecord], group: str) -> list[WordRecord]:
    if group == "all":
        return records
    if group == "stop":
        return [r for r in records if r.is_stopword]
    if group == "content":
        return [r for r in records if not r.is_stopword]
    raise ValidationError(f"unknown group {group!r}")


def correlation_grid(
    records: list[WordRecord],
    variants: Sequence[str] | None = None,
    measures: Sequence[str] = MEASURES,
    groups: Sequence[str] = GROUPS,
) -> CorrelationReport:
    """Spearman's rho per (variant, measure, group) with pairwise deletion."""
    if variants is None:
        variants = sorted({vk for r in records for vk in r.surprisal})
    for m in measures:
        if m not in _MEASURE_ATTR:
            raise ValidationError(f"unknown measure {m!r}")
    cells = []
    for variant in variants:
        for measure in measures:
            for group in groups:
                xs, ys = [], []
                for r in _group_records(records, group):
                    if variant not in r.surprisal:
                        continue
                    x = r.surprisal[variant]
                    y = r.measure(measure)
                    if math.isfinite(x) and math.isfinite(y):
                        xs.append(x)
                        ys.append(y)
                rho = spearman_rho(xs, ys) if len(xs) >= 3 else None
                cells.append(
                    CorrelationCell(variant=variant, measure=measure, group=group, rho=rho, n=len(xs))
                )
    return CorrelationReport(entries=tuple(cells))


# ---------------------------------------------------------------------------
# Scatter / density export
# ---------------------------------------------------------------------------


def scatter_export(
    records: list[WordRecord],
    variant: str,
    measure: str,
    bins: int = 64,
) -> dict:
    """Square-root-transformed scatter data with marginal histograms.

    Negative values (prominence can be negative in normalized units) are
    shifted by the global minimum before the square root; the shifts are
    recorded in the metadata block.
    """
    pairs = [
        (r.surprisal[variant], r.measure(measure), "stop" if r.is_stopword else "content")
        for r in records
        if variant in r.surprisal and math.isfinite(r.measure(measure))
    ]
    if not pairs:
        raise ValidationError(f"no records carry variant {variant!r}")
    xs = np.array([p[0] for p in pairs])
    ys = np.array([p[1] for p in pairs])
    x_shift = float(min(0.0, xs.min()))
    y_shift = float(min(0.0, ys.min()))
    tx = np.sqrt(xs - x_shift)
    ty = np.sqrt(ys - y_shift)
    x_range = (0.0, float(tx.max()) or 1.0)
    y_range = (0.0, float(ty.max()) or 1.0)

    groups = []
    for group in ("stop", "content"):
        idx = [i for i, p in enumerate(pairs) if p[2] == group]
        gx, gy = tx[idx], ty[idx]
        hist_x = np.histogram(gx, bins=bins, range=x_range)[0] if len(idx) else np.zeros(bins, int)
        hist_y = np.histogram(gy, bins=bins, range=y_range)[0] if len(idx) else np.zeros(bins, int)
        groups.append(
            {
                "group": group,
                "points": [[float(a), float(b)] for a, b in zip(gx, gy)],
                "hist_x": [int(c) for c in hist_x],
                "hist_y": [int(c) for c in hist_y],
            }
        )
    return {
        "meta": {
            "variant": variant,
            "measure": measure,
            "x_shift": x_shift,
            "y_shift": y_shift,
            "bins": bins,
            "transform": "sqrt",
        },
        "groups": groups,
    }


def save_scatter_json(data: dict, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(data, ensure_ascii=False, separators=(",", ":")) + "\n", encoding="utf-8"
    )


# ---------------------------------------------------------------------------
# Table persistence
# ---------------------------------------------------------------------------

REPORT_HEADER = ["variant", "measure", "group", "rho", "n"]


def save_correlation_csv(report: CorrelationReport, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPORT_HEADER)
        for e in report.entries:
            writer.writerow(
                [e.variant, e.measure, e.group, "" if e.rho is None else repr(e.rho), e.n]
            )


def load_correlation_csv(path: str | Path) -> CorrelationReport:
    cells = []
    with open(path, encoding="utf-8", newline="") as fh:
        for rec in csv.DictReader(fh):
            cells.append(
                CorrelationCell(
                    variant=rec["variant"],
                    measure=rec["measure"],
                    group=rec["group"],
                    rho=None if rec["rho"] == "" else float(rec["rho"]),
                    n=int(rec["n"]),
                )
            )
    return CorrelationReport(entries=tuple(cells))


def save_records_csv(records: list[WordRecord], path: str | Path) -> None:
    """Wide-format WordRecord table; surprisal variants become sorted columns."""
    variants = sorted({vk for r in records for vk in r.surprisal})
    header = [
        "segment_id",
        "word_index",
        "word",
        "is_stopword",
        "distance",
        "prominence",
        "duration_s",
        "f0_mean",
        "f0_sd",
        "int_mean",
        "int_sd",
        "voiced_flag",
    ] + [f"sup:{v}" for v in variants]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for r in records:
            if r.givenness is None:
                distance = ""
            elif r.givenness.distance is None:
                distance = "NOVEL"
            else:
                distance = str(r.givenness.distance)
            row = [
                r.segment_id,
                r.word_index,
                r.word,
                int(r.is_stopword),
                distance,
                repr(r.prosody.prominence),
                repr(r.prosody.duration_s),
                repr(r.prosody.f0_mean),
                repr(r.prosody.f0_sd),
                repr(r.prosody.intensity_mean),
                repr(r.prosody.intensity_sd),
                int(r.prosody.voiced_flag),
            ]
            row.extend("" if v not in r.surprisal else repr(r.surprisal[v]) for v in variants)
            writer.writerow(row)


def load_records_csv(path: str | Path) -> list[WordRecord]:
    records = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        variant_cols = [c for c in reader.fieldnames or [] if c.startswith("sup:")]
        for rec in reader:
            surprisal = {
                c[len("sup:"):]: float(rec[c]) for c in variant_cols if rec[c] != ""
            }
            word = rec["word"]
            prosody = WordProsody(
                segment_id=rec["segment_id"],
                word_index=int(rec["word_index"]),
                word=word,
                prominence=float(rec["prominence"]),
                duration_s=float(rec["duration_s"]),
                f0_mean=float(rec["f0_mean"]),
                f0_sd=float(rec["f0_sd"]),
                intensity_mean=float(rec["int_mean"]),
                intensity_sd=float(rec["int_sd"]),
                voiced_flag=bool(int(rec["voiced_flag"])),
            )
            if rec["distance"] == "":
                giv = None
            else:
                giv = GivennessRecord(
                    segment_id=rec["segment_id"],
                    word_index=int(rec["word_index"]),
                    word=normalize_word(word),
                    distance=None if rec["distance"] == "NOVEL" else int(rec["distance"]),
                    is_content=not bool(int(rec["is_stopword"])),
                )
            records.append(
                WordRecord(
                    segment_id=rec["segment_id"],
                    word_index=int(rec["word_index"]),
                    word=word,
                    is_stopword=bool(int(rec["is_stopword"])),
                    surprisal=surprisal,
                    prosody=prosody,
                    givenness=giv,
                )
            )
    return records
