"""Objective prosody evaluation of synthesis systems against references.

Predictions are phone-level f0 (standard/z units) and duration (20 ms
frames).  RMSE and Pearson correlation are reported per system for all
words, content words and stop words, in the familiar four-column layout.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import ValidationError
from .stats import pearson_or_none

GROUP_ORDER = ("all", "content", "stop")
GROUP_TITLES = {"all": "All words", "content": "content words", "stop": "stop words"}


@dataclass(frozen=True)
class PhonePrediction:
    segment_id: str
    phone_index: int
    word_index: int
    f0: float
    duration: float  # in 20 ms frames
    system_id: str = ""

    def __post_init__(self):
        if self.duration < 0:
            raise ValidationError(
                f"negative duration {self.duration} at ({self.segment_id}, {self.phone_index})"
            )


@dataclass(frozen=True)
class MetricRow:
    system_id: str
    group: str
    f0_rmse: float
    f0_cor: float | None
    dur_rmse: float
    dur_cor: float | None
    n: int


@dataclass(frozen=True)
class EvalReport:
    rows: tuple[MetricRow, ...]

    def row(self, system_id: str, group: str) -> MetricRow:
        for r in self.rows:
            if (r.system_id, r.group) == (system_id, group):
                return r
        raise LookupError(f"no row ({system_id}, {group})")


def rmse(pred: Sequence[float], ref: Sequence[float]) -> float:
    """Root mean squared error."""
    pred = np.asarray(pred, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if len(pred) != len(ref):
        raise ValidationError(f"length mismatch: {len(pred)} vs {len(ref)}")
    if len(pred) == 0:
        raise ValidationError("empty sequences")
    return float(np.sqrt(np.mean((pred - ref) ** 2)))


def pearson(pred: Sequence[float], ref: Sequence[float]) -> float | None:
    """Product-moment correlation; None when variance vanishes."""
    return pearson_or_none(np.asarray(pred, dtype=np.float64), np.asarray(ref, dtype=np.float64))


def _index(rows: list[PhonePrediction]) -> dict[tuple[str, int], PhonePrediction]:
    out: dict[tuple[str, int], PhonePrediction] = {}
    for r in rows:
        key = (r.segment_id, r.phone_index)
        if key in out:
            raise ValidationError(f"duplicate phone key {key} in system {r.system_id!r}")
        out[key] = r
    return out


def evaluate_systems(
    predictions: Mapping[str, list[PhonePrediction]],
    reference: list[PhonePrediction],
    word_class: Mapping[tuple[str, int], str],
) -> EvalReport:
    """Metrics per (system, word group) over the concatenated phone set.

    Every system must cover exactly the reference phones.  ``word_class``
    maps (segment_id, word_index) to ``stop`` or ``content``; phones without
    a class only count toward the ``all`` group.
    """
    ref_index = _index(reference)
    ref_keys = sorted(ref_index)
    rows: list[MetricRow] = []
    for system_id in predictions:
        sys_index = _index(predictions[system_id])
        missing = [k for k in ref_keys if k not in sys_index]
        extra = [k for k in sorted(sys_index) if k not in ref_index]
        if missing or extra:
            raise ValidationError(
                f"system {system_id!r} phone coverage mismatch: "
                f"missing {missing[:5]}{'...' if len(missing) > 5 else ''}, "
                f"extra {extra[:5]}{'...' if len(extra) > 5 else ''}"
            )
        for group in GROUP_ORDER:
            keys = []
            for k in ref_keys:
                wc = word_class.get((k[0], ref_index[k].word_index))
                if group == "all" or wc == group:
                    keys.append(k)
            if not keys:
                continue
            p_f0 = [sys_index[k].f0 for k in keys]
            r_f0 = [ref_index[k].f0 for k in keys]
            p_dur = [sys_index[k].duration for k in keys]
            r_dur = [ref_index[k].duration for k in keys]
            # groups too small for a correlation get an undefined (None) cor
            f0_cor = pearson(p_f0, r_f0) if len(keys) >= 3 else None
            dur_cor = pearson(p_dur, r_dur) if len(keys) >= 3 else None
            rows.append(
                MetricRow(
                    system_id=system_id,
                    group=group,
                    f0_rmse=rmse(p_f0, r_f0),
                    f0_cor=f0_cor,
                    dur_rmse=rmse(p_dur, r_dur),
                    dur_cor=dur_cor,
                    n=len(keys),
                )
            )
    return EvalReport(rows=tuple(rows))


# ---------------------------------------------------------------------------
# Report formatting and persistence
# ---------------------------------------------------------------------------

PREDICTION_HEADER = ["segment_id", "phone_index", "word_index", "f0", "dur"]


def load_predictions_csv(path: str | Path, system_id: str = "") -> list[PhonePrediction]:
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(
                PhonePrediction(
                    segment_id=rec["segment_id"],
                    phone_index=int(rec["phone_index"]),
                    word_index=int(rec["word_index"]),
                    f0=float(rec["f0"]),
                    duration=float(rec["dur"]),
                    system_id=system_id,
                )
            )
    return rows


def save_predictions_csv(rows: list[PhonePrediction], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PREDICTION_HEADER)
        for r in rows:
            writer.writerow([r.segment_id, r.phone_index, r.word_index, repr(r.f0), repr(r.duration)])


def load_word_classes_csv(path: str | Path) -> dict[tuple[str, int], str]:
    out = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for rec in csv.DictReader(fh):
            out[(rec["segment_id"], int(rec["word_index"]))] = rec["group"]
    return out


def save_report_csv(report: EvalReport, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["system", "group", "f0_rmse", "f0_cor", "dur_rmse", "dur_cor", "n"])
        for r in report.rows:
            writer.writerow(
                [
                    r.system_id,
                    r.group,
                    repr(r.f0_rmse),
                    "" if r.f0_cor is None else repr(r.f0_cor),
                    repr(r.dur_rmse),
                    "" if r.dur_cor is None else repr(r.dur_cor),
                    r.n,
                ]
            )


def _fmt(value: float | None) -> str:
    return "  n/a" if value is None else f"{value:.3f}"


def format_report_table(report: EvalReport, systems: Sequence[str] | None = None) -> str:
    """Three-section text table: All words / content words / stop words."""
    if systems is None:
        seen: list[str] = []
        for r in report.rows:
            if r.system_id not in seen:
                seen.append(r.system_id)
        systems = seen
    width = max([len("system")] + [len(s) for s in systems]) + 2
    lines = []
    header = f"{'':<{width}}{'f0 RMSE':>9}{'f0 cor':>9}{'dur RMSE':>10}{'dur cor':>9}"
    for group in GROUP_ORDER:
        lines.append(f"--- {GROUP_TITLES[group]} ---")
        lines.append(header)
        for system_id in systems:
            try:
                r = report.row(system_id, group)
            except LookupError:
                continue
            lines.append(
                f"{system_id:<{width}}"
                f"{_fmt(r.f0_rmse):>9}{_fmt(r.f0_cor):>9}{_fmt(r.dur_rmse):>10}{_fmt(r.dur_cor):>9}"
            )
        lines.append("")
    return "\n".join(lines).rstrip() + "\n"


def metric_row_from_values(
    system_id: str, group: str, f0_rmse: float, f0_cor: float, dur_rmse: float, dur_cor: float
) -> MetricRow:
    """Build a report row from externally supplied metric values."""
    return MetricRow(
        system_id=system_id,
        group=group,
        f0_rmse=f0_rmse,
        f0_cor=f0_cor,
        dur_rmse=dur_rmse,
        dur_cor=dur_cor,
        n=0,
    )
