"""Corpus ingestion: metadata manifests, forced-alignment files, word matching.

The corpus follows the LJ-Speech layout: a pipe-delimited metadata file
(``id|raw|normalized``), one audio file and one alignment JSON per segment.
Segment ids encode the chapter as the prefix before the final hyphen-number
(``LJ001-0007`` belongs to chapter ``LJ001``); running-text order within a
chapter is id order.
"""
from __future__ import annotations

import difflib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ParseError, ValidationError
from .words import normalize_word, split_words

#: alignment entries treated as non-speech when matching words
SILENCE_LABELS = frozenset({"", "sil", "sp", "spn", "pau", "br", "ns", "<sil>", "<unk>"})

_OVERLAP_EPS = 1e-9


@dataclass(frozen=True)
class Segment:
    """One utterance of running text."""

    id: str
    chapter_id: str
    order_index: int
    text: str
    audio_path: Path | None = None
    alignment_path: Path | None = None


@dataclass(frozen=True)
class Phone:
    label: str
    start_s: float
    end_s: float


@dataclass(frozen=True)
class WordAlignment:
    """One aligned word with its phone intervals."""

    word: str
    start_s: float
    end_s: float
    phones: tuple[Phone, ...] = ()

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class CorpusLayout:
    """Where segment resources live and which transcription column to use."""

    audio_dir: Path | None = None
    alignment_dir: Path | None = None
    text_field: str = "normalized"  # or "raw"
    audio_ext: str = ".wav"
    alignment_ext: str = ".json"


@dataclass
class CorpusManifest:
    segments: list[Segment]
    stopword_lexicon: frozenset[str] = frozenset()
    _by_id: dict[str, Segment] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._by_id = {}
        for seg in self.segments:
            if seg.id in self._by_id:
                raise ValidationError(f"duplicate segment id {seg.id!r}")
            self._by_id[seg.id] = seg

    def segment(self, segment_id: str) -> Segment:
        try:
            return self._by_id[segment_id]
        except KeyError:
            raise LookupError(f"unknown segment id {segment_id!r}") from None

    def chapter(self, chapter_id: str) -> list[Segment]:
        return [s for s in self.segments if s.chapter_id == chapter_id]

    def is_stopword(self, word: str) -> bool:
        return normalize_word(word) in self.stopword_lexicon


def chapter_of(segment_id: str) -> str:
    """Chapter id = prefix before the final hyphen-number."""
    head, sep, tail = segment_id.rpartition("-")
    if sep and tail.isdigit():
        return head
    return segment_id


def load_manifest(
    metadata_path: str | Path,
    layout: CorpusLayout | None = None,
    stopwords: frozenset[str] | None = None,
) -> CorpusManifest:
    """Load a pipe-delimited metadata file into an ordered manifest.

    Segments are ordered by id; ``order_index`` restarts at 0 whenever the
    chapter prefix changes.
    """
    layout = layout or CorpusLayout()
    if layout.text_field not in ("normalized", "raw"):
        raise ValidationError(f"unknown text_field {layout.text_field!r}")
    metadata_path = Path(metadata_path)

    rows: list[tuple[str, str]] = []
    seen: set[str] = set()
    with open(metadata_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("|")
            if len(fields) != 3:
                raise ParseError(
                    f"expected 3 pipe-delimited fields, got {len(fields)}",
                    path=metadata_path,
                    line=lineno,
                )
            seg_id, raw, normalized = fields
            if seg_id in seen:
                raise ValidationError(f"{metadata_path}:{lineno}: duplicate segment id {seg_id!r}")
            seen.add(seg_id)
            text = normalized if layout.text_field == "normalized" else raw
            if not text.strip():
                raise ValidationError(f"{metadata_path}:{lineno}: empty transcription for {seg_id!r}")
            rows.append((seg_id, text))

    rows.sort(key=lambda r: r[0])
    segments: list[Segment] = []
    current_chapter = None
    order_index = 0
    for seg_id, text in rows:
        chap = chapter_of(seg_id)
        if chap != current_chapter:
            current_chapter = chap
            order_index = 0
        audio = layout.audio_dir / f"{seg_id}{layout.audio_ext}" if layout.audio_dir else None
        alignment = (
            layout.alignment_dir / f"{seg_id}{layout.alignment_ext}" if layout.alignment_dir else None
        )
        segments.append(
            Segment(
                id=seg_id,
                chapter_id=chap,
                order_index=order_index,
                text=text,
                audio_path=audio,
                alignment_path=alignment,
            )
        )
        order_index += 1

    return CorpusManifest(segments=segments, stopword_lexicon=stopwords or frozenset())


def save_manifest(manifest: CorpusManifest, path: str | Path) -> None:
    """Write the manifest back in metadata format (text in both columns)."""
    lines = [f"{s.id}|{s.text}|{s.text}\n" for s in sorted(manifest.segments, key=lambda s: s.id)]
    Path(path).write_text("".join(lines), encoding="utf-8")


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """Load a stop-word lexicon (one lowercase word per line, ``#`` comments).

    With no path, the packaged default English list is used.
    """
    if path is None:
        text = resources.files("prosign").joinpath("data/stopwords_en.txt").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    words = set()
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            words.add(line.casefold())
    return frozenset(words)


def _parse_interval(obj, what, path):
    try:
        start = float(obj["start"])
        end = float(obj["end"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{what}: missing or non-numeric start/end", path=path) from exc
    return start, end


def load_alignment(path: str | Path) -> list[WordAlignment]:
    """Load one segment's alignment JSON, validated and in time order."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}", path=path) from exc
    if not isinstance(doc, dict) or "words" not in doc or not isinstance(doc["words"], list):
        raise ParseError('expected an object with a "words" list', path=path)

    words: list[WordAlignment] = []
    for i, w in enumerate(doc["words"]):
        label = w.get("word")
        if not isinstance(label, str):
            raise ParseError(f"word #{i}: missing word label", path=path)
        start, end = _parse_interval(w, f"word {label!r}", path)
        if not (0.0 <= start < end):
            raise ValidationError(f"{path}: word {label!r}: invalid interval [{start}, {end}]")
        phones = []
        for p in w.get("phones", []):
            plabel = p.get("label")
            if not isinstance(plabel, str):
                raise ParseError(f"word {label!r}: phone missing label", path=path)
            ps, pe = _parse_interval(p, f"phone {plabel!r}", path)
            if not (start - _OVERLAP_EPS <= ps < pe <= end + _OVERLAP_EPS):
                raise ValidationError(
                    f"{path}: phone {plabel!r} [{ps}, {pe}] outside word {label!r} [{start}, {end}]"
                )
            phones.append(Phone(plabel, ps, pe))
        phones.sort(key=lambda p: p.start_s)
        for a, b in zip(phones, phones[1:]):
            if b.start_s < a.end_s - _OVERLAP_EPS:
                raise ValidationError(
                    f"{path}: phones {a.label!r} and {b.label!r} overlap in word {label!r}"
                )
        words.append(WordAlignment(word=label, start_s=start, end_s=end, phones=tuple(phones)))

    words.sort(key=lambda w: (w.start_s, w.end_s))
    for a, b in zip(words, words[1:]):
        if b.start_s < a.end_s - _OVERLAP_EPS:
            raise ValidationError(
                f"{path}: words {a.word!r} [{a.start_s}, {a.end_s}] and "
                f"{b.word!r} [{b.start_s}, {b.end_s}] overlap"
            )
    return words


@dataclass(frozen=True)
class MatchResult:
    """Order-preserving word matches between segment text and an alignment."""

    pairs: tuple[tuple[int, int], ...]
    unmatched_text: tuple[int, ...]
    unmatched_alignment: tuple[int, ...]


def match_words(
    segment_text: str,
    alignments: list[WordAlignment],
    silence_labels: frozenset[str] = SILENCE_LABELS,
) -> MatchResult:
    """Greedy in-order matching of text words to alignment entries.

    Both sides are case-folded and punctuation-stripped before comparison.
    Silence-only alignment entries are skipped silently; every other
    unmatched item on either side is reported.
    """
    text_words = split_words(segment_text)
    text_norm = [normalize_word(w) for w in text_words]
    text_idx = [i for i, w in enumerate(text_norm) if w]

    align_norm = [normalize_word(a.word) for a in alignments]
    align_idx = [
        i
        for i, (a, w) in enumerate(zip(alignments, align_norm))
        if w not in silence_labels and a.word.casefold() not in silence_labels
    ]

    matcher = difflib.SequenceMatcher(
        a=[text_norm[i] for i in text_idx],
        b=[align_norm[i] for i in align_idx],
        autojunk=False,
    )
    pairs: list[tuple[int, int]] = []
    for block in matcher.get_matching_blocks():
        for k in range(block.size):
            pairs.append((text_idx[block.a + k], align_idx[block.b + k]))

    matched_text = {t for t, _ in pairs}
    matched_align = {a for _, a in pairs}
    unmatched_text = tuple(i for i in range(len(text_words)) if i not in matched_text)
    unmatched_alignment = tuple(i for i in align_idx if i not in matched_align)
    return MatchResult(
        pairs=tuple(pairs),
        unmatched_text=unmatched_text,
        unmatched_alignment=unmatched_alignment,
    )


def with_stopwords(manifest: CorpusManifest, stopwords: frozenset[str]) -> CorpusManifest:
    return CorpusManifest(segments=list(manifest.segments), stopword_lexicon=stopwords)


def validate_corpus(manifest: CorpusManifest) -> list[str]:
    """Existence and well-formedness diagnostics for a loaded manifest."""
    problems = []
    for seg in manifest.segments:
        if seg.audio_path is not None and not seg.audio_path.exists():
            problems.append(f"{seg.id}: missing audio file {seg.audio_path}")
        if seg.alignment_path is not None:
            if not seg.alignment_path.exists():
                problems.append(f"{seg.id}: missing alignment file {seg.alignment_path}")
            else:
                try:
                    alignment = load_alignment(seg.alignment_path)
                except (ParseError, ValidationError) as exc:
                    problems.append(f"{seg.id}: {exc}")
                    continue
                res = match_words(seg.text, alignment)
                if res.unmatched_text or res.unmatched_alignment:
                    problems.append(
                        f"{seg.id}: {len(res.unmatched_text)} text / "
                        f"{len(res.unmatched_alignment)} alignment words unmatched"
                    )
    return problems
