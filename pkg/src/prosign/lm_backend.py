"""Per-token conditional log-probabilities from three interchangeable sources.

Backends return natural-log probabilities; conversion to bits happens exactly
once, in :mod:`prosign.surprisal`.

Wire/file formats
-----------------
Scored-text JSONL, one object per line::

    {"model_id": str, "context_sentences": int, "context_char_len": int,
     "text": str, "tokens": [{"t": str, "lp": float|null, "s": int, "e": int}]}

``s``/``e`` are UTF-8 byte offsets into ``text``; token texts tile the text
exactly.  ``lp`` may be null only for a first token scored without
begin-of-text conditioning; such tokens are excluded from word sums.

Remote scoring: ``POST <endpoint>/score`` with
``{"model_id": str, "text": str}`` (plus optional ``context_sentences`` /
``context_char_len`` passed through by the producer) returns one scored-text
object.

Unigram counts: ``word<TAB>count`` per line (Norvig count_1w format).
"""
from __future__ import annotations

import hashlib
import json
import math
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import requests

from .errors import CoverageError, ParseError, ProtocolError, TransportError, ValidationError
from .words import normalize_word


@dataclass(frozen=True)
class TokenLogProb:
    """One subword token with its conditional natural-log probability."""

    token_text: str
    logprob_e: float | None
    char_span: tuple[int, int]


@dataclass(frozen=True)
class ScoredText:
    """A scored (context + target) string.

    Tokens whose span starts at a byte offset >= ``context_char_len`` belong
    to the target region; only those enter word-surprisal aggregation.
    """

    model_id: str
    context_sentences: int
    context_char_len: int
    text: str
    tokens: tuple[TokenLogProb, ...]

    def validate(self) -> None:
        data = self.text.encode("utf-8")
        pos = 0
        for i, tok in enumerate(self.tokens):
            s, e = tok.char_span
            if s != pos:
                raise ProtocolError(
                    f"token span gap: token {i} starts at byte {s}, expected {pos}"
                )
            if e <= s:
                raise ProtocolError(f"token {i}: empty or reversed span ({s}, {e})")
            if data[s:e].decode("utf-8", errors="replace") != tok.token_text:
                raise ProtocolError(
                    f"token {i} text {tok.token_text!r} does not match bytes [{s}:{e}]"
                )
            if tok.logprob_e is not None and tok.logprob_e > 0:
                raise ValidationError(f"token {i}: positive logprob {tok.logprob_e}")
            pos = e
        if pos != len(data):
            raise ProtocolError(f"token spans cover {pos} bytes of {len(data)}")
        if self.context_char_len < 0 or self.context_char_len > len(data):
            raise ValidationError(f"context_char_len {self.context_char_len} out of range")

    def target_tokens(self) -> list[TokenLogProb]:
        return [t for t in self.tokens if t.char_span[0] >= self.context_char_len]

    def to_json_obj(self) -> dict:
        return {
            "model_id": self.model_id,
            "context_sentences": self.context_sentences,
            "context_char_len": self.context_char_len,
            "text": self.text,
            "tokens": [
                {"t": t.token_text, "lp": t.logprob_e, "s": t.char_span[0], "e": t.char_span[1]}
                for t in self.tokens
            ],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "ScoredText":
        try:
            tokens = tuple(
                TokenLogProb(
                    token_text=t["t"],
                    logprob_e=None if t["lp"] is None else float(t["lp"]),
                    char_span=(int(t["s"]), int(t["e"])),
                )
                for t in obj["tokens"]
            )
            st = cls(
                model_id=str(obj["model_id"]),
                context_sentences=int(obj["context_sentences"]),
                context_char_len=int(obj["context_char_len"]),
                text=str(obj["text"]),
                tokens=tokens,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed scored-text object: {exc}") from exc
        return st


def dumps_scored(scored: ScoredText) -> str:
    return json.dumps(scored.to_json_obj(), ensure_ascii=False, separators=(",", ":"))


def load_scored_file(path: str | Path) -> list[ScoredText]:
    """Load and validate a scored-text JSONL file."""
    out: list[ScoredText] = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"record {i}: invalid JSON: {exc}", path=path) from exc
            try:
                scored = ScoredText.from_json_obj(obj)
                scored.validate()
            except (ParseError, ProtocolError, ValidationError) as exc:
                raise type(exc)(f"{path}: record {i}: {exc}") from exc
            out.append(scored)
    return out


def save_scored_file(records: list[ScoredText], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(dumps_scored(rec) + "\n")


# ---------------------------------------------------------------------------
# Unigram model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UnigramModel:
    """Word-count model; lookups are case-folded and punctuation-stripped."""

    counts: dict[str, int]
    total: int
    oov_count: int = 1

    def __post_init__(self):
        if self.total <= 0:
            raise ValidationError("unigram total must be positive")
        if self.oov_count < 1:
            raise ValidationError("oov_count must be >= 1")

    def count(self, word: str) -> int:
        return self.counts.get(normalize_word(word), self.oov_count)


def load_unigram_counts(path: str | Path, oov_count: int = 1) -> UnigramModel:
    """Parse a ``word<TAB>count`` file into a UnigramModel."""
    counts: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError("expected word<TAB>count", path=path, line=lineno)
            word, count = parts
            try:
                n = int(count)
            except ValueError as exc:
                raise ParseError(f"non-integer count {count!r}", path=path, line=lineno) from exc
            if n < 0:
                raise ParseError(f"negative count {n}", path=path, line=lineno)
            key = normalize_word(word)
            counts[key] = counts.get(key, 0) + n
    total = sum(counts.values())
    if total <= 0:
        raise ValidationError(f"{path}: no usable counts")
    return UnigramModel(counts=counts, total=total, oov_count=oov_count)


def unigram_surprisal(word: str, model: UnigramModel) -> float:
    """Unigram surprisal in bits: -log2(count(word) / total)."""
    return -math.log2(model.count(word) / model.total)


# ---------------------------------------------------------------------------
# Scoring backends
# ---------------------------------------------------------------------------


def _cache_key(model_id: str, text: str, context_sentences: int, context_char_len: int) -> str:
    payload = f"{model_id}\x00{context_sentences}\x00{context_char_len}\x00{text}"
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class ScoreCache:
    """Disk cache of scored texts; files double as scored-text JSONL records.

    Concurrent readers are safe; writes go through an atomic rename, so the
    last writer per key wins and readers never observe partial files.
    """

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _path(self, key: str) -> Path:
        return self.directory / key[:2] / f"{key}.jsonl"

    def get(self, key: str) -> ScoredText | None:
        path = self._path(key)
        if not path.exists():
            return None
        records = load_scored_file(path)
        return records[0] if records else None

    def put(self, key: str, scored: ScoredText) -> None:
        path = self._path(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(f".tmp{os.getpid()}.{threading.get_ident()}")
        tmp.write_text(dumps_scored(scored) + "\n", encoding="utf-8")
        os.replace(tmp, path)

    def dump(self, path: str | Path) -> int:
        """Concatenate all cached records into one JSONL file; returns count."""
        records = []
        for p in sorted(self.directory.glob("*/*.jsonl")):
            records.extend(load_scored_file(p))
        records.sort(key=lambda r: (r.model_id, r.context_sentences, r.text))
        save_scored_file(records, path)
        return len(records)


@dataclass(frozen=True)
class ServiceConfig:
    """Remote scoring endpoint configuration."""

    base_url: str
    timeout_s: float = 60.0
    max_retries: int = 4
    backoff_s: float = 0.5
    workers: int = 4


_TRANSIENT_STATUS = frozenset({429, 500, 502, 503, 504})


class HttpScorer:
    """Scores text against a remote ``POST /score`` service, with retry and cache."""

    def __init__(self, config: ServiceConfig, cache: ScoreCache | None = None):
        self.config = config
        self.cache = cache
        self._session = requests.Session()

    def score(
        self,
        text: str,
        model_id: str,
        context_sentences: int = 0,
        context_char_len: int = 0,
    ) -> ScoredText:
        if not text:
            raise ValidationError("cannot score empty text")
        key = _cache_key(model_id, text, context_sentences, context_char_len)
        if self.cache is not None:
            cached = self.cache.get(key)
            if cached is not None:
                return cached
        obj = self._post(
            {
                "model_id": model_id,
                "text": text,
                "context_sentences": context_sentences,
                "context_char_len": context_char_len,
            }
        )
        scored = ScoredText.from_json_obj(obj)
        scored.validate()
        # The producer may left-truncate context to fit its window; the
        # returned text must then be a suffix of what we sent.
        if scored.text != text:
            if not text.endswith(scored.text):
                raise ProtocolError("service returned text that is not a suffix of the request")
            dropped = len(text.encode("utf-8")) - len(scored.text.encode("utf-8"))
            if scored.context_char_len != max(0, context_char_len - dropped):
                raise ProtocolError("service returned inconsistent context_char_len after truncation")
        if self.cache is not None:
            self.cache.put(key, scored)
        return scored

    def score_many(self, requests_list: list[tuple[str, str, int, int]]) -> list[ScoredText]:
        """Score (text, model_id, context_sentences, context_char_len) tuples.

        Bounded concurrency; results come back in input order.
        """
        workers = max(1, self.config.workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda args: self.score(*args), requests_list))

    def _post(self, payload: dict) -> dict:
        url = self.config.base_url.rstrip("/") + "/score"
        delay = self.config.backoff_s
        last_error: Exception | None = None
        for attempt in range(self.config.max_retries + 1):
            try:
                resp = self._session.post(url, json=payload, timeout=self.config.timeout_s)
            except requests.RequestException as exc:
                last_error = exc
            else:
                if resp.status_code == 200:
                    try:
                        return resp.json()
                    except ValueError as exc:
                        raise ProtocolError(f"non-JSON response from {url}") from exc
                if resp.status_code not in _TRANSIENT_STATUS:
                    raise TransportError(f"{url} returned HTTP {resp.status_code}: {resp.text[:200]}")
                last_error = TransportError(f"HTTP {resp.status_code}")
            if attempt < self.config.max_retries:
                time.sleep(delay)
                delay *= 2
        raise TransportError(f"{url} unreachable after {self.config.max_retries + 1} attempts: {last_error}")


def score_text_remote(
    text: str,
    model_id: str,
    endpoint: "ServiceConfig | str",
    cache: ScoreCache | None = None,
    context_sentences: int = 0,
    context_char_len: int = 0,
) -> ScoredText:
    """One-shot remote scoring; ``endpoint`` is a ServiceConfig or base URL."""
    config = endpoint if isinstance(endpoint, ServiceConfig) else ServiceConfig(base_url=endpoint)
    return HttpScorer(config, cache=cache).score(
        text, model_id=model_id, context_sentences=context_sentences,
        context_char_len=context_char_len,
    )


class FileScorer:
    """Serves scores from pre-scored JSONL files (and in-memory records)."""

    def __init__(self, records: list[ScoredText]):
        self._index: dict[tuple[str, int, str], ScoredText] = {}
        for rec in records:
            self._index[(rec.model_id, rec.context_sentences, rec.text)] = rec

    @classmethod
    def from_paths(cls, paths: list[str | Path]) -> "FileScorer":
        records: list[ScoredText] = []
        for p in paths:
            records.extend(load_scored_file(p))
        return cls(records)

    def __len__(self) -> int:
        return len(self._index)

    def records(self) -> list[ScoredText]:
        return sorted(self._index.values(), key=lambda r: (r.model_id, r.context_sentences, r.text))

    def score(
        self,
        text: str,
        model_id: str,
        context_sentences: int = 0,
        context_char_len: int = 0,
    ) -> ScoredText:
        try:
            rec = self._index[(model_id, context_sentences, text)]
        except KeyError:
            raise CoverageError(
                f"no pre-scored record for model {model_id!r}, "
                f"context_sentences={context_sentences}, text={text[:60]!r}..."
            ) from None
        if rec.context_char_len != context_char_len:
            raise ValidationError(
                f"pre-scored record has context_char_len={rec.context_char_len}, "
                f"expected {context_char_len}"
            )
        return rec
