"""Byte-level BPE tokenizer with byte-span tracking.

The base vocabulary is the 256 byte values, so any string is encodable.
Pre-tokenization splits text into GPT-style pieces (a word keeps its leading
space); merges never cross piece boundaries.  Encoding returns byte offsets
into the UTF-8 encoding of the input, which downstream consumers use to map
tokens onto words.
"""
from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

_PRETOKEN = re.compile(rb" ?[A-Za-z]+| ?[0-9]+| ?[^A-Za-z0-9\s]+|\s+")


@dataclass(frozen=True)
class EncodedToken:
    token_id: int
    start: int  # byte offset into the encoded text
    end: int


class ByteBPE:
    """Greedy lowest-rank-first BPE over bytes."""

    def __init__(self, merges: list[tuple[int, int]]):
        self.merges = [tuple(m) for m in merges]
        self.ranks = {pair: i for i, pair in enumerate(self.merges)}
        # token id layout: 0..255 bytes, 256..255+len(merges) merges, then BOS
        self._bytes_of: list[bytes] = [bytes([i]) for i in range(256)]
        for a, b in self.merges:
            self._bytes_of.append(self._bytes_of[a] + self._bytes_of[b])

    @property
    def bos_id(self) -> int:
        return 256 + len(self.merges)

    @property
    def vocab_size(self) -> int:
        return 257 + len(self.merges)

    def bytes_of(self, token_id: int) -> bytes:
        if token_id == self.bos_id:
            return b""
        return self._bytes_of[token_id]

    def _merge_piece(self, data: bytes) -> list[tuple[int, int, int]]:
        """BPE-merge one piece; returns (token_id, local_start, local_end)."""
        parts = [(b, i, i + 1) for i, b in enumerate(data)]
        while len(parts) > 1:
            best_rank = None
            best_at = -1
            for i in range(len(parts) - 1):
                rank = self.ranks.get((parts[i][0], parts[i + 1][0]))
                if rank is not None and (best_rank is None or rank < best_rank):
                    best_rank = rank
                    best_at = i
            if best_rank is None:
                break
            new_id = 256 + best_rank
            merged = (new_id, parts[best_at][1], parts[best_at + 1][2])
            parts[best_at : best_at + 2] = [merged]
        return parts

    def encode(self, text: str) -> list[EncodedToken]:
        data = text.encode("utf-8")
        out: list[EncodedToken] = []
        offset = 0
        for match in _PRETOKEN.finditer(data):
            piece = match.group()
            for token_id, s, e in self._merge_piece(piece):
                out.append(EncodedToken(token_id, offset + s, offset + e))
            offset = match.end()
        # pre-tokenization must be exhaustive
        assert offset == len(data), "pre-tokenizer left a gap"
        return out

    def decode(self, token_ids: list[int]) -> str:
        return b"".join(self.bytes_of(t) for t in token_ids).decode("utf-8", errors="replace")

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps({"version": 1, "merges": [list(m) for m in self.merges]}),
            encoding="utf-8",
        )

    @classmethod
    def load(cls, path: str | Path) -> "ByteBPE":
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(merges=[tuple(m) for m in obj["merges"]])


def train_bpe(corpus: str, n_merges: int) -> ByteBPE:
    """Learn merges by repeatedly joining the most frequent adjacent pair.

    Ties break on the smaller pair for determinism.
    """
    pieces = Counter(_PRETOKEN.findall(corpus.encode("utf-8")))
    sequences: list[tuple[list[int], int]] = [
        ([int(b) for b in piece], freq) for piece, freq in sorted(pieces.items())
    ]
    merges: list[tuple[int, int]] = []
    for merge_index in range(n_merges):
        pair_counts: Counter = Counter()
        for seq, freq in sequences:
            for a, b in zip(seq, seq[1:]):
                pair_counts[(a, b)] += freq
        if not pair_counts:
            break
        best = min(pair_counts, key=lambda p: (-pair_counts[p], p))
        if pair_counts[best] < 2:
            break
        new_id = 256 + merge_index
        merges.append(best)
        for seq, _freq in sequences:
            i = 0
            while i < len(seq) - 1:
                if seq[i] == best[0] and seq[i + 1] == best[1]:
                    seq[i : i + 2] = [new_id]
                else:
                    i += 1
    return ByteBPE(merges=merges)
