"""Word tokenization helpers shared by the corpus, surprisal and givenness modules.

A "word" is a whitespace-delimited chunk of the segment text.  Word identity
for matching, stop-word lookup and givenness uses the case-folded form with
leading/trailing punctuation stripped; the raw chunk (punctuation included)
is what LM backends see.
"""
from __future__ import annotations

import unicodedata


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def normalize_word(word: str) -> str:
    """Case-fold and strip leading/trailing punctuation.

    May return the empty string for punctuation-only chunks.
    """
    start = 0
    end = len(word)
    while start < end and _is_punct(word[start]):
        start += 1
    while end > start and _is_punct(word[end - 1]):
        end -= 1
    return word[start:end].casefold()


def split_words(text: str) -> list[str]:
    """Whitespace-delimited chunks, punctuation retained."""
    return text.split()


def word_char_spans(text: str) -> list[tuple[str, int, int]]:
    """Whitespace-delimited chunks with their character spans."""
    out = []
    i = 0
    n = len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        j = i
        while j < n and not text[j].isspace():
            j += 1
        out.append((text[i:j], i, j))
        i = j
    return out


def word_byte_spans(text: str) -> list[tuple[str, int, int]]:
    """Whitespace-delimited chunks with spans in UTF-8 byte offsets."""
    # cumulative byte offset of every character boundary
    offsets = [0]
    for ch in text:
        offsets.append(offsets[-1] + len(ch.encode("utf-8")))
    return [(w, offsets[i], offsets[j]) for w, i, j in word_char_spans(text)]
