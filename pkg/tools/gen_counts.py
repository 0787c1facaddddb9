#!/usr/bin/env python3
"""Build the unigram counts fixture (word<TAB>count) from the extractor's
training corpus, scaled to look like large-corpus counts."""
from __future__ import annotations

from collections import Counter
from pathlib import Path

from logprob_extractor.curriculum import generate
from prosign.words import normalize_word

ROOT = Path(__file__).parent.parent


def main():
    text = (ROOT / "extractor" / "train_data" / "tales.txt").read_text(encoding="utf-8")
    text += generate(n_paragraphs=2400, seed=20240)
    counts = Counter()
    for raw in text.split():
        word = normalize_word(raw)
        if word:
            counts[word] += 1
    out = ROOT / "tests" / "fixtures" / "story" / "counts.txt"
    with open(out, "w", encoding="utf-8") as fh:
        for word, count in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])):
            fh.write(f"{word}\t{count * 997}\n")
    print(f"wrote {len(counts)} words to {out}")


if __name__ == "__main__":
    main()
