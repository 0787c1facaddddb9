#!/usr/bin/env python3
"""Generate the frozen hand-scored JSONL fixture (20 sentences).

Token log-probabilities are synthetic but fixed (seeded); tokenization is
GPT-style (leading space attaches to the word, words may split into several
pieces, punctuation becomes its own token).  Some records carry a non-empty
context region to exercise target-only aggregation.
"""
from __future__ import annotations

import json
import random
from pathlib import Path

SENTENCES = [
    ("", "The cat sat on the mat."),
    ("", "A single word."),
    ("", "Unbelievable circumstances demand extraordinary explanations today."),
    ("", "She said hello, and he said goodbye."),
    ("", "Numbers like 12345 tokenize strangely sometimes."),
    ("The previous sentence sets context.", "Now the target sentence follows it."),
    ("One. Two. Three.", "Four and five arrive later."),
    ("", "Punctuation, everywhere; really - everywhere!"),
    ("", "Short."),
    ("", "The bear ate the porridge and the bear slept."),
    ("Context about bears and porridge.", "The bear returned to the porridge pot."),
    ("", "Hyphenated well-being matters greatly."),
    ("", "Don't split contractions badly."),
    ("", "Every good boy deserves fudge and every good girl does too."),
    ("Some context first.", "Target words come after context."),
    ("", "Quoted \"words\" behave like words."),
    ("", "Mixed CASE Words Appear Here."),
    ("", "Repetition repetition repetition teaches nothing new."),
    ("A much longer context region that spans quite a few tokens before the target arrives.",
     "Tiny target."),
    ("", "Final sentence of the fixture set."),
]


def gpt_style_tokens(text: str, rng: random.Random) -> list[dict]:
    # pieces: ' word' chunks with trailing punctuation split off
    pieces = []
    start = 0
    for i, ch in enumerate(text):
        if ch == " " and i > start:
            pieces.append((start, i))
            start = i
    if start < len(text):
        pieces.append((start, len(text)))
    tokens = []
    for s, e in pieces:
        chunk = text[s:e]
        core_end = e
        while core_end > s and chunk[-1] in ".,;:!?\"'-":
            chunk = chunk[:-1]
            core_end -= 1
        spans = []
        if core_end > s:
            # split long word cores into 2-3 subword pieces
            core_len = core_end - s
            if core_len > 7 and rng.random() < 0.8:
                cut1 = s + rng.randint(2, core_len - 4)
                cut2 = cut1 + rng.randint(2, core_end - cut1 - 1)
                spans.extend([(s, cut1), (cut1, cut2), (cut2, core_end)])
            elif core_len > 4 and rng.random() < 0.6:
                cut = s + rng.randint(2, core_len - 2)
                spans.extend([(s, cut), (cut, core_end)])
            else:
                spans.append((s, core_end))
        for i in range(core_end, e):
            spans.append((i, i + 1))
        for a, b in spans:
            tokens.append({"t": text[a:b], "lp": -rng.uniform(0.05, 8.0), "s": a, "e": b})
    return tokens


def main():
    rng = random.Random(20240817)
    out = Path(__file__).parent.parent / "tests" / "fixtures" / "hand_scored.jsonl"
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        for context, target in SENTENCES:
            text = f"{context} {target}" if context else target
            tokens = gpt_style_tokens(text, rng)
            record = {
                "model_id": "hand",
                "context_sentences": 1 if context else 0,
                "context_char_len": len(context.encode("utf-8")),
                "text": text,
                "tokens": tokens,
            }
            fh.write(json.dumps(record, ensure_ascii=False, separators=(",", ":")) + "\n")
    print(f"wrote {len(SENTENCES)} records to {out}")


if __name__ == "__main__":
    main()
