"""Produce scored-text objects (the JSONL/HTTP wire format) from the model.

Every token's logprob is its conditional log-probability given all preceding
tokens; the first text token is conditioned on the begin-of-text token, so no
null logprobs are emitted.  When (BOS + tokens) exceeds the model window the
context region is left-truncated at piece boundaries; the target is never cut.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .bpe import ByteBPE, EncodedToken
from .model import TinyGPT


class TargetTooLongError(ValueError):
    """The target region alone exceeds the model window."""


@dataclass(frozen=True)
class Scorer:
    bpe: ByteBPE
    model: TinyGPT
    model_id: str

    @property
    def max_tokens(self) -> int:
        # forward pass sees [BOS] + tokens[:-1]
        return self.model.cfg.n_ctx

    def score(self, text: str, context_sentences: int = 0, context_char_len: int = 0) -> dict:
        if not text:
            raise ValueError("cannot score empty text")
        data = text.encode("utf-8")
        if not 0 <= context_char_len <= len(data):
            raise ValueError(f"context_char_len {context_char_len} out of range")
        encoded = self.bpe.encode(text)
        encoded, dropped_bytes = self._fit_window(encoded, context_char_len)
        emitted_text = data[dropped_bytes:].decode("utf-8")
        ccl = max(0, context_char_len - dropped_bytes)

        ids = [self.bpe.bos_id] + [t.token_id for t in encoded]
        logprobs = self.model.token_logprobs(ids)

        entries = [
            (self.bpe.bytes_of(t.token_id), min(float(lp), 0.0), t.start - dropped_bytes,
             t.end - dropped_bytes)
            for t, lp in zip(encoded, logprobs)
        ]
        tokens = [
            {"t": text_piece, "lp": lp, "s": s, "e": e}
            for text_piece, lp, s, e in _merge_partial_chars(entries)
        ]
        return {
            "model_id": self.model_id,
            "context_sentences": context_sentences,
            "context_char_len": ccl,
            "text": emitted_text,
            "tokens": tokens,
        }

    def sequence_logprob(self, text: str) -> float:
        """Single-pass total log-likelihood of the whole (untruncated) text."""
        encoded = self.bpe.encode(text)
        ids = [self.bpe.bos_id] + [t.token_id for t in encoded]
        if len(ids) - 1 > self.max_tokens:
            raise TargetTooLongError(f"{len(ids) - 1} tokens exceed window {self.max_tokens}")
        return float(self.model.token_logprobs(ids).sum())

    def _fit_window(
        self, encoded: list[EncodedToken], context_char_len: int
    ) -> tuple[list[EncodedToken], int]:
        if len(encoded) <= self.max_tokens:
            return encoded, 0
        overflow = len(encoded) - self.max_tokens
        # candidate cuts: piece starts (always char boundaries)
        cut = None
        for i, tok in enumerate(encoded):
            if i >= overflow and tok.start <= context_char_len:
                # find the first piece boundary at or after the overflow point
                if i == 0 or encoded[i - 1].end == tok.start:
                    cut = i
                    break
        if cut is None:
            raise TargetTooLongError(
                f"target region does not fit the {self.max_tokens}-token window"
            )
        kept = encoded[cut:]
        return kept, kept[0].start


def _merge_partial_chars(entries):
    """Join tokens that split a UTF-8 character; logprobs add up (chain rule)."""
    out = []
    buffer = b""
    lp_sum = 0.0
    start = None
    for raw, lp, s, e in entries:
        if start is None:
            start = s
        buffer += raw
        lp_sum += lp
        try:
            text_piece = buffer.decode("utf-8")
        except UnicodeDecodeError:
            continue
        out.append((text_piece, min(lp_sum, 0.0), start, e))
        buffer = b""
        lp_sum = 0.0
        start = None
    if buffer:
        # trailing malformed bytes (can't happen for valid UTF-8 input)
        out.append((buffer.decode("utf-8", errors="replace"), min(lp_sum, 0.0), start, start + len(buffer)))
    return out


def load_scorer(checkpoint: str | Path, vocab: str | Path, model_id: str) -> Scorer:
    from .model import load_checkpoint

    return Scorer(bpe=ByteBPE.load(vocab), model=load_checkpoint(checkpoint), model_id=model_id)


def packaged_scorer(model_id: str = "tiny-gpt") -> Scorer:
    """Load the checkpoint shipped inside the package."""
    data_dir = Path(__file__).parent / "data"
    return load_scorer(data_dir / "tiny_gpt.pt", data_dir / "bpe_vocab.json", model_id)
