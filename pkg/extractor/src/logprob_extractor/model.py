"""A small GPT-2-class causal transformer (decoder-only, pre-LN, tied head)."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path

import torch
import torch.nn as nn
import torch.nn.functional as F


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    n_ctx: int = 256
    d_model: int = 128
    n_layers: int = 2
    n_heads: int = 4


class Block(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.ln1 = nn.LayerNorm(cfg.d_model)
        self.attn = nn.MultiheadAttention(cfg.d_model, cfg.n_heads, batch_first=True)
        self.ln2 = nn.LayerNorm(cfg.d_model)
        self.mlp = nn.Sequential(
            nn.Linear(cfg.d_model, 4 * cfg.d_model),
            nn.GELU(),
            nn.Linear(4 * cfg.d_model, cfg.d_model),
        )

    def forward(self, x, attn_mask):
        h = self.ln1(x)
        attn_out, _ = self.attn(h, h, h, attn_mask=attn_mask, need_weights=False)
        x = x + attn_out
        x = x + self.mlp(self.ln2(x))
        return x


class TinyGPT(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        self.tok_emb = nn.Embedding(cfg.vocab_size, cfg.d_model)
        self.pos_emb = nn.Embedding(cfg.n_ctx, cfg.d_model)
        self.blocks = nn.ModuleList(Block(cfg) for _ in range(cfg.n_layers))
        self.ln_f = nn.LayerNorm(cfg.d_model)
        # output head tied to the token embedding

    def forward(self, ids: torch.Tensor) -> torch.Tensor:
        _, seq = ids.shape
        if seq > self.cfg.n_ctx:
            raise ValueError(f"sequence length {seq} exceeds context {self.cfg.n_ctx}")
        pos = torch.arange(seq, device=ids.device)
        x = self.tok_emb(ids) + self.pos_emb(pos)[None, :, :]
        mask = torch.full((seq, seq), float("-inf"), device=ids.device).triu(1)
        for block in self.blocks:
            x = block(x, mask)
        x = self.ln_f(x)
        return x @ self.tok_emb.weight.T

    def token_logprobs(self, ids: list[int]) -> torch.Tensor:
        """log P(ids[i] | ids[:i]) for i >= 1, one forward pass."""
        with torch.no_grad():
            t = torch.tensor([ids], dtype=torch.long)
            logits = self.forward(t[:, :-1])
            logprobs = F.log_softmax(logits.double(), dim=-1)
            targets = t[:, 1:]
            return logprobs[0].gather(1, targets[0][:, None])[:, 0]


def save_checkpoint(model: TinyGPT, path: str | Path) -> None:
    torch.save({"config": asdict(model.cfg), "state": model.state_dict()}, path)


def load_checkpoint(path: str | Path) -> TinyGPT:
    payload = torch.load(path, map_location="cpu", weights_only=True)
    model = TinyGPT(ModelConfig(**payload["config"]))
    model.load_state_dict(payload["state"])
    model.eval()
    return model
