"""Training: learn the BPE vocabulary and fit the causal LM on CPU."""
from __future__ import annotations

import json
import math
import time
from pathlib import Path

import torch
import torch.nn.functional as F

from .bpe import train_bpe
from .curriculum import generate as generate_curriculum
from .model import ModelConfig, TinyGPT, save_checkpoint


def build_corpus(natural_paths: list[Path], n_paragraphs: int, seed: int) -> str:
    parts = [p.read_text(encoding="utf-8") for p in natural_paths]
    parts.append(generate_curriculum(n_paragraphs=n_paragraphs, seed=seed))
    return "\n".join(parts)


def train(
    natural_paths: list[Path],
    out_dir: Path,
    n_merges: int = 400,
    n_ctx: int = 256,
    d_model: int = 128,
    n_layers: int = 2,
    n_heads: int = 4,
    steps: int = 1500,
    batch_size: int = 16,
    lr: float = 3e-3,
    seed: int = 7,
    curriculum_paragraphs: int = 1200,
    log=print,
) -> Path:
    torch.manual_seed(seed)
    out_dir.mkdir(parents=True, exist_ok=True)

    corpus = build_corpus(natural_paths, curriculum_paragraphs, seed=20240)
    log(f"corpus: {len(corpus)} chars")

    t0 = time.time()
    bpe = train_bpe(corpus, n_merges=n_merges)
    bpe.save(out_dir / "bpe_vocab.json")
    log(f"bpe: {bpe.vocab_size} tokens ({time.time() - t0:.1f}s)")

    stream = torch.tensor([t.token_id for t in bpe.encode(corpus)], dtype=torch.long)
    log(f"stream: {len(stream)} tokens")

    cfg = ModelConfig(
        vocab_size=bpe.vocab_size, n_ctx=n_ctx, d_model=d_model,
        n_layers=n_layers, n_heads=n_heads,
    )
    model = TinyGPT(cfg)
    n_params = sum(p.numel() for p in model.parameters())
    log(f"model: {n_params} parameters")

    opt = torch.optim.AdamW(model.parameters(), lr=lr, weight_decay=0.01)
    sched = torch.optim.lr_scheduler.CosineAnnealingLR(opt, T_max=steps, eta_min=lr / 10)
    gen = torch.Generator().manual_seed(seed)
    bos = bpe.bos_id
    losses = []
    model.train()
    for step in range(1, steps + 1):
        starts = torch.randint(0, len(stream) - n_ctx, (batch_size,), generator=gen)
        window = torch.stack([stream[s : s + n_ctx] for s in starts])
        seq = torch.cat([torch.full((batch_size, 1), bos, dtype=torch.long), window], dim=1)
        x, y = seq[:, :-1], seq[:, 1:]
        logits = model(x)
        loss = F.cross_entropy(logits.reshape(-1, cfg.vocab_size), y.reshape(-1))
        opt.zero_grad()
        loss.backward()
        torch.nn.utils.clip_grad_norm_(model.parameters(), 1.0)
        opt.step()
        sched.step()
        losses.append(float(loss))
        if step % 50 == 0 or step == 1:
            recent = sum(losses[-50:]) / len(losses[-50:])
            log(f"step {step}/{steps} loss {recent:.3f} ({recent / math.log(2):.2f} bits/token)")

    model.eval()
    save_checkpoint(model, out_dir / "tiny_gpt.pt")
    (out_dir / "training_meta.json").write_text(
        json.dumps(
            {
                "steps": steps,
                "final_loss": sum(losses[-50:]) / len(losses[-50:]),
                "n_params": n_params,
                "corpus_chars": len(corpus),
                "stream_tokens": len(stream),
            },
            indent=1,
        )
        + "\n",
        encoding="utf-8",
    )
    log(f"saved checkpoint to {out_dir / 'tiny_gpt.pt'}")
    return out_dir
