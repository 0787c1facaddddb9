"""``logprob-extractor`` command line: train, batch scoring, HTTP serving."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .scoring import load_scorer, packaged_scorer


def _scorer_from_args(args):
    if args.checkpoint and args.vocab:
        return load_scorer(args.checkpoint, args.vocab, args.model_id)
    return packaged_scorer(args.model_id)


def main(argv=None):
    parser = argparse.ArgumentParser(prog="logprob-extractor")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train the BPE vocabulary and the tiny causal LM")
    p_train.add_argument("--corpus", action="append", required=True, type=Path,
                         help="natural-text training file (repeatable)")
    p_train.add_argument("--out-dir", required=True, type=Path)
    p_train.add_argument("--merges", type=int, default=400)
    p_train.add_argument("--steps", type=int, default=1500)
    p_train.add_argument("--batch-size", type=int, default=16)
    p_train.add_argument("--d-model", type=int, default=128)
    p_train.add_argument("--n-layers", type=int, default=2)
    p_train.add_argument("--n-ctx", type=int, default=256)
    p_train.add_argument("--curriculum-paragraphs", type=int, default=1200)

    p_score = sub.add_parser("score-file", help="score request JSONL into scored-text JSONL")
    p_score.add_argument("--requests", required=True, type=Path,
                         help='JSONL of {"model_id","text","context_sentences","context_char_len"}')
    p_score.add_argument("--out", required=True, type=Path)
    p_score.add_argument("--model-id", default="tiny-gpt")
    p_score.add_argument("--checkpoint", type=Path)
    p_score.add_argument("--vocab", type=Path)

    p_serve = sub.add_parser("serve", help="run the POST /score HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8808)
    p_serve.add_argument("--model-id", default="tiny-gpt")
    p_serve.add_argument("--checkpoint", type=Path)
    p_serve.add_argument("--vocab", type=Path)

    args = parser.parse_args(argv)

    if args.command == "train":
        from .train import train

        train(
            natural_paths=args.corpus,
            out_dir=args.out_dir,
            n_merges=args.merges,
            steps=args.steps,
            batch_size=args.batch_size,
            d_model=args.d_model,
            n_layers=args.n_layers,
            n_ctx=args.n_ctx,
            curriculum_paragraphs=args.curriculum_paragraphs,
        )
        return 0

    if args.command == "score-file":
        scorer = _scorer_from_args(args)
        n = 0
        with open(args.requests, encoding="utf-8") as fin, open(
            args.out, "w", encoding="utf-8"
        ) as fout:
            for line in fin:
                line = line.strip()
                if not line:
                    continue
                req = json.loads(line)
                if req.get("model_id", scorer.model_id) != scorer.model_id:
                    print(f"skipping request for unknown model {req['model_id']!r}", file=sys.stderr)
                    continue
                obj = scorer.score(
                    req["text"],
                    int(req.get("context_sentences", 0)),
                    int(req.get("context_char_len", 0)),
                )
                fout.write(json.dumps(obj, ensure_ascii=False, separators=(",", ":")) + "\n")
                n += 1
        print(f"scored {n} requests -> {args.out}")
        return 0

    if args.command == "serve":
        from .server import serve

        scorer = _scorer_from_args(args)
        print(f"serving {scorer.model_id} on http://{args.host}:{args.port}")
        serve(scorer, host=args.host, port=args.port)
        return 0

    return 1


if __name__ == "__main__":
    sys.exit(main())
