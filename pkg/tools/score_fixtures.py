#!/usr/bin/env python3
"""Produce the checked-in scored JSONL fixture for the story corpus.

Starts the extractor's HTTP service, then drives it through
``prosign score --backend http`` for contexts 0..5, exercising the full wire
path the pipeline uses in production.
"""
from __future__ import annotations

import subprocess
import sys
import time
from pathlib import Path

import requests

ROOT = Path(__file__).parent.parent
STORY = ROOT / "tests" / "fixtures" / "story"
PORT = 8917


def wait_ready(url: str, timeout: float = 60.0) -> None:
    deadline = time.time() + timeout
    while time.time() < deadline:
        try:
            if requests.get(f"{url}/health", timeout=2).json().get("status") == "ready":
                return
        except requests.RequestException:
            pass
        time.sleep(0.5)
    raise RuntimeError("extractor service did not become ready")


def main():
    server = subprocess.Popen(
        [sys.executable, "-m", "logprob_extractor.cli", "serve", "--port", str(PORT)],
        stdout=subprocess.DEVNULL,
        stderr=subprocess.DEVNULL,
    )
    try:
        url = f"http://127.0.0.1:{PORT}"
        wait_ready(url)
        out = STORY / "scored_tiny-gpt.jsonl"
        subprocess.run(
            [
                sys.executable, "-m", "prosign.cli", "score",
                "--backend", "http",
                "--model", "tiny-gpt",
                "--context", "0,1,2,3,4,5",
                "--metadata", str(STORY / "metadata.txt"),
                "--endpoint", url,
                "--out", str(out),
            ],
            check=True,
        )
        print(f"fixture written to {out}")
    finally:
        server.terminate()
        server.wait(timeout=10)


if __name__ == "__main__":
    main()
