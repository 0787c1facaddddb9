"""Reference producer of per-token log-probabilities.

Ships a byte-level BPE tokenizer and a small GPT-2-class causal transformer
trained in-repo; emits scored-text JSONL and serves the ``POST /score``
endpoint consumed by downstream analysis tools.
"""

__version__ = "0.1.0"
