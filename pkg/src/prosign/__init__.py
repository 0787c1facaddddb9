"""prosign: word surprisal, wavelet word prominence, and prosody analyses.

Subpackages and modules map one-to-one onto the pipeline stages:

- :mod:`prosign.corpus` — metadata/alignment ingestion and word matching
- :mod:`prosign.lm_backend` — token log-probability sources (file, HTTP, unigram)
- :mod:`prosign.surprisal` — context construction and word-surprisal aggregation
- :mod:`prosign.prominence` — f0/energy/duration tracks, CWT, word measures
- :mod:`prosign.givenness` — distance-to-previous-occurrence and normalization
- :mod:`prosign.analysis` — joined records, Spearman grid, scatter export
- :mod:`prosign.synth_eval` — objective synthesis evaluation (RMSE/Pearson)
- :mod:`prosign.pipeline` — incremental content-hash staged pipeline
"""

__version__ = "0.1.0"
