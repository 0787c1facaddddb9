"""End-to-end pipeline with content-hash incremental staging.

Stages run in dependency order (score -> surprisal -> prominence ->
givenness -> join -> analyze).  A stage is skipped when its recorded input
hashes still match and its outputs exist unmodified; anything downstream of
a stage that ran is re-run.  Scoring against a remote LM service is the
expensive step and is never repeated silently.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import analysis, corpus, givenness, lm_backend, prominence, surprisal
from .errors import ConfigError, ProsignError, StageError
from .prominence.config import ProminenceConfig, parse_kv_file

STAGES = ("score", "surprisal", "prominence", "givenness", "join", "analyze")

_STAMPS_NAME = ".stamps.json"


@dataclass(frozen=True)
class Diagnostic:
    level: str  # "error" | "warning"
    message: str


@dataclass(frozen=True)
class PipelineConfig:
    metadata: Path
    out_dir: Path
    audio_dir: Path | None = None
    alignments_dir: Path | None = None
    counts: Path | None = None
    scored_jsonl: tuple[Path, ...] = ()
    stopwords: Path | None = None
    models: tuple[str, ...] = ()
    contexts: tuple[int, ...] = (0, 1, 2, 3, 4, 5)
    joiner: str = " "
    backend: str = "file"  # "file" | "http"
    endpoint: str | None = None
    cache_dir: Path | None = None
    workers: int = 4
    text_field: str = "normalized"
    join_loss_threshold: float = 0.05
    lookback: int = 10
    givenness_model: str | None = None
    max_context: int = 5
    prominence: ProminenceConfig = field(default_factory=ProminenceConfig)

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        kv = parse_kv_file(path)
        base = Path(path).parent

        def _path(key):
            return (base / kv[key]).resolve() if key in kv else None

        def _unquote(s):
            if len(s) >= 2 and s[0] == s[-1] == '"':
                return s[1:-1]
            return s

        try:
            cfg = cls(
                metadata=_path("metadata") or Path(""),
                out_dir=_path("out_dir") or Path(""),
                audio_dir=_path("audio_dir"),
                alignments_dir=_path("alignments_dir"),
                counts=_path("counts"),
                scored_jsonl=tuple(
                    (base / p.strip()).resolve()
                    for p in kv.get("scored_jsonl", "").split(",")
                    if p.strip()
                ),
                stopwords=_path("stopwords"),
                models=tuple(m.strip() for m in kv.get("models", "").split(",") if m.strip()),
                contexts=tuple(
                    int(c) for c in kv.get("contexts", "0,1,2,3,4,5").split(",") if c.strip()
                ),
                joiner=_unquote(kv.get("joiner", '" "')),
                backend=kv.get("backend", "file"),
                endpoint=kv.get("endpoint"),
                cache_dir=_path("cache_dir"),
                workers=int(kv.get("workers", "4")),
                text_field=kv.get("text_field", "normalized"),
                join_loss_threshold=float(kv.get("join_loss_threshold", "0.05")),
                lookback=int(kv.get("lookback", "10")),
                givenness_model=kv.get("givenness_model"),
                max_context=int(kv.get("max_context", "5")),
                prominence=_prominence_from_kv(kv),
            )
        except (ValueError, ConfigError) as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        return cfg

    def effective_workers(self) -> int:
        env = os.environ.get("PROSIGN_WORKERS")
        if env:
            try:
                return max(1, int(env))
            except ValueError as exc:
                raise ConfigError(f"PROSIGN_WORKERS={env!r} is not an integer") from exc
        return max(1, self.workers)


def _prominence_from_kv(kv: dict[str, str]) -> ProminenceConfig:
    from .prominence.config import prominence_config_from_kv

    return prominence_config_from_kv(
        {k: v for k, v in kv.items() if k.startswith("prominence.")}, prefix="prominence."
    )


def validate_config(config: PipelineConfig) -> list[Diagnostic]:
    """Static checks; errors block the run, warnings do not."""
    diags: list[Diagnostic] = []

    def err(msg):
        diags.append(Diagnostic("error", msg))

    def warn(msg):
        diags.append(Diagnostic("warning", msg))

    if not config.metadata or not Path(config.metadata).is_file():
        err(f"metadata file not found: {config.metadata}")
    if not config.models:
        err("empty model list")
    if not config.contexts:
        err("empty context list")
    for c in config.contexts:
        if c < 0 or c > config.max_context:
            err(f"context value {c} outside [0, {config.max_context}] (raise max_context to override)")
    if config.backend not in ("file", "http"):
        err(f"unknown backend {config.backend!r}")
    if config.backend == "file" and not config.scored_jsonl:
        err("backend=file requires scored_jsonl")
    if config.backend == "http" and not config.endpoint:
        err("backend=http requires endpoint")
    for p in config.scored_jsonl:
        if not Path(p).is_file():
            err(f"scored JSONL not found: {p}")
    if config.audio_dir is None:
        err("audio_dir is required (prominence stage)")
    elif not Path(config.audio_dir).is_dir():
        err(f"audio directory not found: {config.audio_dir}")
    if config.alignments_dir is None:
        err("alignments_dir is required (prominence stage)")
    elif not Path(config.alignments_dir).is_dir():
        err(f"alignment directory not found: {config.alignments_dir}")
    if config.stopwords is not None and not Path(config.stopwords).is_file():
        err(f"stop-word file not found: {config.stopwords} (word-class analysis needs it)")
    if config.counts is None:
        warn("no counts file; unigram variant will be skipped")
    elif not Path(config.counts).is_file():
        err(f"counts file not found: {config.counts}")
    if config.text_field not in ("normalized", "raw"):
        err(f"unknown text_field {config.text_field!r}")
    if not config.out_dir:
        err("out_dir is required")
    if config.cache_dir is not None and config.backend == "file":
        warn("cache_dir is unused with backend=file")
    if config.givenness_model is not None and config.givenness_model not in config.models:
        err(f"givenness_model {config.givenness_model!r} not in models")
    return diags


# ---------------------------------------------------------------------------
# Content-hash staging
# ---------------------------------------------------------------------------


def _hash_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _hash_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class _Stamps:
    def __init__(self, out_dir: Path):
        self.path = out_dir / _STAMPS_NAME
        self.data: dict = {}
        if self.path.exists():
            try:
                self.data = json.loads(self.path.read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError):
                self.data = {}

    def save(self):
        self.path.write_text(
            json.dumps(self.data, sort_keys=True, indent=1) + "\n", encoding="utf-8"
        )


def _input_hashes(
    paths: list[Path], extra: dict[str, str] | None = None, out_dir: Path | None = None
) -> dict[str, str]:
    hashes = {}
    for p in paths:
        key = p
        if out_dir is not None and Path(p).is_relative_to(out_dir):
            key = Path(p).relative_to(out_dir)
        hashes[str(key)] = _hash_file(p)
    if extra:
        for k, v in extra.items():
            hashes[f"<{k}>"] = _hash_text(v)
    return hashes


@dataclass
class StageResult:
    name: str
    ran: bool
    message: str = ""


class _Runner:
    def __init__(self, config: PipelineConfig, log=None):
        self.config = config
        self.out = Path(config.out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.stamps = _Stamps(self.out)
        self.results: list[StageResult] = []
        self._dirty = False
        self.log = log or (lambda msg: None)

    def run_stage(self, name, inputs: dict[str, str], outputs: list[Path], fn) -> None:
        rel_outputs = [p.relative_to(self.out) if p.is_relative_to(self.out) else p for p in outputs]
        recorded = self.stamps.data.get(name)
        if not self._dirty and recorded is not None:
            outputs_ok = all(p.exists() for p in outputs) and all(
                recorded.get("outputs", {}).get(str(rp)) == _hash_file(p)
                for rp, p in zip(rel_outputs, outputs)
            )
            if outputs_ok and recorded.get("inputs") == inputs:
                self.results.append(StageResult(name, ran=False, message="up to date"))
                self.log(f"[{name}] up to date")
                return
        self.log(f"[{name}] running")
        try:
            fn()
        except ProsignError as exc:
            raise StageError(name, str(exc)) from exc
        self._dirty = True
        self.stamps.data[name] = {
            "inputs": inputs,
            "outputs": {str(rp): _hash_file(p) for rp, p in zip(rel_outputs, outputs)},
        }
        self.results.append(StageResult(name, ran=True))


def run_pipeline(config: PipelineConfig, log=None) -> Path:
    """Execute (or skip) every stage; returns the artifact directory."""
    diags = validate_config(config)
    errors = [d for d in diags if d.level == "error"]
    if errors:
        raise ConfigError("; ".join(d.message for d in errors))

    runner = _Runner(config, log=log)
    out = runner.out

    stopwords = corpus.load_stopwords(config.stopwords)
    layout = corpus.CorpusLayout(
        audio_dir=config.audio_dir,
        alignment_dir=config.alignments_dir,
        text_field=config.text_field,
    )
    manifest = corpus.load_manifest(config.metadata, layout, stopwords=stopwords)
    specs = [surprisal.ContextSpec(c) for c in config.contexts]

    scored_path = out / "scored.jsonl"
    surprisal_path = out / "surprisal.csv"
    prosody_path = out / "prosody.csv"
    givenness_path = out / "givenness.csv"
    records_path = out / "records.csv"
    correlations_path = out / "correlations.csv"
    profile_path = out / "givenness_profile.csv"

    config_fp = repr(
        (
            config.models,
            config.contexts,
            config.joiner,
            config.text_field,
            config.lookback,
            config.join_loss_threshold,
            config.givenness_model,
            config.prominence,
        )
    )

    # -- score ---------------------------------------------------------------
    def do_score():
        requests = []
        for seg in manifest.segments:
            for spec in specs:
                text, ccl, _base = surprisal.scored_request(manifest, seg.id, spec, config.joiner)
                for model in config.models:
                    requests.append((text, model, spec.n_segments, ccl))
        if config.backend == "file":
            scorer = lm_backend.FileScorer.from_paths(list(config.scored_jsonl))
        else:
            cache = lm_backend.ScoreCache(config.cache_dir) if config.cache_dir else None
            scorer = lm_backend.HttpScorer(
                lm_backend.ServiceConfig(
                    base_url=config.endpoint, workers=config.effective_workers()
                ),
                cache=cache,
            )
        records = {}
        if isinstance(scorer, lm_backend.HttpScorer):
            scored_all = scorer.score_many(requests)
            for rec in scored_all:
                records[(rec.model_id, rec.context_sentences, rec.text)] = rec
        else:
            for text, model, k, ccl in requests:
                rec = scorer.score(text, model_id=model, context_sentences=k, context_char_len=ccl)
                records[(rec.model_id, rec.context_sentences, rec.text)] = rec
        ordered = [records[k] for k in sorted(records)]
        lm_backend.save_scored_file(ordered, scored_path)

    score_inputs = _input_hashes(
        [config.metadata, *config.scored_jsonl],
        extra={"config": config_fp, "backend": f"{config.backend}:{config.endpoint}"},
    )
    runner.run_stage("score", score_inputs, [scored_path], do_score)

    # -- surprisal -----------------------------------------------------------
    def do_surprisal():
        scorer = lm_backend.FileScorer.from_paths([scored_path])
        unigram = lm_backend.load_unigram_counts(config.counts) if config.counts else None
        rows: list[surprisal.WordSurprisal] = []
        for i, model in enumerate(config.models):
            rows.extend(
                surprisal.surprisal_table(
                    manifest,
                    scorer,
                    specs,
                    model_id=model,
                    unigram=unigram if i == 0 else None,
                    joiner=config.joiner,
                )
            )
        surprisal.save_surprisal_csv(rows, surprisal_path)

    surprisal_inputs = _input_hashes(
        [scored_path, config.metadata] + ([config.counts] if config.counts else []),
        extra={"config": config_fp},
        out_dir=out,
    )
    runner.run_stage("surprisal", surprisal_inputs, [surprisal_path], do_surprisal)

    # -- prominence ----------------------------------------------------------
    def do_prominence():
        def one(seg: corpus.Segment):
            alignment = corpus.load_alignment(seg.alignment_path)
            match = corpus.match_words(seg.text, alignment)
            audio, sr = prominence.read_wav_mono(seg.audio_path)
            rows = prominence.analyze_utterance(
                audio, sr, alignment, config.prominence, segment_id=seg.id
            )
            align_to_text = {a: t for t, a in match.pairs}
            text_words = dict(enumerate(corpus.split_words(seg.text)))
            return prominence.reindex_to_text_words(rows, align_to_text, text_words)

        workers = config.effective_workers()
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                per_segment = list(pool.map(one, manifest.segments))
        else:
            per_segment = [one(seg) for seg in manifest.segments]
        rows = [r for seg_rows in per_segment for r in seg_rows]
        prominence.save_prosody_csv(rows, prosody_path)

    prom_files = [config.metadata]
    for seg in manifest.segments:
        if seg.audio_path is None or seg.alignment_path is None:
            raise ConfigError("prominence stage requires audio_dir and alignments_dir")
        prom_files.extend([seg.audio_path, seg.alignment_path])
    prominence_inputs = _input_hashes(prom_files, extra={"config": config_fp})
    runner.run_stage("prominence", prominence_inputs, [prosody_path], do_prominence)

    # -- givenness -----------------------------------------------------------
    def do_givenness():
        records = givenness.assign_distances(manifest, lookback_sentences=config.lookback)
        givenness.save_givenness_csv(records, givenness_path)

    givenness_inputs = _input_hashes(
        [config.metadata] + ([config.stopwords] if config.stopwords else []),
        extra={"config": config_fp},
    )
    runner.run_stage("givenness", givenness_inputs, [givenness_path], do_givenness)

    # -- join ----------------------------------------------------------------
    join_report_path = out / "join_report.json"

    def do_join():
        srows = surprisal.load_surprisal_csv(surprisal_path)
        prows = prominence.load_prosody_csv(prosody_path)
        grows = givenness.load_givenness_csv(givenness_path)
        records, report = analysis.join_records(
            srows, prows, grows, manifest, loss_threshold=config.join_loss_threshold
        )
        analysis.save_records_csv(records, records_path)
        join_report_path.write_text(
            json.dumps(dataclasses.asdict(report), sort_keys=True, indent=1) + "\n",
            encoding="utf-8",
        )

    join_inputs = _input_hashes(
        [surprisal_path, prosody_path, givenness_path, config.metadata],
        extra={"config": config_fp},
        out_dir=out,
    )
    runner.run_stage("join", join_inputs, [records_path, join_report_path], do_join)

    # -- analyze -------------------------------------------------------------
    scatter_variant = _scatter_variant(config)
    scatter_path = out / f"scatter_{scatter_variant.replace(':', '_')}_prominence.json"

    def do_analyze():
        records = analysis.load_records_csv(records_path)
        report = analysis.correlation_grid(records)
        analysis.save_correlation_csv(report, correlations_path)
        analysis.save_scatter_json(
            analysis.scatter_export(records, scatter_variant, "prominence"), scatter_path
        )
        _write_profile(config, records, profile_path)

    analyze_inputs = _input_hashes([records_path], extra={"config": config_fp}, out_dir=out)
    runner.run_stage(
        "analyze", analyze_inputs, [correlations_path, scatter_path, profile_path], do_analyze
    )

    runner.stamps.save()
    return out


def _scatter_variant(config: PipelineConfig) -> str:
    model = config.givenness_model or config.models[0]
    k = max(config.contexts)
    return surprisal.variant_key(f"sup_{k}", model)


def _write_profile(config: PipelineConfig, records: list[analysis.WordRecord], path: Path) -> None:
    """Givenness profile of prominence and the shortest/longest-context variants."""
    model = config.givenness_model or config.models[0]
    k_lo, k_hi = min(config.contexts), max(config.contexts)
    v_lo = surprisal.variant_key(f"sup_{k_lo}", model)
    v_hi = surprisal.variant_key(f"sup_{k_hi}", model)

    grecords = [r.givenness for r in records if r.givenness is not None]
    series = {
        "prom": {r.key: r.prosody.prominence for r in records if r.givenness is not None},
        f"sup{k_lo}": {
            r.key: r.surprisal[v_lo] for r in records if r.givenness is not None and v_lo in r.surprisal
        },
        f"sup{k_hi}": {
            r.key: r.surprisal[v_hi] for r in records if r.givenness is not None and v_hi in r.surprisal
        },
    }
    profiles = {}
    for name, values in series.items():
        normalized = givenness.novelty_normalize(values, grecords)
        profiles[name] = givenness.givenness_profile(normalized, grecords, config.lookback)
    givenness.save_profile_csv(profiles, path)
