"""``prosign`` command-line entry point.

Exit codes: 0 success, 2 validation/configuration problem, 3 stage failure.
"""
from __future__ import annotations

import sys
from pathlib import Path

import click

from . import analysis, corpus, givenness, lm_backend, pipeline, prominence, surprisal
from .errors import (
    ConfigError,
    CoverageError,
    JoinError,
    ParseError,
    ProsignError,
    ProtocolError,
    StageError,
    TransportError,
    ValidationError,
)

EXIT_VALIDATION = 2
EXIT_STAGE = 3

_VALIDATION_ERRORS = (ConfigError, ValidationError, ParseError, CoverageError, JoinError)


def _run(fn):
    try:
        fn()
    except StageError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_STAGE)
    except _VALIDATION_ERRORS as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    except (ProtocolError, TransportError, ProsignError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_STAGE)


def _parse_contexts(value: str) -> list[int]:
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad context list {value!r}") from exc


@click.group()
def main():
    """Word surprisal, wavelet prominence, and prosody correlation toolkit."""


# -- corpus -------------------------------------------------------------------


@main.group("corpus")
def corpus_group():
    """Corpus inspection commands."""


@corpus_group.command("validate")
@click.option("--metadata", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--alignments", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--audio", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--stopwords", type=click.Path(exists=True, path_type=Path))
@click.option("--text-field", default="normalized", show_default=True)
def corpus_validate(metadata, alignments, audio, stopwords, text_field):
    """Check metadata, audio and alignment files for consistency."""

    def go():
        layout = corpus.CorpusLayout(audio_dir=audio, alignment_dir=alignments, text_field=text_field)
        manifest = corpus.load_manifest(metadata, layout, stopwords=corpus.load_stopwords(stopwords))
        problems = corpus.validate_corpus(manifest)
        for p in problems:
            click.echo(p)
        click.echo(f"{len(manifest.segments)} segments, {len(problems)} problems")
        if problems:
            sys.exit(EXIT_VALIDATION)

    _run(go)


# -- score ---------------------------------------------------------------------


@main.command("score")
@click.option("--backend", type=click.Choice(["file", "http"]), required=True)
@click.option("--model", "model_id", required=True)
@click.option("--context", "contexts", default="0,1,2,3,4,5", show_default=True,
              help="Context size or comma list of sizes (segments)")
@click.option("--metadata", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
@click.option("--scored", "scored_in", multiple=True, type=click.Path(exists=True, path_type=Path),
              help="Pre-scored JSONL source(s) for backend=file")
@click.option("--endpoint", help="Base URL of the scoring service (backend=http)")
@click.option("--cache", "cache_dir", type=click.Path(path_type=Path))
@click.option("--joiner", default=" ", show_default=False, help="Context segment joiner")
@click.option("--text-field", default="normalized", show_default=True)
@click.option("--workers", default=4, show_default=True)
def score_cmd(backend, model_id, contexts, metadata, out_path, scored_in, endpoint, cache_dir,
              joiner, text_field, workers):
    """Obtain per-token log-probabilities for every (segment x context)."""

    def go():
        manifest = corpus.load_manifest(metadata, corpus.CorpusLayout(text_field=text_field))
        specs = [surprisal.ContextSpec(c) for c in _parse_contexts(contexts)]
        if backend == "file":
            if not scored_in:
                raise ConfigError("backend=file requires at least one --scored source")
            scorer = lm_backend.FileScorer.from_paths(list(scored_in))
        else:
            if not endpoint:
                raise ConfigError("backend=http requires --endpoint")
            cache = lm_backend.ScoreCache(cache_dir) if cache_dir else None
            scorer = lm_backend.HttpScorer(
                lm_backend.ServiceConfig(base_url=endpoint, workers=workers), cache=cache
            )
        records = {}
        requests_list = []
        for seg in manifest.segments:
            for spec in specs:
                text, ccl, _ = surprisal.scored_request(manifest, seg.id, spec, joiner)
                requests_list.append((text, model_id, spec.n_segments, ccl))
        if isinstance(scorer, lm_backend.HttpScorer):
            for rec in scorer.score_many(requests_list):
                records[(rec.model_id, rec.context_sentences, rec.text)] = rec
        else:
            for text, mid, k, ccl in requests_list:
                rec = scorer.score(text, model_id=mid, context_sentences=k, context_char_len=ccl)
                records[(rec.model_id, rec.context_sentences, rec.text)] = rec
        ordered = [records[k] for k in sorted(records)]
        lm_backend.save_scored_file(ordered, out_path)
        click.echo(f"wrote {len(ordered)} scored records to {out_path}")

    _run(go)


# -- surprisal -------------------------------------------------------------------


@main.command("surprisal")
@click.option("--scored", "scored_paths", multiple=True, required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--contexts", default="0,1,2,3,4,5", show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
@click.option("--metadata", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--model", "model_ids", multiple=True, required=True)
@click.option("--counts", type=click.Path(exists=True, path_type=Path),
              help="Unigram counts file (adds the unigram variant)")
@click.option("--joiner", default=" ")
@click.option("--text-field", default="normalized", show_default=True)
def surprisal_cmd(scored_paths, contexts, out_path, metadata, model_ids, counts, joiner, text_field):
    """Aggregate token log-probabilities into the word-surprisal table."""

    def go():
        manifest = corpus.load_manifest(metadata, corpus.CorpusLayout(text_field=text_field))
        scorer = lm_backend.FileScorer.from_paths(list(scored_paths))
        specs = [surprisal.ContextSpec(c) for c in _parse_contexts(contexts)]
        unigram = lm_backend.load_unigram_counts(counts) if counts else None
        rows = []
        for i, model_id in enumerate(model_ids):
            rows.extend(
                surprisal.surprisal_table(
                    manifest, scorer, specs, model_id=model_id,
                    unigram=unigram if i == 0 else None, joiner=joiner,
                )
            )
        surprisal.save_surprisal_csv(rows, out_path)
        click.echo(f"wrote {len(rows)} word-surprisal rows to {out_path}")

    _run(go)


# -- prominence ------------------------------------------------------------------


@main.command("prominence")
@click.option("--metadata", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--audio", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--alignments", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path),
              help="Flat key=value file of prominence.* options")
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
@click.option("--text-field", default="normalized", show_default=True)
def prominence_cmd(metadata, audio, alignments, config_path, out_path, text_field):
    """Estimate continuous word prominence and signal measures per word."""

    def go():
        cfg = prominence.ProminenceConfig()
        if config_path:
            kv = prominence.parse_kv_file(config_path)
            prefix = "prominence." if any(k.startswith("prominence.") for k in kv) else ""
            cfg = prominence.prominence_config_from_kv(kv, prefix=prefix)
        layout = corpus.CorpusLayout(audio_dir=audio, alignment_dir=alignments, text_field=text_field)
        manifest = corpus.load_manifest(metadata, layout)
        rows = []
        for seg in manifest.segments:
            alignment = corpus.load_alignment(seg.alignment_path)
            match = corpus.match_words(seg.text, alignment)
            wav, sr = prominence.read_wav_mono(seg.audio_path)
            seg_rows = prominence.analyze_utterance(wav, sr, alignment, cfg, segment_id=seg.id)
            align_to_text = {a: t for t, a in match.pairs}
            text_words = dict(enumerate(corpus.split_words(seg.text)))
            rows.extend(prominence.reindex_to_text_words(seg_rows, align_to_text, text_words))
        prominence.save_prosody_csv(rows, out_path)
        click.echo(f"wrote {len(rows)} word-prosody rows to {out_path}")

    _run(go)


# -- givenness -------------------------------------------------------------------


@main.command("givenness")
@click.option("--metadata", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--stopwords", type=click.Path(exists=True, path_type=Path))
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
@click.option("--lookback", default=10, show_default=True)
@click.option("--text-field", default="normalized", show_default=True)
def givenness_cmd(metadata, stopwords, out_path, lookback, text_field):
    """Assign distance-from-previous-occurrence to every word."""

    def go():
        manifest = corpus.load_manifest(
            metadata, corpus.CorpusLayout(text_field=text_field),
            stopwords=corpus.load_stopwords(stopwords),
        )
        records = givenness.assign_distances(manifest, lookback_sentences=lookback)
        givenness.save_givenness_csv(records, out_path)
        click.echo(f"wrote {len(records)} givenness rows to {out_path}")

    _run(go)


# -- analyze / scatter -------------------------------------------------------------


@main.command("analyze")
@click.option("--records", "records_dir", required=True, type=click.Path(exists=True, path_type=Path),
              help="Directory holding surprisal.csv, prosody.csv, givenness.csv")
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
@click.option("--metadata", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--stopwords", type=click.Path(exists=True, path_type=Path))
@click.option("--loss-threshold", default=0.05, show_default=True)
@click.option("--text-field", default="normalized", show_default=True)
def analyze_cmd(records_dir, out_dir, metadata, stopwords, loss_threshold, text_field):
    """Join tables and compute the correlation grid."""

    def go():
        manifest = corpus.load_manifest(
            metadata, corpus.CorpusLayout(text_field=text_field),
            stopwords=corpus.load_stopwords(stopwords),
        )
        srows = surprisal.load_surprisal_csv(Path(records_dir) / "surprisal.csv")
        prows = prominence.load_prosody_csv(Path(records_dir) / "prosody.csv")
        grows = givenness.load_givenness_csv(Path(records_dir) / "givenness.csv")
        records, report = analysis.join_records(
            srows, prows, grows, manifest, loss_threshold=loss_threshold
        )
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        analysis.save_records_csv(records, out / "records.csv")
        grid = analysis.correlation_grid(records)
        analysis.save_correlation_csv(grid, out / "correlations.csv")
        click.echo(
            f"joined {report.joined} records "
            f"(dropped {report.surprisal_dropped} surprisal / {report.prosody_dropped} prosody); "
            f"wrote {out / 'correlations.csv'}"
        )

    _run(go)


@main.command("scatter")
@click.option("--variant", required=True, help="Surprisal variant key, e.g. sup_5 or gpt2:sup_5")
@click.option("--measure", required=True, type=click.Choice(list(analysis.MEASURES)))
@click.option("--records", "records_path", required=True, type=click.Path(exists=True, path_type=Path),
              help="records.csv or a directory containing it")
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
def scatter_cmd(variant, measure, records_path, out_path):
    """Export square-root scatter + marginal histogram data."""

    def go():
        path = Path(records_path)
        if path.is_dir():
            path = path / "records.csv"
        records = analysis.load_records_csv(path)
        data = analysis.scatter_export(records, variant, measure)
        analysis.save_scatter_json(data, out_path)
        click.echo(f"wrote scatter data for {len(records)} records to {out_path}")

    _run(go)


# -- synth-eval ---------------------------------------------------------------------


@main.command("synth-eval")
@click.option("--ref", "ref_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--systems", required=True,
              help="Comma list of name=path prediction CSVs, e.g. baseline=b.csv,prom=p.csv")
@click.option("--word-classes", "classes_path", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
def synth_eval_cmd(ref_path, systems, classes_path, out_dir):
    """Phone-level RMSE / correlation report for synthesis systems."""

    def go():
        from . import synth_eval

        predictions = {}
        for item in systems.split(","):
            if "=" not in item:
                raise ConfigError(f"bad --systems item {item!r}, expected name=path")
            name, path = item.split("=", 1)
            predictions[name.strip()] = synth_eval.load_predictions_csv(path.strip(), name.strip())
        reference = synth_eval.load_predictions_csv(ref_path, "reference")
        word_class = synth_eval.load_word_classes_csv(classes_path)
        report = synth_eval.evaluate_systems(predictions, reference, word_class)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        synth_eval.save_report_csv(report, out / "synth_eval.csv")
        table = synth_eval.format_report_table(report)
        (out / "synth_eval.txt").write_text(table, encoding="utf-8")
        click.echo(table)

    _run(go)


# -- run ------------------------------------------------------------------------


@main.command("run")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--check", is_flag=True, help="Only validate the configuration")
def run_cmd(config_path, check):
    """Run the full pipeline described by a flat key=value config file."""

    def go():
        config = pipeline.PipelineConfig.from_file(config_path)
        diags = pipeline.validate_config(config)
        for d in diags:
            click.echo(f"{d.level}: {d.message}", err=(d.level == "error"))
        if any(d.level == "error" for d in diags):
            sys.exit(EXIT_VALIDATION)
        if check:
            return
        out = pipeline.run_pipeline(config, log=lambda msg: click.echo(msg))
        click.echo(f"artifacts in {out}")

    _run(go)


if __name__ == "__main__":
    main()
