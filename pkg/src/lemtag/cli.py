"""Single executable orchestrating every pipeline stage.

Exit codes: 0 success, 2 bad input, 3 bad configuration, 4 runtime failure.
Flags mirror config-file keys one to one; flags win.
"""

from __future__ import annotations

import dataclasses
import functools
import json
import sys
from pathlib import Path

import click

from . import corpus as corpus_mod
from . import evaluation as ev
from .config import merge_config, parse_ratios, read_keyvalue
from .errors import ConfigError, InputError, LemtagError
from .preprocess import (
    normalize_document_numerals,
    segment_sentences,
    split_dataset,
)
from .sweep import (
    BEST_CONFIGS,
    RankingPolicy,
    SweepLog,
    generate_grid,
    rank_models,
    rank_table,
    run_sweep,
)
from .tagger import (
    MORPH_TASKS,
    TASKS,
    TrainConfig,
    annotate_document,
    gold_column,
    load_model,
    save_model,
    train,
)
def _fail(exc: Exception) -> None:
    code = exc.exit_code if isinstance(exc, LemtagError) else 4
    if isinstance(exc, OSError):
        code = 2
    click.echo(f"error: {exc}", err=True)
    sys.exit(code)


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (LemtagError, OSError) as exc:
            _fail(exc)
        except click.ClickException:
            raise
        except Exception as exc:  # anything else is a runtime failure
            _fail(exc)

    return wrapper


def _read_document(path: str, doc_id: str | None = None) -> corpus_mod.Document:
    data = Path(path).read_bytes()
    return corpus_mod.parse_tsv(data, doc_id=doc_id or Path(path).stem)


def _write_document(doc: corpus_mod.Document, path: str | Path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_bytes(corpus_mod.write_tsv(doc))


def _sentences_doc(sentences, doc_id: str) -> corpus_mod.Document:
    return corpus_mod.Document(doc_id, tuple(sentences))


@click.group()
def main() -> None:
    """Lemmatisation / POS / morphology tagging toolkit for historical
    languages."""


@main.command()
@click.option("--corpus", "corpus_path", required=True, help="Input corpus TSV.")
@click.option("--out", "out_path", default=None, help="Write the canonical TSV here.")
@click.option("--id", "doc_id", default=None, help="Document id (default: file stem).")
@handle_errors
def ingest(corpus_path, out_path, doc_id):
    """Parse a corpus file and report its shape."""
    doc = _read_document(corpus_path, doc_id)
    click.echo(
        f"{doc.id}: {len(doc.sentences)} sentences, {doc.n_tokens} tokens"
    )
    if out_path:
        _write_document(doc, out_path)


@main.command()
@click.option("--corpus", "corpus_path", required=True)
@click.option("--lemmas", required=True, help="Allowed lemma list.")
@click.option("--pos", "pos_path", required=True, help="Allowed POS tag list.")
@click.option("--morph", "morph_path", required=True, help="Allowed morph values (CATEGORY<TAB>value).")
@click.option("--report-dir", default=None)
@handle_errors
def validate(corpus_path, lemmas, pos_path, morph_path, report_dir):
    """Report unallowed lemma / POS / morph values."""
    doc = _read_document(corpus_path)
    refs = corpus_mod.load_reference_lists(lemmas, pos_path, morph_path)
    report = corpus_mod.validate(doc, refs)
    click.echo(
        f"unallowed: {len(report.unallowed_lemmas)} lemmas, "
        f"{len(report.unallowed_pos)} pos, {len(report.unallowed_morph)} morph"
    )
    if report_dir:
        lines = ["kind\tdoc\tsentence\ttoken\tvalue"]
        for kind, issues in (
            ("lemma", report.unallowed_lemmas),
            ("pos", report.unallowed_pos),
            ("morph", report.unallowed_morph),
        ):
            for issue in issues:
                lines.append(
                    f"{kind}\t{issue.doc_id}\t{issue.sentence_index}"
                    f"\t{issue.token_index}\t{issue.value}"
                )
        out = Path(report_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "unallowed.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")


@main.command()
@click.option("--corpus", "corpus_path", required=True)
@click.option("--out", "out_path", required=True)
@click.option(
    "--segment",
    type=click.Choice(["punctuation", "line", "none"]),
    default="none",
    help="Re-segment the token stream after normalization.",
)
@handle_errors
def normalize(corpus_path, out_path, segment):
    """Normalize Roman numerals in forms (gold columns untouched)."""
    doc = normalize_document_numerals(_read_document(corpus_path))
    if segment != "none":
        doc = _sentences_doc(segment_sentences(doc, segment), doc.id)
    _write_document(doc, out_path)
    click.echo(f"normalized {doc.n_tokens} tokens -> {out_path}")


@main.command()
@click.option("--corpus", "corpus_path", required=True)
@click.option("--out-dir", required=True)
@click.option("--seed", type=int, default=None)
@click.option("--ratios", "ratios_text", default=None, help="e.g. 0.8,0.1,0.1")
@click.option("--segment", type=click.Choice(["punctuation", "line"]), default="line")
@click.option("--config", "config_path", default=None, help="key=value defaults file.")
@handle_errors
def split(corpus_path, out_dir, seed, ratios_text, segment, config_path):
    """Deterministic train/dev/test split."""
    merged = merge_config(config_path, {"seed": seed, "ratios": ratios_text})
    seed = int(merged.get("seed", 0))
    ratios = parse_ratios(str(merged.get("ratios", "0.8,0.1,0.1")))
    doc = _read_document(corpus_path)
    sentences = segment_sentences(doc, segment)
    splits = split_dataset(sentences, ratios, seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, part in (("train", splits.train), ("dev", splits.dev), ("test", splits.test)):
        _write_document(_sentences_doc(part, f"{doc.id}-{name}"), out / f"{name}.tsv")
    click.echo(
        f"split {len(sentences)} sentences -> "
        f"{len(splits.train)}/{len(splits.dev)}/{len(splits.test)} (seed {seed})"
    )


_TRAIN_FLAGS = (
    ("cemb_size", int),
    ("cemb_layers", int),
    ("hidden_size", int),
    ("dropout", float),
    ("learning_rate", float),
    ("lr_patience", int),
    ("lr_decay", float),
    ("early_stop_patience", int),
    ("target_metric", str),
    ("max_epochs", int),
    ("seed", int),
    ("noise_probability", float),
    ("batch_size", int),
)


def _train_options(fn):
    for name, kind in reversed(_TRAIN_FLAGS):
        fn = click.option(f"--{name.replace('_', '-')}", name, type=kind, default=None)(fn)
    return fn


def _build_train_config(task: str, config_path: str | None, flags: dict) -> TrainConfig:
    if task not in TASKS:
        raise ConfigError(f"unknown task {task!r}; expected one of {', '.join(TASKS)}")
    base = dataclasses.asdict(BEST_CONFIGS[task])
    if config_path:
        file_values = read_keyvalue(config_path)
        unknown = set(file_values) - set(base)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        base.update(file_values)
    base.update({k: v for k, v in flags.items() if v is not None})
    kinds = dict(_TRAIN_FLAGS)
    try:
        kwargs = {
            name: kinds.get(name, str)(value) if name != "task" else value
            for name, value in base.items()
        }
        return TrainConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _load_splits(train_path: str, dev_path: str, test_path: str | None):
    from .preprocess import SplitSet

    train_doc = _read_document(train_path)
    dev_doc = _read_document(dev_path)
    test = _read_document(test_path).sentences if test_path else ()
    return SplitSet(train_doc.sentences, dev_doc.sentences, test, 0, (0.8, 0.1, 0.1))


@main.command(name="train")
@click.option("--task", required=True)
@click.option("--train", "train_path", required=True)
@click.option("--dev", "dev_path", required=True)
@click.option("--out", "out_path", required=True)
@click.option("--config", "config_path", default=None, help="key=value training config.")
@_train_options
@handle_errors
def train_cmd(task, train_path, dev_path, out_path, config_path, **flags):
    """Train one task model."""
    config = _build_train_config(task, config_path, flags)
    splits = _load_splits(train_path, dev_path, None)
    model = train(config, splits)
    Path(out_path).parent.mkdir(parents=True, exist_ok=True)
    save_model(model, out_path)
    click.echo(
        f"{task}: best dev {config.target_metric} {max(model.history):.4f} "
        f"at epoch {model.best_epoch}/{len(model.history)} -> {out_path}"
    )


@main.command()
@click.option("--task", required=True)
@click.option("--train", "train_path", required=True)
@click.option("--dev", "dev_path", required=True)
@click.option("--runs", type=int, default=5, show_default=True)
@click.option("--log", "log_path", default=None, help="Append-only JSONL run log.")
@click.option("--model-dir", default=None)
@click.option("--base-seed", type=int, default=0)
@click.option("--overrides", "overrides_path", default=None,
              help="key=value file with comma-separated grid overrides.")
@click.option("--max-epochs", type=int, default=None)
@click.option("--dry-run", is_flag=True)
@handle_errors
def sweep(task, train_path, dev_path, runs, log_path, model_dir, base_seed,
          overrides_path, max_epochs, dry_run):
    """Run the hyperparameter grid and select the best run by rank sums."""
    if task not in TASKS:
        raise ConfigError(f"unknown task {task!r}")
    overrides = None
    if overrides_path:
        overrides = {
            key: [int(v) for v in value.split(",") if v]
            for key, value in read_keyvalue(overrides_path).items()
        }
    shared = {"max_epochs": max_epochs} if max_epochs else {}
    grid = generate_grid(task, overrides, **shared)
    if dry_run:
        click.echo(f"{len(grid)} configs x {runs} runs")
        for config in grid:
            click.echo(
                f"cemb_size={config.cemb_size} cemb_layers={config.cemb_layers} "
                f"hidden_size={config.hidden_size} target={config.target_metric}"
            )
        return
    if not log_path:
        raise ConfigError("--log is required unless --dry-run")
    splits = _load_splits(train_path, dev_path, None)
    log = run_sweep(grid, splits, runs, log_path, model_dir, base_seed)
    best = rank_models(log, RankingPolicy())
    for run_id, rank_sum in rank_table(log, RankingPolicy())[:5]:
        click.echo(f"{run_id}\trank_sum={rank_sum:.1f}")
    click.echo(f"selected {best}")


@main.command()
@click.option("--models", "model_dir", required=True,
              help="Directory of <TASK>.lmtg model files.")
@click.option("--input", "input_path", required=True,
              help="TSV corpus or plain one-form-per-line text.")
@click.option("--out", "out_path", required=True)
@handle_errors
def tag(model_dir, input_path, out_path):
    """Annotate raw tokens with every model found in the model directory."""
    models = {}
    for path in sorted(Path(model_dir).glob("*.lmtg")):
        model = load_model(path)
        models[model.task] = model
    if not models:
        raise ConfigError(f"no .lmtg models in {model_dir}")

    text = Path(input_path).read_text(encoding="utf-8")
    if "\t" in text:
        doc = corpus_mod.parse_tsv(text, doc_id=Path(input_path).stem)
        sentences = list(doc.sentences)
    else:
        from .service import parse_tag_input

        forms = parse_tag_input(text)
        if not forms:
            raise InputError(f"{input_path} contains no tokens")
        sentences = [
            corpus_mod.Sentence(
                tuple(corpus_mod.AnnotatedToken(f, "_") for f in sent)
            )
            for sent in forms
        ]
    tagged = annotate_document(models, sentences, doc_id=Path(input_path).stem)
    _write_document(tagged, out_path)
    click.echo(f"tagged {tagged.n_tokens} tokens with {sorted(models)} -> {out_path}")


@main.command(name="eval")
@click.option("--gold", "gold_path", required=True)
@click.option("--pred", "pred_path", required=True)
@click.option("--train", "train_path", default=None,
              help="Train split for known/unknown/ambiguous token classes.")
@click.option("--report-dir", required=True)
@click.option("--tables", default="all", help="Comma list or 'all'.")
@click.option("--confusion-min-count", type=int, default=0, show_default=True)
@click.option("--confusion-mode", type=click.Choice(["gt", "ge"]), default="gt")
@click.option("--score-columns", default="lemma",
              help="Columns a word must get right in sentence scoring.")
@handle_errors
def eval_cmd(gold_path, pred_path, train_path, report_dir, tables,
             confusion_min_count, confusion_mode, score_columns):
    """Produce the full report battery from aligned gold and predicted TSV."""
    gold = _read_document(gold_path)
    pred = _read_document(pred_path)
    if gold.n_tokens != pred.n_tokens:
        raise InputError(
            f"gold has {gold.n_tokens} tokens but pred has {pred.n_tokens}"
        )
    wanted = set(
        t.strip() for t in tables.split(",")
    ) if tables != "all" else {
        "metrics", "confusion", "per_pos", "lemma_by_pos", "sentences",
        "que", "errors",
    }
    out = Path(report_dir)
    out.mkdir(parents=True, exist_ok=True)

    classes = None
    if train_path:
        classes = ev.classify_tokens(
            _read_document(train_path).sentences, gold.sentences
        )

    def column(doc, task):
        return [g for s in doc.sentences for g in gold_column(s, task)]

    written = []
    structured: dict[str, object] = {}
    if "metrics" in wanted:
        metric_tables = {
            task: ev.score(column(gold, task), column(pred, task), classes)
            for task in ("LEMMA", "POS") + MORPH_TASKS
        }
        (out / "metrics.tsv").write_text(
            ev.render_metrics_tsv(metric_tables), encoding="utf-8"
        )
        structured["metrics"] = {t: m.as_dict() for t, m in metric_tables.items()}
        written.append("metrics.tsv")
    if "confusion" in wanted:
        for task, name in (("LEMMA", "confusion_lemma.tsv"), ("POS", "confusion_pos.tsv")):
            table = ev.confusion(
                column(gold, task), column(pred, task),
                confusion_min_count, confusion_mode,
            )
            (out / name).write_text(ev.render_confusion_tsv(table), encoding="utf-8")
            structured[f"confusion_{task.lower()}"] = table.as_dict()
            written.append(name)
    if "per_pos" in wanted:
        report = ev.per_pos_report(column(gold, "POS"), column(pred, "POS"))
        (out / "per_pos.tsv").write_text(ev.render_per_pos_tsv(report), encoding="utf-8")
        structured["per_pos"] = [dataclasses.asdict(r) for r in report.rows]
        written.append("per_pos.tsv")
    if "lemma_by_pos" in wanted:
        report = ev.lemma_by_pos_report(
            column(gold, "LEMMA"), column(pred, "LEMMA"), column(gold, "POS")
        )
        (out / "lemma_by_pos.tsv").write_text(
            ev.render_lemma_by_pos_tsv(report), encoding="utf-8"
        )
        structured["lemma_by_pos"] = [dataclasses.asdict(r) for r in report.rows]
        written.append("lemma_by_pos.tsv")
    if "sentences" in wanted:
        hist = ev.sentence_scores(
            list(gold.sentences), list(pred.sentences),
            tuple(score_columns.split(",")),
        )
        (out / "sentence_scores.tsv").write_text(
            ev.render_sentence_scores_tsv(hist), encoding="utf-8"
        )
        structured["sentence_scores"] = hist.as_dict()
        written.append("sentence_scores.tsv")
    if "que" in wanted:
        rows = ev.que_cross_report(
            column(gold, "LEMMA"), column(gold, "POS"),
            column(pred, "LEMMA"), column(pred, "POS"),
        )
        (out / "que_report.tsv").write_text(
            ev.render_que_report_tsv(rows), encoding="utf-8"
        )
        structured["que_report"] = [dataclasses.asdict(r) for r in rows]
        written.append("que_report.tsv")
    if "errors" in wanted:
        report = ev.error_concentration(
            column(gold, "LEMMA"), column(pred, "LEMMA"), ev.QUE_FAMILY
        )
        (out / "error_concentration.tsv").write_text(
            ev.render_error_concentration_tsv(report), encoding="utf-8"
        )
        structured["error_concentration"] = dataclasses.asdict(report)
        written.append("error_concentration.tsv")
    (out / "reports.json").write_text(
        json.dumps(structured, sort_keys=True, indent=1) + "\n", encoding="utf-8"
    )
    written.append("reports.json")
    click.echo(f"wrote {', '.join(written)} to {report_dir}")


@main.command()
@click.option("--pred", "pred_path", required=True)
@click.option("--out", "out_path", required=True)
@click.option("--rules", "rules_path", default=None,
              help="Rule file; defaults to the built-in que rules.")
@handle_errors
def posttreat(pred_path, out_path, rules_path):
    """Rewrite predicted lemmas from the independently predicted POS."""
    doc = _read_document(pred_path)
    rules = ev.load_rules(rules_path) if rules_path else ev.DEFAULT_QUE_RULES
    treated = ev.pos_lemma_posttreatment(doc, rules)
    changed = sum(
        1
        for before, after in zip(doc.tokens(), treated.tokens())
        if before.lemma != after.lemma
    )
    _write_document(treated, out_path)
    click.echo(f"rewrote {changed} lemmas -> {out_path}")


@main.command()
@click.option("--corpus-dir", required=True, envvar="LEMTAG_CORPUS_DIR")
@click.option("--model-dir", default=None, envvar="LEMTAG_MODEL_DIR")
@click.option("--lemmas", default=None, envvar="LEMTAG_LEMMAS")
@click.option("--pos", "pos_path", default=None, envvar="LEMTAG_POS")
@click.option("--morph", "morph_path", default=None, envvar="LEMTAG_MORPH")
@click.option("--host", default="127.0.0.1", show_default=True, envvar="LEMTAG_HOST")
@click.option("--port", type=int, default=8000, show_default=True, envvar="LEMTAG_PORT")
@handle_errors
def serve(corpus_dir, model_dir, lemmas, pos_path, morph_path, host, port):
    """Start the tagging / post-correction HTTP service."""
    import uvicorn

    from .service import create_app

    app = create_app(corpus_dir, model_dir, lemmas, pos_path, morph_path)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
