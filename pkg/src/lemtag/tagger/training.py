"""Per-task training with capitalization noise, dev-metric tracking,
learning-rate patience and early stopping, plus greedy prediction."""

from __future__ import annotations

import copy
import math
import random
from dataclasses import dataclass
from typing import Mapping, Sequence

import torch

from ..corpus import AnnotatedToken, Document, Sentence
from ..errors import TaskMismatchError, TrainingDiverged
from ..evaluation import column_metrics
from ..preprocess import MorphVector, SplitSet, apply_capitalization_noise, join_morph
from .model import LemmaSeq2Seq, TagClassifier
from .vocab import (
    BOS_IDX,
    EOS_IDX,
    MORPH_TASKS,
    PAD_IDX,
    TASKS,
    Vocabularies,
    build_vocab,
    gold_column,
)

TARGET_METRICS = ("accuracy", "precision", "recall", "f1")


@dataclass(frozen=True)
class TrainConfig:
    task: str
    cemb_size: int = 150
    cemb_layers: int = 1
    hidden_size: int = 150
    dropout: float = 0.32
    learning_rate: float = 0.0049
    lr_patience: int = 2
    lr_decay: float = 0.6
    early_stop_patience: int = 5
    target_metric: str = "accuracy"
    max_epochs: int = 100
    seed: int = 0
    noise_probability: float = 0.1
    batch_size: int = 32

    def __post_init__(self) -> None:
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}")
        if self.cemb_layers not in (1, 2):
            raise ValueError("cemb_layers must be 1 or 2")
        if min(self.cemb_size, self.hidden_size, self.batch_size, self.max_epochs) <= 0:
            raise ValueError("sizes must be positive")
        if self.cemb_size % 2:
            raise ValueError("cemb_size must be even")
        if min(self.lr_patience, self.early_stop_patience) < 1:
            raise ValueError("patiences must be >= 1")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")
        if not 0.0 <= self.noise_probability <= 1.0:
            raise ValueError("noise_probability must be in [0, 1]")
        if self.target_metric not in TARGET_METRICS:
            raise ValueError(f"target_metric must be one of {TARGET_METRICS}")


@dataclass
class TrainedModel:
    task: str
    config: TrainConfig
    vocab: Vocabularies
    module: torch.nn.Module
    history: tuple[float, ...] = ()
    best_epoch: int = 0


def build_module(config: TrainConfig, vocab: Vocabularies) -> torch.nn.Module:
    if config.task == "LEMMA":
        return LemmaSeq2Seq(
            len(vocab.chars),
            len(vocab.lemma_chars),
            config.cemb_size,
            config.cemb_layers,
            config.hidden_size,
            config.dropout,
        )
    return TagClassifier(
        len(vocab.chars),
        len(vocab.labels),
        config.cemb_size,
        config.cemb_layers,
        config.hidden_size,
        config.dropout,
    )


# --- batch assembly ---------------------------------------------------------


def _encode_forms(vocab: Vocabularies, sentences_forms: Sequence[Sequence[str]]):
    words = [form for forms in sentences_forms for form in forms]
    if not words:
        raise ValueError("cannot encode an empty sentence batch")
    if any(not w for w in words):
        raise ValueError("empty token form")
    max_len = max(len(w) for w in words)
    chars = torch.full((len(words), max_len), PAD_IDX, dtype=torch.long)
    lengths = torch.empty(len(words), dtype=torch.long)
    for i, word in enumerate(words):
        ids = vocab.chars.encode(word)
        chars[i, : len(ids)] = torch.as_tensor(ids)
        lengths[i] = len(ids)
    sent_lengths = [len(forms) for forms in sentences_forms]
    return chars, lengths, sent_lengths


def _encode_lemma_targets(vocab: Vocabularies, lemmas: Sequence[str]):
    encoded = [vocab.lemma_chars.encode(lemma) for lemma in lemmas]
    max_len = max(len(e) for e in encoded) + 1
    targets_in = torch.full((len(encoded), max_len), PAD_IDX, dtype=torch.long)
    targets_out = torch.full((len(encoded), max_len), PAD_IDX, dtype=torch.long)
    for i, ids in enumerate(encoded):
        targets_in[i, 0] = BOS_IDX
        targets_in[i, 1 : len(ids) + 1] = torch.as_tensor(ids)
        targets_out[i, : len(ids)] = torch.as_tensor(ids)
        targets_out[i, len(ids)] = EOS_IDX
    return targets_in, targets_out


def compute_loss(
    module: torch.nn.Module, vocab: Vocabularies, task: str, sentences: Sequence[Sentence]
) -> torch.Tensor:
    """Teacher-forced decoder loss for LEMMA, token cross-entropy otherwise."""
    forms = [[t.form for t in s.tokens] for s in sentences]
    chars, char_lengths, sent_lengths = _encode_forms(vocab, forms)
    if task == "LEMMA":
        lemmas = [t.lemma for s in sentences for t in s.tokens]
        targets_in, targets_out = _encode_lemma_targets(vocab, lemmas)
        return module.decoder_loss(chars, char_lengths, sent_lengths, targets_in, targets_out)
    labels = [vocab.labels.encode(g) for s in sentences for g in gold_column(s, task)]
    scores = module.scores(chars, char_lengths, sent_lengths)
    return torch.nn.functional.cross_entropy(scores, torch.as_tensor(labels))


# --- prediction -------------------------------------------------------------


def _predict_batch(model: TrainedModel, sentences_forms: Sequence[Sequence[str]]):
    chars, char_lengths, sent_lengths = _encode_forms(model.vocab, sentences_forms)
    if model.task == "LEMMA":
        decoded = model.module.greedy_decode(chars, char_lengths, sent_lengths)
        flat = [model.vocab.lemma_chars.decode(ids) for ids in decoded]
    else:
        scores = model.module.scores(chars, char_lengths, sent_lengths)
        flat = [model.vocab.labels.decode(int(i)) for i in scores.argmax(dim=-1)]
    out, offset = [], 0
    for n in sent_lengths:
        out.append(flat[offset : offset + n])
        offset += n
    return out


def predict_sentences(
    model: TrainedModel,
    sentences_forms: Sequence[Sequence[str]],
    batch_size: int | None = None,
) -> list[list[str]]:
    """Per-token predictions for the model's task, greedy and deterministic."""
    if any(len(forms) == 0 for forms in sentences_forms):
        raise ValueError("cannot predict an empty sentence")
    batch_size = batch_size or model.config.batch_size
    model.module.eval()
    out = []
    with torch.no_grad():
        for start in range(0, len(sentences_forms), batch_size):
            out.extend(_predict_batch(model, sentences_forms[start : start + batch_size]))
    return out


def predict_sentence(model: TrainedModel, forms: Sequence[str]) -> list[str]:
    return predict_sentences(model, [list(forms)])[0]


def predict_document(model: TrainedModel, sentences: Sequence[Sentence]) -> list[list[str]]:
    return predict_sentences(model, [[t.form for t in s.tokens] for s in sentences])


def annotate(
    models: Mapping[str, TrainedModel], sentences_forms: Sequence[Sequence[str]]
) -> list[list[AnnotatedToken]]:
    """Merge per-task predictions into fully annotated tokens.

    Morph categories are predicted independently and joined into the
    composite string; absent models leave their column as "_".
    """
    for task, model in models.items():
        if model.task != task:
            raise TaskMismatchError(
                f"model for task {task} was trained for {model.task}"
            )
    columns = {
        task: predict_sentences(model, sentences_forms)
        for task, model in models.items()
    }
    annotated = []
    for s_idx, forms in enumerate(sentences_forms):
        tokens = []
        for t_idx, form in enumerate(forms):
            lemma = columns["LEMMA"][s_idx][t_idx] if "LEMMA" in columns else "_"
            pos = columns["POS"][s_idx][t_idx] if "POS" in columns else "_"
            slots = {
                cat.lower(): columns[cat][s_idx][t_idx]
                for cat in MORPH_TASKS
                if cat in columns
            }
            morph = join_morph(MorphVector(**slots)) if slots else "_"
            tokens.append(AnnotatedToken(form, lemma or "_", pos, morph))
        annotated.append(tokens)
    return annotated


def annotate_document(
    models: Mapping[str, TrainedModel], sentences: Sequence[Sentence], doc_id: str = "tagged"
) -> Document:
    forms = [[t.form for t in s.tokens] for s in sentences]
    annotated = annotate(models, forms)
    return Document(
        doc_id,
        tuple(
            Sentence(tuple(tokens), original.boundary_kind)
            for tokens, original in zip(annotated, sentences)
        ),
    )


# --- training loop ----------------------------------------------------------


def _dev_metric(model: TrainedModel, dev: Sequence[Sentence]) -> float:
    gold = [g for s in dev for g in gold_column(s, model.task)]
    pred = [p for ps in predict_document(model, dev) for p in ps]
    metrics = column_metrics(gold, pred)
    return getattr(metrics, model.config.target_metric)


def _batches(sentences: list[Sentence], batch_size: int, rng: random.Random):
    # bucket by length to limit padding, then shuffle batch order
    order = sorted(range(len(sentences)), key=lambda i: (len(sentences[i]), i))
    chunks = [
        [sentences[i] for i in order[start : start + batch_size]]
        for start in range(0, len(order), batch_size)
    ]
    rng.shuffle(chunks)
    return chunks


def train(config: TrainConfig, splits: SplitSet) -> TrainedModel:
    """Train one task head on the train split, tracking the dev target metric.

    The learning rate decays by config.lr_decay after lr_patience epochs
    without dev improvement; training stops early after early_stop_patience
    epochs without improvement.  The returned model is the best-dev-epoch
    snapshot, and identical (config, splits) give the identical model.
    """
    if not splits.train:
        raise ValueError("empty train split")
    if not splits.dev:
        raise ValueError("empty dev split")

    torch.manual_seed(config.seed)
    torch.set_num_threads(1)
    rng = random.Random(config.seed)

    vocab = build_vocab(list(splits.train), config.task)
    module = build_module(config, vocab)
    model = TrainedModel(config.task, config, vocab, module)
    optimizer = torch.optim.Adam(module.parameters(), lr=config.learning_rate)

    history: list[float] = []
    best_metric = -math.inf
    best_state: dict | None = None
    best_epoch = 0
    bad_epochs = 0
    lr_bad_epochs = 0

    for epoch in range(1, config.max_epochs + 1):
        module.train()
        noised = [
            apply_capitalization_noise(s, config.noise_probability, rng)
            for s in splits.train
        ]
        for batch in _batches(noised, config.batch_size, rng):
            loss = compute_loss(module, vocab, config.task, batch)
            if not torch.isfinite(loss):
                raise TrainingDiverged(
                    f"non-finite loss at epoch {epoch} (task {config.task})"
                )
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()

        metric = _dev_metric(model, list(splits.dev))
        history.append(metric)
        if metric > best_metric:
            best_metric = metric
            best_state = copy.deepcopy(module.state_dict())
            best_epoch = epoch
            bad_epochs = 0
            lr_bad_epochs = 0
        else:
            bad_epochs += 1
            lr_bad_epochs += 1
            if lr_bad_epochs >= config.lr_patience:
                for group in optimizer.param_groups:
                    group["lr"] *= config.lr_decay
                lr_bad_epochs = 0
            if bad_epochs >= config.early_stop_patience:
                break

    if best_state is not None:
        module.load_state_dict(best_state)
    model.history = tuple(history)
    model.best_epoch = best_epoch
    return model
