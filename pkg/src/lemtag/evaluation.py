"""Evaluation of predicted annotations: token-class metrics, confusion
tables, per-POS breakdowns, diversity indices, sentence-level scores and the
POS-driven lemma post-treatment pass."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import Document, Sentence, AnnotatedToken
from .errors import InputError, RuleError

#: Token-class subsets reported by score(), in table order.
SUBSETS = ("all", "known", "unknown", "ambiguous", "unknown_target")

EVAL_COLUMNS = ("lemma", "pos", "morph")


# --- Token classes ----------------------------------------------------------


@dataclass(frozen=True)
class TokenClass:
    """Per-token flags relative to the training split."""

    known: bool
    ambiguous: bool
    unknown_target: bool

    @property
    def unknown(self) -> bool:
        return not self.known

    def in_subset(self, subset: str) -> bool:
        if subset == "all":
            return True
        return bool(getattr(self, subset))


def classify_tokens(
    train: Iterable[Sentence], test: Iterable[Sentence]
) -> list[TokenClass]:
    """Flag each test token as known/unknown, ambiguous, unknown-target.

    Known: the form occurs in training.  Ambiguous: the form is attested
    with two or more distinct gold lemmas in training (implies known).
    Unknown target: the gold lemma never occurs in training.
    """
    form_lemmas: dict[str, set[str]] = {}
    train_lemmas: set[str] = set()
    for sentence in train:
        for token in sentence.tokens:
            form_lemmas.setdefault(token.form, set()).add(token.lemma)
            train_lemmas.add(token.lemma)

    classes: list[TokenClass] = []
    for sentence in test:
        for token in sentence.tokens:
            lemmas = form_lemmas.get(token.form)
            classes.append(
                TokenClass(
                    known=lemmas is not None,
                    ambiguous=lemmas is not None and len(lemmas) >= 2,
                    unknown_target=token.lemma not in train_lemmas,
                )
            )
    return classes


# --- Accuracy / precision / recall -----------------------------------------


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    support: int


def column_metrics(gold: Sequence[str], pred: Sequence[str]) -> Metrics:
    """Micro accuracy plus macro precision/recall over gold-present classes.

    A gold class that is never predicted contributes precision 0; classes
    present only in predictions do not contribute rows.  F1 is the harmonic
    mean of the macro precision and recall.
    """
    if len(gold) != len(pred):
        raise InputError(f"gold/pred length mismatch: {len(gold)} vs {len(pred)}")
    n = len(gold)
    if n == 0:
        return Metrics(0.0, 0.0, 0.0, 0.0, 0)

    correct = sum(1 for g, p in zip(gold, pred) if g == p)
    gold_counts = Counter(gold)
    pred_counts = Counter(pred)
    tp = Counter(g for g, p in zip(gold, pred) if g == p)

    precisions = []
    recalls = []
    for label, g_count in gold_counts.items():
        p_count = pred_counts.get(label, 0)
        precisions.append(tp[label] / p_count if p_count else 0.0)
        recalls.append(tp[label] / g_count)
    precision = sum(precisions) / len(precisions)
    recall = sum(recalls) / len(recalls)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return Metrics(correct / n, precision, recall, f1, n)


@dataclass(frozen=True)
class MetricsTable:
    """Metrics per token-class subset for one task column."""

    rows: Mapping[str, Metrics]

    def as_dict(self) -> dict:
        return {
            subset: {
                "accuracy": m.accuracy,
                "precision": m.precision,
                "recall": m.recall,
                "f1": m.f1,
                "support": m.support,
            }
            for subset, m in self.rows.items()
        }


def score(
    gold: Sequence[str],
    pred: Sequence[str],
    classes: Sequence[TokenClass] | None = None,
) -> MetricsTable:
    """Score one aligned column over all token-class subsets."""
    if len(gold) != len(pred):
        raise InputError(f"gold/pred length mismatch: {len(gold)} vs {len(pred)}")
    if classes is None:
        return MetricsTable({"all": column_metrics(gold, pred)})
    if len(classes) != len(gold):
        raise InputError("token classes not aligned with gold column")

    rows = {}
    for subset in SUBSETS:
        idx = [i for i, c in enumerate(classes) if c.in_subset(subset)]
        rows[subset] = column_metrics([gold[i] for i in idx], [pred[i] for i in idx])
    return MetricsTable(rows)


# --- Confusion tables -------------------------------------------------------


@dataclass(frozen=True)
class ConfusionRow:
    gold: str
    errors: int
    cells: tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class ConfusionTable:
    rows: tuple[ConfusionRow, ...]

    def as_dict(self) -> dict:
        return {
            row.gold: {"errors": row.errors, "predictions": dict(row.cells)}
            for row in self.rows
        }


def confusion(
    gold: Sequence[str],
    pred: Sequence[str],
    min_count: int = 0,
    mode: str = "gt",
) -> ConfusionTable:
    """Error-only confusion table, cell counts thresholded by min_count.

    mode "gt" keeps cells with count > min_count, "ge" keeps count >=
    min_count.  Rows are sorted by total error count descending; rows whose
    every cell falls under the threshold are dropped.
    """
    if len(gold) != len(pred):
        raise InputError(f"gold/pred length mismatch: {len(gold)} vs {len(pred)}")
    if mode not in ("gt", "ge"):
        raise InputError(f"threshold mode must be 'gt' or 'ge', got {mode!r}")

    errors: dict[str, Counter] = {}
    for g, p in zip(gold, pred):
        if g != p:
            errors.setdefault(g, Counter())[p] += 1

    keep = (lambda c: c > min_count) if mode == "gt" else (lambda c: c >= min_count)
    rows = []
    for label, counter in errors.items():
        cells = tuple(
            sorted(
                ((p, c) for p, c in counter.items() if keep(c)),
                key=lambda pc: (-pc[1], pc[0]),
            )
        )
        if cells:
            rows.append(ConfusionRow(label, sum(counter.values()), cells))
    rows.sort(key=lambda r: (-r.errors, r.gold))
    return ConfusionTable(tuple(rows))


# --- Error concentration ----------------------------------------------------


@dataclass(frozen=True)
class ErrorConcentration:
    """How errors distribute over lemmas and over (gold, pred) error types."""

    set_fraction: float
    single_error_lemma_count: int
    singleton_type_fraction: float


def error_concentration(
    gold: Sequence[str], pred: Sequence[str], lemma_set: Iterable[str] = ()
) -> ErrorConcentration:
    if len(gold) != len(pred):
        raise InputError(f"gold/pred length mismatch: {len(gold)} vs {len(pred)}")
    lemma_set = frozenset(lemma_set)
    error_lemmas = Counter()
    error_types = Counter()
    for g, p in zip(gold, pred):
        if g != p:
            error_lemmas[g] += 1
            error_types[(g, p)] += 1

    total = sum(error_lemmas.values())
    if total == 0:
        return ErrorConcentration(0.0, 0, 0.0)
    on_set = sum(c for lemma, c in error_lemmas.items() if lemma in lemma_set)
    singles = sum(1 for c in error_lemmas.values() if c == 1)
    singleton_types = sum(c for c in error_types.values() if c == 1)
    return ErrorConcentration(on_set / total, singles, singleton_types / total)


# --- Per-POS reports --------------------------------------------------------


@dataclass(frozen=True)
class PosRow:
    pos: str
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class PerPosReport:
    """Per-label P/R/F1/support; rendering drops rows under min support."""

    rows: tuple[PosRow, ...]
    min_support: int = 10

    def rendered(self) -> tuple[PosRow, ...]:
        return tuple(r for r in self.rows if r.support >= self.min_support)


def per_pos_report(
    gold: Sequence[str], pred: Sequence[str], min_support: int = 10
) -> PerPosReport:
    if len(gold) != len(pred):
        raise InputError(f"gold/pred length mismatch: {len(gold)} vs {len(pred)}")
    gold_counts = Counter(gold)
    pred_counts = Counter(pred)
    tp = Counter(g for g, p in zip(gold, pred) if g == p)

    rows = []
    for label, support in gold_counts.items():
        p_count = pred_counts.get(label, 0)
        precision = tp[label] / p_count if p_count else 0.0
        recall = tp[label] / support
        f1 = (
            2 * precision * recall / (precision + recall)
            if precision + recall
            else 0.0
        )
        rows.append(PosRow(label, precision, recall, f1, support))
    rows.sort(key=lambda r: (-r.f1, r.pos))
    return PerPosReport(tuple(rows), min_support)


def shannon_diversity(counts: Iterable[float]) -> float:
    """Shannon Diversity Index H = -sum(p * ln p); 0 means a single label."""
    counts = list(counts)
    if not counts:
        raise InputError("shannon_diversity requires at least one count")
    if any(c <= 0 for c in counts):
        raise InputError("shannon_diversity requires positive counts")
    total = float(sum(counts))
    return -sum((c / total) * math.log(c / total) for c in counts)


@dataclass(frozen=True)
class LemmaByPosRow:
    pos: str
    accuracy: float
    frequency: int
    sdi: float


@dataclass(frozen=True)
class LemmaByPosReport:
    rows: tuple[LemmaByPosRow, ...]
    min_support: int = 10

    def rendered(self) -> tuple[LemmaByPosRow, ...]:
        return tuple(r for r in self.rows if r.frequency >= self.min_support)


def lemma_by_pos_report(
    gold_lemmas: Sequence[str],
    pred_lemmas: Sequence[str],
    gold_pos: Sequence[str],
    min_support: int = 10,
) -> LemmaByPosReport:
    """Lemma accuracy, frequency and gold-lemma SDI per gold POS."""
    if not (len(gold_lemmas) == len(pred_lemmas) == len(gold_pos)):
        raise InputError("lemma/POS columns not aligned")
    by_pos: dict[str, list[int]] = {}
    for i, pos in enumerate(gold_pos):
        by_pos.setdefault(pos, []).append(i)

    rows = []
    for pos, idx in by_pos.items():
        correct = sum(1 for i in idx if gold_lemmas[i] == pred_lemmas[i])
        lemma_counts = Counter(gold_lemmas[i] for i in idx)
        rows.append(
            LemmaByPosRow(
                pos,
                correct / len(idx),
                len(idx),
                shannon_diversity(lemma_counts.values()),
            )
        )
    rows.sort(key=lambda r: (-r.accuracy, r.pos))
    return LemmaByPosReport(tuple(rows), min_support)


# --- Sentence scores --------------------------------------------------------

SCORE_BINS = ("1", "0.9-1", "0.8-0.9", "<0.8")


@dataclass(frozen=True)
class SentenceScoreHistogram:
    scores: tuple[float, ...]
    bins: Mapping[str, int]

    def as_dict(self) -> dict:
        return {"bins": dict(self.bins), "sentences": len(self.scores)}


def _score_bin(score: float) -> str:
    if score == 1.0:
        return "1"
    if score >= 0.9:
        return "0.9-1"
    if score >= 0.8:
        return "0.8-0.9"
    return "<0.8"


def sentence_scores(
    gold: Sequence[Sentence],
    pred: Sequence[Sentence],
    columns: Sequence[str] = ("lemma",),
) -> SentenceScoreHistogram:
    """Per-sentence fraction of fully correct words, binned.

    A word counts as correct when every evaluated column matches the gold
    annotation (default: lemma only).
    """
    if len(gold) != len(pred):
        raise InputError(f"gold/pred sentence counts differ: {len(gold)} vs {len(pred)}")
    for column in columns:
        if column not in EVAL_COLUMNS:
            raise InputError(f"unknown evaluation column {column!r}")

    scores = []
    bins = {name: 0 for name in SCORE_BINS}
    for g_sent, p_sent in zip(gold, pred):
        if len(g_sent.tokens) != len(p_sent.tokens):
            raise InputError("sentence token counts differ between gold and pred")
        correct = 0
        for g_tok, p_tok in zip(g_sent.tokens, p_sent.tokens):
            if all(getattr(g_tok, c) == getattr(p_tok, c) for c in columns):
                correct += 1
        score = correct / len(g_sent.tokens)
        scores.append(score)
        bins[_score_bin(score)] += 1
    return SentenceScoreHistogram(tuple(scores), bins)


# --- Homograph cross-prediction report --------------------------------------

QUE_FAMILY = ("que1", "que2", "que3", "que4")


@dataclass(frozen=True)
class HomographRow:
    lemma: str
    frequency: int
    pos_accuracy: float
    lemma_accuracy: float
    combined_accuracy: float
    predicted_que4: float
    predicted_que2: float


def que_cross_report(
    gold_lemmas: Sequence[str],
    gold_pos: Sequence[str],
    pred_lemmas: Sequence[str],
    pred_pos: Sequence[str],
    family: Sequence[str] = QUE_FAMILY,
) -> tuple[HomographRow, ...]:
    """Per-homograph POS/lemma/combined accuracy and cross-prediction rates."""
    if not (len(gold_lemmas) == len(gold_pos) == len(pred_lemmas) == len(pred_pos)):
        raise InputError("gold/pred columns not aligned")

    rows = []
    for lemma in family:
        idx = [i for i, g in enumerate(gold_lemmas) if g == lemma]
        if not idx:
            continue
        n = len(idx)
        pos_ok = sum(1 for i in idx if gold_pos[i] == pred_pos[i])
        lem_ok = sum(1 for i in idx if gold_lemmas[i] == pred_lemmas[i])
        both = sum(
            1
            for i in idx
            if gold_pos[i] == pred_pos[i] and gold_lemmas[i] == pred_lemmas[i]
        )
        as_que4 = sum(1 for i in idx if pred_lemmas[i] == "que4")
        as_que2 = sum(1 for i in idx if pred_lemmas[i] == "que2")
        rows.append(
            HomographRow(
                lemma, n, pos_ok / n, lem_ok / n, both / n, as_que4 / n, as_que2 / n
            )
        )
    return tuple(rows)


# --- POS-driven lemma post-treatment ----------------------------------------

RULE_CONDITIONS = ("always", "preceding_negation", "no_preceding_negation")

#: Negation lemmas that signal the restrictive "ne ... que" construction.
NEGATION_LEMMAS = frozenset({"ne1", "ne2"})


@dataclass(frozen=True)
class PosttreatRule:
    """Rewrite the predicted lemma of family members according to the
    independently predicted POS."""

    family: frozenset[str]
    pos: str
    replacement: str
    condition: str = "always"

    def __post_init__(self) -> None:
        if self.condition not in RULE_CONDITIONS:
            raise RuleError(f"unknown rule condition {self.condition!r}")
        if not self.family:
            raise RuleError("rule family must be non-empty")


_QUE = frozenset(QUE_FAMILY)

DEFAULT_QUE_RULES: tuple[PosttreatRule, ...] = (
    PosttreatRule(_QUE, "PROrel", "que2"),
    PosttreatRule(_QUE, "ADVint", "que3"),
    PosttreatRule(_QUE, "CONsub", "que1", "preceding_negation"),
    PosttreatRule(_QUE, "CONsub", "que4", "no_preceding_negation"),
    PosttreatRule(_QUE, "CONcoo", "que4"),
)


def load_rules(path: str | Path) -> tuple[PosttreatRule, ...]:
    """Rule file: one rule per line, "lemma1,lemma2<TAB>POS<TAB>replacement"
    with an optional fourth condition column."""
    rules = []
    for lineno, line in enumerate(
        Path(path).read_text(encoding="utf-8").split("\n"), start=1
    ):
        line = line.rstrip("\r")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) not in (3, 4):
            raise RuleError(f"rule line {lineno}: expected 3 or 4 columns")
        family = frozenset(l for l in parts[0].split(",") if l)
        condition = parts[3] if len(parts) == 4 else "always"
        try:
            rules.append(PosttreatRule(family, parts[1], parts[2], condition))
        except RuleError as exc:
            raise RuleError(f"rule line {lineno}: {exc}") from None
    if not rules:
        raise RuleError(f"rule file {path} contains no rules")
    return tuple(rules)


def _rewrite_sentence(
    sentence: Sentence, rules: Sequence[PosttreatRule]
) -> Sentence:
    lemmas = [t.lemma for t in sentence.tokens]
    new_tokens = []
    for i, token in enumerate(sentence.tokens):
        replacement = None
        for rule in rules:
            if token.lemma not in rule.family or token.pos != rule.pos:
                continue
            if rule.condition != "always":
                negated = any(l in NEGATION_LEMMAS for l in lemmas[:i])
                if (rule.condition == "preceding_negation") != negated:
                    continue
            replacement = rule.replacement
            break
        if replacement is None or replacement == token.lemma:
            new_tokens.append(token)
        else:
            new_tokens.append(
                AnnotatedToken(token.form, replacement, token.pos, token.morph)
            )
    return Sentence(tuple(new_tokens), sentence.boundary_kind)


def pos_lemma_posttreatment(
    doc: Document, rules: Sequence[PosttreatRule] = DEFAULT_QUE_RULES
) -> Document:
    """Rewrite predicted lemmas whose family/POS combination matches a rule.

    Tokens outside every rule's lemma family are untouched; applying the
    pass twice equals applying it once.
    """
    sentences = tuple(_rewrite_sentence(s, rules) for s in doc.sentences)
    return Document(doc.id, sentences, doc.provenance, doc.comments)


# --- TSV rendering ----------------------------------------------------------
# Fixed float formats keep report files byte-identical across runs.


def render_metrics_tsv(tables: Mapping[str, MetricsTable]) -> str:
    lines = ["task\tsubset\taccuracy\tprecision\trecall\tf1\tsupport"]
    for task, table in tables.items():
        for subset, m in table.rows.items():
            lines.append(
                f"{task}\t{subset}\t{m.accuracy:.4f}\t{m.precision:.4f}"
                f"\t{m.recall:.4f}\t{m.f1:.4f}\t{m.support}"
            )
    return "\n".join(lines) + "\n"


def render_confusion_tsv(table: ConfusionTable) -> str:
    lines = ["gold\terrors\tpred\tfreq"]
    for row in table.rows:
        for pred, count in row.cells:
            lines.append(f"{row.gold}\t{row.errors}\t{pred}\t{count}")
    return "\n".join(lines) + "\n"


def render_per_pos_tsv(report: PerPosReport) -> str:
    lines = ["pos\tprecision\trecall\tf1\tsupport"]
    for row in report.rendered():
        lines.append(
            f"{row.pos}\t{row.precision:.2f}\t{row.recall:.2f}\t{row.f1:.2f}\t{row.support}"
        )
    return "\n".join(lines) + "\n"


def render_lemma_by_pos_tsv(report: LemmaByPosReport) -> str:
    lines = ["pos\tlemma_accuracy\tfreq\tsdi"]
    for row in report.rendered():
        lines.append(
            f"{row.pos}\t{row.accuracy * 100:.2f}\t{row.frequency}\t{row.sdi:.2f}"
        )
    return "\n".join(lines) + "\n"


def render_sentence_scores_tsv(hist: SentenceScoreHistogram) -> str:
    lines = ["score\tsentences"]
    for name in SCORE_BINS:
        lines.append(f"{name}\t{hist.bins[name]}")
    return "\n".join(lines) + "\n"


def render_que_report_tsv(rows: Sequence[HomographRow]) -> str:
    lines = ["lemma\tfreq\tpos_acc\tlemma_acc\tcombined\tpred_que4\tpred_que2"]
    for row in rows:
        lines.append(
            f"{row.lemma}\t{row.frequency}\t{row.pos_accuracy * 100:.2f}"
            f"\t{row.lemma_accuracy * 100:.2f}\t{row.combined_accuracy * 100:.2f}"
            f"\t{row.predicted_que4 * 100:.2f}\t{row.predicted_que2 * 100:.2f}"
        )
    return "\n".join(lines) + "\n"


def render_error_concentration_tsv(report: ErrorConcentration) -> str:
    return (
        "measure\tvalue\n"
        f"errors_on_lemma_set\t{report.set_fraction * 100:.2f}\n"
        f"single_error_lemmas\t{report.single_error_lemma_count}\n"
        f"singleton_error_types\t{report.singleton_type_fraction * 100:.2f}\n"
    )
