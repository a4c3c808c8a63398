"""Vocabularies built from the training split only, so that anything unseen
at prediction time maps to the unknown sentinel and classifier outputs stay
within the training label set."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from ..corpus import Sentence
from ..preprocess import split_morph

MORPH_TASKS = ("CAS", "DEGRE", "GENRE", "MODE", "NOMB", "PERS", "TEMPS")
TASKS = ("LEMMA", "POS") + MORPH_TASKS
CLASSIFIER_TASKS = TASKS[1:]

PAD_IDX, UNK_IDX, BOS_IDX, EOS_IDX = 0, 1, 2, 3
SENTINELS = ("<pad>", "<unk>", "<s>", "</s>")


class CharVocab:
    """Dense character index with reserved padding/unknown/start/end slots."""

    def __init__(self, chars: Iterable[str], counts: Mapping[str, int] | None = None):
        self.symbols = list(SENTINELS) + sorted(set(chars) - set(SENTINELS))
        self.index = {s: i for i, s in enumerate(self.symbols)}
        self.counts = dict(counts or {})

    def __len__(self) -> int:
        return len(self.symbols)

    def encode(self, text: str) -> list[int]:
        return [self.index.get(ch, UNK_IDX) for ch in text]

    def decode(self, ids: Iterable[int]) -> str:
        return "".join(
            self.symbols[i] for i in ids if i not in (PAD_IDX, UNK_IDX, BOS_IDX, EOS_IDX)
        )

    def to_dict(self) -> dict:
        return {"symbols": self.symbols[len(SENTINELS):], "counts": self.counts}

    @classmethod
    def from_dict(cls, data: dict) -> "CharVocab":
        return cls(data["symbols"], data.get("counts"))


class LabelVocab:
    """Dense index over the classification labels seen in training."""

    def __init__(self, labels: Iterable[str], counts: Mapping[str, int] | None = None):
        self.labels = sorted(set(labels))
        self.index = {l: i for i, l in enumerate(self.labels)}
        self.counts = dict(counts or {})

    def __len__(self) -> int:
        return len(self.labels)

    def encode(self, label: str) -> int:
        return self.index[label]

    def decode(self, idx: int) -> str:
        return self.labels[idx]

    def to_dict(self) -> dict:
        return {"labels": self.labels, "counts": self.counts}

    @classmethod
    def from_dict(cls, data: dict) -> "LabelVocab":
        return cls(data["labels"], data.get("counts"))


@dataclass
class Vocabularies:
    task: str
    chars: CharVocab
    labels: LabelVocab | None = None
    lemma_chars: CharVocab | None = None

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "chars": self.chars.to_dict(),
            "labels": self.labels.to_dict() if self.labels else None,
            "lemma_chars": self.lemma_chars.to_dict() if self.lemma_chars else None,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Vocabularies":
        return cls(
            task=data["task"],
            chars=CharVocab.from_dict(data["chars"]),
            labels=LabelVocab.from_dict(data["labels"]) if data["labels"] else None,
            lemma_chars=(
                CharVocab.from_dict(data["lemma_chars"]) if data["lemma_chars"] else None
            ),
        )


def gold_column(sentence: Sentence, task: str) -> list[str]:
    """The gold target string per token for one task."""
    if task == "LEMMA":
        return [t.lemma for t in sentence.tokens]
    if task == "POS":
        return [t.pos for t in sentence.tokens]
    if task in MORPH_TASKS:
        return [split_morph(t.morph).get(task) for t in sentence.tokens]
    raise ValueError(f"unknown task {task!r}")


def build_vocab(train: Sequence[Sentence], task: str) -> Vocabularies:
    """Character (and label or output-alphabet) inventories from the train split."""
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}")
    if not train:
        raise ValueError("cannot build vocabularies from an empty train split")

    char_counts = Counter()
    for sentence in train:
        for token in sentence.tokens:
            char_counts.update(token.form)
    chars = CharVocab(char_counts.keys(), char_counts)

    if task == "LEMMA":
        lemma_counts = Counter()
        for sentence in train:
            for token in sentence.tokens:
                lemma_counts.update(token.lemma)
        return Vocabularies(task, chars, lemma_chars=CharVocab(lemma_counts.keys(), lemma_counts))

    label_counts = Counter()
    for sentence in train:
        label_counts.update(gold_column(sentence, task))
    return Vocabularies(task, chars, labels=LabelVocab(label_counts.keys(), label_counts))
