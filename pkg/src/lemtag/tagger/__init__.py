from .vocab import (
    CLASSIFIER_TASKS,
    MORPH_TASKS,
    TASKS,
    CharVocab,
    LabelVocab,
    Vocabularies,
    build_vocab,
    gold_column,
)
from .training import (
    TrainConfig,
    TrainedModel,
    annotate,
    annotate_document,
    compute_loss,
    predict_document,
    predict_sentence,
    predict_sentences,
    train,
)
from .serialize import load_model, save_model

__all__ = [
    "TASKS",
    "MORPH_TASKS",
    "CLASSIFIER_TASKS",
    "CharVocab",
    "LabelVocab",
    "Vocabularies",
    "build_vocab",
    "gold_column",
    "TrainConfig",
    "TrainedModel",
    "train",
    "compute_loss",
    "predict_sentence",
    "predict_sentences",
    "predict_document",
    "annotate",
    "annotate_document",
    "save_model",
    "load_model",
]
