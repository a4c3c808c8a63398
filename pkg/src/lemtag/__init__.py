"""lemtag: train, select, apply and evaluate joint lemma/POS/morphology
taggers for non-standardized historical languages."""

__version__ = "0.1.0"
