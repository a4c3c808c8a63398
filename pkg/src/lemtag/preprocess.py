"""Dataset preparation: segmentation, numeral normalization, morph
decomposition into per-category values, capitalization noise and the
seeded train/dev/test split."""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass

from .corpus import (
    EMPTY_MARKER,
    MORPH_CATEGORIES,
    MORPH_EMPTY,
    AnnotatedToken,
    BoundaryKind,
    Document,
    Sentence,
    is_strong_punctuation,
    normalize_category,
)
from .errors import MorphError, SplitError

#: Canonical category order when re-joining a morph vector, matching the
#: order seen in the source annotation ("NOMB.=s|GENRE=m|CAS=r|DEGRE=p").
JOIN_ORDER = ("NOMB", "GENRE", "CAS", "DEGRE", "MODE", "TEMPS", "PERS")

#: NOMB is conventionally written with a trailing dot in composite strings.
_WRITE_NAMES = {"NOMB": "NOMB."}

_EMPTY_VALUE = "empty"


@dataclass(frozen=True)
class MorphVector:
    """One value slot per category, in fixed CAS..TEMPS order.

    Slots of contracted tokens hold "+"-joined per-segment values, padded
    with "empty" for segments lacking the category; "_" marks a category
    no segment mentions.
    """

    cas: str = EMPTY_MARKER
    degre: str = EMPTY_MARKER
    genre: str = EMPTY_MARKER
    mode: str = EMPTY_MARKER
    nomb: str = EMPTY_MARKER
    pers: str = EMPTY_MARKER
    temps: str = EMPTY_MARKER

    def get(self, category: str) -> str:
        return getattr(self, category.lower())

    def as_dict(self) -> dict[str, str]:
        return {c: self.get(c) for c in MORPH_CATEGORIES}


def split_morph(composite: str) -> MorphVector:
    """Decompose a composite morph string into one value per category.

    "MORPH=empty" / "_" give an all-"_" vector; contraction segments
    ("+"-joined) produce "+"-joined slot values ("empty+s").  Raises
    MorphError for unknown category names or malformed pairs.
    """
    if composite in (EMPTY_MARKER, MORPH_EMPTY, ""):
        return MorphVector()

    segments = composite.split("+")
    per_segment: list[dict[str, str]] = []
    for segment in segments:
        values: dict[str, str] = {}
        if segment == MORPH_EMPTY:
            per_segment.append(values)
            continue
        for pair in segment.split("|"):
            category, eq, value = pair.partition("=")
            if not eq or not category:
                raise MorphError(f"malformed morph pair {pair!r} in {composite!r}")
            category = normalize_category(category)
            if category not in MORPH_CATEGORIES:
                raise MorphError(f"unknown morph category {category!r} in {composite!r}")
            if category in values:
                raise MorphError(f"duplicate category {category!r} in {composite!r}")
            values[category] = value
        per_segment.append(values)

    slots: dict[str, str] = {}
    for category in MORPH_CATEGORIES:
        if not any(category in seg for seg in per_segment):
            slots[category.lower()] = EMPTY_MARKER
        elif len(per_segment) == 1:
            slots[category.lower()] = per_segment[0][category]
        else:
            slots[category.lower()] = "+".join(
                seg.get(category, _EMPTY_VALUE) for seg in per_segment
            )
    return MorphVector(**slots)


def join_morph(vector: MorphVector) -> str:
    """Re-assemble the canonical composite string for a morph vector.

    Inverse of split_morph on any vector split_morph can produce; an
    all-"_" vector becomes "MORPH=empty".
    """
    filled = {c: vector.get(c) for c in JOIN_ORDER if vector.get(c) != EMPTY_MARKER}
    if not filled:
        return MORPH_EMPTY

    # independently predicted categories may disagree on segment counts
    # ("impossible values"); pad the shorter slots rather than reject
    n_segments = max(len(v.split("+")) for v in filled.values())

    if n_segments == 1:
        return "|".join(f"{_WRITE_NAMES.get(c, c)}={v}" for c, v in filled.items())

    parts = {
        c: v.split("+") + [_EMPTY_VALUE] * (n_segments - len(v.split("+")))
        for c, v in filled.items()
    }
    segments = []
    for i in range(n_segments):
        pairs = [
            f"{_WRITE_NAMES.get(c, c)}={parts[c][i]}"
            for c in JOIN_ORDER
            if c in parts and parts[c][i] != _EMPTY_VALUE
        ]
        segments.append("|".join(pairs) if pairs else MORPH_EMPTY)
    return "+".join(segments)


# --- Roman numeral normalization -------------------------------------------

# Accepts subtractive forms and the additive variants common in medieval
# sources (iiii, viiii, dcccc...), value range 1..3999.
_ROMAN_RE = re.compile(
    r"(?=[mdclxvi])(m{0,3})(cm|cd|d?c{0,4})(xc|xl|l?x{0,4})(ix|iv|v?i{0,4})\Z"
)
_ROMAN_TOKENS = (
    ("cm", 900), ("cd", 400), ("xc", 90), ("xl", 40), ("ix", 9), ("iv", 4),
    ("m", 1000), ("d", 500), ("c", 100), ("l", 50), ("x", 10), ("v", 5), ("i", 1),
)
_DOTTED_RE = re.compile(r"\.([a-zA-Z]+)\.\Z")
_DOTTED_MULT_RE = re.compile(r"\.([a-zA-Z]+)\.([mcMC])\.\Z")
_MULTIPLIERS = {"m": 1000, "c": 100}


def roman_value(text: str) -> int | None:
    """Parse a Roman numeral (case-insensitive); None if not well-formed."""
    lowered = text.lower()
    if not _ROMAN_RE.match(lowered):
        return None
    value = 0
    i = 0
    while i < len(lowered):
        for token, amount in _ROMAN_TOKENS:
            if lowered.startswith(token, i):
                value += amount
                i += len(token)
                break
    return value


def normalize_roman(form: str) -> str:
    """Replace Roman-numeral forms by decimal digit strings.

    Handles dot-delimited numerals (".xiv.", with a trailing ".m."/".c."
    segment multiplying by 1000/100) and bare all-uppercase numerals.
    Lowercase undelimited candidates ("mil", "vi") pass through unchanged
    to avoid clobbering homographic words.
    """
    match = _DOTTED_MULT_RE.fullmatch(form)
    if match:
        value = roman_value(match.group(1))
        if value is not None:
            return str(value * _MULTIPLIERS[match.group(2).lower()])
    match = _DOTTED_RE.fullmatch(form)
    if match:
        value = roman_value(match.group(1))
        if value is not None:
            return str(value)
    if form.isupper():
        value = roman_value(form)
        if value is not None:
            return str(value)
    return form


def normalize_document_numerals(doc: Document) -> Document:
    """Apply normalize_roman to every token form (gold columns untouched)."""
    sentences = tuple(
        Sentence(
            tuple(
                AnnotatedToken(normalize_roman(t.form), t.lemma, t.pos, t.morph)
                for t in s.tokens
            ),
            s.boundary_kind,
        )
        for s in doc.sentences
    )
    return Document(doc.id, sentences, doc.provenance, doc.comments)


# --- Segmentation -----------------------------------------------------------


def segment_sentences(doc: Document, mode: str = "punctuation") -> list[Sentence]:
    """Re-segment a document's token stream.

    "punctuation": a sentence ends right after a strong-punctuation token
    (PONfrt/PUNfrt); trailing unterminated tokens form a final sentence.
    "line": the blank-line boundaries already in the TSV are kept as-is.
    """
    if mode == "line":
        return list(doc.sentences)
    if mode != "punctuation":
        raise ValueError(f"unknown segmentation mode {mode!r}")

    sentences: list[Sentence] = []
    current: list[AnnotatedToken] = []
    for token in doc.tokens():
        current.append(token)
        if is_strong_punctuation(token.pos):
            sentences.append(Sentence(tuple(current), BoundaryKind.STRONG_PUNCTUATION))
            current = []
    if current:
        sentences.append(Sentence(tuple(current), BoundaryKind.LINE))
    return sentences


# --- Splitting and noise ----------------------------------------------------


@dataclass(frozen=True)
class SplitSet:
    """The train/dev/test partition of a sentence list."""

    train: tuple[Sentence, ...]
    dev: tuple[Sentence, ...]
    test: tuple[Sentence, ...]
    seed: int
    ratios: tuple[float, float, float]


def split_dataset(
    sentences: list[Sentence],
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1),
    seed: int = 0,
) -> SplitSet:
    """Seeded uniform shuffle followed by a contiguous train/dev/test cut.

    Part sizes are round(ratio * N) for dev and test with the remainder
    going to train; the same seed always yields the identical split.
    """
    if len(ratios) != 3 or any(r <= 0 for r in ratios):
        raise SplitError(f"ratios must be three positive fractions, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise SplitError(f"ratios must sum to 1, got {sum(ratios)}")

    n = len(sentences)
    n_dev = math.floor(ratios[1] * n + 0.5)
    n_test = math.floor(ratios[2] * n + 0.5)
    n_train = n - n_dev - n_test
    if min(n_train, n_dev, n_test) < 1:
        raise SplitError(
            f"{n} sentences are too few for ratios {ratios}: "
            f"sizes would be {n_train}/{n_dev}/{n_test}"
        )

    order = list(range(n))
    random.Random(seed).shuffle(order)
    shuffled = [sentences[i] for i in order]
    return SplitSet(
        train=tuple(shuffled[:n_train]),
        dev=tuple(shuffled[n_train : n_train + n_dev]),
        test=tuple(shuffled[n_train + n_dev :]),
        seed=seed,
        ratios=tuple(ratios),
    )


def apply_capitalization_noise(
    sentence: Sentence, probability: float, rng: random.Random
) -> Sentence:
    """With the given probability, return the sentence with fully uppercased
    forms; gold columns are never altered."""
    if not 0.0 <= probability <= 1.0:
        raise ValueError(f"probability must be in [0, 1], got {probability}")
    if rng.random() >= probability:
        return sentence
    return Sentence(
        tuple(
            AnnotatedToken(t.form.upper(), t.lemma, t.pos, t.morph)
            for t in sentence.tokens
        ),
        sentence.boundary_kind,
    )
