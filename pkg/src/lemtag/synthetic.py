"""Synthetic fixture corpora.

The real gold corpora cannot be redistributed, so tests and examples run on
a generated language with fully regular morphology: every content token is
stem + suffix, the lemma is stem + "er", and the suffix alone determines
POS and morph values.  Character-level models must therefore copy an
arbitrary stem and rewrite the ending, which is exactly the generalization
the tagger is meant to deliver on unseen forms.
"""

from __future__ import annotations

import random

from .corpus import AnnotatedToken, BoundaryKind, Document, Sentence

#: suffix -> (POS tag, composite morph)
SUFFIX_TABLE = {
    "a": ("NOMcom", "NOMB.=s"),
    "es": ("NOMcom", "NOMB.=p"),
    "ons": ("VERcjg", "MODE=ind|PERS=4"),
    "ir": ("VERinf", "MORPH=empty"),
    "u": ("ADJqua", "GENRE=m"),
}

LEMMA_SUFFIX = "er"

_ONSETS = ["b", "br", "ch", "d", "f", "g", "gr", "l", "m", "n", "p", "r", "s", "t", "v"]
_VOWELS = ["a", "e", "i", "o", "u", "ai", "ei", "ou"]
_CODAS = ["", "l", "n", "r", "s", "nd"]


def make_stems(n: int, seed: int = 0) -> list[str]:
    rng = random.Random(seed)
    stems: list[str] = []
    seen = set()
    while len(stems) < n:
        syllables = rng.choice((1, 2))
        stem = "".join(
            rng.choice(_ONSETS) + rng.choice(_VOWELS) for _ in range(syllables)
        ) + rng.choice(_CODAS)
        if stem not in seen:
            seen.add(stem)
            stems.append(stem)
    return stems


def inflect(stem: str, suffix: str) -> AnnotatedToken:
    pos, morph = SUFFIX_TABLE[suffix]
    return AnnotatedToken(stem + suffix, stem + LEMMA_SUFFIX, pos, morph)


def regular_language(
    n_sentences: int,
    seed: int = 0,
    n_stems: int = 24,
    min_tokens: int = 3,
    max_tokens: int = 7,
    end_punctuation: bool = True,
) -> Document:
    """Generate a corpus of the regular stem+suffix language."""
    rng = random.Random(seed)
    stems = make_stems(n_stems, seed)
    suffixes = list(SUFFIX_TABLE)
    sentences = []
    for _ in range(n_sentences):
        tokens = [
            inflect(rng.choice(stems), rng.choice(suffixes))
            for _ in range(rng.randint(min_tokens, max_tokens))
        ]
        if end_punctuation:
            tokens.append(AnnotatedToken(".", ".", "PONfrt", "_"))
            boundary = BoundaryKind.STRONG_PUNCTUATION
        else:
            boundary = BoundaryKind.LINE
        sentences.append(Sentence(tuple(tokens), boundary))
    return Document("synthetic", tuple(sentences), provenance="generated fixture")


def frequency_lookup_baseline(
    train: list[Sentence], forms: list[str]
) -> list[str]:
    """Most-frequent-lemma-per-form baseline; unseen forms fall back to the
    globally most frequent lemma.  Used to show that the neural model's
    unknown-token accuracy comes from character-level generalization."""
    from collections import Counter

    by_form: dict[str, Counter] = {}
    overall: Counter = Counter()
    for sentence in train:
        for token in sentence.tokens:
            by_form.setdefault(token.form, Counter())[token.lemma] += 1
            overall[token.lemma] += 1
    fallback = overall.most_common(1)[0][0]
    out = []
    for form in forms:
        counts = by_form.get(form)
        out.append(counts.most_common(1)[0][0] if counts else fallback)
    return out
