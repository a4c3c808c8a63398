"""Domain types and TSV I/O for annotated corpora.

The corpus format is one token per line with 2 to 4 tab-separated columns
(form, lemma, pos, morph).  Blank lines terminate sentences, lines starting
with "#" are comments, and an optional header line is recognised by the
literal first cell "form".  Contracted tokens carry composite annotations:
"."-joined POS tags ("PRE.DETdef") aligned with "+"-joined morph segments
("MORPH=empty+NOMB.=s|GENRE=m|CAS=r").
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping

from .errors import ParseError, ReferenceListError

EMPTY_MARKER = "_"
MORPH_EMPTY = "MORPH=empty"

#: The seven morphology categories composite strings may use.
MORPH_CATEGORIES = ("CAS", "DEGRE", "GENRE", "MODE", "NOMB", "PERS", "TEMPS")

#: Both spellings occur in real data; they are equivalent strong-punctuation tags.
STRONG_PUNCTUATION = frozenset({"PONfrt", "PUNfrt"})

_POS_RE = re.compile(r"[A-Za-z.]+\Z")


def atomic_pos(pos: str) -> tuple[str, ...]:
    """Split a possibly composite POS tag ("PRE.DETdef") into atomic tags."""
    if pos == EMPTY_MARKER:
        return ()
    return tuple(pos.split("."))


def is_strong_punctuation(pos: str) -> bool:
    return any(p in STRONG_PUNCTUATION for p in atomic_pos(pos))


class BoundaryKind(Enum):
    STRONG_PUNCTUATION = "strong_punctuation"
    LINE = "line"


@dataclass(frozen=True)
class AnnotatedToken:
    """One surface form with its lemma, POS tag and composite morph string."""

    form: str
    lemma: str
    pos: str = EMPTY_MARKER
    morph: str = EMPTY_MARKER

    def __post_init__(self) -> None:
        if not self.form:
            raise ParseError("token form must be non-empty")
        if self.pos != EMPTY_MARKER:
            if not _POS_RE.match(self.pos) or not all(atomic_pos(self.pos)):
                raise ParseError(f"invalid POS tag {self.pos!r}")
        n_pos = len(atomic_pos(self.pos))
        n_morph = len(self.morph.split("+"))
        if n_morph > 1 and n_pos > 1 and n_morph != n_pos:
            raise ParseError(
                f"composite morph {self.morph!r} has {n_morph} segments "
                f"but POS {self.pos!r} has {n_pos}"
            )

    @property
    def has_morph(self) -> bool:
        return self.morph not in (EMPTY_MARKER, MORPH_EMPTY)


@dataclass(frozen=True)
class Sentence:
    """Ordered tokens sharing one segmentation unit.

    The boundary kind records how the unit ends: on a strong-punctuation
    token or on a raw line/blank-line boundary.  Freshly parsed corpora may
    still carry strong punctuation mid-sentence; re-segmentation is the job
    of preprocess.segment_sentences.
    """

    tokens: tuple[AnnotatedToken, ...]
    boundary_kind: BoundaryKind = BoundaryKind.LINE

    def __post_init__(self) -> None:
        if not self.tokens:
            raise ParseError("sentence must contain at least one token")

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class Document:
    """A parsed corpus file: sentences plus comment lines anchored to tokens.

    Comments are stored as (global token index, text) pairs; the comment is
    emitted immediately before the token with that index (index == total
    token count anchors after the last token).
    """

    id: str
    sentences: tuple[Sentence, ...]
    provenance: str = ""
    comments: tuple[tuple[int, str], ...] = ()

    def __iter__(self) -> Iterable[Sentence]:
        return iter(self.sentences)

    @property
    def n_tokens(self) -> int:
        return sum(len(s) for s in self.sentences)

    def tokens(self) -> Iterable[AnnotatedToken]:
        for sentence in self.sentences:
            yield from sentence.tokens


def _boundary_for(tokens: list[AnnotatedToken]) -> BoundaryKind:
    if tokens and is_strong_punctuation(tokens[-1].pos):
        return BoundaryKind.STRONG_PUNCTUATION
    return BoundaryKind.LINE


def parse_tsv(data: bytes | str, doc_id: str = "doc", provenance: str = "") -> Document:
    """Parse TSV corpus bytes into a Document.

    Raises ParseError on undecodable input, rows with one or five or more
    columns, or a file containing no tokens at all.
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"corpus is not valid UTF-8: {exc}") from None
    else:
        text = data

    sentences: list[Sentence] = []
    comments: list[tuple[int, str]] = []
    current: list[AnnotatedToken] = []
    n_tokens = 0
    header_seen = False

    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            if current:
                sentences.append(Sentence(tuple(current), _boundary_for(current)))
                current = []
            continue
        if line.startswith("#"):
            comments.append((n_tokens, line))
            continue
        cells = line.split("\t")
        if len(cells) == 1:
            raise ParseError(f"line {lineno}: expected 2-4 tab-separated columns, got 1")
        if len(cells) > 4:
            raise ParseError(
                f"line {lineno}: expected 2-4 tab-separated columns, got {len(cells)}"
            )
        if not header_seen and not sentences and not current and cells[0] == "form":
            header_seen = True
            continue
        form, lemma = cells[0], cells[1]
        pos = cells[2] if len(cells) > 2 else EMPTY_MARKER
        morph = cells[3] if len(cells) > 3 else EMPTY_MARKER
        try:
            token = AnnotatedToken(form, lemma, pos, morph)
        except ParseError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
        current.append(token)
        n_tokens += 1

    if current:
        sentences.append(Sentence(tuple(current), _boundary_for(current)))
    if not sentences:
        raise ParseError("corpus contains no tokens")
    return Document(doc_id, tuple(sentences), provenance, tuple(comments))


def write_tsv(doc: Document) -> bytes:
    """Serialize a Document back to TSV bytes.

    parse_tsv(write_tsv(d)) reproduces d field-for-field, and a second
    write pass is byte-identical.
    """
    comment_at: dict[int, list[str]] = {}
    for anchor, text in doc.comments:
        comment_at.setdefault(anchor, []).append(text)

    lines: list[str] = []
    index = 0
    for sentence in doc.sentences:
        for token in sentence.tokens:
            for text in comment_at.get(index, ()):
                lines.append(text)
            lines.append("\t".join((token.form, token.lemma, token.pos, token.morph)))
            index += 1
        lines.append("")
    for text in comment_at.get(index, ()):
        lines.append(text)
    return ("\n".join(lines) + "\n").encode("utf-8") if lines else b""


@dataclass(frozen=True)
class ReferenceSet:
    """Allowed lemmas, atomic POS tags, and per-category morph values."""

    lemmas: frozenset[str]
    pos_tags: frozenset[str]
    morph_values: Mapping[str, frozenset[str]]

    def __post_init__(self) -> None:
        if not self.lemmas or not self.pos_tags:
            raise ReferenceListError("reference lemma and POS sets must be non-empty")
        if set(self.morph_values) != set(MORPH_CATEGORIES):
            raise ReferenceListError(
                f"morph categories must be exactly {sorted(MORPH_CATEGORIES)}, "
                f"got {sorted(self.morph_values)}"
            )
        for category, values in self.morph_values.items():
            if not values:
                raise ReferenceListError(f"no allowed values for category {category}")


def normalize_category(name: str) -> str:
    """Accept the dotted spelling used in corpora ("NOMB.") for any category."""
    return name[:-1] if name.endswith(".") else name


def _read_lines(path: str | Path, what: str) -> list[str]:
    p = Path(path)
    if not p.exists():
        raise ReferenceListError(f"{what} file not found: {p}")
    return [line.rstrip("\r") for line in p.read_text(encoding="utf-8").split("\n")]


def load_reference_lists(
    lemma_path: str | Path, pos_path: str | Path, morph_path: str | Path
) -> ReferenceSet:
    """Load newline-delimited lemma/POS lists and a CATEGORY<TAB>value morph list."""
    lemmas = frozenset(l for l in _read_lines(lemma_path, "lemma") if l.strip())
    pos_tags = frozenset(l for l in _read_lines(pos_path, "POS") if l.strip())

    morph: dict[str, set[str]] = {c: set() for c in MORPH_CATEGORIES}
    for lineno, line in enumerate(_read_lines(morph_path, "morph"), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ReferenceListError(
                f"morph list line {lineno}: expected CATEGORY<TAB>value, got {line!r}"
            )
        category = normalize_category(parts[0])
        if category not in morph:
            raise ReferenceListError(
                f"morph list line {lineno}: unknown category {parts[0]!r}"
            )
        morph[category].add(parts[1])
    return ReferenceSet(
        lemmas, pos_tags, {c: frozenset(v) for c, v in morph.items()}
    )


@dataclass(frozen=True)
class ValidationIssue:
    doc_id: str
    sentence_index: int
    token_index: int
    value: str


@dataclass(frozen=True)
class ValidationReport:
    unallowed_lemmas: tuple[ValidationIssue, ...] = ()
    unallowed_pos: tuple[ValidationIssue, ...] = ()
    unallowed_morph: tuple[ValidationIssue, ...] = ()

    @property
    def is_clean(self) -> bool:
        return not (self.unallowed_lemmas or self.unallowed_pos or self.unallowed_morph)

    def __len__(self) -> int:
        return (
            len(self.unallowed_lemmas)
            + len(self.unallowed_pos)
            + len(self.unallowed_morph)
        )


def _morph_pairs(morph: str) -> Iterable[str]:
    """Yield the raw "CAT=value" pairs of a composite morph string."""
    if morph in (EMPTY_MARKER, MORPH_EMPTY, ""):
        return
    for segment in morph.split("+"):
        if segment == MORPH_EMPTY:
            continue
        yield from segment.split("|")


def validate(doc: Document, refs: ReferenceSet) -> ValidationReport:
    """Report every lemma, atomic POS tag and morph value absent from refs.

    Contracted lemmas ("en1+le") are checked per "+"-segment.  Cross-category
    impossible combinations are deliberately not flagged here.
    """
    bad_lemmas: list[ValidationIssue] = []
    bad_pos: list[ValidationIssue] = []
    bad_morph: list[ValidationIssue] = []

    for s_idx, sentence in enumerate(doc.sentences):
        for t_idx, token in enumerate(sentence.tokens):
            for part in token.lemma.split("+"):
                if part not in refs.lemmas:
                    bad_lemmas.append(ValidationIssue(doc.id, s_idx, t_idx, part))
            for tag in atomic_pos(token.pos):
                if tag not in refs.pos_tags:
                    bad_pos.append(ValidationIssue(doc.id, s_idx, t_idx, tag))
            for pair in _morph_pairs(token.morph):
                category, eq, value = pair.partition("=")
                category = normalize_category(category)
                allowed = refs.morph_values.get(category)
                if not eq or allowed is None or value not in allowed:
                    bad_morph.append(ValidationIssue(doc.id, s_idx, t_idx, pair))

    return ValidationReport(tuple(bad_lemmas), tuple(bad_pos), tuple(bad_morph))
