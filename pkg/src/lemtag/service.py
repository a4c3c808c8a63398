"""HTTP/JSON facade for tagging and post-correction sessions.

Corpora are flat TSV files in a directory; every accepted edit is appended
to a per-corpus journal (newline-delimited JSON) so that replaying the
journal over the original file reproduces the working state.  All writes to
one corpus are serialized through a lock and batch edits are atomic.

The JSON field names used here are the interface contract documented in
API.md at the repository root.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query, Response
from pydantic import BaseModel

from .corpus import (
    AnnotatedToken,
    Document,
    ReferenceSet,
    Sentence,
    load_reference_lists,
    parse_tsv,
    validate,
    write_tsv,
)
from .errors import LemtagError, ParseError
from .tagger import TrainedModel, annotate, load_model

EDITABLE_COLUMNS = ("lemma", "pos", "morph")
MAX_PAGE_SIZE = 500


@dataclass
class CorpusSession:
    corpus_id: str
    original: Document
    working: Document
    journal_path: Path
    lock: threading.Lock


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _token_payload(s_idx: int, t_idx: int, token: AnnotatedToken) -> dict:
    return {
        "sentence": s_idx,
        "token": t_idx,
        "form": token.form,
        "lemma": token.lemma,
        "pos": token.pos,
        "morph": token.morph,
    }


def _match_cell(pattern: str, value: str) -> bool:
    if pattern.endswith("*"):
        prefix = pattern[:-1]
        if "*" in prefix:
            raise ParseError("only a single trailing * wildcard is supported")
        return value.startswith(prefix)
    if "*" in pattern:
        raise ParseError("only a single trailing * wildcard is supported")
    return value == pattern


def _find_matches(doc: Document, filters: dict[str, str]) -> list[tuple[int, int]]:
    matches = []
    for s_idx, sentence in enumerate(doc.sentences):
        for t_idx, token in enumerate(sentence.tokens):
            if all(
                _match_cell(pattern, getattr(token, column))
                for column, pattern in filters.items()
            ):
                matches.append((s_idx, t_idx))
    return matches


def _apply_edits(doc: Document, edits: list[dict], column: str, value: str) -> Document:
    by_sentence: dict[int, dict[int, str]] = {}
    for edit in edits:
        by_sentence.setdefault(edit["sentence"], {})[edit["token"]] = value
    sentences = []
    for s_idx, sentence in enumerate(doc.sentences):
        changed = by_sentence.get(s_idx)
        if not changed:
            sentences.append(sentence)
            continue
        tokens = []
        for t_idx, token in enumerate(sentence.tokens):
            if t_idx in changed:
                fields = {
                    "form": token.form,
                    "lemma": token.lemma,
                    "pos": token.pos,
                    "morph": token.morph,
                }
                fields[column] = changed[t_idx]
                tokens.append(AnnotatedToken(**fields))
            else:
                tokens.append(token)
        sentences.append(Sentence(tuple(tokens), sentence.boundary_kind))
    return Document(doc.id, tuple(sentences), doc.provenance, doc.comments)


def replay_journal(original: Document, entries: list[dict]) -> Document:
    """Re-apply journaled edits over the original document."""
    doc = original
    for entry in entries:
        doc = _apply_edits(doc, entry["edits"], entry["column"], entry["new"])
    return doc


def _load_sessions(corpus_dir: Path) -> dict[str, CorpusSession]:
    sessions = {}
    for tsv_path in sorted(corpus_dir.glob("*.tsv")):
        corpus_id = tsv_path.stem
        original = parse_tsv(tsv_path.read_bytes(), doc_id=corpus_id)
        journal_path = corpus_dir / f"{corpus_id}.journal.jsonl"
        working = original
        if journal_path.exists():
            entries = [
                json.loads(line)
                for line in journal_path.read_text(encoding="utf-8").splitlines()
                if line.strip()
            ]
            working = replay_journal(original, entries)
        sessions[corpus_id] = CorpusSession(
            corpus_id, original, working, journal_path, threading.Lock()
        )
    return sessions


def _load_model_sets(model_dir: Path | None) -> dict[str, dict[str, TrainedModel]]:
    if model_dir is None or not Path(model_dir).exists():
        return {}
    model_dir = Path(model_dir)
    sets: dict[str, dict[str, TrainedModel]] = {}
    roots = [("default", model_dir)] + [
        (sub.name, sub) for sub in sorted(model_dir.iterdir()) if sub.is_dir()
    ]
    for set_id, root in roots:
        models = {}
        for path in sorted(root.glob("*.lmtg")):
            model = load_model(path)
            models[model.task] = model
        if models:
            sets[set_id] = models
    return sets


class SearchRequest(BaseModel):
    filters: dict[str, str]
    offset: int = 0
    limit: int = 50
    context: int = 3


class BatchEditRequest(BaseModel):
    column: str
    value: str
    filters: dict[str, str] | None = None
    sentence: int | None = None
    token: int | None = None
    expected_count: int | None = None


class TagRequest(BaseModel):
    text: str
    model_set: str = "default"


def create_app(
    corpus_dir: str | Path,
    model_dir: str | Path | None = None,
    lemma_list: str | Path | None = None,
    pos_list: str | Path | None = None,
    morph_list: str | Path | None = None,
) -> FastAPI:
    corpus_dir = Path(corpus_dir)
    sessions = _load_sessions(corpus_dir)
    model_sets = _load_model_sets(Path(model_dir) if model_dir else None)
    refs: ReferenceSet | None = None
    if lemma_list and pos_list and morph_list:
        refs = load_reference_lists(lemma_list, pos_list, morph_list)

    app = FastAPI(title="lemtag service")

    def _session(corpus_id: str) -> CorpusSession:
        session = sessions.get(corpus_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown corpus {corpus_id}")
        return session

    @app.get("/corpora")
    def list_corpora():
        return {
            "corpora": [
                {
                    "id": s.corpus_id,
                    "sentences": len(s.working.sentences),
                    "tokens": s.working.n_tokens,
                }
                for s in sessions.values()
            ]
        }

    @app.get("/corpus/{corpus_id}/tokens")
    def corpus_tokens(
        corpus_id: str,
        offset: int = Query(0, ge=0),
        limit: int = Query(50, ge=1, le=MAX_PAGE_SIZE),
    ):
        session = _session(corpus_id)
        rows = [
            _token_payload(s_idx, t_idx, token)
            for s_idx, sentence in enumerate(session.working.sentences)
            for t_idx, token in enumerate(sentence.tokens)
        ]
        return {
            "total": len(rows),
            "offset": offset,
            "limit": limit,
            "tokens": rows[offset : offset + limit],
        }

    @app.post("/corpus/{corpus_id}/search")
    def corpus_search(corpus_id: str, request: SearchRequest):
        session = _session(corpus_id)
        filters = {k: v for k, v in request.filters.items() if v}
        if not filters:
            raise HTTPException(status_code=400, detail="at least one filter required")
        for column in filters:
            if column not in ("form",) + EDITABLE_COLUMNS:
                raise HTTPException(status_code=400, detail=f"unknown filter column {column}")
        try:
            matches = _find_matches(session.working, filters)
        except ParseError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        limit = min(max(request.limit, 1), MAX_PAGE_SIZE)
        page = matches[request.offset : request.offset + limit]
        results = []
        for s_idx, t_idx in page:
            sentence = session.working.sentences[s_idx]
            lo = max(0, t_idx - request.context)
            hi = min(len(sentence.tokens), t_idx + request.context + 1)
            results.append(
                {
                    **_token_payload(s_idx, t_idx, sentence.tokens[t_idx]),
                    "context": [
                        _token_payload(s_idx, i, sentence.tokens[i])
                        for i in range(lo, hi)
                    ],
                }
            )
        return {"total": len(matches), "matches": results}

    @app.post("/corpus/{corpus_id}/batch-edit")
    def corpus_batch_edit(corpus_id: str, request: BatchEditRequest):
        session = _session(corpus_id)
        if request.column not in EDITABLE_COLUMNS:
            raise HTTPException(status_code=400, detail=f"column must be one of {EDITABLE_COLUMNS}")
        if request.sentence is not None and request.token is not None:
            filters = None
        elif request.filters:
            filters = {k: v for k, v in request.filters.items() if v}
            if not filters:
                raise HTTPException(status_code=400, detail="empty filter set")
        else:
            raise HTTPException(status_code=400, detail="need filters or sentence/token coordinates")

        with session.lock:
            doc = session.working
            if filters is None:
                if (
                    request.sentence >= len(doc.sentences)
                    or request.token >= len(doc.sentences[request.sentence].tokens)
                ):
                    raise HTTPException(status_code=404, detail="token coordinates out of range")
                matches = [(request.sentence, request.token)]
            else:
                try:
                    matches = _find_matches(doc, filters)
                except ParseError as exc:
                    raise HTTPException(status_code=400, detail=str(exc)) from None
            if request.expected_count is not None and len(matches) != request.expected_count:
                raise HTTPException(
                    status_code=409,
                    detail=f"expected {request.expected_count} matches, found {len(matches)}",
                )
            if not matches:
                return {"edited": 0}
            edits = [
                {
                    "sentence": s_idx,
                    "token": t_idx,
                    "old": getattr(doc.sentences[s_idx].tokens[t_idx], request.column),
                }
                for s_idx, t_idx in matches
            ]
            try:
                session.working = _apply_edits(doc, edits, request.column, request.value)
            except ParseError as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from None
            entry = {
                "timestamp": _now(),
                "column": request.column,
                "new": request.value,
                "query": filters,
                "edits": edits,
            }
            with open(session.journal_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")
            return {"edited": len(matches)}

    @app.get("/corpus/{corpus_id}/unallowed")
    def corpus_unallowed(corpus_id: str):
        session = _session(corpus_id)
        if refs is None:
            raise HTTPException(status_code=503, detail="reference lists not loaded")
        report = validate(session.working, refs)
        as_payload = lambda issues: [
            {
                "doc": issue.doc_id,
                "sentence": issue.sentence_index,
                "token": issue.token_index,
                "value": issue.value,
            }
            for issue in issues
        ]
        return {
            "unallowed_lemmas": as_payload(report.unallowed_lemmas),
            "unallowed_pos": as_payload(report.unallowed_pos),
            "unallowed_morph": as_payload(report.unallowed_morph),
        }

    @app.get("/corpus/{corpus_id}/export")
    def corpus_export(corpus_id: str):
        session = _session(corpus_id)
        return Response(
            content=write_tsv(session.working),
            media_type="text/tab-separated-values",
        )

    @app.post("/tag")
    def tag(request: TagRequest, format: str = "json"):
        models = model_sets.get(request.model_set)
        if not models:
            raise HTTPException(status_code=503, detail="models not loaded")
        sentences = parse_tag_input(request.text)
        if not sentences:
            raise HTTPException(status_code=400, detail="no tokens in request body")
        try:
            annotated = annotate(models, sentences)
        except (LemtagError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        if format == "tsv":
            doc = Document(
                "tagged", tuple(Sentence(tuple(tokens)) for tokens in annotated)
            )
            return Response(content=write_tsv(doc), media_type="text/tab-separated-values")
        return {
            "sentences": [
                [
                    {"form": t.form, "lemma": t.lemma, "pos": t.pos, "morph": t.morph}
                    for t in tokens
                ]
                for tokens in annotated
            ]
        }

    app.state.sessions = sessions
    app.state.model_sets = model_sets
    return app


def parse_tag_input(text: str) -> list[list[str]]:
    """One form per line (first cell if tab-separated); blank line separates
    sentences."""
    sentences: list[list[str]] = []
    current: list[str] = []
    for line in text.split("\n"):
        line = line.rstrip("\r")
        if not line.strip():
            if current:
                sentences.append(current)
                current = []
            continue
        if line.startswith("#"):
            continue
        current.append(line.split("\t")[0])
    if current:
        sentences.append(current)
    return sentences


__all__ = ["create_app", "replay_journal", "parse_tag_input"]
