"""Lexical retrieval: tokenizer, overlapping chunker and a BM25 inverted index.

An ``Index`` is immutable once built and safe to share across threads.
"""

from __future__ import annotations

import json
import math
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Protocol

from .errors import BadParams, DuplicateChunk

K1 = 1.2
B = 0.75
INDEX_FORMAT = "crewline-bm25"
INDEX_VERSION = 1

ChunkRef = tuple[str, int]


@lru_cache(maxsize=4096)
def _fold_char(c: str) -> str | None:
    """Folded form of one character: a string of alnum chars, "" when the
    character vanishes (combining marks), or None for a separator."""
    folded = "".join(
        ch for ch in unicodedata.normalize("NFKD", c.lower()) if not unicodedata.combining(ch)
    )
    if not folded:
        return ""
    if all(ch.isalnum() for ch in folded):
        return folded
    return None


def token_spans(text: str) -> list[tuple[str, int, int]]:
    """Tokens with their [start, end) character offsets in ``text``."""
    out = []
    buf: list[str] = []
    start = end = 0
    for i, c in enumerate(text):
        f = _fold_char(c)
        if f is None:
            if buf:
                out.append(("".join(buf), start, end))
                buf = []
        elif f:
            if not buf:
                start = i
            buf.append(f)
            end = i + 1
    if buf:
        out.append(("".join(buf), start, end))
    return out


def tokenize(text: str) -> list[str]:
    """Lowercase, diacritic-folded runs of letters and digits."""
    return [t for t, _, _ in token_spans(text)]


@dataclass(frozen=True)
class Chunk:
    doc_id: str
    ordinal: int
    text: str
    token_count: int

    @property
    def ref(self) -> ChunkRef:
        return (self.doc_id, self.ordinal)


def chunk(doc_id: str, text: str, max_tokens: int = 256, overlap: int = 32) -> list[Chunk]:
    """Split ``text`` into windows of at most ``max_tokens`` tokens where
    consecutive windows share ``overlap`` tokens.

    Chunk text is the original substring, so snippets keep their casing.
    """
    if max_tokens < 1 or overlap < 0 or overlap >= max_tokens:
        raise BadParams(f"need max_tokens >= 1 and 0 <= overlap < max_tokens, got {max_tokens}/{overlap}")
    spans = token_spans(text)
    if not spans:
        return []
    step = max_tokens - overlap
    chunks = []
    start = 0
    while True:
        end = min(start + max_tokens, len(spans))
        stop = spans[end - 1][2]
        if end == len(spans):
            stop = len(text.rstrip())  # the last window keeps the text's tail
        else:
            while stop < spans[end][1] and not text[stop].isspace():
                stop += 1  # keep trailing punctuation; it cannot form a token
        piece = text[spans[start][1] : stop]
        chunks.append(Chunk(doc_id, len(chunks), piece, end - start))
        if end == len(spans):
            return chunks
        start += step


@dataclass(frozen=True)
class Index:
    postings: dict[str, tuple[tuple[ChunkRef, int], ...]]
    doc_lengths: dict[ChunkRef, int]
    texts: dict[ChunkRef, str] = field(repr=False)
    total_length: int = 0

    @property
    def chunk_count(self) -> int:
        return len(self.doc_lengths)

    @property
    def avg_len(self) -> float:
        return self.total_length / self.chunk_count if self.chunk_count else 0.0

    def idf(self, term: str) -> float:
        df = len(self.postings.get(term, ()))
        if not df:
            return 0.0
        n = self.chunk_count
        return max(0.0, math.log((n - df + 0.5) / (df + 0.5)))

    def to_json(self) -> str:
        """Canonical single-file form; equal corpora give equal bytes."""
        payload = {
            "format": INDEX_FORMAT,
            "version": INDEX_VERSION,
            "chunks": [
                [doc_id, ordinal, self.doc_lengths[(doc_id, ordinal)], self.texts[(doc_id, ordinal)]]
                for doc_id, ordinal in sorted(self.doc_lengths)
            ],
            "postings": {
                term: [[ref[0], ref[1], tf] for ref, tf in plist]
                for term, plist in sorted(self.postings.items())
            },
        }
        return json.dumps(payload, ensure_ascii=False, sort_keys=True, separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, text: str) -> Index:
        payload = json.loads(text)
        if payload.get("format") != INDEX_FORMAT or payload.get("version") != INDEX_VERSION:
            raise ValueError("not a version-1 crewline index file")
        doc_lengths = {(d, o): n for d, o, n, _ in payload["chunks"]}
        texts = {(d, o): t for d, o, _, t in payload["chunks"]}
        postings = {
            term: tuple(((d, o), tf) for d, o, tf in plist) for term, plist in payload["postings"].items()
        }
        return cls(postings, doc_lengths, texts, sum(doc_lengths.values()))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> Index:
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def build_index(chunks: Iterable[Chunk]) -> Index:
    postings: dict[str, list[tuple[ChunkRef, int]]] = {}
    doc_lengths: dict[ChunkRef, int] = {}
    texts: dict[ChunkRef, str] = {}
    for c in chunks:
        if c.ref in doc_lengths:
            raise DuplicateChunk(c.ref)
        tokens = tokenize(c.text)
        doc_lengths[c.ref] = len(tokens)
        texts[c.ref] = c.text
        for term, tf in Counter(tokens).items():
            postings.setdefault(term, []).append((c.ref, tf))
    frozen = {term: tuple(sorted(plist)) for term, plist in sorted(postings.items())}
    ordered = dict(sorted(doc_lengths.items()))
    return Index(frozen, ordered, {r: texts[r] for r in ordered}, sum(ordered.values()))


@dataclass(frozen=True, order=True)
class Hit:
    ref: ChunkRef
    score: float


def retrieve(index: Index, query: str, k: int) -> list[Hit]:
    """Top-``k`` BM25 hits (k1=1.2, b=0.75).

    Only chunks containing at least one query term are candidates; distinct
    query terms are scored once each. Ties break on ascending chunk ref.
    """
    if k < 1:
        raise BadParams("k must be positive")
    terms = sorted(set(tokenize(query)))
    avg = index.avg_len
    scores: dict[ChunkRef, float] = {}
    for term in terms:
        plist = index.postings.get(term)
        if not plist:
            continue
        idf = index.idf(term)
        for ref, tf in plist:
            norm = K1 * (1 - B + B * index.doc_lengths[ref] / avg)
            scores[ref] = scores.get(ref, 0.0) + idf * tf * (K1 + 1) / (tf + norm)
    ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
    return [Hit(ref, score) for ref, score in ranked[:k]]


class Retriever(Protocol):
    """Pluggable retrieval backend; the lexical index is the shipped one."""

    def search(self, query: str, k: int) -> list[Hit]: ...


@dataclass(frozen=True)
class LexicalRetriever:
    index: Index

    def search(self, query: str, k: int) -> list[Hit]:
        return retrieve(self.index, query, k)
