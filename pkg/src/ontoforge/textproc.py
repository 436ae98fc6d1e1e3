"""Desk-scale linguistic processing: tokenization, term candidates, ranking,
and sentence-window co-occurrence graphs.

Everything here is pure and deterministic for a given language profile, so
per-document work can fan out to threads and corpus-wide reductions stay
reproducible.
"""

from __future__ import annotations

import math
import re
import unicodedata
from dataclasses import dataclass, replace
from typing import Iterable, NamedTuple, Protocol, Sequence

from .errors import InvalidArgumentError
from .profiles import LanguageProfile

# Words are \w runs; an apostrophe between letters stays inside the token
# (Ukrainian: "комп'ютер").
_WORD_RE = re.compile(r"\w+(?:['’ʼ`]\w+)*", re.UNICODE)
_SENT_END_RE = re.compile(r"[.!?…]+")

MAX_NGRAM_LIMIT = 4


class TextUnit(Protocol):
    id: str
    text: str


class Token(NamedTuple):
    surface: str
    norm: str
    start: int
    end: int
    is_stopword: bool


@dataclass(frozen=True)
class TokenizedDoc:
    doc_id: str
    sentences: tuple[tuple[Token, ...], ...]

    def word_projection(self) -> str:
        return " ".join(t.surface for sent in self.sentences for t in sent)


class Occurrence(NamedTuple):
    doc: str
    sentence: int
    start: int
    end: int


@dataclass(frozen=True)
class TermCandidate:
    lemma_seq: tuple[str, ...]
    surface_example: str
    freq: int
    doc_freq: int
    nested_in: frozenset[tuple[str, ...]] = frozenset()
    scores: dict[str, float] | None = None
    occurrences: tuple[Occurrence, ...] = ()

    @property
    def lemma(self) -> str:
        return " ".join(self.lemma_seq)

    def score(self, key: str) -> float:
        return (self.scores or {}).get(key, 0.0)


@dataclass(frozen=True)
class TextGraph:
    """Undirected co-occurrence graph of one document; node pairs are stored
    in canonical (sorted) order."""

    doc_id: str
    nodes: frozenset[str]
    edges: dict[tuple[str, str], int]

    def count(self, a: str, b: str) -> int:
        if a == b:
            return 0
        return self.edges.get((min(a, b), max(a, b)), 0)


def basic_tokens(text: str) -> list[str]:
    """Language-independent token norms (NFC lowercase, no suffix stripping).

    This is the tokenizer the inverted index counts against.
    """
    return [unicodedata.normalize("NFC", m.group(0)).lower() for m in _WORD_RE.finditer(text)]


def sentence_spans(text: str) -> list[tuple[int, int]]:
    """Character spans of sentences split on terminal punctuation."""
    spans = []
    start = 0
    for m in _SENT_END_RE.finditer(text):
        spans.append((start, m.start()))
        start = m.end()
    spans.append((start, len(text)))
    return [(s, e) for s, e in spans if text[s:e].strip()]


def analyze(doc: TextUnit, profile: LanguageProfile) -> TokenizedDoc:
    """Split into sentences and word tokens with normalized forms.

    Offsets are absolute character positions in the source text and strictly
    increase within a sentence.
    """
    if not doc.text:
        raise InvalidArgumentError(f"document {doc.id} has empty text")
    sentences = []
    for s, e in sentence_spans(doc.text):
        tokens = []
        for m in _WORD_RE.finditer(doc.text, s, e):
            surface = m.group(0)
            tokens.append(
                Token(
                    surface=surface,
                    norm=profile.normalize_token(surface),
                    start=m.start(),
                    end=m.end(),
                    is_stopword=profile.is_stopword(surface),
                )
            )
        if tokens:
            sentences.append(tuple(tokens))
    return TokenizedDoc(doc_id=doc.id, sentences=tuple(sentences))


def extract_candidates(docs: Sequence[TokenizedDoc], max_ngram: int = 3) -> list[TermCandidate]:
    """Corpus-wide n-gram term candidates.

    A candidate is a contiguous in-sentence n-gram (1..max_ngram tokens) with
    no stopword at either boundary.  Interior stopwords are allowed.
    ``nested_in`` links each candidate to every longer candidate that
    contains it as a contiguous subsequence.
    """
    if not 1 <= max_ngram <= MAX_NGRAM_LIMIT:
        raise InvalidArgumentError(f"max_ngram must be in [1, {MAX_NGRAM_LIMIT}], got {max_ngram}")
    freq: dict[tuple[str, ...], int] = {}
    doc_sets: dict[tuple[str, ...], set[str]] = {}
    surfaces: dict[tuple[str, ...], str] = {}
    occurrences: dict[tuple[str, ...], list[Occurrence]] = {}
    for doc in docs:
        for sent_idx, sent in enumerate(doc.sentences):
            for n in range(1, max_ngram + 1):
                for i in range(len(sent) - n + 1):
                    window = sent[i : i + n]
                    if window[0].is_stopword or window[-1].is_stopword:
                        continue
                    key = tuple(t.norm for t in window)
                    freq[key] = freq.get(key, 0) + 1
                    doc_sets.setdefault(key, set()).add(doc.doc_id)
                    surfaces.setdefault(key, " ".join(t.surface for t in window))
                    occurrences.setdefault(key, []).append(
                        Occurrence(doc.doc_id, sent_idx, window[0].start, window[-1].end)
                    )
    nested: dict[tuple[str, ...], set[tuple[str, ...]]] = {k: set() for k in freq}
    for longer in freq:
        n = len(longer)
        for size in range(1, n):
            for i in range(n - size + 1):
                sub = longer[i : i + size]
                if sub in freq:
                    nested[sub].add(longer)
    return [
        TermCandidate(
            lemma_seq=key,
            surface_example=surfaces[key],
            freq=freq[key],
            doc_freq=len(doc_sets[key]),
            nested_in=frozenset(nested[key]),
            occurrences=tuple(occurrences[key]),
        )
        for key in sorted(freq)
    ]


def score_candidates(cands: Sequence[TermCandidate], n_docs: int) -> list[TermCandidate]:
    """Attach tfidf and cvalue scores and return candidates in rank order.

    tfidf(t) = (freq(t) / total candidate occurrences) * ln(N / doc_freq(t))
    cvalue(t) = ln(1 + |t|) * freq(t) for un-nested t, else
                ln(1 + |t|) * (freq(t) - mean freq of the candidates t nests in)

    Rank: cvalue desc, tfidf desc, then lemma_seq lexicographic.
    """
    if n_docs < 1:
        raise InvalidArgumentError("corpus size must be at least 1")
    total = sum(c.freq for c in cands)
    by_key = {c.lemma_seq: c for c in cands}
    scored = []
    for c in cands:
        tfidf = (c.freq / total) * math.log(n_docs / c.doc_freq) if total else 0.0
        if c.nested_in:
            container_mean = sum(by_key[k].freq for k in c.nested_in) / len(c.nested_in)
            cvalue = math.log(1 + len(c.lemma_seq)) * (c.freq - container_mean)
        else:
            cvalue = math.log(1 + len(c.lemma_seq)) * c.freq
        scored.append(replace(c, scores={"tfidf": tfidf, "cvalue": cvalue}))
    scored.sort(key=lambda c: (-c.score("cvalue"), -c.score("tfidf"), c.lemma_seq))
    return scored


def build_text_graph(doc: TokenizedDoc, window: int = 2) -> TextGraph:
    """Co-occurrence counts over non-stopword tokens within ``window``
    positions of each other inside one sentence; self-pairs excluded."""
    if window < 1:
        raise InvalidArgumentError(f"window must be >= 1, got {window}")
    nodes: set[str] = set()
    edges: dict[tuple[str, str], int] = {}
    for sent in doc.sentences:
        terms = [t.norm for t in sent if not t.is_stopword]
        nodes.update(terms)
        for i in range(len(terms)):
            for j in range(i + 1, min(i + window, len(terms) - 1) + 1):
                a, b = terms[i], terms[j]
                if a == b:
                    continue
                key = (min(a, b), max(a, b))
                edges[key] = edges.get(key, 0) + 1
    return TextGraph(doc_id=doc.doc_id, nodes=frozenset(nodes), edges=edges)


def aggregate_cooccurrence(
    graphs: Iterable[TextGraph],
) -> tuple[dict[tuple[str, str], int], dict[str, int], int]:
    """Corpus-wide pair counts, per-node marginals, and the total event count."""
    pair: dict[tuple[str, str], int] = {}
    for g in graphs:
        for key, n in g.edges.items():
            pair[key] = pair.get(key, 0) + n
    node: dict[str, int] = {}
    total = 0
    for (a, b), n in pair.items():
        node[a] = node.get(a, 0) + n
        node[b] = node.get(b, 0) + n
        total += n
    return pair, node, total
