"""Document ingestion, content-addressed storage, inverted index, relevance
filtering.

The store is a plain directory: one ``corpus/<id>.txt`` file per document, a
``corpus/manifest.xml`` envelope describing them, and an ``index.xml``
envelope holding the inverted index.  Everything is diffable text.
"""

from __future__ import annotations

import hashlib
import html
import re
import unicodedata
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable
from urllib.parse import urlparse
from urllib.request import urlopen

from .errors import EmptyCorpusError, IngestFailureError, InvalidArgumentError
from .textproc import basic_tokens

_TAG_RE = re.compile(r"<[^>]+>")
_CYRILLIC_RE = re.compile(r"[Ѐ-ӿ]")


@dataclass(frozen=True)
class Document:
    id: str
    uri: str
    title: str
    text: str
    fetched_at: str
    lang_hint: str | None = None


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    uri: str
    title: str
    fetched_at: str
    lang_hint: str | None = None


@dataclass(frozen=True)
class CorpusManifest:
    project: str
    entries: tuple[ManifestEntry, ...] = ()


@dataclass
class Corpus:
    project: str
    documents: dict[str, Document] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.documents)


@dataclass(frozen=True)
class IngestResult:
    """Delta of one ingest batch: stored documents, dedup hits, failures."""

    added: tuple[Document, ...]
    duplicates: tuple[str, ...]
    failures: tuple[tuple[str, str], ...]  # (source, reason)


# Posting lists: token -> tuple of (doc id, term frequency), sorted by doc id.
InvertedIndex = dict[str, tuple[tuple[str, int], ...]]


def content_id(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def decode_text(raw: bytes) -> str:
    """UTF-8 first; fall back to Windows-1251 when the bytes do not form
    valid UTF-8 but decode to mostly-Cyrillic text."""
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError:
        pass
    decoded = raw.decode("cp1251", errors="strict")
    letters = [ch for ch in decoded if ch.isalpha()]
    if letters and len(_CYRILLIC_RE.findall("".join(letters))) / len(letters) > 0.5:
        return decoded
    raise UnicodeDecodeError("cp1251", raw, 0, 1, "content does not look like Windows-1251 text")


_HTML_MARKERS = ("<html", "<!doctype", "<body", "<head", "<div", "<p>", "<br")


def strip_markup(text: str) -> str:
    """Drop HTML tags and unescape entities; no boilerplate removal."""
    head = text[:1024].lower()
    if any(marker in head for marker in _HTML_MARKERS):
        text = _TAG_RE.sub(" ", text)
        text = html.unescape(text)
    return text


def _looks_binary(raw: bytes) -> bool:
    if b"\x00" in raw:
        return True
    sample = raw[:4096]
    if not sample:
        return True
    control = sum(1 for b in sample if b < 9 or (13 < b < 32))
    return control / len(sample) > 0.05


def _guess_lang(text: str) -> str | None:
    letters = [ch for ch in text if ch.isalpha()]
    if not letters:
        return None
    cyr = sum(1 for ch in letters if _CYRILLIC_RE.match(ch))
    if cyr / len(letters) > 0.3:
        return "uk"
    return "en"


def _fetch(source: str, allowed_hosts: frozenset[str] | None) -> tuple[bytes, str]:
    """Returns (raw bytes, title hint) for a path or an allowlisted URL."""
    parsed = urlparse(source)
    if parsed.scheme in ("http", "https"):
        host = parsed.hostname or ""
        if allowed_hosts is None or host not in allowed_hosts:
            raise InvalidArgumentError(f"host {host!r} not in the URL allowlist")
        with urlopen(source, timeout=30) as resp:  # noqa: S310 - allowlisted above
            raw = resp.read()
        title = Path(parsed.path).name or host
        return raw, title
    if parsed.scheme == "file":
        path = Path(parsed.path)
    else:
        path = Path(source)
    raw = path.read_bytes()
    return raw, path.stem


def normalize_document_text(raw: bytes) -> str:
    text = strip_markup(decode_text(raw))
    text = unicodedata.normalize("NFC", text)
    # normalize line endings; keep internal structure otherwise
    return text.replace("\r\n", "\n").replace("\r", "\n").strip()


class CorpusStore:
    """Per-project document store rooted at ``<project dir>``."""

    def __init__(self, project_dir: str | Path, project: str):
        self.project = project
        self.root = Path(project_dir)
        self.corpus_dir = self.root / "corpus"

    # -- ingestion -------------------------------------------------------

    def ingest(
        self,
        sources: Iterable[str],
        allowed_hosts: Iterable[str] | None = None,
        now: str | None = None,
    ) -> IngestResult:
        """Fetch, normalize and store each source; partial failures do not
        abort the batch.  Raises IngestFailureError only when every source
        fails."""
        sources = list(sources)
        if not sources:
            raise InvalidArgumentError("ingest requires at least one source")
        hosts = frozenset(allowed_hosts) if allowed_hosts is not None else None
        stamp = now or datetime.now(timezone.utc).isoformat(timespec="seconds")
        existing = {e.id for e in self.manifest().entries}
        added: list[Document] = []
        duplicates: list[str] = []
        failures: list[tuple[str, str]] = []
        for source in sources:
            try:
                raw, title = _fetch(source, hosts)
                if _looks_binary(raw):
                    failures.append((source, "unsupported binary content"))
                    continue
                text = normalize_document_text(raw)
                if not text:
                    failures.append((source, "no text content"))
                    continue
            except Exception as exc:  # per-source diagnostics, batch continues
                failures.append((source, str(exc)))
                continue
            doc_id = content_id(text)
            if doc_id in existing:
                duplicates.append(source)
                continue
            doc = Document(
                id=doc_id,
                uri=source,
                title=title,
                text=text,
                fetched_at=stamp,
                lang_hint=_guess_lang(text),
            )
            self._store(doc)
            existing.add(doc_id)
            added.append(doc)
        if not added and not duplicates and failures:
            raise IngestFailureError("all ingest sources failed", dict(failures))
        if added:
            self._write_manifest()
        return IngestResult(tuple(added), tuple(duplicates), tuple(failures))

    def _store(self, doc: Document) -> None:
        self.corpus_dir.mkdir(parents=True, exist_ok=True)
        (self.corpus_dir / f"{doc.id}.txt").write_text(doc.text, encoding="utf-8")
        meta = self.corpus_dir / f"{doc.id}.meta"
        lang = doc.lang_hint or ""
        meta.write_text(
            f"uri\t{doc.uri}\ntitle\t{doc.title}\nfetched_at\t{doc.fetched_at}\nlang_hint\t{lang}\n",
            encoding="utf-8",
        )

    def _write_manifest(self) -> None:
        from . import interchange

        manifest = self.manifest()
        (self.corpus_dir / "manifest.xml").write_bytes(
            interchange.serialize(manifest, producer="corpus-store")
        )

    # -- access ----------------------------------------------------------

    def manifest(self) -> CorpusManifest:
        entries = []
        if self.corpus_dir.is_dir():
            for meta_path in sorted(self.corpus_dir.glob("*.meta")):
                fields = {}
                for line in meta_path.read_text(encoding="utf-8").splitlines():
                    if "\t" in line:
                        k, v = line.split("\t", 1)
                        fields[k] = v
                entries.append(
                    ManifestEntry(
                        id=meta_path.stem,
                        uri=fields.get("uri", ""),
                        title=fields.get("title", ""),
                        fetched_at=fields.get("fetched_at", ""),
                        lang_hint=fields.get("lang_hint") or None,
                    )
                )
        return CorpusManifest(project=self.project, entries=tuple(entries))

    def load(self) -> Corpus:
        corpus = Corpus(project=self.project)
        for entry in self.manifest().entries:
            text = (self.corpus_dir / f"{entry.id}.txt").read_text(encoding="utf-8")
            corpus.documents[entry.id] = Document(
                id=entry.id,
                uri=entry.uri,
                title=entry.title,
                text=text,
                fetched_at=entry.fetched_at,
                lang_hint=entry.lang_hint,
            )
        return corpus

    def write_index(self, index: InvertedIndex) -> Path:
        from . import interchange
        from .interchange import Report

        entries = tuple(
            {"token": token, "doc": doc_id, "tf": str(tf)}
            for token in sorted(index)
            for doc_id, tf in index[token]
        )
        report = Report(name="inverted-index", meta={"project": self.project}, entries=entries)
        out = self.root / "index.xml"
        out.write_bytes(interchange.serialize(report, producer="corpus-store"))
        return out


def index_corpus(corpus: Corpus) -> InvertedIndex:
    """Posting lists from token counts per document; deterministic rebuild."""
    if not corpus.documents:
        raise EmptyCorpusError(f"corpus for project {corpus.project!r} holds no documents")
    postings: dict[str, dict[str, int]] = {}
    for doc_id in sorted(corpus.documents):
        for token in basic_tokens(corpus.documents[doc_id].text):
            postings.setdefault(token, {}).setdefault(doc_id, 0)
            postings[token][doc_id] += 1
    return {
        token: tuple(sorted(postings[token].items()))
        for token in sorted(postings)
    }


def _contains_phrase(tokens: list[str], phrase: list[str]) -> bool:
    if not phrase or len(phrase) > len(tokens):
        return False
    first = phrase[0]
    for i in range(len(tokens) - len(phrase) + 1):
        if tokens[i] == first and tokens[i : i + len(phrase)] == phrase:
            return True
    return False


def relevance_filter(
    corpus: Corpus, seed_terms: Iterable[str], min_score: float
) -> list[tuple[Document, float]]:
    """Seed-term coverage scoring: score(d) = distinct seeds present / seeds.

    Inclusive threshold; result sorted by score descending then document id.
    """
    seeds = sorted({s for s in (t.strip() for t in seed_terms) if s})
    if not seeds:
        raise InvalidArgumentError("relevance_filter requires at least one seed term")
    seed_tokens = {s: basic_tokens(s) for s in seeds}
    results = []
    for doc_id in sorted(corpus.documents):
        doc = corpus.documents[doc_id]
        tokens = basic_tokens(doc.text)
        hits = sum(1 for s in seeds if _contains_phrase(tokens, seed_tokens[s]))
        score = hits / len(seeds)
        if score >= min_score:
            results.append((doc, score))
    results.sort(key=lambda pair: (-pair[1], pair[0].id))
    return results
