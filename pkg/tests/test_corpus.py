"""Ingestion, content addressing, the inverted index, relevance filtering."""

from __future__ import annotations

import pytest

from ontoforge import corpus as corpus_mod
from ontoforge.corpus import CorpusStore, index_corpus, relevance_filter
from ontoforge.errors import EmptyCorpusError, IngestFailureError, InvalidArgumentError
from ontoforge.textproc import basic_tokens


@pytest.fixture()
def store(tmp_path):
    return CorpusStore(tmp_path / "proj", "proj")


def write_sources(tmp_path, texts):
    paths = []
    for i, text in enumerate(texts):
        p = tmp_path / f"src{i}.txt"
        p.write_text(text, encoding="utf-8")
        paths.append(str(p))
    return paths


class TestIngest:
    def test_three_files_three_documents(self, store, tmp_path):
        paths = write_sources(tmp_path, ["alpha beta", "gamma delta", "epsilon zeta"])
        result = store.ingest(paths)
        assert len(result.added) == 3
        assert not result.failures
        corpus = store.load()
        assert len(corpus) == 3
        index = index_corpus(corpus)
        assert index  # built

    def test_same_file_twice_one_document(self, store, tmp_path):
        (path,) = write_sources(tmp_path, ["the same content"])
        result = store.ingest([path, path])
        assert len(result.added) == 1
        assert len(result.duplicates) == 1
        assert len(store.load()) == 1

    def test_partial_failure_reported_not_fatal(self, store, tmp_path):
        paths = write_sources(tmp_path, ["one", "two"])
        result = store.ingest(paths + [str(tmp_path / "missing.txt")])
        assert len(result.added) == 2
        assert len(result.failures) == 1
        assert "missing.txt" in result.failures[0][0]

    def test_all_failed_raises_with_causes(self, store, tmp_path):
        with pytest.raises(IngestFailureError) as err:
            store.ingest([str(tmp_path / "nope1"), str(tmp_path / "nope2")])
        assert len(err.value.causes) == 2

    def test_binary_content_skipped_with_diagnostic(self, store, tmp_path):
        binary = tmp_path / "blob.bin"
        binary.write_bytes(b"\x00\x01\x02 payload")
        text = write_sources(tmp_path, ["readable"])[0]
        result = store.ingest([text, str(binary)])
        assert len(result.added) == 1
        assert any("binary" in reason for _, reason in result.failures)

    def test_reingest_changes_nothing(self, store, tmp_path):
        paths = write_sources(tmp_path, ["alpha", "beta"])
        store.ingest(paths)
        manifest_before = (store.corpus_dir / "manifest.xml").read_bytes()
        result = store.ingest(paths)
        assert not result.added
        assert len(result.duplicates) == 2
        assert (store.corpus_dir / "manifest.xml").read_bytes() == manifest_before

    def test_windows_1251_transcoded(self, store, tmp_path):
        raw = "онтологія та поняття".encode("cp1251")
        p = tmp_path / "legacy.txt"
        p.write_bytes(raw)
        result = store.ingest([str(p)])
        assert len(result.added) == 1
        assert "онтологія" in result.added[0].text
        assert result.added[0].lang_hint == "uk"

    def test_html_tags_stripped(self, store, tmp_path):
        p = tmp_path / "page.html"
        p.write_text("<!doctype html><html><body><p>plain&amp;simple text here</p></body></html>")
        result = store.ingest([str(p)])
        assert len(result.added) == 1
        assert "<p>" not in result.added[0].text
        assert "plain&simple" in result.added[0].text

    def test_url_requires_allowlist(self, store):
        with pytest.raises(IngestFailureError) as err:
            store.ingest(["https://example.invalid/doc.txt"])
        assert "allowlist" in list(err.value.causes.values())[0]

    def test_empty_sources_invalid(self, store):
        with pytest.raises(InvalidArgumentError):
            store.ingest([])


class TestIndex:
    def test_direct_counts(self, store, tmp_path):
        (path,) = write_sources(tmp_path, ["a b a"])
        result = store.ingest([path])
        index = index_corpus(store.load())
        doc_id = result.added[0].id
        assert index["a"] == ((doc_id, 2),)
        assert index["b"] == ((doc_id, 1),)

    def test_posting_sorted_by_doc_id(self, store, tmp_path):
        paths = write_sources(tmp_path, ["shared token x", "shared token y"])
        store.ingest(paths)
        index = index_corpus(store.load())
        postings = index["shared"]
        assert len(postings) == 2
        assert [d for d, _ in postings] == sorted(d for d, _ in postings)

    def test_counts_match_bruteforce_oracle(self, store, tmp_path):
        # DERIVED: independent linear-scan counter over a 5-doc corpus
        texts = [
            "Alpha beta gamma alpha.",
            "beta beta gamma",
            "Gamma; delta! Alpha?",
            "комп'ютер і онтологія",
            "alpha BETA gamma delta epsilon",
        ]
        store.ingest(write_sources(tmp_path, texts))
        corpus = store.load()
        index = index_corpus(corpus)
        brute: dict[str, dict[str, int]] = {}
        for doc_id, doc in corpus.documents.items():
            for token in basic_tokens(doc.text):
                brute.setdefault(token, {}).setdefault(doc_id, 0)
                brute[token][doc_id] += 1
        assert set(index) == set(brute)
        for token, postings in index.items():
            assert dict(postings) == brute[token]
            # tf sums equal corpus-wide frequency
            assert sum(tf for _, tf in postings) == sum(brute[token].values())

    def test_empty_corpus_error(self):
        with pytest.raises(EmptyCorpusError):
            index_corpus(corpus_mod.Corpus(project="p"))

    def test_rebuild_deterministic(self, store, tmp_path):
        store.ingest(write_sources(tmp_path, ["a b c", "b c d"]))
        c = store.load()
        assert index_corpus(c) == index_corpus(c)


class TestRelevance:
    def _corpus(self, store, tmp_path, texts):
        store.ingest(write_sources(tmp_path, texts))
        return store.load()

    def test_full_match_included(self, store, tmp_path):
        c = self._corpus(store, tmp_path, ["w x y z all seeds here"])
        got = relevance_filter(c, ["w", "x", "y", "z"], 0.5)
        assert len(got) == 1
        assert got[0][1] == 1.0

    def test_zero_match_excluded(self, store, tmp_path):
        c = self._corpus(store, tmp_path, ["nothing relevant inside"])
        assert relevance_filter(c, ["ontology"], 0.25) == []

    def test_boundary_inclusive(self, store, tmp_path):
        # DERIVED by hand: one of two seeds present -> score 0.5, kept at 0.5
        c = self._corpus(store, tmp_path, ["seed1 appears alone"])
        got = relevance_filter(c, ["seed1", "seed2"], 0.5)
        assert len(got) == 1
        assert got[0][1] == 0.5

    def test_multiword_seed_matches_phrase(self, store, tmp_path):
        c = self._corpus(store, tmp_path, ["the semantic network lives", "semantic things network"])
        got = relevance_filter(c, ["semantic network"], 0.9)
        assert len(got) == 1
        assert "lives" in got[0][0].text

    def test_monotone_in_min_score(self, store, tmp_path):
        c = self._corpus(
            store, tmp_path, ["s1 s2 s3", "s1 s2", "s1", "none of them"]
        )
        seeds = ["s1", "s2", "s3"]
        sizes = [len(relevance_filter(c, seeds, t)) for t in (0.9, 0.6, 0.3, 0.0)]
        assert sizes == sorted(sizes)

    def test_sorted_by_score_then_id(self, store, tmp_path):
        c = self._corpus(store, tmp_path, ["s1 s2", "s1", "s2 s1"])
        got = relevance_filter(c, ["s1", "s2"], 0.0)
        scores = [s for _, s in got]
        assert scores == sorted(scores, reverse=True)
        ids_at_one = [d.id for d, s in got if s == 1.0]
        assert ids_at_one == sorted(ids_at_one)

    def test_empty_seeds_invalid(self, store, tmp_path):
        c = self._corpus(store, tmp_path, ["text"])
        with pytest.raises(InvalidArgumentError):
            relevance_filter(c, [], 0.1)
