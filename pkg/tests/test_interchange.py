"""Canonical XML envelopes: round-trips, determinism, integrity, triples."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ontoforge import interchange, model
from ontoforge.corpus import CorpusManifest, ManifestEntry
from ontoforge.errors import IntegrityError, ValidationError, XmlParseError
from ontoforge.extract import CurationDecision, DecisionSet
from ontoforge.interchange import CandidateSet, Report
from ontoforge.model import Interpretation, SemanticRelation
from ontoforge.textproc import Occurrence, TermCandidate


def rechecksum(data: bytes) -> bytes:
    """Recompute the envelope checksum after deliberate tampering, so tests
    reach the validation stage instead of tripping the integrity gate."""
    import hashlib
    import re
    import xml.etree.ElementTree as ET

    root = ET.fromstring(data)
    payload = list(root)[0]
    digest = hashlib.sha256(
        interchange._emit(interchange._canonical_dom(payload))
    ).hexdigest()
    return re.sub(rb'checksum="sha256:[0-9a-f]+"', b'checksum="sha256:%s"' % digest.encode(), data)


def build_ontology(seed=7, n_concepts=10, n_relations=12):
    rng = random.Random(seed)
    o = model.create_ontology(f"gen-{seed}", "domain", created_at="2011-05-10T00:00:00+00:00")
    ids = []
    for i in range(n_concepts):
        label = f"Термін {i}" if i % 3 == 0 else f"term {i}"
        kind = (model.OBJECT, model.PROCESS, model.TASK)[i % 3]
        o, cid = model.add_concept(o, label, kind, provenance=[(f"d{i % 4}", i, i + 5)])
        ids.append(cid)
    trials = 0
    while len(o.relations) < n_relations and trials < n_relations * 20:
        trials += 1
        s, t = rng.sample(ids, 2)
        rel_type = rng.choice([model.IS_A, model.PART_OF, model.ASSOCIATED_WITH, "related_to"])
        conf = round(rng.uniform(0, 1), 6)
        ev = (model.Evidence(f"d{rng.randint(0, 3)}", rng.randint(0, 9), "pattern:x"),)
        try:
            o = model.add_relation(o, SemanticRelation(s, t, rel_type, conf, ev))
        except model.CycleViolationError:
            continue
    o = model.add_interpretation(o, Interpretation(subject=ids[0], gloss="означення з «лапками»", source="s1"))
    o = model.add_interpretation(o, Interpretation(subject=model.IS_A, gloss="subsumption", source="s2"))
    for axiom in model.default_axioms():
        o = model.add_axiom(o, axiom)
    return o


class TestOntologyPayload:
    def test_empty_ontology_roundtrip_and_checksum(self):
        o = model.create_ontology("empty", "domain")
        data = interchange.serialize(o)
        assert b"sha256:" in data
        assert interchange.parse(data) == o

    def test_roundtrip_identity(self):
        o = build_ontology()
        assert interchange.parse(interchange.serialize(o)) == o

    def test_byte_determinism_across_calls(self):
        o = build_ontology()
        assert interchange.serialize(o) == interchange.serialize(o)

    def test_insertion_order_invariance(self):
        # DERIVED: permute relation insertion order, compare digests
        o = model.create_ontology("t", "domain")
        ids = []
        for label in ("a", "b", "c", "d"):
            o, cid = model.add_concept(o, label)
            ids.append(cid)
        rels = [
            SemanticRelation(ids[0], ids[1], model.IS_A, 0.9),
            SemanticRelation(ids[1], ids[2], model.PART_OF, 0.8),
            SemanticRelation(ids[2], ids[3], model.ASSOCIATED_WITH, 0.7),
        ]
        blobs = set()
        for order in ([0, 1, 2], [2, 1, 0], [1, 2, 0]):
            cur = o
            for idx in order:
                cur = model.add_relation(cur, rels[idx])
            blobs.add(interchange.serialize(cur))
        assert len(blobs) == 1

    def test_flipped_byte_is_integrity_error(self):
        data = interchange.serialize(build_ontology())
        # flip one digit inside a confidence attribute value
        idx = data.index(b'confidence="0.')
        corrupted = bytearray(data)
        pos = idx + len(b'confidence="0.')
        corrupted[pos] = ord("9") if corrupted[pos] != ord("9") else ord("1")
        with pytest.raises(IntegrityError):
            interchange.parse(bytes(corrupted))

    def test_handcrafted_cycle_is_validation_error(self):
        o = model.create_ontology("t", "domain")
        o, a = model.add_concept(o, "a")
        o, b = model.add_concept(o, "b")
        o = model.add_relation(o, SemanticRelation(a, b, model.IS_A, 0.9))
        data = interchange.serialize(o).decode()
        # craft the reverse edge next to the existing one
        crafted = data.replace(
            f'source="{a}" target="{b}"',
            f'source="{a}" target="{b}"/>\n      <relation confidence="0.9" rel_type="is_a" source="{b}" target="{a}"',
            1,
        ).encode()
        with pytest.raises(ValidationError) as err:
            interchange.parse(rechecksum(crafted))
        assert "cycle" in err.value.message

    def test_malformed_xml_position(self):
        with pytest.raises(XmlParseError) as err:
            interchange.parse(b"<envelope broken")
        assert err.value.line >= 1

    def test_wrong_schema_version_rejected(self):
        data = interchange.serialize(build_ontology()).replace(
            b'schema_version="1"', b'schema_version="99"'
        )
        with pytest.raises(ValidationError):
            interchange.parse(data)

    def test_unknown_payload_type_rejected(self):
        data = interchange.serialize(build_ontology()).replace(
            b'payload_type="ontology"', b'payload_type="mystery"'
        )
        with pytest.raises(ValidationError):
            interchange.parse(data)

    def test_forged_concept_id_rejected(self):
        o = model.create_ontology("t", "domain")
        o, a = model.add_concept(o, "alpha")
        data = interchange.serialize(o).replace(a.encode(), b"alpha-00000000")
        with pytest.raises((ValidationError, IntegrityError)):
            interchange.parse(data)


class TestOtherPayloads:
    def test_candidates_roundtrip(self):
        items = {}
        for lemma, freq in (("semantic network", 3), ("network", 5)):
            c = TermCandidate(
                lemma_seq=tuple(lemma.split()),
                surface_example=lemma.title(),
                freq=freq,
                doc_freq=2,
                nested_in=frozenset({("big", "semantic", "network")} if " " in lemma else set()),
                scores={"cvalue": 1.5, "tfidf": 0.25},
                occurrences=(Occurrence("d1", 0, 4, 20),),
            )
            items[lemma] = c
        cs = CandidateSet(project="p", items=items)
        data = interchange.serialize(cs)
        assert interchange.parse(data) == cs

    def test_unscored_candidates_roundtrip(self):
        c = TermCandidate(lemma_seq=("term",), surface_example="term", freq=1, doc_freq=1)
        cs = CandidateSet(project="p", items={"term": c})
        assert interchange.parse(interchange.serialize(cs)) == cs

    def test_decisions_roundtrip(self):
        ds = DecisionSet(
            decisions=(
                CurationDecision("term", "semantic network", "reject", author="eng", at="t1", iteration=1),
                CurationDecision("term", "graph", "rename", new_label="graph model", iteration=2),
                CurationDecision("relation", "a|is_a|b", "retype", new_rel_type="part_of", iteration=2),
            )
        )
        assert interchange.parse(interchange.serialize(ds)) == ds

    def test_bad_verdict_rejected(self):
        ds = DecisionSet(decisions=(CurationDecision("term", "x", "reject"),))
        data = interchange.serialize(ds).replace(b'verdict="reject"', b'verdict="obliterate"')
        with pytest.raises(ValidationError):
            interchange.parse(rechecksum(data))

    def test_manifest_roundtrip(self):
        m = CorpusManifest(
            project="p",
            entries=(
                ManifestEntry("abc123", "file:///tmp/a.txt", "a", "2011-05-10T00:00:00+00:00", "uk"),
                ManifestEntry("def456", "https://host/x", "x", "2011-05-10T00:00:01+00:00", None),
            ),
        )
        assert interchange.parse(interchange.serialize(m)) == m

    def test_report_roundtrip(self):
        r = Report(
            name="text-graphs",
            meta={"window": "2"},
            entries=({"a": "alpha", "b": "beta", "count": "2", "doc": "d1"},),
        )
        assert interchange.parse(interchange.serialize(r)) == r


# -- property-based round-trips ---------------------------------------------

safe_text = st.text(
    alphabet=st.characters(blacklist_categories=("Cs", "Cc")), min_size=1, max_size=20
)
lemmas = st.lists(
    st.text(alphabet="abcdefgнтло", min_size=1, max_size=6), min_size=1, max_size=3
).map(tuple)


@settings(max_examples=50, deadline=None)
@given(
    labels=st.lists(safe_text.filter(model.normalize_label), min_size=1, max_size=8, unique_by=model.normalize_label),
    edges=st.lists(st.tuples(st.integers(0, 7), st.integers(0, 7), st.floats(0, 1)), max_size=10),
)
def test_ontology_roundtrip_property(labels, edges):
    o = model.create_ontology("prop", "domain")
    ids = []
    for label in labels:
        o, cid = model.add_concept(o, label)
        ids.append(cid)
    for s, t, conf in edges:
        if s >= len(ids) or t >= len(ids) or s == t:
            continue
        try:
            o = model.add_relation(o, SemanticRelation(ids[s], ids[t], model.IS_A, conf))
        except model.CycleViolationError:
            continue
    data = interchange.serialize(o)
    assert interchange.parse(data) == o
    assert interchange.serialize(interchange.parse(data)) == data


@settings(max_examples=50, deadline=None)
@given(
    st.lists(
        st.tuples(lemmas, st.integers(1, 50), st.integers(1, 5), safe_text),
        max_size=6,
        unique_by=lambda t: " ".join(t[0]),
    )
)
def test_candidates_roundtrip_property(raw):
    items = {}
    for lemma_seq, freq, doc_freq, surface in raw:
        c = TermCandidate(
            lemma_seq=lemma_seq,
            surface_example=surface,
            freq=freq + doc_freq,
            doc_freq=doc_freq,
            scores={"cvalue": float(freq), "tfidf": freq / 100},
        )
        items[c.lemma] = c
    cs = CandidateSet(project="prop", items=items)
    assert interchange.parse(interchange.serialize(cs)) == cs


@settings(max_examples=50, deadline=None)
@given(
    st.lists(
        st.tuples(st.dictionaries(st.sampled_from(["a", "b", "doc"]), safe_text, max_size=3)),
        max_size=6,
    )
)
def test_report_roundtrip_property(rows):
    r = Report(name="prop", meta={"k": "v"}, entries=tuple(row[0] for row in rows))
    assert interchange.parse(interchange.serialize(r)) == r


# -- Turtle export ------------------------------------------------------------


def parse_turtle(data: bytes):
    """Minimal independent Turtle reader for the exported subset: one
    triple per line, prefixed names or quoted literals."""
    triples = []
    for line in data.decode("utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("@prefix"):
            continue
        assert line.endswith(" ."), line
        body = line[:-2]
        subject, predicate, obj = _split_triple(body)
        triples.append((subject, predicate, obj))
    return triples


def _split_triple(body: str):
    subject, rest = body.split(" ", 1)
    predicate, obj = rest.split(" ", 1)
    if obj.startswith('"'):
        # literal with escapes; must end on an unescaped quote
        assert obj.endswith('"')
    return subject, predicate, obj


class TestTriples:
    def test_counting_contract(self):
        o = model.create_ontology("t", "domain")
        o, a = model.add_concept(o, "alpha")
        o, b = model.add_concept(o, "beta")
        o = model.add_relation(o, SemanticRelation(a, b, model.IS_A, 0.9))
        triples = parse_turtle(interchange.export_triples(o))
        assert len(triples) == 3
        assert (f"onto:{a}", "rdfs:subClassOf", f"onto:{b}") in triples

    def test_gloss_passthrough(self):
        o = model.create_ontology("t", "domain")
        o, a = model.add_concept(o, "alpha")
        o = model.add_interpretation(o, Interpretation(a, 'скла "дне" значення', "s1"))
        data = interchange.export_triples(o).decode()
        assert 'скла \\"дне\\" значення' in data

    def test_triple_count_equals_x_r_f(self):
        o = build_ontology(seed=11)
        triples = parse_turtle(interchange.export_triples(o))
        assert len(triples) == len(o.concepts) + len(o.relations) + len(o.interpretations)

    def test_invalid_ontology_rejected(self):
        o = build_ontology()
        o.relations[("ghost", "ghost2", "is_a")] = SemanticRelation("ghost", "ghost2", "is_a", 0.5)
        with pytest.raises(ValidationError):
            interchange.export_triples(o)

    def test_stable_ordering(self):
        o = build_ontology(seed=3)
        assert interchange.export_triples(o) == interchange.export_triples(o)
