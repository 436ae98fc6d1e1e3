"""Canonical XML interchange for the inter-module bus, plus a Turtle-subset
triple export.

Serialization is bit-exact: attributes sorted by name, identity-bearing
elements sorted by id, UTF-8, LF line endings, floats in shortest
round-trip form.  Equal entities therefore serialize to identical bytes,
and every envelope carries a checksum over the canonical payload so
corruption is detected before an entity is constructed.
"""

from __future__ import annotations

import hashlib
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Any, Mapping
from urllib.parse import quote
from xml.sax.saxutils import escape, quoteattr

from . import model
from .corpus import CorpusManifest, ManifestEntry
from .errors import IntegrityError, InvalidArgumentError, ValidationError, XmlParseError
from .extract import CurationDecision, DecisionSet
from .model import (
    Axiom,
    Concept,
    Evidence,
    Interpretation,
    Ontology,
    Provenance,
    SemanticRelation,
)
from .textproc import Occurrence, TermCandidate

SCHEMA_VERSION = "1"

PAYLOAD_ONTOLOGY = "ontology"
PAYLOAD_CANDIDATES = "candidates"
PAYLOAD_DECISIONS = "decisions"
PAYLOAD_MANIFEST = "corpus-manifest"
PAYLOAD_REPORT = "report"
PAYLOAD_TYPES = (
    PAYLOAD_ONTOLOGY,
    PAYLOAD_CANDIDATES,
    PAYLOAD_DECISIONS,
    PAYLOAD_MANIFEST,
    PAYLOAD_REPORT,
)


@dataclass(frozen=True)
class CandidateSet:
    """Candidates keyed by lemma; rank order is recomputable from scores."""

    project: str
    items: dict[str, TermCandidate] = field(default_factory=dict)

    def ranked(self) -> list[TermCandidate]:
        return sorted(
            self.items.values(),
            key=lambda c: (-c.score("cvalue"), -c.score("tfidf"), c.lemma_seq),
        )


@dataclass(frozen=True)
class Report:
    """Generic tabular payload: named report with string-valued entries."""

    name: str
    meta: dict[str, str] = field(default_factory=dict)
    entries: tuple[dict[str, str], ...] = ()


# ---------------------------------------------------------------------------
# canonical writer


def _fmt(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


class _Node:
    __slots__ = ("tag", "attrs", "children", "text")

    def __init__(self, tag: str, attrs: Mapping[str, Any] | None = None, text: str | None = None):
        self.tag = tag
        self.attrs = {k: v for k, v in (attrs or {}).items() if v is not None}
        self.children: list[_Node] = []
        self.text = text

    def child(self, tag: str, attrs: Mapping[str, Any] | None = None, text: str | None = None) -> "_Node":
        node = _Node(tag, attrs, text)
        self.children.append(node)
        return node

    def emit(self, lines: list[str], depth: int) -> None:
        pad = "  " * depth
        attrs = "".join(
            f" {k}={quoteattr(_fmt(self.attrs[k]))}" for k in sorted(self.attrs)
        )
        if self.text is not None:
            body = escape(self.text).replace("\r", "&#13;")
            lines.append(f"{pad}<{self.tag}{attrs}>{body}</{self.tag}>")
        elif self.children:
            lines.append(f"{pad}<{self.tag}{attrs}>")
            for c in self.children:
                c.emit(lines, depth + 1)
            lines.append(f"{pad}</{self.tag}>")
        else:
            lines.append(f"{pad}<{self.tag}{attrs}/>")


def _emit(node: _Node) -> bytes:
    lines: list[str] = []
    node.emit(lines, 0)
    return ("\n".join(lines) + "\n").encode("utf-8")


def _canonical_dom(elem: ET.Element) -> _Node:
    """Rebuild the writer's canonical tree from a parsed element, so the
    checksum can be verified against exactly what the writer would emit."""
    children = list(elem)
    if children:
        if elem.text is not None and elem.text.strip():
            raise ValidationError(f"mixed content in <{elem.tag}> is not allowed")
        node = _Node(elem.tag, elem.attrib)
        for c in children:
            node.children.append(_canonical_dom(c))
        return node
    text = elem.text if elem.text is not None else None
    return _Node(elem.tag, elem.attrib, text=text)


# ---------------------------------------------------------------------------
# entity -> element


def _ontology_node(o: Ontology) -> _Node:
    root = _Node(
        "ontology",
        {
            "created_at": o.meta.created_at,
            "kind": o.kind,
            "name": o.name,
            "source_project": o.meta.source_project,
        },
    )
    concepts = root.child("concepts")
    for cid in sorted(o.concepts):
        c = o.concepts[cid]
        node = concepts.child(
            "concept",
            {"id": c.id, "kind": c.kind, "label": c.label, "normalized_label": c.normalized_label},
        )
        for p in c.provenance:
            node.child("prov", {"doc": p.doc, "end": p.end, "start": p.start})
    relations = root.child("relations")
    for key in sorted(o.relations):
        r = o.relations[key]
        node = relations.child(
            "relation",
            {
                "confidence": r.confidence,
                "rel_type": r.rel_type,
                "source": r.source,
                "target": r.target,
            },
        )
        for e in r.evidence:
            node.child("evidence", {"doc": e.doc, "rule": e.rule, "sentence": e.sentence})
    interps = root.child("interpretations")
    for i in o.interpretations:
        interps.child("interpretation", {"source": i.source, "subject": i.subject}, text=i.gloss)
    axioms = root.child("axioms")
    for aid in sorted(o.axioms):
        a = o.axioms[aid]
        node = axioms.child(
            "axiom",
            {
                "body": a.body_kind,
                "form": a.form,
                "id": a.id,
                "rel_type": a.rel_type,
                "source_kind": a.source_kind,
                "target_kind": a.target_kind,
            },
        )
        for cid in a.concepts:
            node.child("member", {"id": cid})
        for cid in a.scope:
            node.child("scope", {"id": cid})
    return root


def _candidates_node(cs: CandidateSet) -> _Node:
    root = _Node("candidates", {"project": cs.project})
    for lemma in sorted(cs.items):
        c = cs.items[lemma]
        node = root.child(
            "candidate",
            {
                "doc_freq": c.doc_freq,
                "freq": c.freq,
                "lemma": c.lemma,
                "surface": c.surface_example,
            },
        )
        for nested in sorted(c.nested_in):
            node.child("nested", {"lemma": " ".join(nested)})
        if c.scores:
            node.child("scores", {k: c.scores[k] for k in sorted(c.scores)})
        for occ in c.occurrences:
            node.child(
                "occ",
                {"doc": occ.doc, "end": occ.end, "sentence": occ.sentence, "start": occ.start},
            )
    return root


def _decisions_node(ds: DecisionSet) -> _Node:
    root = _Node("decisions")
    for d in ds.decisions:
        root.child(
            "decision",
            {
                "at": d.at,
                "author": d.author,
                "iteration": d.iteration,
                "new_kind": d.new_kind,
                "new_label": d.new_label,
                "new_rel_type": d.new_rel_type,
                "target": d.target,
                "target_kind": d.target_kind,
                "verdict": d.verdict,
            },
        )
    return root


def _manifest_node(m: CorpusManifest) -> _Node:
    root = _Node("corpus-manifest", {"project": m.project})
    for e in m.entries:
        root.child(
            "document",
            {
                "fetched_at": e.fetched_at,
                "id": e.id,
                "lang_hint": e.lang_hint,
                "title": e.title,
                "uri": e.uri,
            },
        )
    return root


def _report_node(r: Report) -> _Node:
    root = _Node("report", {"name": r.name})
    meta = root.child("meta", {k: r.meta[k] for k in sorted(r.meta)})
    del meta  # structural; attrs carry the payload
    for entry in r.entries:
        root.child("entry", {k: entry[k] for k in sorted(entry)})
    return root


_BUILDERS = {
    PAYLOAD_ONTOLOGY: (Ontology, _ontology_node),
    PAYLOAD_CANDIDATES: (CandidateSet, _candidates_node),
    PAYLOAD_DECISIONS: (DecisionSet, _decisions_node),
    PAYLOAD_MANIFEST: (CorpusManifest, _manifest_node),
    PAYLOAD_REPORT: (Report, _report_node),
}


def payload_type_of(entity: Any) -> str:
    for ptype, (cls, _) in _BUILDERS.items():
        if isinstance(entity, cls):
            return ptype
    raise InvalidArgumentError(f"no payload type for {type(entity).__name__}")


def serialize(entity: Any, producer: str = "", payload_type: str | None = None) -> bytes:
    """Canonical envelope bytes for an entity; deterministic for equal input."""
    ptype = payload_type or payload_type_of(entity)
    if ptype not in _BUILDERS:
        raise InvalidArgumentError(f"unknown payload type: {ptype!r}")
    cls, build = _BUILDERS[ptype]
    if not isinstance(entity, cls):
        raise InvalidArgumentError(f"payload type {ptype!r} expects {cls.__name__}")
    payload = build(entity)
    digest = hashlib.sha256(_emit(payload)).hexdigest()
    envelope = _Node(
        "envelope",
        {
            "checksum": f"sha256:{digest}",
            "payload_type": ptype,
            "producer_module": producer,
            "schema_version": SCHEMA_VERSION,
        },
    )
    envelope.children.append(payload)
    header = b'<?xml version="1.0" encoding="UTF-8"?>\n'
    return header + _emit(envelope)


# ---------------------------------------------------------------------------
# element -> entity


def _req(elem: ET.Element, attr: str) -> str:
    value = elem.get(attr)
    if value is None:
        raise ValidationError(f"<{elem.tag}> missing required attribute {attr!r}")
    return value


def _section(root: ET.Element, tag: str) -> list[ET.Element]:
    sec = root.find(tag)
    return list(sec) if sec is not None else []


def _parse_float(elem: ET.Element, attr: str) -> float:
    try:
        return float(_req(elem, attr))
    except ValueError as exc:
        raise ValidationError(f"bad float in <{elem.tag} {attr}>: {exc}") from None


def _parse_int(elem: ET.Element, attr: str) -> int:
    try:
        return int(_req(elem, attr))
    except ValueError as exc:
        raise ValidationError(f"bad int in <{elem.tag} {attr}>: {exc}") from None


def _ontology_entity(root: ET.Element) -> Ontology:
    o = model.create_ontology(
        _req(root, "name"),
        _req(root, "kind"),
        created_at=_req(root, "created_at"),
        source_project=root.get("source_project", ""),
    )
    seen_ids: set[str] = set()
    for c in _section(root, "concepts"):
        label = _req(c, "label")
        claimed_id = _req(c, "id")
        claimed_norm = _req(c, "normalized_label")
        norm = model.normalize_label(label)
        if claimed_norm != norm:
            raise ValidationError(
                f"normalized_label {claimed_norm!r} does not match normalization of {label!r}"
            )
        if claimed_id != model.concept_id(norm):
            raise ValidationError(f"concept id {claimed_id!r} is not derived from its label")
        if claimed_id in seen_ids:
            raise ValidationError(f"duplicate concept id {claimed_id!r}")
        seen_ids.add(claimed_id)
        prov = [
            (_req(p, "doc"), _parse_int(p, "start"), _parse_int(p, "end")) for p in c
        ]
        try:
            o, _ = model.add_concept(o, label, _req(c, "kind"), prov)
        except (InvalidArgumentError,) as exc:
            raise ValidationError(exc.message) from None
    seen_triples: set[tuple[str, str, str]] = set()
    for r in _section(root, "relations"):
        triple = (_req(r, "source"), _req(r, "target"), _req(r, "rel_type"))
        if triple in seen_triples:
            raise ValidationError(f"duplicate relation triple {triple}")
        seen_triples.add(triple)
        evidence = tuple(
            Evidence(_req(e, "doc"), _parse_int(e, "sentence"), _req(e, "rule")) for e in r
        )
        rel = SemanticRelation(
            source=triple[0],
            target=triple[1],
            rel_type=triple[2],
            confidence=_parse_float(r, "confidence"),
            evidence=evidence,
        )
        try:
            o = model.add_relation(o, rel)
        except model.CycleViolationError as exc:
            raise ValidationError(f"hierarchy cycle in payload: {exc.message}") from None
        except (InvalidArgumentError, model.UnknownConceptError) as exc:
            raise ValidationError(exc.message) from None
    for i in _section(root, "interpretations"):
        interp = Interpretation(
            subject=_req(i, "subject"), gloss=i.text or "", source=_req(i, "source")
        )
        try:
            o = model.add_interpretation(o, interp)
        except (InvalidArgumentError, model.UnknownConceptError) as exc:
            raise ValidationError(exc.message) from None
    for a in _section(root, "axioms"):
        axiom = Axiom(
            id=_req(a, "id"),
            form=_req(a, "form"),
            body_kind=_req(a, "body"),
            rel_type=a.get("rel_type"),
            source_kind=a.get("source_kind"),
            target_kind=a.get("target_kind"),
            concepts=tuple(_req(m, "id") for m in a if m.tag == "member"),
            scope=tuple(_req(m, "id") for m in a if m.tag == "scope"),
        )
        try:
            o = model.add_axiom(o, axiom)
        except InvalidArgumentError as exc:
            raise ValidationError(exc.message) from None
    return o


def _candidates_entity(root: ET.Element) -> CandidateSet:
    items: dict[str, TermCandidate] = {}
    for c in root:
        lemma = _req(c, "lemma")
        nested = []
        scores: dict[str, float] | None = None
        occurrences = []
        for child in c:
            if child.tag == "nested":
                nested.append(tuple(_req(child, "lemma").split()))
            elif child.tag == "scores":
                scores = {k: float(v) for k, v in sorted(child.attrib.items())}
            elif child.tag == "occ":
                occurrences.append(
                    Occurrence(
                        _req(child, "doc"),
                        _parse_int(child, "sentence"),
                        _parse_int(child, "start"),
                        _parse_int(child, "end"),
                    )
                )
        if lemma in items:
            raise ValidationError(f"duplicate candidate lemma {lemma!r}")
        cand = TermCandidate(
            lemma_seq=tuple(lemma.split()),
            surface_example=_req(c, "surface"),
            freq=_parse_int(c, "freq"),
            doc_freq=_parse_int(c, "doc_freq"),
            nested_in=frozenset(nested),
            scores=scores,
            occurrences=tuple(occurrences),
        )
        if cand.doc_freq > cand.freq or cand.freq < 1:
            raise ValidationError(f"candidate {lemma!r} has inconsistent frequencies")
        items[lemma] = cand
    return CandidateSet(project=root.get("project", ""), items=items)


def _decisions_entity(root: ET.Element) -> DecisionSet:
    decisions = []
    for d in root:
        verdict = _req(d, "verdict")
        if verdict not in ("accept", "reject", "rename", "retype"):
            raise ValidationError(f"unknown decision verdict {verdict!r}")
        kind = _req(d, "target_kind")
        if kind not in ("term", "relation"):
            raise ValidationError(f"unknown decision target kind {kind!r}")
        decisions.append(
            CurationDecision(
                target_kind=kind,
                target=_req(d, "target"),
                verdict=verdict,
                new_label=d.get("new_label"),
                new_kind=d.get("new_kind"),
                new_rel_type=d.get("new_rel_type"),
                author=d.get("author", ""),
                at=d.get("at", ""),
                iteration=_parse_int(d, "iteration"),
            )
        )
    return DecisionSet(decisions=tuple(decisions))


def _manifest_entity(root: ET.Element) -> CorpusManifest:
    entries = tuple(
        ManifestEntry(
            id=_req(d, "id"),
            uri=_req(d, "uri"),
            title=_req(d, "title"),
            fetched_at=_req(d, "fetched_at"),
            lang_hint=d.get("lang_hint"),
        )
        for d in root
    )
    return CorpusManifest(project=root.get("project", ""), entries=entries)


def _report_entity(root: ET.Element) -> Report:
    meta: dict[str, str] = {}
    entries: list[dict[str, str]] = []
    for child in root:
        if child.tag == "meta":
            meta = dict(child.attrib)
        elif child.tag == "entry":
            entries.append(dict(child.attrib))
        else:
            raise ValidationError(f"unexpected element <{child.tag}> in report")
    return Report(name=_req(root, "name"), meta=meta, entries=tuple(entries))


_PARSERS = {
    PAYLOAD_ONTOLOGY: _ontology_entity,
    PAYLOAD_CANDIDATES: _candidates_entity,
    PAYLOAD_DECISIONS: _decisions_entity,
    PAYLOAD_MANIFEST: _manifest_entity,
    PAYLOAD_REPORT: _report_entity,
}


def parse(data: bytes) -> Any:
    """Parse an envelope; checksum and schema are verified before any entity
    is constructed, and entities with violated invariants are never built."""
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        line, column = getattr(exc, "position", (0, 0))
        raise XmlParseError(f"malformed XML: {exc}", line=line, column=column) from None
    if root.tag != "envelope":
        raise ValidationError(f"expected <envelope> root, got <{root.tag}>")
    version = root.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValidationError(f"unsupported schema_version {version!r}")
    ptype = root.get("payload_type")
    if ptype not in _PARSERS:
        raise ValidationError(f"unknown payload type {ptype!r}")
    payloads = list(root)
    if len(payloads) != 1:
        raise ValidationError("envelope must contain exactly one payload element")
    payload = payloads[0]
    claimed = root.get("checksum", "")
    actual = "sha256:" + hashlib.sha256(_emit(_canonical_dom(payload))).hexdigest()
    if claimed != actual:
        raise IntegrityError(f"payload checksum mismatch: claimed {claimed}, computed {actual}")
    return _PARSERS[ptype](payload)


def parse_expect(data: bytes, payload_type: str) -> Any:
    entity = parse(data)
    cls, _ = _BUILDERS[payload_type]
    if not isinstance(entity, cls):
        raise ValidationError(
            f"expected {payload_type} payload, got {type(entity).__name__}"
        )
    return entity


# ---------------------------------------------------------------------------
# Turtle-subset export


def _ttl_escape(text: str) -> str:
    return (
        text.replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
        .replace("\r", "\\r")
        .replace("\t", "\\t")
    )


def _property_for(rel_type: str) -> str:
    if rel_type == model.IS_A:
        return "rdfs:subClassOf"
    if rel_type == model.PART_OF:
        return "onto:partOf"
    if rel_type == model.ASSOCIATED_WITH:
        return "onto:associatedWith"
    slug = "".join(ch if (ch.isalnum() or ch == "-") else "-" for ch in rel_type)
    return f"onto:rel-{slug}"


def _subject_for(o: Ontology, subject: str) -> str:
    if subject in o.concepts:
        return f"onto:{subject}"
    slug = "".join(ch if (ch.isalnum() or ch == "-") else "-" for ch in subject)
    return f"onto:reltype-{slug}"


def export_triples(o: Ontology) -> bytes:
    """Turtle subset: one statement line per concept, relation and gloss.

    The prologue holds only @prefix directives, so the content triple count
    is exactly |concepts| + |relations| + |interpretations|.
    """
    report = model.validate(o)
    if not report.ok:
        raise ValidationError(
            "ontology fails validation: " + "; ".join(v.message for v in report.violations)
        )
    lines = [
        f"@prefix onto: <urn:ontoforge:{quote(o.name, safe='')}#> .",
        "@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .",
        "@prefix owl: <http://www.w3.org/2002/07/owl#> .",
        "@prefix skos: <http://www.w3.org/2004/02/skos/core#> .",
        "",
    ]
    for cid in sorted(o.concepts):
        lines.append(f"onto:{cid} a owl:Class .")
    for key in sorted(o.relations):
        r = o.relations[key]
        lines.append(f"onto:{r.source} {_property_for(r.rel_type)} onto:{r.target} .")
    for i in o.interpretations:
        lines.append(f'{_subject_for(o, i.subject)} skos:definition "{_ttl_escape(i.gloss)}" .')
    return ("\n".join(lines) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# node-link projection for the UI


def graph_json(o: Ontology) -> dict:
    """Node-link dict of the ontograph for the HTTP API."""
    interp_map: dict[str, list[dict[str, str]]] = {}
    for i in o.interpretations:
        interp_map.setdefault(i.subject, []).append({"gloss": i.gloss, "source": i.source})
    nodes = [
        {
            "id": c.id,
            "label": c.label,
            "kind": c.kind,
            "interpretations": interp_map.get(c.id, []),
            "provenance": [{"doc": p.doc, "start": p.start, "end": p.end} for p in c.provenance],
        }
        for c in (o.concepts[cid] for cid in sorted(o.concepts))
    ]
    links = [
        {
            "source": r.source,
            "target": r.target,
            "rel_type": r.rel_type,
            "confidence": r.confidence,
        }
        for r in (o.relations[k] for k in sorted(o.relations))
    ]
    return {"name": o.name, "kind": o.kind, "nodes": nodes, "links": links}
