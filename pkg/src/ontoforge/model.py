"""Formal ontology model: concepts, semantic relations, interpretations, axioms.

An ontology is held as a typed labeled graph (the ontograph) whose vertices
are concepts and whose arcs are semantic relations.  The hierarchical relation
types (``is_a``, ``part_of``) are kept acyclic at insertion time, so every
ontology reachable through this module's operations admits a topological
order over each hierarchy.

All operations are persistent: they return a new :class:`Ontology` and never
mutate their input, which makes values safe to share across threads.
"""

from __future__ import annotations

import hashlib
import re
import unicodedata
from dataclasses import dataclass, field, replace
from typing import Iterable, NamedTuple

from .errors import InvalidArgumentError, UnknownConceptError, CycleViolationError

# Relation types. is_a and part_of form hierarchies and are kept acyclic;
# any other string tag is an open extension treated as non-hierarchical.
IS_A = "is_a"
PART_OF = "part_of"
ASSOCIATED_WITH = "associated_with"
HIERARCHICAL_TYPES = frozenset({IS_A, PART_OF})

# Concept kinds (objects, processes and tasks get separate sub-ontologies
# only through this tag; structure is shared).
OBJECT = "object"
PROCESS = "process"
TASK = "task"
CONCEPT_KINDS = (OBJECT, PROCESS, TASK)

ONTOLOGY_KINDS = ("document", "domain", "integrated")

# Deterministic default so construction never bakes wall-clock time into an
# artifact; pipeline callers pass a timestamp derived from the corpus.
EPOCH = "1970-01-01T00:00:00+00:00"

_SLUG_RE = re.compile(r"[^\w]+", re.UNICODE)


def normalize_label(label: str) -> str:
    """Unicode NFC, lowercase, collapsed whitespace.  Idempotent."""
    return " ".join(unicodedata.normalize("NFC", label).lower().split())


def concept_id(normalized_label: str) -> str:
    """Deterministic id: slug of the normalized label plus an 8-hex content hash."""
    digest = hashlib.sha256(normalized_label.encode("utf-8")).hexdigest()[:8]
    slug = _SLUG_RE.sub("-", normalized_label).strip("-")
    return f"{slug or 'term'}-{digest}"


class Provenance(NamedTuple):
    doc: str
    start: int
    end: int


class Evidence(NamedTuple):
    doc: str
    sentence: int
    rule: str


@dataclass(frozen=True)
class Concept:
    id: str
    label: str
    normalized_label: str
    kind: str = OBJECT
    provenance: tuple[Provenance, ...] = ()


@dataclass(frozen=True)
class SemanticRelation:
    source: str
    target: str
    rel_type: str
    confidence: float = 1.0
    evidence: tuple[Evidence, ...] = ()

    @property
    def triple(self) -> tuple[str, str, str]:
        return (self.source, self.target, self.rel_type)


@dataclass(frozen=True)
class Interpretation:
    """A gloss attached to a concept (by id) or to a relation type (by tag)."""

    subject: str
    gloss: str
    source: str


@dataclass(frozen=True)
class Axiom:
    """A mechanically checkable statement about an ontology.

    ``body_kind`` selects the check:
      domain_range  -- relations of ``rel_type`` must run from ``source_kind``
                       concepts to ``target_kind`` concepts
      disjoint      -- no concept may descend (via is_a, reflexively) from two
                       of the listed concepts
      irreflexive   -- no relation of ``rel_type`` may be a self-loop
      acyclic       -- the subgraph of ``rel_type`` must contain no cycle

    ``scope`` optionally restricts the check to relations whose endpoints all
    lie in the given concept-id set.
    """

    id: str
    form: str  # "definition" | "constraint"
    body_kind: str
    rel_type: str | None = None
    source_kind: str | None = None
    target_kind: str | None = None
    concepts: tuple[str, ...] = ()
    scope: tuple[str, ...] = ()


@dataclass(frozen=True)
class Violation:
    axiom_id: str
    message: str
    offenders: tuple[str, ...] = ()


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class OntologyMeta:
    created_at: str = EPOCH
    source_project: str = ""


@dataclass
class Ontology:
    """The quadruple of concepts, relations, interpretations and axioms.

    Treat instances as immutable: operations in this module return fresh
    values.  Dictionaries are keyed by stable identity (concept id, relation
    triple, axiom id) so equality is insertion-order independent.
    """

    name: str
    kind: str = "domain"
    concepts: dict[str, Concept] = field(default_factory=dict)
    relations: dict[tuple[str, str, str], SemanticRelation] = field(default_factory=dict)
    interpretations: tuple[Interpretation, ...] = ()
    axioms: dict[str, Axiom] = field(default_factory=dict)
    meta: OntologyMeta = field(default_factory=OntologyMeta)

    def concept_by_label(self, normalized_label: str) -> Concept | None:
        for c in self.concepts.values():
            if c.normalized_label == normalized_label:
                return c
        return None

    def relation_types_in_use(self) -> set[str]:
        return {r.rel_type for r in self.relations.values()}


def create_ontology(
    name: str,
    kind: str = "domain",
    *,
    created_at: str = EPOCH,
    source_project: str = "",
) -> Ontology:
    if not name:
        raise InvalidArgumentError("ontology name must be non-empty")
    if kind not in ONTOLOGY_KINDS:
        raise InvalidArgumentError(f"unknown ontology kind: {kind!r}")
    return Ontology(
        name=name, kind=kind, meta=OntologyMeta(created_at=created_at, source_project=source_project)
    )


def add_concept(
    o: Ontology,
    label: str,
    kind: str = OBJECT,
    provenance: Iterable[tuple[str, int, int]] = (),
) -> tuple[Ontology, str]:
    """Idempotent upsert keyed by the normalized label.

    Re-adding an existing label returns the existing id and merges provenance;
    the first-seen display label and kind win.
    """
    norm = normalize_label(label)
    if not norm:
        raise InvalidArgumentError("concept label normalizes to the empty string")
    if kind not in CONCEPT_KINDS:
        raise InvalidArgumentError(f"unknown concept kind: {kind!r}")
    prov = tuple(Provenance(*p) for p in provenance)
    existing = o.concept_by_label(norm)
    if existing is not None:
        merged = tuple(sorted(set(existing.provenance) | set(prov)))
        if merged == existing.provenance:
            return o, existing.id
        concepts = dict(o.concepts)
        concepts[existing.id] = replace(existing, provenance=merged)
        return replace(o, concepts=concepts), existing.id
    cid = concept_id(norm)
    concepts = dict(o.concepts)
    concepts[cid] = Concept(
        id=cid, label=label, normalized_label=norm, kind=kind, provenance=tuple(sorted(set(prov)))
    )
    return replace(o, concepts=concepts), cid


def _hierarchy_path(
    relations: Iterable[SemanticRelation], rel_type: str, start: str, goal: str
) -> list[str] | None:
    """Nodes along a directed path start -> ... -> goal in one hierarchy, or None."""
    adjacency: dict[str, list[str]] = {}
    for r in relations:
        if r.rel_type == rel_type:
            adjacency.setdefault(r.source, []).append(r.target)
    stack = [(start, [start])]
    seen = set()
    while stack:
        node, path = stack.pop()
        if node == goal:
            return path
        if node in seen:
            continue
        seen.add(node)
        for nxt in sorted(adjacency.get(node, ())):
            stack.append((nxt, path + [nxt]))
    return None


def add_relation(o: Ontology, rel: SemanticRelation) -> Ontology:
    """Insert a relation, keeping each hierarchy acyclic.

    Duplicate triples merge (max confidence, union of evidence).  A
    hierarchical edge that would close a cycle raises
    :class:`CycleViolationError` naming the offending path.
    """
    if rel.source not in o.concepts:
        raise UnknownConceptError(f"unknown relation source: {rel.source}")
    if rel.target not in o.concepts:
        raise UnknownConceptError(f"unknown relation target: {rel.target}")
    if not 0.0 <= rel.confidence <= 1.0:
        raise InvalidArgumentError(f"confidence {rel.confidence} outside [0, 1]")
    hierarchical = rel.rel_type in HIERARCHICAL_TYPES
    if hierarchical and rel.source == rel.target:
        raise InvalidArgumentError(f"self-loop on hierarchical relation {rel.rel_type}: {rel.source}")

    existing = o.relations.get(rel.triple)
    if existing is not None:
        merged = replace(
            existing,
            confidence=max(existing.confidence, rel.confidence),
            evidence=tuple(sorted(set(existing.evidence) | set(rel.evidence))),
        )
        if merged == existing:
            return o
        relations = dict(o.relations)
        relations[rel.triple] = merged
        return replace(o, relations=relations)

    if hierarchical:
        # Edge source -> target closes a cycle iff target already reaches source.
        back = _hierarchy_path(o.relations.values(), rel.rel_type, rel.target, rel.source)
        if back is not None:
            path = [rel.source] + back[:-1]
            labels = " -> ".join(o.concepts[c].label for c in path)
            raise CycleViolationError(
                f"{rel.rel_type} edge {rel.source} -> {rel.target} closes cycle [{labels}]", path
            )

    relations = dict(o.relations)
    relations[rel.triple] = replace(rel, evidence=tuple(sorted(set(rel.evidence))))
    return replace(o, relations=relations)


def add_interpretation(o: Ontology, interp: Interpretation) -> Ontology:
    """Attach a gloss; the subject must be a known concept id or relation type."""
    if not interp.gloss:
        raise InvalidArgumentError("interpretation gloss must be non-empty")
    known_subject = (
        interp.subject in o.concepts
        or interp.subject in HIERARCHICAL_TYPES
        or interp.subject == ASSOCIATED_WITH
        or interp.subject in o.relation_types_in_use()
    )
    if not known_subject:
        raise UnknownConceptError(f"interpretation subject not in ontology: {interp.subject}")
    if interp in o.interpretations:
        return o
    merged = tuple(sorted(set(o.interpretations) | {interp}, key=lambda i: (i.subject, i.source, i.gloss)))
    return replace(o, interpretations=merged)


def add_axiom(o: Ontology, axiom: Axiom) -> Ontology:
    if not axiom.id:
        raise InvalidArgumentError("axiom id must be non-empty")
    if o.axioms.get(axiom.id) == axiom:
        return o
    axioms = dict(o.axioms)
    axioms[axiom.id] = axiom
    return replace(o, axioms=axioms)


def default_axioms() -> tuple[Axiom, ...]:
    """Constraints installed on every assembled ontology."""
    return (
        Axiom(id="acyclic-is-a", form="constraint", body_kind="acyclic", rel_type=IS_A),
        Axiom(id="acyclic-part-of", form="constraint", body_kind="acyclic", rel_type=PART_OF),
        Axiom(id="irreflexive-is-a", form="constraint", body_kind="irreflexive", rel_type=IS_A),
    )


def _cycle_nodes(relations: Iterable[SemanticRelation], rel_type: str) -> tuple[str, ...]:
    """Nodes left after peeling leaves (Kahn); non-empty iff the subgraph has a cycle."""
    out_degree: dict[str, int] = {}
    incoming: dict[str, list[str]] = {}
    for r in relations:
        if r.rel_type != rel_type:
            continue
        out_degree[r.source] = out_degree.get(r.source, 0) + 1
        out_degree.setdefault(r.target, 0)
        incoming.setdefault(r.target, []).append(r.source)
    ready = [n for n, d in out_degree.items() if d == 0]
    remaining = dict(out_degree)
    while ready:
        node = ready.pop()
        del remaining[node]
        for pred in incoming.get(node, ()):
            if pred in remaining:
                remaining[pred] -= 1
                if remaining[pred] == 0:
                    ready.append(pred)
    return tuple(sorted(remaining))


def _scoped(relations: Iterable[SemanticRelation], scope: tuple[str, ...]) -> list[SemanticRelation]:
    if not scope:
        return list(relations)
    allowed = set(scope)
    return [r for r in relations if r.source in allowed and r.target in allowed]


def _check_axiom(o: Ontology, axiom: Axiom) -> list[Violation]:
    violations = []
    if axiom.body_kind == "domain_range":
        for r in _scoped(o.relations.values(), axiom.scope):
            if r.rel_type != axiom.rel_type:
                continue
            src = o.concepts.get(r.source)
            tgt = o.concepts.get(r.target)
            if src and axiom.source_kind and src.kind != axiom.source_kind:
                violations.append(
                    Violation(
                        axiom.id,
                        f"{r.rel_type} source {src.label} has kind {src.kind}, expected {axiom.source_kind}",
                        (r.source, r.target, r.rel_type),
                    )
                )
            if tgt and axiom.target_kind and tgt.kind != axiom.target_kind:
                violations.append(
                    Violation(
                        axiom.id,
                        f"{r.rel_type} target {tgt.label} has kind {tgt.kind}, expected {axiom.target_kind}",
                        (r.source, r.target, r.rel_type),
                    )
                )
    elif axiom.body_kind == "disjoint":
        members = [c for c in axiom.concepts if not axiom.scope or c in axiom.scope]
        # ancestors[x] = members reachable from x via is_a (reflexively)
        for node in sorted(o.concepts):
            reached = []
            for member in members:
                if node == member or _hierarchy_path(o.relations.values(), IS_A, node, member):
                    reached.append(member)
            if len(reached) > 1:
                violations.append(
                    Violation(
                        axiom.id,
                        f"concept {node} falls under disjoint concepts {', '.join(reached)}",
                        (node, *reached),
                    )
                )
    elif axiom.body_kind == "irreflexive":
        for r in _scoped(o.relations.values(), axiom.scope):
            if r.rel_type == axiom.rel_type and r.source == r.target:
                violations.append(
                    Violation(axiom.id, f"self-loop {r.source} on {r.rel_type}", (r.source,))
                )
    elif axiom.body_kind == "acyclic":
        nodes = _cycle_nodes(_scoped(o.relations.values(), axiom.scope), axiom.rel_type or "")
        if nodes:
            violations.append(
                Violation(axiom.id, f"cycle among {', '.join(nodes)} on {axiom.rel_type}", nodes)
            )
    else:
        violations.append(Violation(axiom.id, f"unknown axiom body kind: {axiom.body_kind}", ()))
    return violations


def validate(o: Ontology) -> ValidationReport:
    """Check structural invariants and every axiom; pure, never mutates.

    Violations are data, not errors: an empty report means the ontology
    satisfies all constraints.
    """
    violations: list[Violation] = []
    for r in o.relations.values():
        for endpoint in (r.source, r.target):
            if endpoint not in o.concepts:
                violations.append(
                    Violation(
                        "structure:referential-integrity",
                        f"relation endpoint not in concept set: {endpoint}",
                        (r.source, r.target, r.rel_type),
                    )
                )
        if not 0.0 <= r.confidence <= 1.0:
            violations.append(
                Violation(
                    "structure:confidence-range",
                    f"confidence {r.confidence} outside [0, 1]",
                    (r.source, r.target, r.rel_type),
                )
            )
    for rel_type in sorted(HIERARCHICAL_TYPES):
        nodes = _cycle_nodes(o.relations.values(), rel_type)
        if nodes:
            violations.append(
                Violation(
                    f"structure:acyclic:{rel_type}", f"cycle among {', '.join(nodes)}", nodes
                )
            )
    for interp in o.interpretations:
        known = (
            interp.subject in o.concepts
            or interp.subject in HIERARCHICAL_TYPES
            or interp.subject == ASSOCIATED_WITH
            or interp.subject in o.relation_types_in_use()
        )
        if not known:
            violations.append(
                Violation(
                    "structure:interpretation-subject",
                    f"interpretation subject not in ontology: {interp.subject}",
                    (interp.subject,),
                )
            )
    for axiom in sorted(o.axioms.values(), key=lambda a: a.id):
        violations.extend(_check_axiom(o, axiom))
    return ValidationReport(tuple(violations))
