"""Ontology alignment and merging.

Alignment scores concept pairs by label identity and token overlap, then
greedily builds a one-to-one map.  Merge collapses aligned pairs into the
base (first) ontology's concept, re-points relations, and keeps the result
valid, so |merged concepts| = |X1| + |X2| - |aligned pairs| always holds.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable

from . import model
from .errors import InvalidArgumentError
from .model import Concept, Interpretation, Ontology, SemanticRelation
from .profiles import LanguageProfile, builtin_profile, combined_profile

METHOD_EXACT = "exact"
METHOD_NORMALIZED = "normalized"
METHOD_TOKEN_OVERLAP = "token_overlap"


@dataclass(frozen=True)
class AlignedPair:
    left: str  # concept id in the first ontology
    right: str  # concept id in the second ontology
    similarity: float
    method: str


@dataclass(frozen=True)
class AlignmentMap:
    pairs: tuple[AlignedPair, ...] = ()
    threshold: float = 1.0

    def left_ids(self) -> set[str]:
        return {p.left for p in self.pairs}

    def right_to_left(self) -> dict[str, str]:
        return {p.right: p.left for p in self.pairs}

    def inverse(self) -> "AlignmentMap":
        return AlignmentMap(
            pairs=tuple(
                AlignedPair(p.right, p.left, p.similarity, p.method) for p in self.pairs
            ),
            threshold=self.threshold,
        )


def _default_match_profile() -> LanguageProfile:
    return combined_profile(builtin_profile("en"), builtin_profile("uk"))


def _token_set(concept: Concept, profile: LanguageProfile) -> frozenset[str]:
    return frozenset(profile.normalize_token(t) for t in concept.normalized_label.split())


def _jaccard(a: frozenset[str], b: frozenset[str]) -> float:
    if not a or not b:
        return 0.0
    return len(a & b) / len(a | b)


def align(
    o1: Ontology,
    o2: Ontology,
    threshold: float,
    profile: LanguageProfile | None = None,
) -> AlignmentMap:
    """Greedy one-to-one alignment by similarity descending.

    Exact label equality scores 1.0 (method ``exact``), normalized-label
    equality 1.0 (``normalized``), otherwise Jaccard over suffix-stripped
    label tokens (``token_overlap``).  Pairs below the threshold are
    excluded; ties break lexicographically on the two normalized labels.
    """
    if not 0.0 < threshold <= 1.0:
        raise InvalidArgumentError(f"alignment threshold must be in (0, 1], got {threshold}")
    prof = profile or _default_match_profile()
    scored: list[tuple[float, str, str, AlignedPair]] = []
    tokens2 = {c2.id: _token_set(c2, prof) for c2 in o2.concepts.values()}
    for c1 in o1.concepts.values():
        t1 = _token_set(c1, prof)
        for c2 in o2.concepts.values():
            if c1.label == c2.label:
                sim, method = 1.0, METHOD_EXACT
            elif c1.normalized_label == c2.normalized_label:
                sim, method = 1.0, METHOD_NORMALIZED
            else:
                sim, method = _jaccard(t1, tokens2[c2.id]), METHOD_TOKEN_OVERLAP
            if sim >= threshold:
                scored.append(
                    (
                        sim,
                        c1.normalized_label,
                        c2.normalized_label,
                        AlignedPair(c1.id, c2.id, sim, method),
                    )
                )
    scored.sort(key=lambda item: (-item[0], item[1], item[2]))
    used_left: set[str] = set()
    used_right: set[str] = set()
    pairs = []
    for _, _, _, pair in scored:
        if pair.left in used_left or pair.right in used_right:
            continue
        used_left.add(pair.left)
        used_right.add(pair.right)
        pairs.append(pair)
    return AlignmentMap(pairs=tuple(pairs), threshold=threshold)


def self_alignment(o: Ontology) -> AlignmentMap:
    pairs = tuple(
        AlignedPair(cid, cid, 1.0, METHOD_EXACT) for cid in sorted(o.concepts)
    )
    return AlignmentMap(pairs=pairs, threshold=1.0)


def merge(
    o1: Ontology,
    o2: Ontology,
    alignment: AlignmentMap,
    *,
    name: str | None = None,
) -> tuple[Ontology, list[str]]:
    """Merge two ontologies under an alignment; returns (merged, diagnostics).

    Aligned pairs collapse into the first ontology's concept (label wins,
    provenance and interpretations union); relations are re-pointed and
    deduplicated by max confidence; an edge whose re-pointing would close a
    hierarchy cycle is dropped deterministically with a diagnostic.
    """
    for pair in alignment.pairs:
        if pair.left not in o1.concepts or pair.right not in o2.concepts:
            raise InvalidArgumentError(
                f"alignment pair ({pair.left}, {pair.right}) not drawn from these ontologies"
            )
    merged_name = name or (o1.name if o1.name == o2.name else f"{o1.name}+{o2.name}")
    created = max(o1.meta.created_at, o2.meta.created_at)
    project = o1.meta.source_project or o2.meta.source_project
    out = model.create_ontology(
        merged_name, "integrated", created_at=created, source_project=project
    )

    right_to_left = alignment.right_to_left()
    diagnostics: list[str] = []

    # concepts: all of o1, o2's aligned partners folded in, the rest copied
    partner_of = {p.left: p.right for p in alignment.pairs}
    for cid in sorted(o1.concepts):
        c = o1.concepts[cid]
        prov = set(c.provenance)
        if cid in partner_of:
            prov |= set(o2.concepts[partner_of[cid]].provenance)
        out, _ = model.add_concept(out, c.label, c.kind, tuple(sorted(prov)))
    for cid in sorted(o2.concepts):
        if cid in right_to_left:
            continue
        c = o2.concepts[cid]
        out, _ = model.add_concept(out, c.label, c.kind, c.provenance)

    def repoint(r: SemanticRelation, mapping: dict[str, str]) -> SemanticRelation:
        return replace(
            r,
            source=mapping.get(r.source, r.source),
            target=mapping.get(r.target, r.target),
        )

    pooled = [repoint(r, {}) for r in o1.relations.values()]
    pooled += [repoint(r, right_to_left) for r in o2.relations.values()]
    pooled.sort(key=lambda r: (-r.confidence, r.source, r.target, r.rel_type))
    for rel in pooled:
        try:
            out = model.add_relation(out, rel)
        except model.CycleViolationError as exc:
            diagnostics.append(
                f"dropped {rel.rel_type} {rel.source} -> {rel.target}: {exc.message}"
            )
        except InvalidArgumentError as exc:
            diagnostics.append(
                f"dropped invalid relation {rel.source} -> {rel.target}: {exc.message}"
            )

    interps: set[Interpretation] = set(o1.interpretations)
    for i in o2.interpretations:
        interps.add(replace(i, subject=right_to_left.get(i.subject, i.subject)))
    for i in sorted(interps, key=lambda i: (i.subject, i.source, i.gloss)):
        try:
            out = model.add_interpretation(out, i)
        except model.UnknownConceptError as exc:
            diagnostics.append(f"dropped interpretation: {exc.message}")

    for aid in sorted(set(o1.axioms) | set(o2.axioms)):
        a1, a2 = o1.axioms.get(aid), o2.axioms.get(aid)
        axiom = a1 or a2
        if a1 is not None and a2 is not None and a1 != a2:
            diagnostics.append(f"axiom id conflict on {aid!r}: kept the first ontology's")
        out = model.add_axiom(out, axiom)
    return out, diagnostics


def isomorphic_by_label(a: Ontology, b: Ontology) -> bool:
    """Structure equality over normalized labels (meta, name and kind ignored)."""

    def label_view(o: Ontology) -> tuple:
        labels = {cid: c.normalized_label for cid, c in o.concepts.items()}
        concepts = sorted((c.normalized_label, c.kind) for c in o.concepts.values())
        relations = sorted(
            (labels[r.source], labels[r.target], r.rel_type) for r in o.relations.values()
        )
        interps = sorted(
            (labels.get(i.subject, i.subject), i.gloss, i.source) for i in o.interpretations
        )
        return (concepts, relations, interps)

    return label_view(a) == label_view(b)


def concept_overlap(ontologies: Iterable[Ontology]) -> set[str]:
    """Normalized labels shared by every ontology in the collection."""
    sets = [set(c.normalized_label for c in o.concepts.values()) for o in ontologies]
    if not sets:
        return set()
    common = sets[0]
    for s in sets[1:]:
        common &= s
    return common
