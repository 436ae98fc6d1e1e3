"""Promotes ranked terms to concepts, discovers relations, attaches glosses,
and assembles document- or domain-level ontologies.

Relation discovery runs three deterministic channels: lexico-syntactic
patterns over sentences, head-modifier nesting between multiword terms, and
PMI over sentence-window co-occurrence.  Confidence constants are fixed here
and overridable through :class:`ExtractionParams`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from . import model
from .errors import InvalidArgumentError
from .model import Concept, Evidence, Interpretation, Ontology, SemanticRelation
from .profiles import LanguageProfile
from .textproc import TermCandidate, TextGraph, TokenizedDoc, aggregate_cooccurrence

PATTERN_CONFIDENCE = 0.9
NESTING_CONFIDENCE = 0.7

RELATION_TARGET_SEP = "|"

_WORDISH_RE = re.compile(r"\w+(?:['’ʼ`]\w+)*", re.UNICODE)


@dataclass(frozen=True)
class CurationDecision:
    """A knowledge engineer's verdict on a term or relation; the latest
    iteration wins per target."""

    target_kind: str  # "term" | "relation"
    target: str  # term lemma, or "source|rel_type|target" lemma triple
    verdict: str  # accept | reject | rename | retype
    new_label: str | None = None
    new_kind: str | None = None
    new_rel_type: str | None = None
    author: str = ""
    at: str = ""
    iteration: int = 0


@dataclass(frozen=True)
class DecisionSet:
    decisions: tuple[CurationDecision, ...] = ()


def effective_decisions(decisions: Iterable[CurationDecision]) -> dict[tuple[str, str], CurationDecision]:
    """Latest decision per (target_kind, target); later iteration wins, file
    order breaks ties within an iteration."""
    effective: dict[tuple[str, str], CurationDecision] = {}
    for d in decisions:
        key = (d.target_kind, d.target)
        current = effective.get(key)
        if current is None or d.iteration >= current.iteration:
            effective[key] = d
    return effective


@dataclass(frozen=True)
class Pattern:
    """A lexico-syntactic schema like ``{X} such as {Y}`` matched over token
    norms; ``{X}`` is the hypernym slot, ``{Y}`` the hyponym slot."""

    id: str
    template: str

    def slots(self, profile: LanguageProfile) -> tuple[str, ...]:
        out = []
        for part in self.template.split():
            if part in ("{X}", "{Y}"):
                out.append(part)
            else:
                for m in _WORDISH_RE.finditer(part):
                    out.append(profile.normalize_token(m.group(0)))
        return tuple(out)


def load_patterns(path: str | Path) -> tuple[Pattern, ...]:
    out = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "\t" not in line:
            raise InvalidArgumentError(f"pattern line needs '<id> TAB <template>': {line!r}")
        pid, template = line.split("\t", 1)
        out.append(Pattern(id=pid.strip(), template=template.strip()))
    return tuple(out)


def builtin_patterns() -> tuple[Pattern, ...]:
    ref = resources.files("ontoforge.data.patterns").joinpath("default.tsv")
    out = []
    for line in ref.read_text(encoding="utf-8").splitlines():
        if line.strip():
            pid, template = line.split("\t", 1)
            out.append(Pattern(id=pid.strip(), template=template.strip()))
    return tuple(out)


@dataclass(frozen=True)
class DictionarySource:
    """Headword -> gloss map; headwords are normalized like concept labels."""

    id: str
    entries: dict[str, str] = field(default_factory=dict)


def load_dictionary(
    path: str | Path,
    profile: LanguageProfile | None = None,
    source_id: str | None = None,
) -> DictionarySource:
    """TSV dictionary: ``headword TAB gloss`` per line.

    Headwords are normalized exactly like concept labels: label
    normalization plus per-token suffix stripping when a profile is given,
    so lookups against lemma-form concepts stay exact.
    """
    p = Path(path)
    entries: dict[str, str] = {}
    for raw in p.read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#") or "\t" not in line:
            continue
        head, gloss = line.split("\t", 1)
        norm = model.normalize_label(head)
        if profile is not None:
            norm = " ".join(profile.normalize_token(t) for t in norm.split())
        entries[norm] = gloss.strip()
    return DictionarySource(id=source_id or p.stem, entries=entries)


@dataclass(frozen=True)
class ExtractionParams:
    top_k_terms: int = 30
    pmi_threshold: float = 0.0
    min_pair_count: int = 2
    pattern_confidence: float = PATTERN_CONFIDENCE
    nesting_confidence: float = NESTING_CONFIDENCE
    decisions: tuple[CurationDecision, ...] = ()

    def __post_init__(self):
        if self.top_k_terms < 1:
            raise InvalidArgumentError("top_k_terms must be >= 1")
        if self.min_pair_count < 1:
            raise InvalidArgumentError("min_pair_count must be >= 1")


def _concept_kind(surface_example: str, lemma_seq: tuple[str, ...], profile: LanguageProfile) -> str:
    """Process/object heuristic on the head (trailing) noun."""
    head_surface = surface_example.split()[-1].lower() if surface_example.split() else ""
    head_lemma = lemma_seq[-1] if lemma_seq else ""
    for marker in profile.process_markers:
        if head_surface.endswith(marker) or head_lemma.endswith(marker):
            return model.PROCESS
    return model.OBJECT


def promote_concepts(
    ranked: Sequence[TermCandidate],
    params: ExtractionParams,
    profile: LanguageProfile,
) -> list[Concept]:
    """Top-k cutoff with curation decisions applied.

    Rejected terms are skipped and their slot refilled from the next rank;
    accepted terms bypass the cutoff; renames replace the label (and thereby
    the concept identity); retypes override the kind heuristic.
    """
    decisions = effective_decisions(params.decisions)

    def decision_for(c: TermCandidate) -> CurationDecision | None:
        return decisions.get(("term", c.lemma))

    chosen: list[TermCandidate] = []
    for cand in ranked:
        if len(chosen) >= params.top_k_terms:
            break
        d = decision_for(cand)
        if d is not None and d.verdict == "reject":
            continue
        chosen.append(cand)
    chosen_keys = {c.lemma_seq for c in chosen}
    for cand in ranked:
        d = decision_for(cand)
        if d is not None and d.verdict == "accept" and cand.lemma_seq not in chosen_keys:
            chosen.append(cand)
            chosen_keys.add(cand.lemma_seq)

    concepts: list[Concept] = []
    seen_norms: set[str] = set()
    for cand in chosen:
        d = decision_for(cand)
        label = cand.lemma
        if d is not None and d.verdict == "rename" and d.new_label:
            label = d.new_label
        kind = _concept_kind(cand.surface_example, cand.lemma_seq, profile)
        if d is not None and d.verdict == "retype" and d.new_kind:
            kind = d.new_kind
        norm = model.normalize_label(label)
        if not norm or norm in seen_norms:
            continue
        seen_norms.add(norm)
        provenance = tuple(
            model.Provenance(occ.doc, occ.start, occ.end) for occ in cand.occurrences
        )
        concepts.append(
            Concept(
                id=model.concept_id(norm),
                label=label,
                normalized_label=norm,
                kind=kind,
                provenance=tuple(sorted(set(provenance))),
            )
        )
    return concepts


class _ConceptIndex:
    """Lookup from lemma sequences to concepts, longest match first."""

    def __init__(self, concepts: Iterable[Concept]):
        self.by_seq: dict[tuple[str, ...], Concept] = {}
        for c in concepts:
            self.by_seq[tuple(c.normalized_label.split())] = c
        self.max_len = max((len(k) for k in self.by_seq), default=0)

    def match_at(self, norms: Sequence[str], pos: int) -> list[tuple[int, Concept]]:
        """(length, concept) matches starting at pos, longest first."""
        out = []
        for length in range(min(self.max_len, len(norms) - pos), 0, -1):
            key = tuple(norms[pos : pos + length])
            if key in self.by_seq:
                out.append((length, self.by_seq[key]))
        return out


def _match_pattern(
    slots: tuple[str, ...], norms: list[str], index: _ConceptIndex
) -> list[dict[str, Concept]]:
    """All bindings of {X}/{Y} to concepts such that the pattern matches the
    token-norm sequence contiguously."""
    results: list[dict[str, Concept]] = []

    def walk(slot_idx: int, pos: int, binding: dict[str, Concept]):
        if slot_idx == len(slots):
            results.append(dict(binding))
            return
        slot = slots[slot_idx]
        if slot in ("{X}", "{Y}"):
            for length, concept in index.match_at(norms, pos):
                binding[slot] = concept
                walk(slot_idx + 1, pos + length, binding)
                del binding[slot]
        else:
            if pos < len(norms) and norms[pos] == slot:
                walk(slot_idx + 1, pos + 1, binding)

    for start in range(len(norms)):
        walk(0, start, {})
    return results


def extract_taxonomic(
    docs: Sequence[TokenizedDoc],
    concepts: Sequence[Concept],
    patterns: Sequence[Pattern],
    profile: LanguageProfile,
    pattern_confidence: float = PATTERN_CONFIDENCE,
    nesting_confidence: float = NESTING_CONFIDENCE,
) -> list[SemanticRelation]:
    """is_a relations from pattern instances and head-modifier nesting.

    Both endpoints must be promoted concepts; duplicate edges keep the
    highest confidence and the union of evidence.
    """
    if not concepts:
        raise InvalidArgumentError("taxonomic extraction requires promoted concepts")
    index = _ConceptIndex(concepts)
    found: dict[tuple[str, str], SemanticRelation] = {}

    def emit(child: Concept, parent: Concept, confidence: float, ev: Evidence):
        if child.id == parent.id:
            return
        key = (child.id, parent.id)
        prior = found.get(key)
        if prior is None:
            found[key] = SemanticRelation(
                source=child.id, target=parent.id, rel_type=model.IS_A,
                confidence=confidence, evidence=(ev,),
            )
        else:
            found[key] = replace(
                prior,
                confidence=max(prior.confidence, confidence),
                evidence=tuple(sorted(set(prior.evidence) | {ev})),
            )

    compiled = [(p, p.slots(profile)) for p in patterns]
    for doc in docs:
        for sent_idx, sent in enumerate(doc.sentences):
            norms = [t.norm for t in sent]
            for pattern, slots in compiled:
                for binding in _match_pattern(slots, norms, index):
                    hypernym = binding.get("{X}")
                    hyponym = binding.get("{Y}")
                    if hypernym is None or hyponym is None:
                        continue
                    emit(
                        hyponym, hypernym, pattern_confidence,
                        Evidence(doc.doc_id, sent_idx, f"pattern:{pattern.id}"),
                    )

    seqs = {tuple(c.normalized_label.split()): c for c in concepts}
    for longer_seq, longer in sorted(seqs.items()):
        for shorter_seq, shorter in sorted(seqs.items()):
            if len(longer_seq) > len(shorter_seq) and longer_seq[-len(shorter_seq):] == shorter_seq:
                emit(longer, shorter, nesting_confidence, Evidence("", -1, "nesting"))

    return [found[k] for k in sorted(found)]


def extract_associative(
    graphs: Sequence[TextGraph],
    concepts: Sequence[Concept],
    params: ExtractionParams,
    taxonomic: Sequence[SemanticRelation] = (),
) -> list[SemanticRelation]:
    """associated_with relations by pointwise mutual information.

    A concept is mapped to its head lemma in the co-occurrence graph.  For a
    pair with joint count m, marginals na/nb and total events T:
    pmi = ln(m*T / (na*nb)), emitted when m >= min_pair_count and
    pmi >= pmi_threshold, with confidence pmi/ln(T) clamped to [0, 1].
    Pairs already linked hierarchically are skipped.
    """
    pair_counts, node_counts, total = aggregate_cooccurrence(graphs)
    if total == 0:
        return []
    linked = set()
    for r in taxonomic:
        if r.rel_type in model.HIERARCHICAL_TYPES:
            linked.add((r.source, r.target))
            linked.add((r.target, r.source))

    def head(c: Concept) -> str:
        return c.normalized_label.split()[-1]

    ordered = sorted(concepts, key=lambda c: c.normalized_label)
    out: list[SemanticRelation] = []
    for i, a in enumerate(ordered):
        for b in ordered[i + 1:]:
            if (a.id, b.id) in linked:
                continue
            ha, hb = head(a), head(b)
            if ha == hb:
                continue
            m = pair_counts.get((min(ha, hb), max(ha, hb)), 0)
            if m < params.min_pair_count:
                continue
            na, nb = node_counts.get(ha, 0), node_counts.get(hb, 0)
            pmi = math.log(m * total / (na * nb))
            if pmi < params.pmi_threshold:
                continue
            log_total = math.log(total)
            confidence = min(1.0, max(0.0, pmi / log_total)) if log_total > 0 else 0.0
            out.append(
                SemanticRelation(
                    source=a.id, target=b.id, rel_type=model.ASSOCIATED_WITH,
                    confidence=confidence,
                    evidence=(Evidence("", -1, f"pmi:{pmi:.6f}"),),
                )
            )
    return out


def pmi_score(pair_count: int, count_a: int, count_b: int, total: int) -> float:
    """Straight PMI over co-occurrence event counts."""
    if min(pair_count, count_a, count_b, total) <= 0:
        raise InvalidArgumentError("PMI needs positive counts")
    return math.log(pair_count * total / (count_a * count_b))


def attach_interpretations(
    concepts: Sequence[Concept], sources: Sequence[DictionarySource]
) -> list[Interpretation]:
    """One gloss per (concept, matching source), in source list order."""
    out = []
    for c in concepts:
        for src in sources:
            gloss = src.entries.get(c.normalized_label)
            if gloss:
                out.append(Interpretation(subject=c.id, gloss=gloss, source=src.id))
    return out


def parse_relation_target(target: str) -> tuple[str, str, str]:
    parts = target.split(RELATION_TARGET_SEP)
    if len(parts) != 3:
        raise InvalidArgumentError(f"relation target must be 'source|rel_type|target': {target!r}")
    return parts[0].strip(), parts[1].strip(), parts[2].strip()


def build_ontology(
    name: str,
    kind: str,
    concepts: Sequence[Concept],
    relations: Sequence[SemanticRelation],
    interpretations: Sequence[Interpretation] = (),
    decisions: Sequence[CurationDecision] = (),
    *,
    created_at: str = model.EPOCH,
    source_project: str = "",
) -> tuple[Ontology, list[str]]:
    """Assemble an ontology; returns it with a list of diagnostics.

    Relations are inserted in documented order (confidence descending, then
    lexicographic source/target/type) so the survivor of any cycle conflict
    is deterministic; dropped edges become diagnostics, never failures.
    The default hierarchy axioms are installed and the result always passes
    validation.
    """
    o = model.create_ontology(name, kind, created_at=created_at, source_project=source_project)
    for axiom in model.default_axioms():
        o = model.add_axiom(o, axiom)

    diagnostics: list[str] = []
    id_map: dict[str, str] = {}
    for c in sorted(concepts, key=lambda c: c.id):
        o, cid = model.add_concept(o, c.label, c.kind, c.provenance)
        id_map[c.id] = cid

    decision_map = effective_decisions(decisions)
    label_of = {c.id: c.normalized_label for c in concepts}

    def relation_decision(r: SemanticRelation) -> CurationDecision | None:
        src = label_of.get(r.source, r.source)
        tgt = label_of.get(r.target, r.target)
        target = RELATION_TARGET_SEP.join((src, r.rel_type, tgt))
        return decision_map.get(("relation", target))

    ordered = sorted(relations, key=lambda r: (-r.confidence, r.source, r.target, r.rel_type))
    for rel in ordered:
        d = relation_decision(rel)
        if d is not None and d.verdict == "reject":
            diagnostics.append(f"rejected by decision: {rel.source} -{rel.rel_type}-> {rel.target}")
            continue
        if d is not None and d.verdict == "retype" and d.new_rel_type:
            rel = replace(rel, rel_type=d.new_rel_type)
        if rel.source not in id_map or rel.target not in id_map:
            diagnostics.append(
                f"dropped relation with unpromoted endpoint: {rel.source} -{rel.rel_type}-> {rel.target}"
            )
            continue
        rel = replace(rel, source=id_map[rel.source], target=id_map[rel.target])
        try:
            o = model.add_relation(o, rel)
        except model.CycleViolationError as exc:
            diagnostics.append(f"dropped {rel.rel_type} {rel.source} -> {rel.target}: {exc.message}")
        except InvalidArgumentError as exc:
            diagnostics.append(f"dropped invalid relation {rel.source} -> {rel.target}: {exc.message}")

    for interp in interpretations:
        subject = id_map.get(interp.subject, interp.subject)
        try:
            o = model.add_interpretation(o, replace(interp, subject=subject))
        except model.UnknownConceptError as exc:
            diagnostics.append(f"dropped interpretation: {exc.message}")

    report = model.validate(o)
    if not report.ok:  # defensive; construction above should prevent this
        raise InvalidArgumentError(
            "assembled ontology failed validation: "
            + "; ".join(v.message for v in report.violations)
        )
    return o, diagnostics
