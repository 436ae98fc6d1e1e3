"""Headless pipeline control: projects, the stage DAG, resumable runs, the
iterative curation loop, and the knowledge-base directory.

Stages exchange envelopes through a project-local bus directory
(``bus/iter-<n>/<stage>.xml``); a single-writer lock file serializes runs,
and progress events append to a JSONL log with monotonic timestamps.
"""

from __future__ import annotations

import json
import os
import shutil
from dataclasses import dataclass, field
from dataclasses import replace as dc_replace
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Sequence

from . import corpus as corpus_mod
from . import extract, integrate, interchange, model, textproc
from .errors import BusyError, InvalidArgumentError, PlanError
from .extract import CurationDecision, DecisionSet
from .interchange import CandidateSet, Report
from .profiles import LanguageProfile, builtin_profile, load_profile

DEFAULT_HOME = "~/.ontoforge"
HOME_ENV = "ONTOFORGE_HOME"

PENDING = "pending"
RUNNING = "running"
DONE = "done"
FAILED = "failed"

DOMAIN_STAGES = (
    "ingest",
    "analyze",
    "candidates",
    "score",
    "graph",
    "taxonomic",
    "associative",
    "assemble",
)

DEFAULT_CONFIG: dict[str, Any] = {
    "mode": "accumulate",  # accumulate | process
    "goal": "domain",  # domain | integrated
    "language": "en",
    "profile": None,  # optional path to a custom profile file
    "sources": [],
    "allowed_hosts": [],
    "seed_terms": [],
    "min_relevance": 0.0,
    "max_ngram": 3,
    "window": 2,
    "top_k_terms": 30,
    "pmi_threshold": 0.0,
    "min_pair_count": 2,
    "pattern_file": None,
    "dictionaries": [],
    "confidence_pattern": extract.PATTERN_CONFIDENCE,
    "confidence_nesting": extract.NESTING_CONFIDENCE,
    "align_threshold": 0.5,
    "integrate_with": None,  # kb ontology name for goal=integrated
}


def projects_home(home: str | Path | None = None) -> Path:
    if home is not None:
        return Path(home)
    return Path(os.environ.get(HOME_ENV, os.path.expanduser(DEFAULT_HOME)))


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


def _atomic_write(path: Path, data: bytes) -> None:
    """Readers concurrent with a writer must never see partial content."""
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


@dataclass(frozen=True)
class ProgressEvent:
    project: str
    stage: str
    status: str
    at: str
    detail: str = ""


@dataclass
class StageState:
    status: str = PENDING
    artifact: str = ""
    detail: str = ""


class Project:
    """On-disk project: config.json, state.json, corpus store, bus, kb."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.name = self.root.name
        self.config: dict[str, Any] = dict(DEFAULT_CONFIG)
        self.iteration = 0
        self.stage_states: dict[int, dict[str, StageState]] = {}
        if (self.root / "config.json").exists():
            self._load()
        else:
            raise InvalidArgumentError(f"no project at {self.root}")

    # -- creation / persistence ------------------------------------------

    @classmethod
    def create(
        cls, name: str, home: str | Path | None = None, config: dict[str, Any] | None = None
    ) -> "Project":
        if not name or "/" in name or name.startswith("."):
            raise InvalidArgumentError(f"bad project name {name!r}")
        root = projects_home(home) / name
        if (root / "config.json").exists():
            raise InvalidArgumentError(f"project {name!r} already exists at {root}")
        root.mkdir(parents=True, exist_ok=True)
        merged = dict(DEFAULT_CONFIG)
        merged.update(config or {})
        _atomic_write(
            root / "config.json",
            (json.dumps(merged, ensure_ascii=False, indent=2, sort_keys=True) + "\n").encode("utf-8"),
        )
        project = cls(root)
        project.save()
        return project

    @classmethod
    def open(cls, name: str, home: str | Path | None = None) -> "Project":
        return cls(projects_home(home) / name)

    def _load(self) -> None:
        self.config = dict(DEFAULT_CONFIG)
        self.config.update(json.loads((self.root / "config.json").read_text(encoding="utf-8")))
        state_path = self.root / "state.json"
        if state_path.exists():
            raw = json.loads(state_path.read_text(encoding="utf-8"))
            self.iteration = raw.get("iteration", 0)
            self.stage_states = {
                int(it): {s: StageState(**st) for s, st in stages.items()}
                for it, stages in raw.get("stage_states", {}).items()
            }

    def save(self) -> None:
        raw = {
            "iteration": self.iteration,
            "stage_states": {
                str(it): {
                    s: {"status": st.status, "artifact": st.artifact, "detail": st.detail}
                    for s, st in stages.items()
                }
                for it, stages in self.stage_states.items()
            },
        }
        _atomic_write(
            self.root / "state.json",
            (json.dumps(raw, ensure_ascii=False, indent=2, sort_keys=True) + "\n").encode("utf-8"),
        )

    def save_config(self) -> None:
        _atomic_write(
            self.root / "config.json",
            (json.dumps(self.config, ensure_ascii=False, indent=2, sort_keys=True) + "\n").encode("utf-8"),
        )

    # -- layout -----------------------------------------------------------

    @property
    def mode(self) -> str:
        return self.config.get("mode", "accumulate")

    @property
    def goal(self) -> str:
        return self.config.get("goal", "domain")

    def bus_dir(self, iteration: int | None = None) -> Path:
        it = self.iteration if iteration is None else iteration
        return self.root / "bus" / f"iter-{it}"

    def artifact_path(self, stage: str, iteration: int | None = None) -> Path:
        return self.bus_dir(iteration) / f"{stage}.xml"

    def kb_dir(self) -> Path:
        return self.root / "kb"

    def decisions_path(self, iteration: int) -> Path:
        return self.root / "decisions" / f"iter-{iteration}.xml"

    def store(self) -> corpus_mod.CorpusStore:
        return corpus_mod.CorpusStore(self.root, self.name)

    def states_for(self, iteration: int | None = None) -> dict[str, StageState]:
        it = self.iteration if iteration is None else iteration
        return self.stage_states.setdefault(it, {})

    def stage_state(self, stage: str, iteration: int | None = None) -> StageState:
        return self.states_for(iteration).setdefault(stage, StageState())

    # -- events -----------------------------------------------------------

    def events_path(self) -> Path:
        return self.root / "events.jsonl"

    def events(self) -> list[ProgressEvent]:
        path = self.events_path()
        if not path.exists():
            return []
        out = []
        for line in path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            try:
                out.append(ProgressEvent(**json.loads(line)))
            except (json.JSONDecodeError, TypeError):
                continue  # a concurrent append may leave a torn final line
        return out

    def emit(self, stage: str, status: str, detail: str = "") -> ProgressEvent:
        # timestamps stay strictly monotonic per project even if the wall
        # clock repeats at microsecond resolution
        last = ""
        path = self.events_path()
        if path.exists():
            lines = path.read_text(encoding="utf-8").splitlines()
            if lines:
                last = json.loads(lines[-1]).get("at", "")
        at = _now_iso()
        if at <= last:
            at = last + "0"
        event = ProgressEvent(project=self.name, stage=stage, status=status, at=at, detail=detail)
        with path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(event.__dict__, ensure_ascii=False) + "\n")
        return event

    # -- decisions ---------------------------------------------------------

    def record_decisions(self, decisions: Sequence[CurationDecision], iteration: int) -> Path:
        stamped = tuple(
            dc_replace(d, iteration=iteration, at=d.at or _now_iso()) for d in decisions
        )
        path = self.decisions_path(iteration)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = DecisionSet(decisions=stamped)
        if path.exists():
            prior = interchange.parse_expect(path.read_bytes(), interchange.PAYLOAD_DECISIONS)
            payload = DecisionSet(decisions=prior.decisions + stamped)
        path.write_bytes(interchange.serialize(payload, producer="orchestrator"))
        return path

    def effective_decisions(self, up_to_iteration: int | None = None) -> list[CurationDecision]:
        limit = self.iteration if up_to_iteration is None else up_to_iteration
        pooled: list[CurationDecision] = []
        ddir = self.root / "decisions"
        if ddir.is_dir():
            for path in sorted(ddir.glob("iter-*.xml")):
                it = int(path.stem.split("-")[1])
                if it <= limit:
                    ds = interchange.parse_expect(path.read_bytes(), interchange.PAYLOAD_DECISIONS)
                    pooled.extend(ds.decisions)
        merged = extract.effective_decisions(pooled)
        return [merged[k] for k in sorted(merged)]


class _Lock:
    """Single-writer-per-project lock file."""

    def __init__(self, project: Project):
        self.path = project.root / ".lock"

    def __enter__(self):
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise BusyError(f"project is locked by another run ({self.path})") from None
        with os.fdopen(fd, "w") as fh:
            fh.write(str(os.getpid()))
        return self

    def __exit__(self, *exc):
        try:
            self.path.unlink()
        except FileNotFoundError:
            pass
        return False


# ---------------------------------------------------------------------------
# stage context and implementations


class RunContext:
    """Per-run cache of corpus, tokenization and configuration objects."""

    def __init__(self, project: Project):
        self.project = project
        self._cache: dict[str, Any] = {}

    def profile(self) -> LanguageProfile:
        if "profile" not in self._cache:
            custom = self.project.config.get("profile")
            if custom:
                self._cache["profile"] = load_profile(self.project.root / custom)
            else:
                self._cache["profile"] = builtin_profile(self.project.config.get("language", "en"))
        return self._cache["profile"]

    def corpus(self) -> corpus_mod.Corpus:
        if "corpus" not in self._cache:
            self._cache["corpus"] = self.project.store().load()
        return self._cache["corpus"]

    def selected_documents(self) -> list[corpus_mod.Document]:
        if "selected" not in self._cache:
            c = self.corpus()
            seeds = self.project.config.get("seed_terms") or []
            min_rel = float(self.project.config.get("min_relevance") or 0.0)
            if seeds and min_rel > 0.0:
                picked = [d for d, _ in corpus_mod.relevance_filter(c, seeds, min_rel)]
            else:
                picked = [c.documents[k] for k in sorted(c.documents)]
            self._cache["selected"] = picked
        return self._cache["selected"]

    def tokenized(self) -> list[textproc.TokenizedDoc]:
        if "tokenized" not in self._cache:
            prof = self.profile()
            self._cache["tokenized"] = [
                textproc.analyze(d, prof) for d in self.selected_documents()
            ]
        return self._cache["tokenized"]

    def patterns(self) -> tuple[extract.Pattern, ...]:
        if "patterns" not in self._cache:
            custom = self.project.config.get("pattern_file")
            if custom:
                self._cache["patterns"] = extract.load_patterns(self.project.root / custom)
            else:
                self._cache["patterns"] = extract.builtin_patterns()
        return self._cache["patterns"]

    def dictionaries(self) -> list[extract.DictionarySource]:
        if "dictionaries" not in self._cache:
            self._cache["dictionaries"] = [
                extract.load_dictionary(self.project.root / p, self.profile())
                for p in self.project.config.get("dictionaries") or []
            ]
        return self._cache["dictionaries"]

    def params(self) -> extract.ExtractionParams:
        cfg = self.project.config
        return extract.ExtractionParams(
            top_k_terms=int(cfg.get("top_k_terms", 30)),
            pmi_threshold=float(cfg.get("pmi_threshold", 0.0)),
            min_pair_count=int(cfg.get("min_pair_count", 2)),
            pattern_confidence=float(cfg.get("confidence_pattern", extract.PATTERN_CONFIDENCE)),
            nesting_confidence=float(cfg.get("confidence_nesting", extract.NESTING_CONFIDENCE)),
            decisions=tuple(self.project.effective_decisions()),
        )

    def created_at(self) -> str:
        stamps = [d.fetched_at for d in self.selected_documents() if d.fetched_at]
        return max(stamps) if stamps else model.EPOCH

    def artifact(self, stage: str) -> Any:
        path = self.project.artifact_path(stage)
        return interchange.parse(path.read_bytes())

    def promoted_concepts(self) -> list[model.Concept]:
        cset: CandidateSet = self.artifact("score")
        return extract.promote_concepts(cset.ranked(), self.params(), self.profile())


def _stage_ingest(ctx: RunContext) -> tuple[Any, str]:
    project = ctx.project
    store = project.store()
    sources = [str(project.root / s) if not os.path.isabs(s) and "://" not in s else s
               for s in project.config.get("sources") or []]
    detail_parts = []
    if sources:
        try:
            result = store.ingest(sources, allowed_hosts=project.config.get("allowed_hosts"))
            detail_parts.append(
                f"added={len(result.added)} duplicates={len(result.duplicates)} failed={len(result.failures)}"
            )
            for src, reason in result.failures:
                detail_parts.append(f"failed {src}: {reason}")
        except corpus_mod.IngestFailureError as exc:
            if not store.manifest().entries:
                raise
            detail_parts.append(f"all sources failed ({len(exc.causes)}); existing corpus kept")
    manifest = store.manifest()
    if not manifest.entries:
        raise InvalidArgumentError("corpus is empty and no ingestible sources are configured")
    ctx._cache.pop("corpus", None)
    ctx._cache.pop("selected", None)
    ctx._cache.pop("tokenized", None)
    store.write_index(corpus_mod.index_corpus(store.load()))
    return manifest, "; ".join(detail_parts) or f"{len(manifest.entries)} documents"


def _stage_analyze(ctx: RunContext) -> tuple[Any, str]:
    docs = ctx.tokenized()
    entries = tuple(
        {
            "doc": d.doc_id,
            "sentences": str(len(d.sentences)),
            "tokens": str(sum(len(s) for s in d.sentences)),
        }
        for d in sorted(docs, key=lambda d: d.doc_id)
    )
    report = Report(
        name="analysis",
        meta={"profile": ctx.profile().name, "documents": str(len(docs))},
        entries=entries,
    )
    return report, f"{len(docs)} documents tokenized"


def _stage_candidates(ctx: RunContext) -> tuple[Any, str]:
    cands = textproc.extract_candidates(ctx.tokenized(), int(ctx.project.config.get("max_ngram", 3)))
    cset = CandidateSet(project=ctx.project.name, items={c.lemma: c for c in cands})
    return cset, f"{len(cands)} candidates"


def _stage_score(ctx: RunContext) -> tuple[Any, str]:
    cset: CandidateSet = ctx.artifact("candidates")
    scored = textproc.score_candidates(list(cset.items.values()), max(1, len(ctx.selected_documents())))
    out = CandidateSet(project=cset.project, items={c.lemma: c for c in scored})
    return out, f"{len(scored)} candidates scored"


def _stage_graph(ctx: RunContext) -> tuple[Any, str]:
    window = int(ctx.project.config.get("window", 2))
    entries = []
    for doc in ctx.tokenized():
        g = textproc.build_text_graph(doc, window)
        for (a, b), count in sorted(g.edges.items()):
            entries.append({"a": a, "b": b, "count": str(count), "doc": doc.doc_id})
    entries.sort(key=lambda e: (e["doc"], e["a"], e["b"]))
    report = Report(name="text-graphs", meta={"window": str(window)}, entries=tuple(entries))
    return report, f"{len(entries)} co-occurrence edges"


def _graphs_from_report(report: Report) -> list[textproc.TextGraph]:
    by_doc: dict[str, dict[tuple[str, str], int]] = {}
    for e in report.entries:
        by_doc.setdefault(e["doc"], {})[(e["a"], e["b"])] = int(e["count"])
    return [
        textproc.TextGraph(
            doc_id=doc,
            nodes=frozenset(n for pair in edges for n in pair),
            edges=edges,
        )
        for doc, edges in sorted(by_doc.items())
    ]


def _stage_taxonomic(ctx: RunContext) -> tuple[Any, str]:
    params = ctx.params()
    concepts = ctx.promoted_concepts()
    relations = extract.extract_taxonomic(
        ctx.tokenized(),
        concepts,
        ctx.patterns(),
        ctx.profile(),
        pattern_confidence=params.pattern_confidence,
        nesting_confidence=params.nesting_confidence,
    ) if concepts else []
    onto, diags = extract.build_ontology(
        f"{ctx.project.name}-taxonomic",
        "domain",
        concepts,
        relations,
        created_at=ctx.created_at(),
        source_project=ctx.project.name,
    )
    detail = f"{len(onto.concepts)} concepts, {len(onto.relations)} is_a relations"
    if diags:
        detail += "; " + "; ".join(diags)
    return onto, detail


def _stage_associative(ctx: RunContext) -> tuple[Any, str]:
    taxonomic: model.Ontology = ctx.artifact("taxonomic")
    graphs = _graphs_from_report(ctx.artifact("graph"))
    concepts = [taxonomic.concepts[k] for k in sorted(taxonomic.concepts)]
    relations = extract.extract_associative(
        graphs, concepts, ctx.params(), taxonomic=list(taxonomic.relations.values())
    ) if concepts else []
    onto, diags = extract.build_ontology(
        f"{ctx.project.name}-associative",
        "domain",
        concepts,
        relations,
        created_at=ctx.created_at(),
        source_project=ctx.project.name,
    )
    detail = f"{len(onto.relations)} associative relations"
    if diags:
        detail += "; " + "; ".join(diags)
    return onto, detail


def _stage_assemble(ctx: RunContext) -> tuple[Any, str]:
    taxonomic: model.Ontology = ctx.artifact("taxonomic")
    associative: model.Ontology = ctx.artifact("associative")
    concepts = [taxonomic.concepts[k] for k in sorted(taxonomic.concepts)]
    for cid in sorted(associative.concepts):
        if cid not in taxonomic.concepts:
            concepts.append(associative.concepts[cid])
    relations = list(taxonomic.relations.values()) + list(associative.relations.values())
    interps = extract.attach_interpretations(concepts, ctx.dictionaries())
    onto, diags = extract.build_ontology(
        ctx.project.name,
        "domain",
        concepts,
        relations,
        interpretations=interps,
        decisions=tuple(ctx.project.effective_decisions()),
        created_at=ctx.created_at(),
        source_project=ctx.project.name,
    )
    kb = ctx.project.kb_dir()
    kb.mkdir(parents=True, exist_ok=True)
    (kb / f"{ctx.project.name}.xml").write_bytes(
        interchange.serialize(onto, producer="orchestrator")
    )
    detail = f"|X|={len(onto.concepts)} |R|={len(onto.relations)} |F|={len(onto.interpretations)}"
    if diags:
        detail += "; " + "; ".join(diags)
    return onto, detail


def _stage_integrate(ctx: RunContext) -> tuple[Any, str]:
    own: model.Ontology = ctx.artifact("assemble")
    other_name = ctx.project.config.get("integrate_with")
    other_path = ctx.project.kb_dir() / f"{other_name}.xml"
    if not other_path.exists():
        raise InvalidArgumentError(f"stored ontology {other_name!r} not found in kb/")
    other: model.Ontology = interchange.parse_expect(
        other_path.read_bytes(), interchange.PAYLOAD_ONTOLOGY
    )
    threshold = float(ctx.project.config.get("align_threshold", 0.5))
    amap = integrate.align(own, other, threshold)
    merged, diags = integrate.merge(own, other, amap)
    kb = ctx.project.kb_dir()
    kb.mkdir(parents=True, exist_ok=True)
    (kb / f"{merged.name}.xml").write_bytes(interchange.serialize(merged, producer="orchestrator"))
    detail = f"aligned {len(amap.pairs)} pairs; |X|={len(merged.concepts)}"
    if diags:
        detail += "; " + "; ".join(diags)
    return merged, detail


@dataclass(frozen=True)
class StageSpec:
    id: str
    deps: tuple[str, ...]
    inputs: tuple[str, ...]
    output: str
    fn: Callable[[RunContext], tuple[Any, str]] = field(compare=False)


def build_registry() -> dict[str, StageSpec]:
    """The fixed stage DAG with payload typing for plan verification."""
    specs = [
        StageSpec("ingest", (), (), interchange.PAYLOAD_MANIFEST, _stage_ingest),
        StageSpec("analyze", ("ingest",), (interchange.PAYLOAD_MANIFEST,), interchange.PAYLOAD_REPORT, _stage_analyze),
        StageSpec("candidates", ("analyze",), (interchange.PAYLOAD_MANIFEST, interchange.PAYLOAD_REPORT), interchange.PAYLOAD_CANDIDATES, _stage_candidates),
        StageSpec("score", ("candidates",), (interchange.PAYLOAD_CANDIDATES,), interchange.PAYLOAD_CANDIDATES, _stage_score),
        StageSpec("graph", ("score",), (interchange.PAYLOAD_MANIFEST, interchange.PAYLOAD_REPORT), interchange.PAYLOAD_REPORT, _stage_graph),
        StageSpec("taxonomic", ("score",), (interchange.PAYLOAD_CANDIDATES,), interchange.PAYLOAD_ONTOLOGY, _stage_taxonomic),
        StageSpec("associative", ("graph", "taxonomic"), (interchange.PAYLOAD_REPORT, interchange.PAYLOAD_ONTOLOGY), interchange.PAYLOAD_ONTOLOGY, _stage_associative),
        StageSpec("assemble", ("taxonomic", "associative"), (interchange.PAYLOAD_ONTOLOGY,), interchange.PAYLOAD_ONTOLOGY, _stage_assemble),
        StageSpec("integrate", ("assemble",), (interchange.PAYLOAD_ONTOLOGY,), interchange.PAYLOAD_ONTOLOGY, _stage_integrate),
    ]
    return {s.id: s for s in specs}


def _ancestors(registry: dict[str, StageSpec], stage: str) -> set[str]:
    out: set[str] = set()
    frontier = list(registry[stage].deps)
    while frontier:
        node = frontier.pop()
        if node in out:
            continue
        out.add(node)
        frontier.extend(registry[node].deps)
    return out


def plan(project: Project, registry: dict[str, StageSpec] | None = None) -> list[str]:
    """Topological stage order for the project's goal, ties broken by id.

    Verifies every stage is bound and that each stage's declared inputs are
    produced by its (transitive) predecessors.
    """
    registry = registry if registry is not None else build_registry()
    goal = project.goal
    if goal == "domain":
        wanted = list(DOMAIN_STAGES)
    elif goal == "integrated":
        if project.mode != "process":
            raise PlanError("goal 'integrated' merges stored ontologies and needs 'process' mode")
        if not project.config.get("integrate_with"):
            raise PlanError(
                "goal 'integrated' needs a second source ontology; set integrate_with"
            )
        wanted = list(DOMAIN_STAGES) + ["integrate"]
    else:
        raise PlanError(f"unknown goal {goal!r}")

    for stage in wanted:
        if stage not in registry:
            raise PlanError(f"no module binding registered for stage {stage!r}")

    for stage in wanted:
        spec = registry[stage]
        produced = {registry[a].output for a in _ancestors(registry, stage) if a in registry}
        for needed in spec.inputs:
            if needed not in produced:
                producers = {a: registry[a].output for a in sorted(_ancestors(registry, stage))}
                raise PlanError(
                    f"type mismatch: stage {stage!r} needs input {needed!r} but its "
                    f"predecessors produce {producers}"
                )

    order: list[str] = []
    placed: set[str] = set()
    remaining = set(wanted)
    while remaining:
        ready = sorted(s for s in remaining if all(d in placed for d in registry[s].deps))
        if not ready:
            raise PlanError(f"stage dependency cycle among {sorted(remaining)}")
        stage = ready[0]  # deterministic tie-break by stage id
        order.append(stage)
        placed.add(stage)
        remaining.discard(stage)
    return order


def run(
    project: Project,
    stage_plan: Sequence[str] | None = None,
    *,
    force: bool = False,
    registry: dict[str, StageSpec] | None = None,
) -> Project:
    """Execute pending stages in plan order over the bus directory.

    Done stages are skipped (their artifacts are reused byte-identically);
    a failing stage halts its successors but keeps completed artifacts.  A
    concurrent run on the same project raises BusyError.
    """
    registry = registry if registry is not None else build_registry()
    order = list(stage_plan) if stage_plan is not None else plan(project, registry)
    with _Lock(project):
        states = project.states_for()
        if force:
            for stage in order:
                states[stage] = StageState()
            project.save()
        ctx = RunContext(project)
        for stage in order:
            state = project.stage_state(stage)
            if state.status == DONE and project.artifact_path(stage).exists():
                continue
            state.status = RUNNING
            state.detail = ""
            project.save()
            project.emit(stage, RUNNING)
            try:
                entity, detail = registry[stage].fn(ctx)
                path = project.artifact_path(stage)
                path.parent.mkdir(parents=True, exist_ok=True)
                _atomic_write(path, interchange.serialize(entity, producer=f"stage:{stage}"))
                state.status = DONE
                state.artifact = str(path.relative_to(project.root))
                state.detail = detail
                project.save()
                project.emit(stage, DONE, detail)
            except Exception as exc:
                diagnostic = getattr(exc, "message", str(exc))
                state.status = FAILED
                state.detail = diagnostic
                project.save()
                project.emit(stage, FAILED, diagnostic)
                break
    return project


def iterate(
    project: Project,
    decisions: Sequence[CurationDecision],
    *,
    registry: dict[str, StageSpec] | None = None,
) -> Project:
    """Start the next curation iteration: persist decisions, reuse the corpus
    stages, and re-run everything from candidates onward."""
    if (project.root / ".lock").exists():
        raise BusyError("a pipeline run is already in progress")
    done_assemble = any(
        states.get("assemble") and states["assemble"].status == DONE
        for states in project.stage_states.values()
    )
    if not done_assemble:
        raise InvalidArgumentError("iterate requires at least one completed assemble stage")

    new_iteration = project.iteration + 1
    known = _known_targets(project)
    for d in decisions:
        if known is not None and (d.target_kind, d.target) not in known:
            project.emit(
                "iterate",
                "warning",
                f"decision targets unknown {d.target_kind} {d.target!r}; it will not apply",
            )
    project.record_decisions(decisions, new_iteration)

    old_bus = project.bus_dir(project.iteration)
    new_bus = project.bus_dir(new_iteration)
    new_bus.mkdir(parents=True, exist_ok=True)
    reused = ("ingest", "analyze")
    new_states: dict[str, StageState] = {}
    for stage in reused:
        src = old_bus / f"{stage}.xml"
        if src.exists():
            shutil.copyfile(src, new_bus / f"{stage}.xml")
            old_state = project.stage_state(stage)
            new_states[stage] = StageState(
                status=DONE, artifact=str((new_bus / f"{stage}.xml").relative_to(project.root)),
                detail=old_state.detail,
            )
    project.iteration = new_iteration
    project.stage_states[new_iteration] = new_states
    project.save()
    project.emit("iterate", "started", f"iteration {new_iteration}")
    return run(project, registry=registry)


def _known_targets(project: Project) -> set[tuple[str, str]] | None:
    """Targets decisions may reference: candidate lemmas and extracted
    relation triples of the current iteration (None if not yet available)."""
    score_path = project.artifact_path("score")
    if not score_path.exists():
        return None
    cset: CandidateSet = interchange.parse_expect(
        score_path.read_bytes(), interchange.PAYLOAD_CANDIDATES
    )
    known = {("term", lemma) for lemma in cset.items}
    for stage in ("taxonomic", "associative", "assemble"):
        path = project.artifact_path(stage)
        if not path.exists():
            continue
        onto: model.Ontology = interchange.parse_expect(
            path.read_bytes(), interchange.PAYLOAD_ONTOLOGY
        )
        labels = {cid: c.normalized_label for cid, c in onto.concepts.items()}
        for r in onto.relations.values():
            triple = extract.RELATION_TARGET_SEP.join(
                (labels[r.source], r.rel_type, labels[r.target])
            )
            known.add(("relation", triple))
    return known


# ---------------------------------------------------------------------------
# kb-level operations (process mode)


def merge_stored(
    project: Project, name_a: str, name_b: str, threshold: float | None = None
) -> tuple[model.Ontology, list[str]]:
    """Align and merge two ontologies from the project knowledge base."""
    if project.mode != "process":
        raise InvalidArgumentError(
            "merge over the knowledge base requires a project in 'process' mode"
        )
    kb = project.kb_dir()
    onts = []
    for name in (name_a, name_b):
        path = kb / f"{name}.xml"
        if not path.exists():
            raise InvalidArgumentError(f"stored ontology {name!r} not found in kb/")
        onts.append(interchange.parse_expect(path.read_bytes(), interchange.PAYLOAD_ONTOLOGY))
    thr = threshold if threshold is not None else float(project.config.get("align_threshold", 0.5))
    amap = integrate.align(onts[0], onts[1], thr)
    merged, diags = integrate.merge(onts[0], onts[1], amap)
    out = kb / f"{merged.name}.xml"
    out.write_bytes(interchange.serialize(merged, producer="ontology-integration"))
    return merged, diags


def export_artifact(project: Project, fmt: str, iteration: int | None = None) -> bytes:
    """Final assembled (or integrated) ontology in xml or ttl form."""
    stage = "integrate" if project.goal == "integrated" else "assemble"
    path = project.artifact_path(stage, iteration)
    if not path.exists():
        path = project.artifact_path("assemble", iteration)
    if not path.exists():
        raise InvalidArgumentError("no assembled ontology artifact to export; run the pipeline first")
    data = path.read_bytes()
    if fmt == "xml":
        return data
    if fmt == "ttl":
        onto = interchange.parse_expect(data, interchange.PAYLOAD_ONTOLOGY)
        return interchange.export_triples(onto)
    raise InvalidArgumentError(f"unknown export format {fmt!r}")


# ---------------------------------------------------------------------------
# demo project seeding


def seed_demo(name: str, home: str | Path | None = None) -> Project:
    """Create a project preloaded with the shipped demo corpus and dictionary."""
    demo_dir = resources.files("ontoforge.data.demo")
    project = Project.create(
        name,
        home,
        config={
            "language": "en",
            "top_k_terms": 40,
            "min_pair_count": 2,
            "pmi_threshold": 0.0,
            "dictionaries": ["import/glossary.tsv"],
        },
    )
    import_dir = project.root / "import"
    import_dir.mkdir(parents=True, exist_ok=True)
    sources = []
    for item in sorted(demo_dir.iterdir(), key=lambda t: t.name):
        if item.name.endswith(".txt"):
            target = import_dir / item.name
            target.write_text(item.read_text(encoding="utf-8"), encoding="utf-8")
            sources.append(f"import/{item.name}")
    glossary = resources.files("ontoforge.data.dictionaries").joinpath("demo-glossary.tsv")
    (import_dir / "glossary.tsv").write_text(glossary.read_text(encoding="utf-8"), encoding="utf-8")
    project.config["sources"] = sources
    project.save_config()
    return project
