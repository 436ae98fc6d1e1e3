"""HTTP API for the curation loop.

JSON bodies mirror the XML payload schema.  Reads are served concurrently
with a running pipeline; mutations go through the project lock, so a second
iterate during an active run gets a busy error.
"""

from __future__ import annotations

import threading
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import interchange, orchestrator
from .errors import BusyError, InvalidArgumentError, OntoforgeError
from .extract import CurationDecision, DecisionSet
from .interchange import CandidateSet

_STATUS = {
    "not-found": 404,
    "invalid-argument": 400,
    "unknown-concept": 404,
    "busy-error": 409,
    "integrity-error": 422,
    "validation-error": 422,
    "parse-error": 422,
    "plan-error": 422,
    "empty-corpus": 409,
    "ingest-failure": 502,
}

_VERDICTS = ("accept", "reject", "rename", "retype")


class NotFoundError(OntoforgeError):
    code = "not-found"


def _pending_path(project: orchestrator.Project) -> Path:
    return project.root / "decisions" / "pending.xml"


def _read_pending(project: orchestrator.Project) -> list[CurationDecision]:
    path = _pending_path(project)
    if not path.exists():
        return []
    ds: DecisionSet = interchange.parse_expect(path.read_bytes(), interchange.PAYLOAD_DECISIONS)
    return list(ds.decisions)


def _write_pending(project: orchestrator.Project, decisions: list[CurationDecision]) -> None:
    path = _pending_path(project)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(
        interchange.serialize(DecisionSet(decisions=tuple(decisions)), producer="curation-api")
    )


def create_app(
    name: str, home: str | Path | None = None, ui_dir: str | Path | None = None
) -> FastAPI:
    app = FastAPI(title="ontoforge", version="1")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    def project() -> orchestrator.Project:
        return orchestrator.Project.open(name, home)

    @app.exception_handler(OntoforgeError)
    async def _onto_error(_request: Request, exc: OntoforgeError):
        return JSONResponse(
            status_code=_STATUS.get(exc.code, 500),
            content={"code": exc.code, "message": exc.message},
        )

    @app.get("/api/project")
    def project_state() -> dict[str, Any]:
        p = project()
        return {
            "name": p.name,
            "mode": p.mode,
            "goal": p.goal,
            "iteration": p.iteration,
            "busy": (p.root / ".lock").exists(),
            "stages": {
                stage: {"status": st.status, "detail": st.detail}
                for stage, st in p.states_for().items()
            },
            "events": [e.__dict__ for e in p.events()],
        }

    def _candidate_rows(p: orchestrator.Project, iteration: int) -> list[dict[str, Any]]:
        path = p.artifact_path("score", iteration)
        cset: CandidateSet = interchange.parse_expect(
            path.read_bytes(), interchange.PAYLOAD_CANDIDATES
        )
        persisted = p.effective_decisions(up_to_iteration=p.iteration + 1)
        pending = _read_pending(p)
        from .extract import effective_decisions

        verdicts = effective_decisions(list(persisted) + pending)
        corpus = p.store().load()
        rows = []
        for rank, cand in enumerate(cset.ranked(), start=1):
            decision = verdicts.get(("term", cand.lemma))
            snippets = []
            for occ in cand.occurrences[:3]:
                doc = corpus.documents.get(occ.doc)
                if doc is not None:
                    lo = max(0, occ.start - 40)
                    hi = min(len(doc.text), occ.end + 40)
                    snippets.append(doc.text[lo:hi].replace("\n", " ").strip())
            rows.append(
                {
                    "rank": rank,
                    "lemma": cand.lemma,
                    "surface": cand.surface_example,
                    "freq": cand.freq,
                    "doc_freq": cand.doc_freq,
                    "scores": cand.scores or {},
                    "verdict": decision.verdict if decision else None,
                    "new_label": decision.new_label if decision else None,
                    "snippets": snippets,
                }
            )
        return rows

    @app.get("/api/candidates")
    def candidates(iteration: int | None = None) -> dict[str, Any]:
        p = project()
        it = p.iteration if iteration is None else iteration
        path = p.artifact_path("score", it)
        if not path.exists():
            raise NotFoundError(f"no scored candidates for iteration {it}")
        return {"iteration": it, "candidates": _candidate_rows(p, it)}

    def _ontology_for(p: orchestrator.Project, iteration: int):
        stage = "integrate" if p.goal == "integrated" else "assemble"
        path = p.artifact_path(stage, iteration)
        if not path.exists():
            path = p.artifact_path("assemble", iteration)
        if not path.exists():
            raise NotFoundError(f"no assembled ontology for iteration {iteration}")
        return interchange.parse_expect(path.read_bytes(), interchange.PAYLOAD_ONTOLOGY)

    @app.get("/api/ontology")
    def ontology(iteration: int | None = None) -> dict[str, Any]:
        p = project()
        it = p.iteration if iteration is None else iteration
        o = _ontology_for(p, it)
        return {
            "iteration": it,
            "name": o.name,
            "kind": o.kind,
            "created_at": o.meta.created_at,
            "concepts": [
                {
                    "id": c.id,
                    "label": c.label,
                    "normalized_label": c.normalized_label,
                    "kind": c.kind,
                }
                for c in (o.concepts[k] for k in sorted(o.concepts))
            ],
            "relations": [
                {
                    "source": r.source,
                    "target": r.target,
                    "rel_type": r.rel_type,
                    "confidence": r.confidence,
                }
                for r in (o.relations[k] for k in sorted(o.relations))
            ],
            "interpretations": [
                {"subject": i.subject, "gloss": i.gloss, "source": i.source}
                for i in o.interpretations
            ],
            "axioms": [
                {"id": a.id, "form": a.form, "body": a.body_kind, "rel_type": a.rel_type}
                for a in (o.axioms[k] for k in sorted(o.axioms))
            ],
        }

    @app.get("/api/graph")
    def graph(iteration: int | None = None) -> dict[str, Any]:
        p = project()
        it = p.iteration if iteration is None else iteration
        o = _ontology_for(p, it)
        payload = interchange.graph_json(o)
        payload["iteration"] = it
        return payload

    @app.post("/api/decisions")
    def post_decisions(body: dict[str, Any]) -> dict[str, Any]:
        p = project()
        raw = body.get("decisions")
        if not isinstance(raw, list) or not raw:
            raise InvalidArgumentError("body must carry a non-empty 'decisions' list")
        incoming = []
        for item in raw:
            verdict = item.get("verdict")
            if verdict not in _VERDICTS:
                raise InvalidArgumentError(f"unknown verdict {verdict!r}")
            target = item.get("target")
            kind = item.get("target_kind", "term")
            if not target or kind not in ("term", "relation"):
                raise InvalidArgumentError("decision needs a target and a valid target_kind")
            incoming.append(
                CurationDecision(
                    target_kind=kind,
                    target=target,
                    verdict=verdict,
                    new_label=item.get("new_label"),
                    new_kind=item.get("new_kind"),
                    new_rel_type=item.get("new_rel_type"),
                    author=item.get("author", "ui"),
                    iteration=p.iteration + 1,
                )
            )
        pending = _read_pending(p)
        by_target = {(d.target_kind, d.target): d for d in pending}
        for d in incoming:
            by_target[(d.target_kind, d.target)] = d
        merged = [by_target[k] for k in sorted(by_target)]
        _write_pending(p, merged)
        return {"accepted": len(incoming), "pending": len(merged)}

    @app.post("/api/iterate")
    def post_iterate(body: dict[str, Any] | None = None) -> dict[str, Any]:
        p = project()
        if (p.root / ".lock").exists():
            raise BusyError("a pipeline run is already in progress")
        pending = _read_pending(p)
        new_iteration = p.iteration + 1

        def work():
            proj = orchestrator.Project.open(name, home)
            try:
                orchestrator.iterate(proj, pending)
            except Exception as exc:  # surfaced via events; thread must not die loudly
                proj.emit("iterate", "failed", getattr(exc, "message", str(exc)))

        path = _pending_path(p)
        if path.exists():
            path.unlink()
        thread = threading.Thread(target=work, name=f"iterate-{name}", daemon=True)
        thread.start()
        return {"iteration": new_iteration, "status": "started", "decisions": len(pending)}

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
