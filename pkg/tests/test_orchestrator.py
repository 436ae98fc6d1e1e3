"""Project lifecycle, planning, resumable runs, the curation iteration."""

from __future__ import annotations

import hashlib
import json

import pytest

from ontoforge import interchange, model, orchestrator
from ontoforge.errors import BusyError, InvalidArgumentError, PlanError
from ontoforge.extract import CurationDecision
from ontoforge.orchestrator import (
    DONE,
    FAILED,
    PENDING,
    Project,
    StageSpec,
    build_registry,
    iterate,
    plan,
    run,
    seed_demo,
)


@pytest.fixture()
def home(tmp_path):
    return tmp_path / "projects"


def make_project(home, name="proj", texts=("alpha beta. beta gamma.", "alpha beta again."), **cfg):
    src_dir = home / "sources"
    src_dir.mkdir(parents=True, exist_ok=True)
    sources = []
    for i, text in enumerate(texts):
        p = src_dir / f"{name}-{i}.txt"
        p.write_text(text, encoding="utf-8")
        sources.append(str(p))
    config = {"sources": sources, "top_k_terms": 10, "min_pair_count": 1}
    config.update(cfg)
    return Project.create(name, home, config=config)


class TestProject:
    def test_create_and_reopen(self, home):
        p = make_project(home)
        again = Project.open("proj", home)
        assert again.name == "proj"
        assert again.config["top_k_terms"] == 10

    def test_duplicate_create_rejected(self, home):
        make_project(home)
        with pytest.raises(InvalidArgumentError):
            Project.create("proj", home)

    def test_open_missing_rejected(self, home):
        with pytest.raises(InvalidArgumentError):
            Project.open("ghost", home)

    def test_event_timestamps_monotonic(self, home):
        p = make_project(home)
        for i in range(5):
            p.emit("stage", "running", f"e{i}")
        stamps = [e.at for e in p.events()]
        assert stamps == sorted(stamps)
        assert len(set(stamps)) == len(stamps)


class TestPlan:
    def test_domain_goal_eight_stages_ending_assemble(self, home):
        p = make_project(home)
        order = plan(p)
        assert len(order) == 8
        assert order[-1] == "assemble"
        assert order == ["ingest", "analyze", "candidates", "score", "graph",
                         "taxonomic", "associative", "assemble"]

    def test_plan_deterministic_single_order(self, home):
        p = make_project(home)
        assert plan(p) == plan(p)

    def test_integrated_goal_without_second_source_is_plan_error(self, home):
        p = make_project(home, goal="integrated", mode="process")
        with pytest.raises(PlanError) as err:
            plan(p)
        assert "integrate_with" in err.value.message

    def test_integrated_goal_needs_process_mode(self, home):
        p = make_project(home, goal="integrated", integrate_with="other")
        with pytest.raises(PlanError) as err:
            plan(p)
        assert "process" in err.value.message

    def test_integrated_goal_appends_integrate(self, home):
        p = make_project(home, goal="integrated", integrate_with="other", mode="process")
        order = plan(p)
        assert order[-1] == "integrate"
        assert len(order) == 9

    def test_missing_binding_is_plan_error(self, home):
        p = make_project(home)
        registry = build_registry()
        del registry["analyze"]
        with pytest.raises(PlanError) as err:
            plan(p, registry)
        assert "analyze" in err.value.message

    def test_mistyped_output_is_plan_error_citing_both_stages(self, home):
        p = make_project(home)
        registry = build_registry()
        spec = registry["analyze"]
        registry["analyze"] = StageSpec(
            spec.id, spec.deps, spec.inputs, interchange.PAYLOAD_ONTOLOGY, spec.fn
        )
        with pytest.raises(PlanError) as err:
            plan(p, registry)
        assert "candidates" in err.value.message
        assert "analyze" in err.value.message


class TestRun:
    def test_happy_path_all_done_with_artifact(self, home):
        p = make_project(home)
        p = run(p)
        for stage in plan(p):
            assert p.stage_state(stage).status == DONE
            assert p.artifact_path(stage).exists()
        onto = interchange.parse(p.artifact_path("assemble").read_bytes())
        assert isinstance(onto, model.Ontology)
        assert model.validate(onto).ok
        assert (p.kb_dir() / "proj.xml").exists()

    def test_failed_stage_halts_successors(self, home):
        p = make_project(home)
        # remove the source files and the corpus: ingest must fail
        for s in p.config["sources"]:
            (home / "sources").joinpath(s.split("/")[-1]).unlink()
        p = run(p)
        assert p.stage_state("ingest").status == FAILED
        assert p.stage_state("analyze").status == PENDING
        assert p.stage_state("assemble").status == PENDING

    def test_resume_does_not_recompute_done_stages(self, home):
        p = make_project(home)
        p = run(p)
        digests = {
            stage: hashlib.sha256(p.artifact_path(stage).read_bytes()).hexdigest()
            for stage in plan(p)
        }
        mtimes = {stage: p.artifact_path(stage).stat().st_mtime_ns for stage in plan(p)}
        p = run(p)  # all done; nothing recomputed
        for stage in plan(p):
            assert hashlib.sha256(p.artifact_path(stage).read_bytes()).hexdigest() == digests[stage]
            assert p.artifact_path(stage).stat().st_mtime_ns == mtimes[stage]

    def test_resume_after_failure_keeps_earlier_artifacts(self, home):
        p = make_project(home)
        p = run(p)
        digest_before = hashlib.sha256(p.artifact_path("ingest").read_bytes()).hexdigest()
        # sabotage: mark taxonomic as pending and delete its artifact;
        # earlier stages stay done and must not be recomputed
        p.stage_state("taxonomic").status = PENDING
        p.artifact_path("taxonomic").unlink()
        p.save()
        mtime_ingest = p.artifact_path("ingest").stat().st_mtime_ns
        p = run(p)
        assert p.stage_state("taxonomic").status == DONE
        assert p.artifact_path("ingest").stat().st_mtime_ns == mtime_ingest
        assert hashlib.sha256(p.artifact_path("ingest").read_bytes()).hexdigest() == digest_before

    def test_concurrent_run_busy_error(self, home):
        p = make_project(home)
        lock = p.root / ".lock"
        lock.write_text("held")
        with pytest.raises(BusyError):
            run(p)
        lock.unlink()

    def test_force_rerun_byte_identical(self, home):
        p = make_project(home)
        p = run(p)
        before = p.artifact_path("assemble").read_bytes()
        p = run(p, force=True)
        assert p.artifact_path("assemble").read_bytes() == before

    def test_events_emitted_per_transition(self, home):
        p = make_project(home)
        p = run(p)
        statuses = [(e.stage, e.status) for e in p.events()]
        assert ("ingest", "running") in statuses
        assert ("assemble", "done") in statuses


class TestIterate:
    def test_iterate_requires_assemble(self, home):
        p = make_project(home)
        with pytest.raises(InvalidArgumentError):
            iterate(p, [])

    def test_empty_decisions_fixed_point(self, home):
        p = make_project(home)
        p = run(p)
        before = p.artifact_path("assemble").read_bytes()
        p = iterate(p, [])
        assert p.iteration == 1
        assert p.artifact_path("assemble").read_bytes() == before

    def test_corpus_stages_reused_byte_identically(self, home):
        p = make_project(home)
        p = run(p)
        ingest0 = p.artifact_path("ingest", 0).read_bytes()
        p = iterate(p, [])
        assert p.artifact_path("ingest", 1).read_bytes() == ingest0
        assert p.stage_state("ingest").status == DONE

    def test_reject_removes_concept_and_increments_iteration(self, home):
        p = make_project(home)
        p = run(p)
        cset = interchange.parse(p.artifact_path("score").read_bytes())
        top = cset.ranked()[0].lemma
        p = iterate(p, [CurationDecision("term", top, "reject", author="eng")])
        assert p.iteration == 1
        onto = interchange.parse(p.artifact_path("assemble").read_bytes())
        assert all(c.normalized_label != top for c in onto.concepts.values())

    def test_latest_verdict_wins_across_iterations(self, home):
        p = make_project(home)
        p = run(p)
        cset = interchange.parse(p.artifact_path("score").read_bytes())
        top = cset.ranked()[0].lemma
        p = iterate(p, [CurationDecision("term", top, "reject")])
        p = iterate(p, [CurationDecision("term", top, "accept")])
        assert p.iteration == 2
        onto = interchange.parse(p.artifact_path("assemble").read_bytes())
        assert any(c.normalized_label == top for c in onto.concepts.values())

    def test_unknown_target_warning_recorded(self, home):
        p = make_project(home)
        p = run(p)
        p = iterate(p, [CurationDecision("term", "no such term zzz", "reject")])
        warnings = [e for e in p.events() if e.status == "warning"]
        assert warnings
        assert "no such term zzz" in warnings[0].detail
        # pipeline still completed
        assert p.stage_state("assemble").status == DONE


class TestKbOperations:
    def test_merge_requires_process_mode(self, home):
        p = make_project(home)
        run(p)
        with pytest.raises(InvalidArgumentError):
            orchestrator.merge_stored(p, "proj", "proj")

    def test_merge_stored_ontologies(self, home):
        p = make_project(home, mode="process")
        run(p)
        merged, diags = orchestrator.merge_stored(p, "proj", "proj")
        assert merged.kind == "integrated"
        assert (p.kb_dir() / f"{merged.name}.xml").exists()

    def test_export_xml_and_ttl(self, home):
        p = make_project(home)
        run(p)
        xml = orchestrator.export_artifact(p, "xml")
        assert xml.startswith(b"<?xml")
        ttl = orchestrator.export_artifact(p, "ttl")
        assert b"@prefix" in ttl

    def test_integrated_goal_runs_integrate_stage(self, home):
        p = make_project(home, mode="process")
        p = run(p)
        # store a second ontology under another name, then switch goals
        other = interchange.parse(p.artifact_path("assemble").read_bytes())
        other.name = "other"
        (p.kb_dir() / "other.xml").write_bytes(interchange.serialize(other))
        p.config["goal"] = "integrated"
        p.config["integrate_with"] = "other"
        p.save_config()
        p = run(p)
        assert p.stage_state("integrate").status == DONE
        merged = interchange.parse(p.artifact_path("integrate").read_bytes())
        assert merged.kind == "integrated"


class TestDemo:
    def test_demo_project_runs(self, home):
        p = seed_demo("demo", home)
        assert len(p.config["sources"]) == 20
        p = run(p)
        assert p.stage_state("assemble").status == DONE
        onto = interchange.parse(p.artifact_path("assemble").read_bytes())
        assert len(onto.concepts) > 10
        assert len(onto.relations) > 10
        assert len(onto.interpretations) >= 5
