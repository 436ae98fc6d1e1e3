"""The ontoforge command line, driven through click's runner."""

from __future__ import annotations

import pytest
from click.testing import CliRunner

from ontoforge import interchange
from ontoforge.cli import main
from ontoforge.extract import CurationDecision, DecisionSet


@pytest.fixture()
def runner():
    return CliRunner()


def test_new_ingest_run_export(runner, tmp_path):
    home = str(tmp_path / "home")
    src = tmp_path / "doc.txt"
    src.write_text("Ontologies such as upper ontologies help. An ontology is a structure.")

    res = runner.invoke(main, ["new", "proj", "--home", home])
    assert res.exit_code == 0, res.output

    res = runner.invoke(main, ["ingest", "proj", str(src), "--home", home])
    assert res.exit_code == 0, res.output
    assert "ingested 1 new" in res.output

    res = runner.invoke(main, ["run", "proj", "--home", home])
    assert res.exit_code == 0, res.output
    assert "assemble" in res.output and "done" in res.output

    out = tmp_path / "onto.ttl"
    res = runner.invoke(main, ["export", "proj", "--format", "ttl", "-o", str(out), "--home", home])
    assert res.exit_code == 0, res.output
    assert out.read_bytes().startswith(b"@prefix")

    res = runner.invoke(main, ["status", "proj", "--home", home])
    assert res.exit_code == 0
    assert "iteration=0" in res.output


def test_demo_and_iterate_with_decisions_file(runner, tmp_path):
    home = str(tmp_path / "home")
    res = runner.invoke(main, ["demo", "d1", "--home", home])
    assert res.exit_code == 0, res.output
    res = runner.invoke(main, ["run", "d1", "--home", home])
    assert res.exit_code == 0, res.output

    decisions = DecisionSet(
        decisions=(CurationDecision("term", "semantic network", "reject", author="cli"),)
    )
    dfile = tmp_path / "decisions.xml"
    dfile.write_bytes(interchange.serialize(decisions))
    res = runner.invoke(main, ["iterate", "d1", "--decisions", str(dfile), "--home", home])
    assert res.exit_code == 0, res.output
    assert "iteration 1 finished" in res.output


def test_missing_project_is_clean_error(runner, tmp_path):
    res = runner.invoke(main, ["status", "ghost", "--home", str(tmp_path)])
    assert res.exit_code == 2
    assert "invalid-argument" in res.output


def test_merge_requires_process_mode_error(runner, tmp_path):
    home = str(tmp_path / "home")
    runner.invoke(main, ["demo", "d2", "--home", home])
    runner.invoke(main, ["run", "d2", "--home", home])
    res = runner.invoke(main, ["merge", "d2", "d2", "d2", "--home", home])
    assert res.exit_code == 2
    assert "process" in res.output
