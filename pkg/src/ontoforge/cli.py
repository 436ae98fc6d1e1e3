"""The ontoforge command line."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import interchange, orchestrator
from .errors import OntoforgeError


def _open(name: str, home: str | None) -> orchestrator.Project:
    return orchestrator.Project.open(name, home)


@click.group()
def main():
    """Build formal domain ontologies from text document collections."""


@main.command()
@click.argument("name")
@click.option("--mode", type=click.Choice(["accumulate", "process"]), default="accumulate")
@click.option("--goal", type=click.Choice(["domain", "integrated"]), default="domain")
@click.option("--language", default="en", help="builtin profile id (en, uk)")
@click.option("--home", envvar=orchestrator.HOME_ENV, default=None, help="projects root")
def new(name, mode, goal, language, home):
    """Create an empty project."""
    project = orchestrator.Project.create(
        name, home, config={"mode": mode, "goal": goal, "language": language}
    )
    click.echo(f"created project {project.name} at {project.root}")


@main.command()
@click.argument("name")
@click.option("--home", envvar=orchestrator.HOME_ENV, default=None)
def demo(name, home):
    """Create a project preloaded with the shipped demo corpus."""
    project = orchestrator.seed_demo(name, home)
    click.echo(f"created demo project {project.name} with {len(project.config['sources'])} documents")


@main.command()
@click.argument("name")
@click.argument("sources", nargs=-1, required=True)
@click.option("--allow-host", multiple=True, help="allowlisted URL host (repeatable)")
@click.option("--home", envvar=orchestrator.HOME_ENV, default=None)
def ingest(name, sources, allow_host, home):
    """Ingest files or allowlisted URLs into the project corpus."""
    project = _open(name, home)
    resolved = [str(Path(s).resolve()) if "://" not in s else s for s in sources]
    store = project.store()
    result = store.ingest(resolved, allowed_hosts=allow_host or project.config.get("allowed_hosts"))
    known = set(project.config.get("sources") or [])
    project.config["sources"] = sorted(known | set(resolved))
    if allow_host:
        project.config["allowed_hosts"] = sorted(
            set(project.config.get("allowed_hosts") or []) | set(allow_host)
        )
    project.save_config()
    click.echo(
        f"ingested {len(result.added)} new, {len(result.duplicates)} duplicates, "
        f"{len(result.failures)} failures"
    )
    for src, reason in result.failures:
        click.echo(f"  failed {src}: {reason}", err=True)


@main.command()
@click.argument("name")
@click.option("--goal", type=click.Choice(["domain", "integrated"]), default=None)
@click.option("--force", is_flag=True, help="re-run all stages of the current iteration")
@click.option("--home", envvar=orchestrator.HOME_ENV, default=None)
def run(name, goal, force, home):
    """Run the pipeline (resumes from the first non-done stage)."""
    project = _open(name, home)
    if goal:
        project.config["goal"] = goal
        project.save_config()
    project = orchestrator.run(project, force=force)
    failed = [s for s, st in project.states_for().items() if st.status == orchestrator.FAILED]
    for stage, state in sorted(project.states_for().items()):
        click.echo(f"{stage:12s} {state.status:8s} {state.detail}")
    if failed:
        sys.exit(1)


@main.command()
@click.argument("name")
@click.option("--decisions", "decisions_file", required=True, type=click.Path(exists=True))
@click.option("--home", envvar=orchestrator.HOME_ENV, default=None)
def iterate(name, decisions_file, home):
    """Apply a decisions file (XML) and run the next iteration."""
    project = _open(name, home)
    ds = interchange.parse_expect(
        Path(decisions_file).read_bytes(), interchange.PAYLOAD_DECISIONS
    )
    project = orchestrator.iterate(project, list(ds.decisions))
    click.echo(f"iteration {project.iteration} finished")
    for stage, state in sorted(project.states_for().items()):
        click.echo(f"{stage:12s} {state.status:8s} {state.detail}")


@main.command()
@click.argument("name")
@click.argument("ont_a")
@click.argument("ont_b")
@click.option("--threshold", type=float, default=None)
@click.option("--home", envvar=orchestrator.HOME_ENV, default=None)
def merge(name, ont_a, ont_b, threshold, home):
    """Merge two ontologies stored in the project knowledge base."""
    project = _open(name, home)
    merged, diags = orchestrator.merge_stored(project, ont_a, ont_b, threshold)
    click.echo(f"merged into kb/{merged.name}.xml (|X|={len(merged.concepts)})")
    for d in diags:
        click.echo(f"  {d}", err=True)


@main.command()
@click.argument("name")
@click.option("--format", "fmt", type=click.Choice(["xml", "ttl"]), default="xml")
@click.option("--iteration", type=int, default=None)
@click.option("-o", "--output", type=click.Path(), default=None)
@click.option("--home", envvar=orchestrator.HOME_ENV, default=None)
def export(name, fmt, iteration, output, home):
    """Export the assembled ontology as canonical XML or Turtle triples."""
    project = _open(name, home)
    data = orchestrator.export_artifact(project, fmt, iteration)
    if output:
        Path(output).write_bytes(data)
        click.echo(f"wrote {output}")
    else:
        sys.stdout.buffer.write(data)


@main.command()
@click.argument("name")
@click.option("--port", type=int, default=8765)
@click.option("--ui", "ui_dir", type=click.Path(), default=None, help="static UI directory")
@click.option("--home", envvar=orchestrator.HOME_ENV, default=None)
def serve(name, port, ui_dir, home):
    """Serve the curation HTTP API (and the UI when built)."""
    import uvicorn

    from .api import create_app

    _open(name, home)  # fail fast if the project does not exist
    if ui_dir is None:
        bundled = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        ui_dir = str(bundled) if bundled.is_dir() else None
    app = create_app(name, home, ui_dir)
    uvicorn.run(app, host="127.0.0.1", port=port)


@main.command()
@click.argument("name")
@click.option("--home", envvar=orchestrator.HOME_ENV, default=None)
def status(name, home):
    """Stage states and iteration of a project."""
    project = _open(name, home)
    click.echo(f"project {project.name}  mode={project.mode}  goal={project.goal}  iteration={project.iteration}")
    for stage, state in sorted(project.states_for().items()):
        click.echo(f"{stage:12s} {state.status:8s} {state.detail}")


def _wrap_errors():
    original = main.main

    def wrapped(*args, **kwargs):
        try:
            return original(*args, **kwargs)
        except OntoforgeError as exc:
            click.echo(f"error [{exc.code}]: {exc.message}", err=True)
            sys.exit(2)

    main.main = wrapped


_wrap_errors()
