"""Command line entry points: scaffold, run, step, audit, replay, baseline, serve."""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import NoReturn

import click

from .audit import Corpus, audit as run_audit, trace
from .engine import GateDecision, Session, run_baseline
from .errors import AddflowError
from .gateway import Gateway, Transcript, http_transport
from .store import ARCHITECTURE_DOC, CONFIG_NAME, Workspace


def _fail(exc: AddflowError) -> NoReturn:
    click.echo(f"error [{exc.code}]: {exc}", err=True)
    sys.exit(2)


def _open_workspace(directory: str) -> Workspace:
    try:
        return Workspace.open(Path(directory))
    except AddflowError as exc:
        _fail(exc)


def _gateway(ws: Workspace, transcript: str | None) -> Gateway:
    if transcript is not None:
        return Gateway.for_replay(Path(transcript))
    return Gateway(
        transcript=Transcript(ws.root / "journal" / "transcript.jsonl"),
        transport=http_transport,
    )


def _session(ws: Workspace, gateway: Gateway, mode: str | None = None) -> Session:
    try:
        return Session.load(ws, gateway)
    except AddflowError as exc:
        if exc.code != "NO_SESSION":
            _fail(exc)
    try:
        return Session.start(ws, gateway, mode=mode)
    except AddflowError as exc:
        _fail(exc)


def _print_outcome(outcome, *, as_json: bool) -> None:
    if as_json:
        click.echo(
            json.dumps(
                {
                    "staging_id": outcome.staging_id,
                    "artifacts": sorted(outcome.artifact_edits),
                    "commentary": outcome.commentary,
                    "needs_repair": outcome.needs_repair,
                    "findings": outcome.audit.to_dict()["findings"],
                },
                indent=2,
            )
        )
        return
    if outcome.commentary:
        click.echo(outcome.commentary)
    for name in sorted(outcome.artifact_edits):
        click.echo(f"staged: {name}")
    for finding in outcome.audit.findings:
        click.echo(f"{finding.severity}: {finding.rule_id}: {finding.message}")


def _print_state(session: Session) -> None:
    flag = " (awaiting gate)" if session.awaiting_gate else ""
    click.echo(f"phase: {session.phase}{flag}")


@click.group()
def main() -> None:
    """Drive a gated, iterative architecture design session."""


@main.command()
@click.argument("directory", type=click.Path())
@click.option("--ddd", "mode", flag_value="ddd", default=True, help="Rich domain model style.")
@click.option("--plain", "mode", flag_value="plain", help="Plain domain model style.")
def init(directory: str, mode: str) -> None:
    """Scaffold a new workspace in DIRECTORY."""
    try:
        ws = Workspace.create(Path(directory))
    except AddflowError as exc:
        _fail(exc)
    ws.config.domain_model_style = mode
    ws.config.save(ws.root / CONFIG_NAME)
    click.echo(f"workspace created at {ws.root}")
    click.echo("edit ArchitecturalDrivers.md, then run `addflow run` or `addflow serve`.")


@main.command()
@click.option("--dir", "-d", "directory", default=".", help="Workspace directory.")
@click.option("--mode", type=click.Choice(["ddd", "plain"]), default=None)
@click.option("--import-plan", is_flag=True, help="Use an existing Design/IterationPlan.md.")
@click.option("--transcript", type=click.Path(exists=True), default=None,
              help="Replay model responses from a recorded transcript.")
def run(directory: str, mode: str | None, import_plan: bool, transcript: str | None) -> None:
    """Interactive gated loop in the terminal."""
    ws = _open_workspace(directory)
    gateway = _gateway(ws, transcript)
    try:
        session = Session.load(ws, gateway)
    except AddflowError as exc:
        if exc.code != "NO_SESSION":
            _fail(exc)
        try:
            session = Session.start(ws, gateway, mode=mode, import_plan=import_plan)
        except AddflowError as err:
            _fail(err)
    while not session.phase.finished:
        if not session.awaiting_gate:
            click.echo(f"-- {session.phase} --")
            try:
                outcome = session.advance()
            except AddflowError as exc:
                _fail(exc)
            _print_outcome(outcome, as_json=False)
        choice = click.prompt(
            "gate",
            type=click.Choice(["approve", "reject", "finish"]),
            default="approve",
        )
        comment = ""
        kind = {"approve": "approve", "reject": "reject_with_comment", "finish": "finish"}[choice]
        if choice == "reject":
            comment = click.prompt("comment")
        try:
            session.record_gate(GateDecision(kind, comment))
        except AddflowError as exc:
            click.echo(f"error [{exc.code}]: {exc}", err=True)
            continue
        _print_state(session)
    click.echo("session finished.")


@main.command()
@click.option("--dir", "-d", "directory", default=".", help="Workspace directory.")
@click.option("--gate", "gate_kind",
              type=click.Choice(["approve", "reject", "edit-approve", "finish"]), default=None,
              help="Record a gate decision instead of advancing.")
@click.option("--comment", default="", help="Gate comment (required for reject).")
@click.option("--mode", type=click.Choice(["ddd", "plain"]), default=None)
@click.option("--import-plan", is_flag=True)
@click.option("--transcript", type=click.Path(exists=True), default=None,
              help="Replay model responses from a recorded transcript.")
@click.option("--json", "as_json", is_flag=True, help="Machine readable output.")
def step(directory: str, gate_kind: str | None, comment: str, mode: str | None,
         import_plan: bool, transcript: str | None, as_json: bool) -> None:
    """Execute one engine action (or record one gate), then stop."""
    ws = _open_workspace(directory)
    gateway = _gateway(ws, transcript)
    if gate_kind is not None:
        try:
            session = Session.load(ws, gateway)
        except AddflowError as exc:
            _fail(exc)
        kinds = {
            "approve": "approve",
            "reject": "reject_with_comment",
            "edit-approve": "edit_artifacts_then_approve",
            "finish": "finish",
        }
        try:
            session.record_gate(GateDecision(kinds[gate_kind], comment))
        except AddflowError as exc:
            _fail(exc)
        if as_json:
            click.echo(json.dumps({"phase": session.phase.token(),
                                   "awaiting_gate": session.awaiting_gate}))
        else:
            _print_state(session)
        return
    try:
        session = Session.load(ws, gateway)
    except AddflowError as exc:
        if exc.code != "NO_SESSION":
            _fail(exc)
        try:
            session = Session.start(ws, gateway, mode=mode, import_plan=import_plan)
        except AddflowError as err:
            _fail(err)
    try:
        outcome = session.advance()
    except AddflowError as exc:
        _fail(exc)
    _print_outcome(outcome, as_json=as_json)
    if not as_json:
        _print_state(session)


@main.command("audit")
@click.option("--dir", "-d", "directory", default=".", help="Workspace directory.")
@click.option("--json", "as_json", is_flag=True, help="Emit the full report as JSON.")
@click.option("--trace", "with_trace", is_flag=True, help="Include the driver trace matrix.")
def audit_cmd(directory: str, as_json: bool, with_trace: bool) -> None:
    """Run every consistency rule over the workspace; exit 1 on errors."""
    root = Path(directory)
    if not (root / CONFIG_NAME).is_file() and not (root / "Design").is_dir():
        click.echo(f"error [NO_WORKSPACE]: {root} is not a workspace", err=True)
        sys.exit(2)
    try:
        corpus = Corpus.load(root)
        overrides = {}
        if (root / CONFIG_NAME).is_file():
            overrides = Workspace.open(root).config.rule_severity
        report = run_audit(corpus, severity_overrides=overrides)
    except AddflowError as exc:
        _fail(exc)
    if as_json:
        payload = report.to_dict()
        payload["exit_code"] = report.exit_code
        payload["load_issues"] = corpus.load_issues
        if with_trace:
            payload["trace"] = {
                driver_id: {
                    "planned_in": entry.planned_in,
                    "decided_in": entry.decided_in,
                    "sequenced_in": entry.sequenced_in,
                }
                for driver_id, entry in trace(corpus).entries.items()
            }
        click.echo(json.dumps(payload, indent=2))
    else:
        click.echo(report.to_text())
        for issue in corpus.load_issues:
            click.echo(f"load issue: {issue}")
        if with_trace:
            for driver_id, entry in sorted(trace(corpus).entries.items()):
                click.echo(
                    f"{driver_id}: planned {entry.planned_in or '-'} "
                    f"decided rows {entry.decided_in or '-'} "
                    f"sequences {entry.sequenced_in or '-'}"
                )
    sys.exit(report.exit_code)


@main.command()
@click.argument("transcript", type=click.Path(exists=True))
@click.option("--dir", "-d", "directory", default=".", help="Workspace directory.")
@click.option("--mode", type=click.Choice(["ddd", "plain"]), default=None)
@click.option("--import-plan", is_flag=True)
def replay(transcript: str, directory: str, mode: str | None, import_plan: bool) -> None:
    """Drive a full session from a recorded transcript, auto-approving gates."""
    ws = _open_workspace(directory)
    gateway = Gateway.for_replay(Path(transcript))
    session = _session(ws, gateway, mode)
    if import_plan and not session.import_plan:
        session.import_plan = True
    steps = 0
    try:
        while not session.phase.finished:
            session.advance()
            session.record_gate(GateDecision("approve"))
            steps += 1
    except AddflowError as exc:
        _fail(exc)
    click.echo(f"replayed {steps} gated steps; phase: {session.phase}")
    click.echo(f"snapshot: {ws.current_snapshot_id()}")


@main.command()
@click.option("--mode", required=True,
              type=click.Choice(["zero-shot", "empty-template", "template-instructions"]))
@click.option("--dir", "-d", "directory", default=".", help="Workspace directory.")
@click.option("--transcript", type=click.Path(exists=True), default=None,
              help="Replay the model response from a recorded transcript.")
def baseline(mode: str, directory: str, transcript: str | None) -> None:
    """Produce a one-shot architecture document without the gated loop."""
    ws = _open_workspace(directory)
    gateway = _gateway(ws, transcript)
    try:
        run_baseline(ws, gateway, mode)
    except AddflowError as exc:
        _fail(exc)
    click.echo(f"baseline written to {ARCHITECTURE_DOC}")


@main.command()
@click.option("--dir", "-d", "directory", default=".", help="Workspace directory.")
@click.option("--port", default=7843, show_default=True)
@click.option("--bind", default="127.0.0.1", show_default=True,
              help="Interface to listen on.")
def serve(directory: str, port: int, bind: str) -> None:
    """Start the HTTP API that the review console talks to."""
    from .api import create_app

    import uvicorn

    ws = _open_workspace(directory)
    app = create_app(ws.root)
    uvicorn.run(app, host=bind, port=port, log_level="info")


if __name__ == "__main__":
    main()
