"""CLI commands driven through click's test runner."""

from __future__ import annotations

import json
import shutil
from pathlib import Path

import pytest
from click.testing import CliRunner

from addflow.cli import main
from addflow.store import Workspace

from minisession import FIXTURES, run_full_session


@pytest.fixture()
def runner():
    return CliRunner()


def recorded_workspace(tmp_path) -> Path:
    """A finished scripted session; its transcript feeds the replay tests."""
    ws, _ = run_full_session(tmp_path)
    return ws.root


def fresh_workspace(runner, tmp_path, name="w2") -> Path:
    target = tmp_path / name
    result = runner.invoke(main, ["init", str(target)])
    assert result.exit_code == 0, result.output
    shutil.copyfile(FIXTURES / "ArchitecturalDrivers.md", target / "ArchitecturalDrivers.md")
    return target


def test_init_scaffolds_workspace(runner, tmp_path):
    target = tmp_path / "w"
    result = runner.invoke(main, ["init", str(target), "--plain"])
    assert result.exit_code == 0
    assert "workspace created" in result.output
    assert (target / "ArchitecturalDrivers.md").is_file()
    assert (target / "AttributeDrivenDesign.md").is_file()
    assert (target / "prompts").is_dir()
    config = json.loads((target / "add.config.json").read_text())
    assert config["domain_model_style"] == "plain"


def test_init_refuses_existing_workspace(runner, tmp_path):
    target = tmp_path / "w"
    assert runner.invoke(main, ["init", str(target)]).exit_code == 0
    result = runner.invoke(main, ["init", str(target)])
    assert result.exit_code == 2
    assert "WORKSPACE_EXISTS" in result.output


def test_replay_runs_full_session(runner, tmp_path):
    source = recorded_workspace(tmp_path)
    transcript = source / "journal" / "transcript.jsonl"
    target = fresh_workspace(runner, tmp_path)
    result = runner.invoke(main, ["replay", str(transcript), "-d", str(target)])
    assert result.exit_code == 0, result.output
    assert "replayed 16 gated steps" in result.output
    assert "phase: Finished" in result.output
    assert "snapshot: 16" in result.output
    replayed = Workspace.open(target)
    original = Workspace.open(source)
    assert replayed.read_artifact("Design/Architecture.md") == original.read_artifact(
        "Design/Architecture.md"
    )


def test_replay_then_audit_exits_zero(runner, tmp_path):
    source = recorded_workspace(tmp_path)
    target = fresh_workspace(runner, tmp_path)
    runner.invoke(main, ["replay", str(source / "journal" / "transcript.jsonl"), "-d", str(target)])
    result = runner.invoke(main, ["audit", "-d", str(target)])
    assert result.exit_code == 0, result.output


def test_step_advances_once_then_gates(runner, tmp_path):
    source = recorded_workspace(tmp_path)
    transcript = source / "journal" / "transcript.jsonl"
    target = fresh_workspace(runner, tmp_path)

    result = runner.invoke(main, ["step", "-d", str(target), "--transcript", str(transcript)])
    assert result.exit_code == 0, result.output
    assert "awaiting gate" in result.output

    again = runner.invoke(main, ["step", "-d", str(target), "--transcript", str(transcript)])
    assert again.exit_code == 2
    assert "AWAITING_GATE" in again.output

    gated = runner.invoke(main, ["step", "-d", str(target), "--gate", "approve"])
    assert gated.exit_code == 0
    assert "Establish the Domain Model" in gated.output or "domain" in gated.output.lower()


def test_step_json_output(runner, tmp_path):
    source = recorded_workspace(tmp_path)
    transcript = source / "journal" / "transcript.jsonl"
    target = fresh_workspace(runner, tmp_path)
    result = runner.invoke(
        main, ["step", "-d", str(target), "--transcript", str(transcript), "--json"]
    )
    assert result.exit_code == 0
    data = json.loads(result.output)
    assert data["staging_id"] == "s0001"
    assert data["artifacts"] == []
    assert data["needs_repair"] is False


def test_step_gate_reject_requires_comment(runner, tmp_path):
    source = recorded_workspace(tmp_path)
    transcript = source / "journal" / "transcript.jsonl"
    target = fresh_workspace(runner, tmp_path)
    runner.invoke(main, ["step", "-d", str(target), "--transcript", str(transcript)])
    result = runner.invoke(main, ["step", "-d", str(target), "--gate", "reject"])
    assert result.exit_code == 2
    assert "EMPTY_REJECT_COMMENT" in result.output


def test_run_interactive_full_session(runner, tmp_path):
    source = recorded_workspace(tmp_path)
    transcript = source / "journal" / "transcript.jsonl"
    target = fresh_workspace(runner, tmp_path)
    result = runner.invoke(
        main,
        ["run", "-d", str(target), "--transcript", str(transcript)],
        input="\n" * 20,  # accept the approve default at every gate
    )
    assert result.exit_code == 0, result.output
    assert "session finished." in result.output
    assert Workspace.open(target).current_snapshot_id() == 16


def test_audit_reports_seeded_defect(runner, tmp_path):
    source = recorded_workspace(tmp_path)
    ws = Workspace.open(source)
    arch = ws.read_artifact("Design/Architecture.md")
    orphan = """
### QA-2 Failure recovery

```mermaid
sequenceDiagram
    participant PM
    participant PRM as Payment Recovery Manager
    PM->>PRM: reconcile
```
"""
    ws.write_artifact(
        "Design/Architecture.md",
        arch.replace("## 8. Interfaces", orphan + "\n## 8. Interfaces"),
    )
    result = runner.invoke(main, ["audit", "-d", str(source)])
    assert result.exit_code == 1
    assert "R-ORPHAN_ELEMENT" in result.output
    assert "Payment Recovery Manager" in result.output

    as_json = runner.invoke(main, ["audit", "-d", str(source), "--json"])
    assert as_json.exit_code == 1
    report = json.loads(as_json.output)
    assert any(f["rule"] == "R-ORPHAN_ELEMENT" for f in report["findings"])
    assert report["exit_code"] == 1


def test_audit_trace_flag(runner, tmp_path):
    source = recorded_workspace(tmp_path)
    result = runner.invoke(main, ["audit", "-d", str(source), "--json", "--trace"])
    assert result.exit_code == 0
    report = json.loads(result.output)
    assert report["trace"]["HPS-2"]["planned_in"] == [2]
    assert "HPS-2 Change Prices" in report["trace"]["HPS-2"]["sequenced_in"]


def test_audit_outside_workspace_is_tool_failure(runner, tmp_path):
    result = runner.invoke(main, ["audit", "-d", str(tmp_path / "nothing")])
    assert result.exit_code == 2
    assert "NO_WORKSPACE" in result.output


def test_baseline_writes_single_document(runner, tmp_path):
    # record a baseline exchange, then replay it through the CLI
    from addflow.engine import run_baseline
    from addflow.gateway import Gateway, Transcript, scripted_transport
    from minisession import ARCH_SKELETON, edit, make_workspace, tick_clock

    recorder = make_workspace(tmp_path)
    gateway = Gateway(
        transcript=Transcript(recorder.root / "journal" / "transcript.jsonl"),
        transport=scripted_transport([edit("Design/Architecture.md", ARCH_SKELETON)]),
        clock=tick_clock(),
    )
    run_baseline(recorder, gateway, "zero-shot", clock=tick_clock())

    target = fresh_workspace(runner, tmp_path)
    result = runner.invoke(
        main,
        ["baseline", "--mode", "zero-shot", "-d", str(target),
         "--transcript", str(recorder.root / "journal" / "transcript.jsonl")],
    )
    assert result.exit_code == 0, result.output
    assert Workspace.open(target).read_artifact("Design/Architecture.md") == Workspace.open(
        recorder.root
    ).read_artifact("Design/Architecture.md")


def test_commands_require_workspace(runner, tmp_path):
    missing = str(tmp_path / "void")
    for args in (["run", "-d", missing], ["step", "-d", missing], ["baseline", "--mode", "zero-shot", "-d", missing]):
        result = runner.invoke(main, args)
        assert result.exit_code == 2, args
        assert "NO_WORKSPACE" in result.output


def test_serve_help(runner):
    result = runner.invoke(main, ["serve", "--help"])
    assert result.exit_code == 0
    assert "7843" in result.output
