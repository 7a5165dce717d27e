"""Engine behavior: phase machine, edit extraction, gates, repair loop."""

from __future__ import annotations

from pathlib import Path

import pytest

from addflow.audit import check_gate_rule
from addflow.engine import GateDecision, Session, extract_edits, run_baseline
from addflow.errors import EngineError
from addflow.gateway import Gateway, Transcript, scripted_transport
from addflow.store import DRIVERS_DOC, Workspace

from minisession import (
    ARCH_SKELETON,
    DOMAIN_MODEL,
    FIXTURES,
    FULL_SCRIPT,
    IT1_S3,
    REVIEW_REPLY,
    edit,
    make_session,
    make_workspace,
    tick_clock,
)


# -- edit extraction ----------------------------------------------------------


def test_extract_edits_basic():
    text = "Intro text.\n\n```\nfile: Design/DomainModel.md\n# Domain Model\n```\nDone."
    edits, commentary = extract_edits(text)
    assert edits == {"Design/DomainModel.md": "# Domain Model\n"}
    assert "Intro text." in commentary
    assert "Done." in commentary


def test_extract_edits_nested_fences():
    inner = "# Architecture\n\n```mermaid\nflowchart TB\n    A --> B\n```\n"
    text = edit("Design/Architecture.md", inner)
    edits, _ = extract_edits(text)
    assert edits["Design/Architecture.md"] == inner
    assert "```mermaid" in edits["Design/Architecture.md"]


def test_extract_edits_multiple_files():
    text = edit("Design/Iteration1.md", "# Iteration 1\n") + "\nand\n" + edit(
        "Design/Architecture.md", "# Architecture\n"
    )
    edits, commentary = extract_edits(text)
    assert set(edits) == {"Design/Iteration1.md", "Design/Architecture.md"}
    assert commentary == "and"


def test_extract_edits_plain_fence_is_commentary():
    text = "```python\nprint('hello')\n```"
    edits, commentary = extract_edits(text)
    assert edits == {}
    assert "print('hello')" in commentary


def test_extract_edits_adds_missing_trailing_newline():
    text = "```\nfile: Design/Iteration1.md\nlast line has no newline\n```"
    edits, _ = extract_edits(text)
    assert edits["Design/Iteration1.md"].endswith("newline\n")


def test_extract_edits_unclosed_fence_runs_to_eof():
    text = "```\nfile: Design/Iteration1.md\ncontent\nmore"
    edits, _ = extract_edits(text)
    assert edits["Design/Iteration1.md"] == "content\nmore\n"


# -- session lifecycle ---------------------------------------------------------


def test_start_requires_drivers(tmp_path):
    ws = Workspace.create(tmp_path / "w")
    ws.write_artifact(DRIVERS_DOC, "")
    with pytest.raises(EngineError) as err:
        make_session(ws, [])
    assert err.value.code == "NO_DRIVERS_DOCUMENT"


def test_fresh_session_plans_review_prompt(tmp_path):
    session = make_session(make_workspace(tmp_path), [])
    action = session.next_action()
    assert action.template_id == "review-drivers"
    assert session.phase.token() == "review-drivers"
    assert any(name == DRIVERS_DOC for name, _ in action.context_items)


def test_start_twice_refuses(tmp_path):
    ws = make_workspace(tmp_path)
    make_session(ws, [])
    with pytest.raises(EngineError) as err:
        make_session(ws, [])
    assert err.value.code == "SESSION_EXISTS"


def test_review_cycle_and_approve(tmp_path):
    ws = make_workspace(tmp_path)
    session = make_session(ws, [REVIEW_REPLY])
    outcome = session.advance()
    assert outcome.artifact_edits == {}
    assert "consistent" in outcome.commentary
    assert session.awaiting_gate
    with pytest.raises(EngineError) as err:
        session.next_action()
    assert err.value.code == "AWAITING_GATE"
    phase = session.record_gate(GateDecision("approve"))
    assert phase.token() == "domain-model"
    assert ws.current_snapshot_id() == 1
    assert ws.snapshot(1).gate["kind"] == "approve"


def test_domain_model_requires_edits(tmp_path):
    ws = make_workspace(tmp_path)
    session = make_session(ws, [REVIEW_REPLY, "I would model hotels and rooms."])
    session.advance()
    session.record_gate(GateDecision("approve"))
    with pytest.raises(EngineError) as err:
        session.advance()
    assert err.value.code == "NO_EDITS_FOUND"


def test_full_session_to_finished(tmp_path):
    ws = make_workspace(tmp_path)
    session = make_session(ws, FULL_SCRIPT)
    seen_phases = [session.phase.token()]
    while not session.phase.finished:
        session.advance()
        session.record_gate(GateDecision("approve"))
        seen_phases.append(session.phase.token())
    assert seen_phases == [
        "review-drivers",
        "domain-model",
        "iteration-planning",
        "skeleton",
        "iterating:1:2",
        "iterating:1:3",
        "iterating:1:4",
        "iterating:1:5",
        "iterating:1:6",
        "iterating:1:7",
        "iterating:2:2",
        "iterating:2:3",
        "iterating:2:4",
        "iterating:2:5",
        "iterating:2:6",
        "iterating:2:7",
        "finished",
    ]
    assert ws.current_snapshot_id() == 16
    assert len(ws.snapshots()) == 17  # genesis + one per approve
    arch = ws.read_artifact("Design/Architecture.md")
    assert "QA-2 | Price updates go through the gateway" in arch
    assert "HPS-2 Change Prices" in arch
    events = session._journal_events()
    assert check_gate_rule(events) == []
    applied = [e for e in events if e["type"] == "response-applied"]
    assert len(applied) == 16


def test_step4_outcome_extracts_concept_table(tmp_path):
    ws = make_workspace(tmp_path)
    session = make_session(ws, FULL_SCRIPT[:7])
    for _ in range(6):
        session.advance()
        session.record_gate(GateDecision("approve"))
    outcome = session.advance()
    assert session.phase.token() == "iterating:1:4"
    table = outcome.extracted["concept_table"]
    assert table and table[0].concept == "Layered services behind a gateway"
    assert not outcome.needs_repair


def test_malformed_step4_triggers_repair(tmp_path):
    ws = make_workspace(tmp_path)
    script = FULL_SCRIPT[:6] + [
        edit("Design/Iteration1.md", IT1_S3 + "\n## Step 4: Choose Concepts\n\nprose only\n"),
        FULL_SCRIPT[6],
    ]
    session = make_session(ws, script)
    for _ in range(6):
        session.advance()
        session.record_gate(GateDecision("approve"))
    outcome = session.advance()
    assert not outcome.needs_repair
    assert outcome.extracted["concept_table"]
    events = session._journal_events()
    discarded = [e for e in events if e["type"] == "response-discarded"]
    assert len(discarded) == 1
    assert discarded[0]["payload"]["findings"] == ["R-STEP4_TABLE"]
    repairs = [
        e
        for e in events
        if e["type"] == "prompt-sent" and e["payload"]["kind"] == "repair"
    ]
    assert len(repairs) == 1
    # the repair feedback names the missing columns
    assert "Selected design concept" in discarded[0]["payload"]["feedback"]


def test_repair_budget_forces_gate(tmp_path):
    ws = make_workspace(tmp_path)
    bad = edit("Design/Iteration1.md", IT1_S3 + "\n## Step 4: Concepts\n\nstill no table\n")
    script = FULL_SCRIPT[:6] + [bad, bad, bad]
    session = make_session(ws, script)
    for _ in range(6):
        session.advance()
        session.record_gate(GateDecision("approve"))
    outcome = session.advance()
    assert session.awaiting_gate
    assert not outcome.needs_repair
    assert outcome.audit.by_rule("R-STEP4_TABLE")
    events = session._journal_events()
    repairs = [
        e
        for e in events
        if e["type"] == "prompt-sent" and e["payload"]["kind"] == "repair"
    ]
    assert len(repairs) == 2


def test_reject_discards_and_schedules_verbatim_repair(tmp_path):
    ws = make_workspace(tmp_path)
    comment = "use enhanced API gateway instead of service mesh"
    session = make_session(ws, FULL_SCRIPT[:2] + [FULL_SCRIPT[1]])
    session.advance()
    session.record_gate(GateDecision("approve"))
    before = {name: ws.read_artifact(name) for name in ws.list_artifacts()}
    session.advance()
    phase = session.record_gate(GateDecision("reject_with_comment", comment))
    assert phase.token() == "domain-model"  # rejection does not advance
    after = {name: ws.read_artifact(name) for name in ws.list_artifacts()}
    assert after == before  # staged edits fully discarded
    action = session.next_action()
    assert action.kind == "repair"
    assert action.bindings["feedback"] == comment
    request = session.build_request(action)
    assert comment in request.user
    outcome = session.advance()
    assert "Design/DomainModel.md" in outcome.artifact_edits


def test_reject_requires_comment():
    with pytest.raises(EngineError) as err:
        GateDecision("reject_with_comment", "   ")
    assert err.value.code == "EMPTY_REJECT_COMMENT"


def test_finish_only_legal_at_step_seven(tmp_path):
    ws = make_workspace(tmp_path)
    session = make_session(ws, FULL_SCRIPT)
    session.advance()
    with pytest.raises(EngineError) as err:
        session.record_gate(GateDecision("finish"))
    assert err.value.code == "FINISH_NOT_LEGAL_HERE"
    session.record_gate(GateDecision("approve"))


def test_finish_at_step_seven_ends_session(tmp_path):
    ws = make_workspace(tmp_path)
    session = make_session(ws, FULL_SCRIPT)
    for _ in range(9):
        session.advance()
        session.record_gate(GateDecision("approve"))
    assert session.phase.token() == "iterating:1:7"
    session.advance()
    phase = session.record_gate(GateDecision("finish"))
    assert phase.finished
    with pytest.raises(EngineError) as err:
        session.next_action()
    assert err.value.code == "SESSION_FINISHED"


def test_edit_then_approve_overlays_reviewer_edits(tmp_path):
    ws = make_workspace(tmp_path)
    session = make_session(ws, FULL_SCRIPT[:2])
    session.advance()
    session.record_gate(GateDecision("approve"))
    session.advance()
    fixed = DOMAIN_MODEL + "\nReviewer note: prices are per room type.\n"
    session.record_gate(
        GateDecision("edit_artifacts_then_approve"),
        edits={"Design/DomainModel.md": fixed},
    )
    assert ws.read_artifact("Design/DomainModel.md") == fixed
    assert session.phase.token() == "iteration-planning"


def test_plan_import_skips_model_call(tmp_path):
    ws = make_workspace(tmp_path)
    ws.write_artifact("Design/IterationPlan.md", (FIXTURES / "IterationPlan.md").read_text())
    session = make_session(ws, FULL_SCRIPT[:2], import_plan=True)
    session.advance()
    session.record_gate(GateDecision("approve"))
    session.advance()
    session.record_gate(GateDecision("approve"))
    transcript_lines = (ws.root / "journal" / "transcript.jsonl").read_text().splitlines()
    outcome = session.advance()  # import; no gateway traffic
    assert outcome.extracted["plan"].iterations[0].number == 1
    assert len(outcome.extracted["plan"].iterations) == 6
    after = (ws.root / "journal" / "transcript.jsonl").read_text().splitlines()
    assert after == transcript_lines
    events = session._journal_events()
    assert events[-2]["payload"].get("source") == "imported-plan"
    session.record_gate(GateDecision("approve"))
    assert session.phase.token() == "skeleton"
    assert session.plan_size() == 6


def test_load_rebuilds_state(tmp_path):
    ws = make_workspace(tmp_path)
    session = make_session(ws, FULL_SCRIPT[:4])
    for _ in range(4):
        session.advance()
        session.record_gate(GateDecision("approve"))
    assert session.phase.token() == "iterating:1:2"

    reopened = Workspace.open(ws.root)
    gateway = Gateway(
        transcript=Transcript(reopened.root / "journal" / "transcript.jsonl"),
        transport=scripted_transport(FULL_SCRIPT[4:6]),
        clock=tick_clock(),
    )
    loaded = Session.load(reopened, gateway, clock=tick_clock())
    assert loaded.phase.token() == "iterating:1:2"
    assert not loaded.awaiting_gate
    assert loaded.plan is not None and len(loaded.plan.iterations) == 2
    assert loaded.mode == "ddd"
    loaded.advance()
    loaded.record_gate(GateDecision("approve"))
    assert loaded.phase.token() == "iterating:1:3"


def test_load_mid_gate_keeps_pending_staging(tmp_path):
    ws = make_workspace(tmp_path)
    session = make_session(ws, FULL_SCRIPT[:1])
    session.advance()
    loaded = Session.load(
        Workspace.open(ws.root),
        Gateway(
            transcript=Transcript(ws.root / "journal" / "transcript.jsonl"),
            transport=scripted_transport([]),
            clock=tick_clock(),
        ),
        clock=tick_clock(),
    )
    assert loaded.awaiting_gate
    assert loaded.pending_staging is not None
    loaded.record_gate(GateDecision("approve"))
    assert loaded.phase.token() == "domain-model"


def test_step_advance_binds_step_title(tmp_path):
    ws = make_workspace(tmp_path)
    session = make_session(ws, FULL_SCRIPT[:6])
    for _ in range(5):
        session.advance()
        session.record_gate(GateDecision("approve"))
    assert session.phase.token() == "iterating:1:3"
    action = session.next_action()
    assert action.template_id == "step-advance"
    assert action.bindings["step_title"] == "Choose One or More Elements of the System to Refine"
    request = session.build_request(action)
    assert "step 3 (Choose One or More Elements of the System to Refine)" in request.user


def test_iterating_context_splits_drivers(tmp_path):
    ws = make_workspace(tmp_path)
    session = make_session(ws, FULL_SCRIPT[:5])
    for _ in range(4):
        session.advance()
        session.record_gate(GateDecision("approve"))
    action = session.next_action()
    names = [name for name, _ in action.context_items]
    assert names[0] == "Design/Architecture.md"  # no iteration record yet
    assert "drivers:iteration" in names
    assert "drivers:rest" in names
    iteration_part = dict(action.context_items)["drivers:iteration"]
    assert "QA-1" in iteration_part and "CON-1" in iteration_part
    assert "QA-2" not in iteration_part


def test_run_baseline_writes_architecture(tmp_path):
    ws = make_workspace(tmp_path)
    gateway = Gateway(
        transcript=Transcript(ws.root / "journal" / "transcript.jsonl"),
        transport=scripted_transport([edit("Design/Architecture.md", ARCH_SKELETON)]),
        clock=tick_clock(),
    )
    text = run_baseline(ws, gateway, "zero-shot", clock=tick_clock())
    assert ws.read_artifact("Design/Architecture.md") == text
    assert ws.current_snapshot_id() == 1
    assert ws.snapshot(1).gate == {"kind": "baseline", "mode": "zero-shot"}


def test_run_baseline_unknown_mode(tmp_path):
    ws = make_workspace(tmp_path)
    gateway = Gateway(
        transcript=Transcript(ws.root / "journal" / "transcript.jsonl"),
        transport=scripted_transport([]),
    )
    with pytest.raises(EngineError) as err:
        run_baseline(ws, gateway, "few-shot")
    assert err.value.code == "UNKNOWN_BASELINE_MODE"
