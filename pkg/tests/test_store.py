"""Workspace store: staging, snapshots, crash recovery, diffs."""

from __future__ import annotations

import json

import pytest

from addflow.errors import ConfigError, StoreError
from addflow.store import (
    ARCHITECTURE_DOC,
    DRIVERS_DOC,
    Workspace,
    WorkspaceConfig,
    diff_texts,
    is_legal_artifact,
    iteration_doc,
)

ARCH_V1 = """# Architecture

## 1. System Context

The hotel price system talks to the PMS and the analytics provider.

## 9. Design Decisions

| Driver | Decision | Rationale | Discarded alternative |
| --- | --- | --- | --- |
| CON-1 | Use Python | team skills | Java |
"""

ARCH_V2 = """# Architecture

## 1. System Context

The hotel price system talks to the PMS and the analytics provider.

## 9. Design Decisions

| Driver | Decision | Rationale | Discarded alternative |
| --- | --- | --- | --- |
| CON-1 | Use Python | team skills | Java |
| QA-2 | Queue per tenant | isolates load spikes | shared queue |
"""


@pytest.fixture
def ws(tmp_path):
    return Workspace.create(tmp_path / "w")


def test_create_scaffolds_workspace(ws):
    root = ws.root
    assert (root / "add.config.json").is_file()
    assert (root / "AttributeDrivenDesign.md").is_file()
    assert (root / "ArchitecturalDrivers.md").is_file()
    assert (root / "prompts" / "review-drivers.md").is_file()
    assert (root / "prompts" / "persona.yaml").is_file()
    assert (root / "Design").is_dir()
    # genesis snapshot
    assert ws.current_snapshot_id() == 0
    genesis = ws.snapshot(0)
    assert DRIVERS_DOC in genesis.digests
    assert genesis.gate is None


def test_create_twice_refuses(tmp_path):
    Workspace.create(tmp_path / "w")
    with pytest.raises(ConfigError) as err:
        Workspace.create(tmp_path / "w")
    assert err.value.code == "WORKSPACE_EXISTS"


def test_open_missing_workspace(tmp_path):
    with pytest.raises(ConfigError) as err:
        Workspace.open(tmp_path / "nope")
    assert err.value.code == "NO_WORKSPACE"


def test_config_round_trip(tmp_path):
    ws = Workspace.create(tmp_path / "w", domain_model_style="plain")
    ws.config.context_budget = 5000
    ws.config.rule_severity["R-SCOPE_CREEP"] = "info"
    ws.config.save(ws.root / "add.config.json")
    again = Workspace.open(ws.root)
    assert again.config.domain_model_style == "plain"
    assert again.config.context_budget == 5000
    assert again.config.rule_severity == {"R-SCOPE_CREEP": "info"}


def test_config_rejects_bad_json(tmp_path):
    ws = Workspace.create(tmp_path / "w")
    (ws.root / "add.config.json").write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError) as err:
        Workspace.open(ws.root)
    assert err.value.code == "INVALID_CONFIG"


def test_legal_artifact_names():
    assert is_legal_artifact("ArchitecturalDrivers.md")
    assert is_legal_artifact("Design/DomainModel.md")
    assert is_legal_artifact("Design/IterationPlan.md")
    assert is_legal_artifact("Design/Architecture.md")
    assert is_legal_artifact("Design/Iteration1.md")
    assert is_legal_artifact("Design/Iteration12.md")
    assert is_legal_artifact("Drivers/payments.md")
    assert not is_legal_artifact("Design/Iteration0.md")
    assert not is_legal_artifact("Design/Notes.md")
    assert not is_legal_artifact("add.config.json")
    assert not is_legal_artifact("journal/CURRENT")
    assert not is_legal_artifact("../escape.md")
    assert not is_legal_artifact("Drivers/../../etc/passwd")


def test_illegal_paths_raise(ws):
    for name in ("notes.md", "Design/../add.config.json", "/etc/passwd"):
        with pytest.raises(StoreError) as err:
            ws.write_artifact(name, "x")
        assert err.value.code == "ILLEGAL_PATH"


def test_write_read_list(ws):
    ws.write_artifact(ARCHITECTURE_DOC, ARCH_V1)
    ws.write_artifact(iteration_doc(2), "# Iteration 2\n")
    ws.write_artifact(iteration_doc(10), "# Iteration 10\n")
    ws.write_artifact("Drivers/extra.md", "## Constraints\n")
    assert ws.read_artifact(ARCHITECTURE_DOC) == ARCH_V1
    assert ws.read_artifact("Design/DomainModel.md") is None
    names = ws.list_artifacts()
    assert names.index(iteration_doc(2)) < names.index(iteration_doc(10))
    assert "Drivers/extra.md" in names
    assert DRIVERS_DOC in names


def test_stage_commit_cycle(ws):
    sid = ws.stage_edits({ARCHITECTURE_DOC: ARCH_V1, iteration_doc(1): "# Iteration 1\n"})
    assert sid == "s0001"
    # staged edits are not live yet
    assert ws.read_artifact(ARCHITECTURE_DOC) is None
    assert ws.staged_edits(sid) == {
        ARCHITECTURE_DOC: ARCH_V1,
        iteration_doc(1): "# Iteration 1\n",
    }
    snap = ws.commit(sid, gate={"decision": "approve"})
    assert snap.id == 1
    assert ws.current_snapshot_id() == 1
    assert ws.read_artifact(ARCHITECTURE_DOC) == ARCH_V1
    assert ws.staging_ids() == []
    assert ws.snapshot_content(1, ARCHITECTURE_DOC) == ARCH_V1
    # untouched artifacts carried into the snapshot
    assert ws.snapshot_content(1, DRIVERS_DOC) == ws.read_artifact(DRIVERS_DOC)
    assert ws.snapshot(1).gate == {"decision": "approve"}


def test_snapshot_ids_are_dense(ws):
    for n in range(1, 4):
        sid = ws.stage_edits({iteration_doc(1): f"# Iteration 1\n\nrev {n}\n"})
        ws.commit(sid)
    assert [s.id for s in ws.snapshots()] == [0, 1, 2, 3]
    assert ws.current_snapshot_id() == 3


def test_discard_removes_staging(ws):
    sid = ws.stage_edits({ARCHITECTURE_DOC: ARCH_V1})
    ws.discard(sid)
    assert ws.staging_ids() == []
    with pytest.raises(StoreError) as err:
        ws.staged_edits(sid)
    assert err.value.code == "UNKNOWN_STAGING"
    with pytest.raises(StoreError) as err:
        ws.commit(sid)
    assert err.value.code == "UNKNOWN_STAGING"


def test_unknown_snapshot(ws):
    with pytest.raises(StoreError) as err:
        ws.snapshot(42)
    assert err.value.code == "UNKNOWN_SNAPSHOT"
    with pytest.raises(StoreError) as err:
        ws.diff(0, 42, ARCHITECTURE_DOC)
    assert err.value.code == "UNKNOWN_SNAPSHOT"


def test_stage_rejects_illegal_path(ws):
    with pytest.raises(StoreError):
        ws.stage_edits({"journal/CURRENT": "9"})
    assert ws.staging_ids() == []


class _Crash(RuntimeError):
    pass


def _crash_at(label: str):
    def hook(point: str):
        if point == label:
            raise _Crash(point)

    return hook


def _state(ws: Workspace) -> str | None:
    return ws.read_artifact(ARCHITECTURE_DOC)


@pytest.mark.parametrize(
    "label,expect_new",
    [
        ("before-snapshot", False),
        ("after-snapshot", True),
        (f"after-live:{ARCHITECTURE_DOC}", True),
        ("before-current", True),
        ("after-current", True),
    ],
)
def test_crash_recovery_old_or_new(tmp_path, label, expect_new):
    ws = Workspace.create(tmp_path / "w")
    base = ws.stage_edits({ARCHITECTURE_DOC: ARCH_V1, iteration_doc(1): "# Iteration 1\n"})
    ws.commit(base)
    sid = ws.stage_edits({ARCHITECTURE_DOC: ARCH_V2, iteration_doc(2): "# Iteration 2\n"})
    with pytest.raises(_Crash):
        ws.commit(sid, fault_hook=_crash_at(label))
    recovered = Workspace.open(ws.root)
    if expect_new:
        assert _state(recovered) == ARCH_V2
        assert recovered.read_artifact(iteration_doc(2)) == "# Iteration 2\n"
        assert recovered.current_snapshot_id() == 2
    else:
        assert _state(recovered) == ARCH_V1
        assert recovered.read_artifact(iteration_doc(2)) is None
        assert recovered.current_snapshot_id() == 1
    # never a mix: both edited artifacts agree on the version
    arch = _state(recovered)
    it2 = recovered.read_artifact(iteration_doc(2))
    assert (arch == ARCH_V2 and it2 == "# Iteration 2\n") or (arch == ARCH_V1 and it2 is None)


def test_crash_mid_live_leaves_no_mix_after_open(tmp_path):
    ws = Workspace.create(tmp_path / "w")
    base = ws.stage_edits({"Design/Architecture.md": ARCH_V1, iteration_doc(1): "old\n"})
    ws.commit(base)
    # edits touch two files; crash right after the first live write lands
    sid = ws.stage_edits({"Design/Architecture.md": ARCH_V2, iteration_doc(1): "new\n"})
    with pytest.raises(_Crash):
        ws.commit(sid, fault_hook=_crash_at("after-live:Design/Architecture.md"))
    # before recovery the live tree really is mixed
    assert ws.read_artifact("Design/Architecture.md") == ARCH_V2
    assert ws.read_artifact(iteration_doc(1)) == "old\n"
    recovered = Workspace.open(ws.root)
    assert recovered.read_artifact("Design/Architecture.md") == ARCH_V2
    assert recovered.read_artifact(iteration_doc(1)) == "new\n"
    assert recovered.current_snapshot_id() == 2


def test_recovery_is_idempotent(tmp_path):
    ws = Workspace.create(tmp_path / "w")
    sid = ws.stage_edits({ARCHITECTURE_DOC: ARCH_V1})
    with pytest.raises(_Crash):
        ws.commit(sid, fault_hook=_crash_at("before-current"))
    first = Workspace.open(ws.root)
    second = Workspace.open(ws.root)
    assert first.current_snapshot_id() == second.current_snapshot_id() == 1
    assert second.read_artifact(ARCHITECTURE_DOC) == ARCH_V1


def test_open_does_not_clobber_hand_edits(tmp_path):
    ws = Workspace.create(tmp_path / "w")
    ws.write_artifact(DRIVERS_DOC, "# Drivers\n\nhand edited\n")
    again = Workspace.open(ws.root)
    assert again.read_artifact(DRIVERS_DOC) == "# Drivers\n\nhand edited\n"


def test_incomplete_snapshot_dir_is_cleaned(tmp_path):
    ws = Workspace.create(tmp_path / "w")
    junk = ws.root / "journal" / "snapshots" / "0007"
    junk.mkdir(parents=True)
    (junk / "files").mkdir()
    tmp = ws.root / "journal" / "snapshots" / ".tmp-0008"
    tmp.mkdir()
    again = Workspace.open(ws.root)
    assert not junk.exists()
    assert not tmp.exists()
    assert again.current_snapshot_id() == 0


def test_diff_decisions_row_annotated(ws):
    a = ws.stage_edits({ARCHITECTURE_DOC: ARCH_V1})
    ws.commit(a)
    b = ws.stage_edits({ARCHITECTURE_DOC: ARCH_V2})
    ws.commit(b)
    diff = ws.diff(1, 2, ARCHITECTURE_DOC)
    assert len(diff.hunks) == 1
    hunk = diff.hunks[0]
    assert hunk.new_lines == ["| QA-2 | Queue per tenant | isolates load spikes | shared queue |"]
    assert hunk.old_lines == []
    assert hunk.section == "design-decisions"


def test_diff_identical_is_empty(ws):
    a = ws.stage_edits({ARCHITECTURE_DOC: ARCH_V1})
    ws.commit(a)
    diff = ws.diff(1, 1, ARCHITECTURE_DOC)
    assert diff.empty


def test_diff_missing_artifact_is_pure_insert(ws):
    a = ws.stage_edits({ARCHITECTURE_DOC: ARCH_V1})
    ws.commit(a)
    diff = ws.diff(0, 1, ARCHITECTURE_DOC)
    assert len(diff.hunks) == 1
    assert diff.hunks[0].old_lines == []
    assert diff.hunks[0].new_lines == ARCH_V1.split("\n")


def test_diff_texts_sections_follow_change_location():
    old = "## 1. System Context\n\nold context\n\n## 4. Container Diagram\n\nweb and db\n"
    new = "## 1. System Context\n\nnew context\n\n## 4. Container Diagram\n\nweb, db and cache\n"
    diff = diff_texts(old, new, artifact="Design/Architecture.md")
    assert [h.section for h in diff.hunks] == ["context-diagram", "container-diagram"]


def test_diff_plain_artifact_has_no_sections():
    diff = diff_texts("a\n", "b\n", artifact="Design/Iteration1.md")
    assert [h.section for h in diff.hunks] == [None]


def test_manifest_is_valid_json(ws):
    sid = ws.stage_edits({ARCHITECTURE_DOC: ARCH_V1})
    snap = ws.commit(sid)
    manifest = ws.root / "journal" / "snapshots" / "0001" / "manifest.json"
    data = json.loads(manifest.read_text(encoding="utf-8"))
    assert data["id"] == snap.id
    assert data["digests"] == snap.digests
