"""On-disk workspace: artifacts, staged edits, gate snapshots and diffs.

Layout under the workspace root:

    ArchitecturalDrivers.md        drivers document (plus optional Drivers/*.md)
    AttributeDrivenDesign.md       process description given to the model
    Design/                        DomainModel / IterationPlan / Architecture /
                                   Iteration<N> documents
    prompts/                       prompt templates and persona
    add.config.json                workspace configuration
    journal/staging/<id>/          staged edits awaiting a gate
    journal/snapshots/<id>/        full-file snapshot per approve gate
    journal/CURRENT                id of the last committed snapshot

Commits are crash-safe: the snapshot directory is written first and renamed
into place, then live files are swapped one by one, then CURRENT advances.
Reopening a workspace rolls forward to the newest complete snapshot, so an
interrupted commit resolves to fully-old or fully-new content, never a mix.
"""

from __future__ import annotations

import hashlib
import json
import re
import shutil
import time
from dataclasses import asdict, dataclass, field
from difflib import SequenceMatcher
from pathlib import Path
from typing import Callable, Mapping

from .docmodel import SectionKind, classify_heading
from .docmodel.markdown import _ATX_HEADING_RE, _NUMBERED_HEADING_RE
from .errors import ConfigError, StoreError
from .prompts import DEFAULT_CONTEXT_BUDGET, _packaged, install_prompt_files

CONFIG_NAME = "add.config.json"
PROCESS_DOC_NAME = "AttributeDrivenDesign.md"
DRIVERS_DOC = "ArchitecturalDrivers.md"
ARCHITECTURE_DOC = "Design/Architecture.md"
DOMAIN_MODEL_DOC = "Design/DomainModel.md"
ITERATION_PLAN_DOC = "Design/IterationPlan.md"

_ITERATION_DOC_RE = re.compile(r"^Design/Iteration([1-9]\d*)\.md$")
_EXTRA_DRIVERS_RE = re.compile(r"^Drivers/[A-Za-z0-9._\- ]+\.md$")
_FIXED_ARTIFACTS = (DRIVERS_DOC, DOMAIN_MODEL_DOC, ITERATION_PLAN_DOC, ARCHITECTURE_DOC)


def iteration_doc(n: int) -> str:
    return f"Design/Iteration{n}.md"


def is_legal_artifact(name: str) -> bool:
    if name in _FIXED_ARTIFACTS:
        return True
    return bool(_ITERATION_DOC_RE.match(name) or _EXTRA_DRIVERS_RE.match(name))


def _digest(content: str) -> str:
    return hashlib.sha256(content.encode("utf-8")).hexdigest()


def _utc_now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


@dataclass
class WorkspaceConfig:
    model_id: str = "gpt-4o"
    temperature: float = 0.0
    context_budget: int = DEFAULT_CONTEXT_BUDGET
    rule_severity: dict[str, str] = field(default_factory=dict)
    prompts_dir: str = "prompts"
    domain_model_style: str = "ddd"  # "ddd" | "plain"

    @classmethod
    def load(cls, path: Path) -> "WorkspaceConfig":
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path} is not valid JSON: {exc}", code="INVALID_CONFIG")
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in data.items() if k in known})

    def save(self, path: Path) -> None:
        path.write_text(json.dumps(asdict(self), indent=2) + "\n", encoding="utf-8")


@dataclass
class Snapshot:
    id: int
    digests: dict[str, str]
    gate: dict | None = None
    created: str = ""


@dataclass
class DiffHunk:
    old_start: int  # 1-based first line of the hunk in the old text
    new_start: int
    old_lines: list[str]
    new_lines: list[str]
    section: str | None = None


@dataclass
class ArtifactDiff:
    artifact: str
    from_snapshot: int
    to_snapshot: int
    hunks: list[DiffHunk]

    @property
    def empty(self) -> bool:
        return not self.hunks


def _atomic_write(path: Path, content: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(content, encoding="utf-8")
    tmp.replace(path)


def _section_line_map(text: str) -> list[str | None]:
    """Section kind value per line, for diff annotation."""
    current: str | None = None
    out: list[str | None] = []
    for line in text.split("\n"):
        m = _ATX_HEADING_RE.match(line) or _NUMBERED_HEADING_RE.match(line)
        if m:
            kind = classify_heading(m.group(2))
            if kind is not None:
                current = kind.value
        out.append(current)
    return out


FaultHook = Callable[[str], None]


class Workspace:
    """Single-writer workspace store."""

    def __init__(self, root: Path, config: WorkspaceConfig):
        self.root = Path(root)
        self.config = config

    # -- creation / opening -------------------------------------------------

    @classmethod
    def create(
        cls,
        root: Path,
        *,
        domain_model_style: str = "ddd",
        clock: Callable[[], str] | None = None,
    ) -> "Workspace":
        root = Path(root)
        config_path = root / CONFIG_NAME
        if config_path.exists():
            raise ConfigError(f"workspace already initialized at {root}", code="WORKSPACE_EXISTS")
        if domain_model_style not in ("ddd", "plain"):
            raise ConfigError(
                f"domain model style must be ddd or plain, got {domain_model_style!r}",
                code="INVALID_CONFIG",
            )
        (root / "Design").mkdir(parents=True, exist_ok=True)
        (root / "journal" / "staging").mkdir(parents=True, exist_ok=True)
        (root / "journal" / "snapshots").mkdir(parents=True, exist_ok=True)
        config = WorkspaceConfig(domain_model_style=domain_model_style)
        config.save(config_path)
        ws = cls(root, config)
        install_prompt_files(root / config.prompts_dir)
        process_doc = root / PROCESS_DOC_NAME
        if not process_doc.exists():
            process_doc.write_text(_packaged(PROCESS_DOC_NAME), encoding="utf-8")
        drivers = root / DRIVERS_DOC
        if not drivers.exists():
            drivers.write_text(
                _packaged("ArchitecturalDrivers.template.md"), encoding="utf-8"
            )
        ws._write_snapshot(0, ws._live_contents(), gate=None, created=(clock or _utc_now)())
        ws._set_current(0)
        return ws

    @classmethod
    def open(cls, root: Path) -> "Workspace":
        root = Path(root)
        config_path = root / CONFIG_NAME
        if not config_path.is_file():
            raise ConfigError(f"no workspace at {root} (missing {CONFIG_NAME})", code="NO_WORKSPACE")
        ws = cls(root, WorkspaceConfig.load(config_path))
        ws._recover()
        return ws

    # -- artifact access ----------------------------------------------------

    def artifact_path(self, name: str) -> Path:
        if not is_legal_artifact(name):
            raise StoreError(f"illegal artifact path {name!r}", code="ILLEGAL_PATH")
        path = (self.root / name).resolve()
        if not path.is_relative_to(self.root.resolve()):
            raise StoreError(f"path escapes the workspace: {name!r}", code="ILLEGAL_PATH")
        return path

    def read_artifact(self, name: str) -> str | None:
        path = self.artifact_path(name)
        return path.read_text(encoding="utf-8") if path.is_file() else None

    def write_artifact(self, name: str, content: str) -> None:
        """Direct un-gated write; session edits go through staging instead."""
        path = self.artifact_path(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        _atomic_write(path, content)

    def list_artifacts(self) -> list[str]:
        names: list[str] = []
        for fixed in _FIXED_ARTIFACTS:
            if (self.root / fixed).is_file():
                names.append(fixed)
        design = self.root / "Design"
        if design.is_dir():
            iteration_names = []
            for p in design.iterdir():
                rel = f"Design/{p.name}"
                m = _ITERATION_DOC_RE.match(rel)
                if m:
                    iteration_names.append((int(m.group(1)), rel))
            names.extend(rel for _, rel in sorted(iteration_names))
        extra = self.root / "Drivers"
        if extra.is_dir():
            names.extend(
                sorted(
                    f"Drivers/{p.name}"
                    for p in extra.iterdir()
                    if _EXTRA_DRIVERS_RE.match(f"Drivers/{p.name}")
                )
            )
        return names

    def _live_contents(self) -> dict[str, str]:
        return {name: self.read_artifact(name) or "" for name in self.list_artifacts()}

    # -- staging ------------------------------------------------------------

    @property
    def _staging_root(self) -> Path:
        return self.root / "journal" / "staging"

    def stage_edits(self, edits: Mapping[str, str]) -> str:
        for name in edits:
            self.artifact_path(name)  # validates
        self._staging_root.mkdir(parents=True, exist_ok=True)
        existing = [
            int(p.name[1:])
            for p in self._staging_root.iterdir()
            if re.fullmatch(r"s\d{4}", p.name)
        ]
        staging_id = f"s{(max(existing) + 1 if existing else 1):04d}"
        staging_dir = self._staging_root / staging_id
        staging_dir.mkdir()
        for name, content in edits.items():
            target = staging_dir / name
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(content, encoding="utf-8")
        (staging_dir / ".complete").write_text("", encoding="utf-8")
        return staging_id

    def staging_ids(self) -> list[str]:
        if not self._staging_root.is_dir():
            return []
        return sorted(p.name for p in self._staging_root.iterdir() if (p / ".complete").is_file())

    def staged_edits(self, staging_id: str) -> dict[str, str]:
        staging_dir = self._staging_root / staging_id
        if not (staging_dir / ".complete").is_file():
            raise StoreError(f"unknown staging id {staging_id!r}", code="UNKNOWN_STAGING")
        out: dict[str, str] = {}
        for path in sorted(staging_dir.rglob("*")):
            if path.is_file() and path.name != ".complete":
                out[path.relative_to(staging_dir).as_posix()] = path.read_text(encoding="utf-8")
        return out

    def discard(self, staging_id: str) -> None:
        staging_dir = self._staging_root / staging_id
        if not (staging_dir / ".complete").is_file():
            raise StoreError(f"unknown staging id {staging_id!r}", code="UNKNOWN_STAGING")
        shutil.rmtree(staging_dir)

    # -- snapshots and commits ----------------------------------------------

    @property
    def _snapshots_root(self) -> Path:
        return self.root / "journal" / "snapshots"

    def _snapshot_dir(self, snapshot_id: int) -> Path:
        return self._snapshots_root / f"{snapshot_id:04d}"

    def _complete_snapshot_ids(self) -> list[int]:
        if not self._snapshots_root.is_dir():
            return []
        ids = []
        for p in self._snapshots_root.iterdir():
            if p.name.isdigit() and (p / "manifest.json").is_file():
                ids.append(int(p.name))
        return sorted(ids)

    def current_snapshot_id(self) -> int:
        marker = self.root / "journal" / "CURRENT"
        if marker.is_file():
            return int(marker.read_text(encoding="utf-8").strip())
        return 0

    def _set_current(self, snapshot_id: int) -> None:
        _atomic_write(self.root / "journal" / "CURRENT", f"{snapshot_id}\n")

    def _write_snapshot(
        self, snapshot_id: int, contents: Mapping[str, str], *, gate: dict | None, created: str
    ) -> Snapshot:
        tmp = self._snapshots_root / f".tmp-{snapshot_id:04d}"
        if tmp.exists():
            shutil.rmtree(tmp)
        files_dir = tmp / "files"
        files_dir.mkdir(parents=True, exist_ok=True)
        for name, content in contents.items():
            target = files_dir / name
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(content, encoding="utf-8")
        snapshot = Snapshot(
            id=snapshot_id,
            digests={name: _digest(content) for name, content in sorted(contents.items())},
            gate=gate,
            created=created,
        )
        (tmp / "manifest.json").write_text(
            json.dumps(asdict(snapshot), indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )
        final = self._snapshot_dir(snapshot_id)
        if final.exists():
            shutil.rmtree(final)
        tmp.rename(final)
        return snapshot

    def snapshots(self) -> list[Snapshot]:
        return [self.snapshot(sid) for sid in self._complete_snapshot_ids()]

    def snapshot(self, snapshot_id: int) -> Snapshot:
        manifest = self._snapshot_dir(snapshot_id) / "manifest.json"
        if not manifest.is_file():
            raise StoreError(f"unknown snapshot {snapshot_id}", code="UNKNOWN_SNAPSHOT")
        data = json.loads(manifest.read_text(encoding="utf-8"))
        return Snapshot(
            id=data["id"], digests=data["digests"], gate=data.get("gate"), created=data.get("created", "")
        )

    def snapshot_content(self, snapshot_id: int, artifact: str) -> str | None:
        if not (self._snapshot_dir(snapshot_id) / "manifest.json").is_file():
            raise StoreError(f"unknown snapshot {snapshot_id}", code="UNKNOWN_SNAPSHOT")
        path = self._snapshot_dir(snapshot_id) / "files" / artifact
        return path.read_text(encoding="utf-8") if path.is_file() else None

    def commit(
        self,
        staging_id: str,
        *,
        gate: dict | None = None,
        fault_hook: FaultHook | None = None,
        clock: Callable[[], str] | None = None,
    ) -> Snapshot:
        hook = fault_hook or (lambda label: None)
        edits = self.staged_edits(staging_id)
        contents = self._live_contents()
        contents.update(edits)
        snapshot_id = self.current_snapshot_id() + 1

        hook("before-snapshot")
        snapshot = self._write_snapshot(
            snapshot_id, contents, gate=gate, created=(clock or _utc_now)()
        )
        hook("after-snapshot")

        for name in sorted(edits):
            path = self.artifact_path(name)
            path.parent.mkdir(parents=True, exist_ok=True)
            _atomic_write(path, edits[name])
            hook(f"after-live:{name}")

        hook("before-current")
        self._set_current(snapshot_id)
        hook("after-current")

        shutil.rmtree(self._staging_root / staging_id)
        return snapshot

    def _recover(self) -> None:
        # clear half-written snapshot directories
        if self._snapshots_root.is_dir():
            for p in list(self._snapshots_root.iterdir()):
                if p.name.startswith(".tmp-"):
                    shutil.rmtree(p)
                elif p.name.isdigit() and not (p / "manifest.json").is_file():
                    shutil.rmtree(p)
        complete = self._complete_snapshot_ids()
        if not complete:
            return
        newest = complete[-1]
        if newest <= self.current_snapshot_id():
            return
        # an interrupted commit: finish rolling the live files forward
        snapshot_files = self._snapshot_dir(newest) / "files"
        manifest = self.snapshot(newest)
        for name, digest in manifest.digests.items():
            live = self.artifact_path(name)
            if live.is_file() and _digest(live.read_text(encoding="utf-8")) == digest:
                continue
            stored = snapshot_files / name
            live.parent.mkdir(parents=True, exist_ok=True)
            _atomic_write(live, stored.read_text(encoding="utf-8") if stored.is_file() else "")
        self._set_current(newest)

    # -- diffs ----------------------------------------------------------------

    def diff(self, from_snapshot: int, to_snapshot: int, artifact: str) -> ArtifactDiff:
        old = self.snapshot_content(from_snapshot, artifact) or ""
        new = self.snapshot_content(to_snapshot, artifact) or ""
        return diff_texts(
            old, new, artifact=artifact, from_snapshot=from_snapshot, to_snapshot=to_snapshot
        )


def diff_texts(
    old: str,
    new: str,
    *,
    artifact: str = "",
    from_snapshot: int = -1,
    to_snapshot: int = -1,
) -> ArtifactDiff:
    """Per-line diff hunks; architecture-document hunks carry a section label."""
    old_lines = old.split("\n") if old else []
    new_lines = new.split("\n") if new else []
    annotate = artifact.endswith("Architecture.md")
    old_map = _section_line_map(old) if annotate else []
    new_map = _section_line_map(new) if annotate else []
    hunks: list[DiffHunk] = []
    matcher = SequenceMatcher(None, old_lines, new_lines, autojunk=False)
    for group in matcher.get_grouped_opcodes(0):
        i1 = group[0][1]
        i2 = group[-1][2]
        j1 = group[0][3]
        j2 = group[-1][4]
        section = None
        if annotate:
            if j1 < j2:
                section = new_map[j1]
            elif i1 < i2:
                section = old_map[i1]
        hunks.append(
            DiffHunk(
                old_start=i1 + 1,
                new_start=j1 + 1,
                old_lines=old_lines[i1:i2],
                new_lines=new_lines[j1:j2],
                section=section,
            )
        )
    return ArtifactDiff(
        artifact=artifact, from_snapshot=from_snapshot, to_snapshot=to_snapshot, hunks=hunks
    )
