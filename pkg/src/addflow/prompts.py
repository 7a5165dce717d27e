"""Prompt templates, persona handling and context-bundle assembly.

Templates are plain text files with ``{{name}}`` placeholders. A library
loads them from a workspace ``prompts/`` directory when one exists and
falls back to the copies packaged under ``addflow/data``. Context bundles
hold the material attached to a model call in a fixed priority order;
when the character budget is exceeded, content is cut from the tail of
the lowest-priority item, never from the head of the bundle.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import yaml

from .errors import PromptError

TEMPLATE_IDS: tuple[str, ...] = (
    "review-drivers",
    "domain-model-ddd",
    "domain-model-plain",
    "iteration-plan",
    "skeleton",
    "iterate-start",
    "step-advance",
    "repair",
    "baseline-zero-shot",
    "baseline-empty-template",
    "baseline-template-instructions",
)

BASELINE_MODES: dict[str, str] = {
    "zero-shot": "baseline-zero-shot",
    "empty-template": "baseline-empty-template",
    "template-instructions": "baseline-template-instructions",
}

# baseline modes that attach an architecture template document to the bundle
BASELINE_TEMPLATE_DOCS: dict[str, str] = {
    "empty-template": "ArchitectureTemplate.md",
    "template-instructions": "ArchitectureTemplateInstructions.md",
}

DEFAULT_CONTEXT_BUDGET = 120_000

_PLACEHOLDER_RE = re.compile(r"\{\{([A-Za-z_][\w-]*)\}\}")


@dataclass
class PromptTemplate:
    id: str
    body: str

    @property
    def placeholders(self) -> set[str]:
        return {m.group(1) for m in _PLACEHOLDER_RE.finditer(self.body)}


def render_template(template: PromptTemplate, bindings: Mapping[str, str]) -> str:
    """Substitute every placeholder; unknown names in *bindings* are ignored."""
    missing = template.placeholders - set(bindings)
    if missing:
        raise PromptError(
            f"template {template.id!r} is missing bindings for: {', '.join(sorted(missing))}",
            code="MISSING_BINDING",
        )
    return _PLACEHOLDER_RE.sub(lambda m: str(bindings[m.group(1)]), template.body)


@dataclass
class BundleItem:
    artifact_name: str
    content: str
    truncated: bool = False


@dataclass
class ContextBundle:
    items: list[BundleItem] = field(default_factory=list)
    persona: str = ""
    process_description: str | None = None

    def total_size(self) -> int:
        size = len(self.persona) + len(self.process_description or "")
        return size + sum(len(i.content) for i in self.items)

    def item(self, artifact_name: str) -> BundleItem | None:
        for i in self.items:
            if i.artifact_name == artifact_name:
                return i
        return None


@dataclass
class PersonaSpec:
    name: str
    version: str
    description: str
    domain: str
    expertise_level: str
    role: str
    responsibilities: list[str]
    key_competencies: list[str]
    raw: str  # file text, attached to bundles verbatim

    @classmethod
    def parse(cls, text: str) -> "PersonaSpec":
        try:
            data = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise PromptError(f"persona file is not valid YAML: {exc}", code="INVALID_PERSONA")
        spec = data.get("agent_specification", {}) if isinstance(data, dict) else {}
        meta = spec.get("metadata", {}) or {}
        identity = spec.get("identity", {}) or {}
        persona = cls(
            name=str(meta.get("name", "") or ""),
            version=str(meta.get("version", "") or ""),
            description=str(meta.get("description", "") or ""),
            domain=str(meta.get("domain", "") or ""),
            expertise_level=str(meta.get("expertise_level", "") or ""),
            role=str(identity.get("role", "") or ""),
            responsibilities=[str(r) for r in identity.get("responsibilities", []) or []],
            key_competencies=[str(k) for k in identity.get("key_competencies", []) or []],
            raw=text,
        )
        if not persona.name or not persona.role or not persona.responsibilities:
            raise PromptError(
                "persona must declare a name, a role and at least one responsibility",
                code="INVALID_PERSONA",
            )
        return persona


def _packaged(relative: str) -> str:
    node = resources.files("addflow").joinpath("data")
    for part in relative.split("/"):
        node = node.joinpath(part)
    return node.read_text(encoding="utf-8")


class PromptLibrary:
    """Loads templates, persona and the process description.

    ``prompts_dir`` (the workspace copy) wins over the packaged defaults
    file by file, so a workspace can override a single template.
    """

    def __init__(self, prompts_dir: Path | None = None):
        self.prompts_dir = prompts_dir

    @classmethod
    def default(cls) -> "PromptLibrary":
        return cls(None)

    def _read(self, name: str, packaged_path: str) -> str:
        if self.prompts_dir is not None:
            candidate = self.prompts_dir / name
            if candidate.is_file():
                return candidate.read_text(encoding="utf-8")
        return _packaged(packaged_path)

    def template(self, template_id: str) -> PromptTemplate:
        if template_id not in TEMPLATE_IDS:
            raise PromptError(f"unknown template id {template_id!r}", code="UNKNOWN_TEMPLATE")
        body = self._read(f"{template_id}.md", f"prompts/{template_id}.md")
        return PromptTemplate(template_id, body.rstrip("\n"))

    def render(self, template_id: str, bindings: Mapping[str, str] | None = None) -> str:
        return render_template(self.template(template_id), bindings or {})

    def persona(self) -> PersonaSpec:
        return PersonaSpec.parse(self._read("persona.yaml", "persona.yaml"))

    def process_description(self) -> str:
        return self._read("AttributeDrivenDesign.md", "AttributeDrivenDesign.md")

    def baseline_template_doc(self, mode: str) -> str | None:
        doc = BASELINE_TEMPLATE_DOCS.get(mode)
        if doc is None:
            return None
        return self._read(doc, f"templates/{doc}")


def baseline_prompt(library: PromptLibrary, mode: str) -> str:
    if mode not in BASELINE_MODES:
        raise PromptError(f"unknown baseline mode {mode!r}", code="UNKNOWN_TEMPLATE")
    return library.render(BASELINE_MODES[mode])


def assemble_context(
    *,
    persona: str,
    process_description: str | None,
    items: Sequence[tuple[str, str]],
    budget: int = DEFAULT_CONTEXT_BUDGET,
    mandatory_items: int = 0,
) -> ContextBundle:
    """Build a bundle from (artifact_name, content) pairs in priority order.

    The persona and process description are always included whole. The
    first *mandatory_items* entries must also fit whole, otherwise
    BUDGET_TOO_SMALL is raised. Remaining entries are cut from the tail
    once the character budget runs out, and cut items are flagged.
    """
    head = len(persona) + len(process_description or "")
    mandatory = head + sum(len(content) for _, content in items[:mandatory_items])
    if mandatory > budget:
        raise PromptError(
            f"context budget {budget} cannot fit the persona, process description "
            f"and current iteration record ({mandatory} chars)",
            code="BUDGET_TOO_SMALL",
        )
    remaining = budget - head
    bundle_items: list[BundleItem] = []
    for name, content in items:
        if len(content) <= remaining:
            bundle_items.append(BundleItem(name, content))
            remaining -= len(content)
        else:
            bundle_items.append(BundleItem(name, content[:remaining], truncated=True))
            remaining = 0
    return ContextBundle(
        items=bundle_items,
        persona=persona,
        process_description=process_description,
    )


def install_prompt_files(target_dir: Path) -> list[str]:
    """Copy the packaged prompt/persona/template files into *target_dir*.

    Returns the relative names written. Existing files are left alone so a
    re-init never clobbers local edits.
    """
    names: list[str] = [f"prompts/{tid}.md" for tid in TEMPLATE_IDS]
    names += [
        "persona.yaml",
        "templates/ArchitectureTemplate.md",
        "templates/ArchitectureTemplateInstructions.md",
    ]
    written: list[str] = []
    for name in names:
        flat = name.split("/", 1)[1] if "/" in name else name
        dest = target_dir / flat
        if dest.exists():
            continue
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_text(_packaged(name), encoding="utf-8")
        written.append(flat)
    return written


def iter_template_bodies() -> Iterable[tuple[str, str]]:
    for tid in TEMPLATE_IDS:
        yield tid, _packaged(f"prompts/{tid}.md")
