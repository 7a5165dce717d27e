"""Prompt library, rendering and context assembly."""

import pytest

from addflow.docmodel import SectionKind, parse_architecture_document
from addflow.errors import PromptError
from addflow.prompts import (
    BASELINE_MODES,
    TEMPLATE_IDS,
    ContextBundle,
    PersonaSpec,
    PromptLibrary,
    PromptTemplate,
    assemble_context,
    baseline_prompt,
    render_template,
)

LIB = PromptLibrary.default()


def test_every_template_loads_nonempty():
    for tid in TEMPLATE_IDS:
        assert LIB.template(tid).body.strip(), tid


def test_unknown_template_rejected():
    with pytest.raises(PromptError) as err:
        LIB.template("nonsense")
    assert err.value.code == "UNKNOWN_TEMPLATE"


def test_iterate_start_binds_iteration_number():
    text = LIB.render("iterate-start", {"iteration": "1"})
    assert "At the end of each step you will pause" in text
    assert "Iteration1.md" in text
    assert "{{" not in text


def test_missing_binding_raises():
    with pytest.raises(PromptError) as err:
        LIB.render("iterate-start")
    assert err.value.code == "MISSING_BINDING"


def test_domain_model_variants():
    ddd = LIB.render("domain-model-ddd")
    plain = LIB.render("domain-model-plain")
    assert "create a domain model for the system using DDD" in ddd
    assert "DDD" not in plain
    assert "class diagram using mermaid format" in plain


def test_repair_carries_feedback_verbatim():
    comment = "use enhanced API gateway instead of service mesh"
    text = LIB.render("repair", {"feedback": comment})
    assert comment in text


def test_step_advance_names_both_documents():
    text = LIB.render(
        "step-advance",
        {"step": "5", "step_title": "Instantiate Architectural Elements", "iteration": "2"},
    )
    assert "step 5 (Instantiate Architectural Elements)" in text
    assert "Iteration2.md" in text
    assert "Architecture.md" in text


def test_rendering_is_deterministic():
    a = LIB.render("skeleton")
    b = LIB.render("skeleton")
    assert a == b


def test_render_empty_template_body():
    assert render_template(PromptTemplate("x", ""), {}) == ""


def test_baseline_prompts():
    zero = baseline_prompt(LIB, "zero-shot")
    assert "If you include diagrams, use mermaid syntax." in zero
    assert "Architecture.md in the @Design folder" in zero
    instr = baseline_prompt(LIB, "template-instructions")
    assert 'Carefully read the lines that start with "Instructions:"' in instr
    with pytest.raises(PromptError):
        baseline_prompt(LIB, "one-shot")
    assert set(BASELINE_MODES) == {"zero-shot", "empty-template", "template-instructions"}


def test_baseline_template_docs():
    assert LIB.baseline_template_doc("zero-shot") is None
    empty = LIB.baseline_template_doc("empty-template")
    doc = parse_architecture_document(empty)
    assert set(doc.sections) == set(SectionKind)
    instr = LIB.baseline_template_doc("template-instructions")
    doc = parse_architecture_document(instr)
    assert doc.decisions_table() is not None
    assert "Instructions:" in doc.section(SectionKind.SEQUENCE_DIAGRAMS).prose


def test_persona_fields():
    persona = LIB.persona()
    assert persona.name == "Software Architect"
    assert persona.role == "Lead Solution Architect"
    assert len(persona.responsibilities) >= 4
    assert "UML" in persona.key_competencies
    assert persona.raw.startswith("agent_specification:")


def test_invalid_persona_rejected():
    with pytest.raises(PromptError) as err:
        PersonaSpec.parse("agent_specification:\n  metadata:\n    name: X\n")
    assert err.value.code == "INVALID_PERSONA"
    with pytest.raises(PromptError):
        PersonaSpec.parse(":\n -")


def test_process_description_covers_steps_2_to_7():
    text = LIB.process_description()
    for step in range(2, 8):
        assert f"Step {step}:" in text
    assert "Step 1:" not in text
    assert "|Selected design concept|Rationale|Discarded Alternatives|" in text
    assert "|Instantiation decision|Rationale|" in text


def test_workspace_file_overrides_packaged(tmp_path):
    (tmp_path / "review-drivers.md").write_text("custom review text\n")
    lib = PromptLibrary(tmp_path)
    assert lib.render("review-drivers") == "custom review text"
    # untouched templates still come from the package
    assert "using DDD" in lib.render("domain-model-ddd")


ITEMS = [
    ("Design/Iteration2.md", "r" * 100),
    ("Design/Architecture.md#container-diagram", "a" * 200),
    ("drivers:iteration", "d" * 50),
    ("drivers:rest", "x" * 50),
]


def _bundle(budget, mandatory=1):
    return assemble_context(
        persona="P" * 10,
        process_description="Q" * 20,
        items=ITEMS,
        budget=budget,
        mandatory_items=mandatory,
    )


def test_no_truncation_under_large_budget():
    bundle = _bundle(10_000)
    assert [i.truncated for i in bundle.items] == [False] * 4
    assert bundle.total_size() == 10 + 20 + 400
    assert bundle.persona == "P" * 10


def test_budget_too_small_when_head_does_not_fit():
    with pytest.raises(PromptError) as err:
        _bundle(100)
    assert err.value.code == "BUDGET_TOO_SMALL"


def test_truncation_cuts_only_the_tail():
    # head (30) + item1 (100) + item2 (200) fit exactly; item3 is cut to zero
    bundle = _bundle(330)
    assert not bundle.items[0].truncated
    assert not bundle.items[1].truncated
    assert bundle.items[2].truncated and bundle.items[2].content == ""
    assert bundle.items[3].truncated and bundle.items[3].content == ""
    # five more characters of budget land at the head of item3
    bundle = _bundle(335)
    assert bundle.items[2].content == "d" * 5


def test_smaller_budget_yields_prefix_of_larger():
    small = _bundle(340)
    large = _bundle(380)
    joined_small = "".join(i.content for i in small.items)
    joined_large = "".join(i.content for i in large.items)
    assert joined_large.startswith(joined_small)


def test_bundle_item_lookup():
    bundle = _bundle(10_000)
    assert bundle.item("drivers:rest").content == "x" * 50
    assert bundle.item("nope") is None
    assert isinstance(bundle, ContextBundle)
