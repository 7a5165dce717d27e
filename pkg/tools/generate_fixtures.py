#!/usr/bin/env python3
"""Regenerate the committed session fixtures under tests/fixtures.

Three deterministic scripted sessions run over the hotel-pricing drivers
document. The clean run's transcript is committed for replay tests; its
workspace becomes the clean audit corpus. Two variant runs use reviewer
edit-gates to produce histories with journal-visible defects, and four
more corpora are document mutations of the clean copy. Each defect
corpus trips exactly one audit rule.

Usage: python tools/generate_fixtures.py
"""

from __future__ import annotations

import itertools
import json
import re
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from addflow.audit import Corpus, audit  # noqa: E402
from addflow.engine import GateDecision, Session  # noqa: E402
from addflow.gateway import Gateway, Transcript, scripted_transport  # noqa: E402
from addflow.store import ARCHITECTURE_DOC, DRIVERS_DOC, Workspace  # noqa: E402

FIXTURES = REPO / "tests" / "fixtures"
HPS = FIXTURES / "hps"
DEFECTS = FIXTURES / "defects"

DRIVERS_TEXT = (HPS / "ArchitecturalDrivers.md").read_text(encoding="utf-8")
PLAN_TEXT = (HPS / "IterationPlan.md").read_text(encoding="utf-8")

DOMAIN_MODEL = """# Domain Model

```mermaid
classDiagram
    class Hotel
    class RoomType
    class RatePlan
    class Price
    class PricingStrategy
    class User {
        <<actor>>
    }
    Hotel --> RoomType
    RoomType --> Price
    RatePlan --> Price
    PricingStrategy --> Price
    User --> RatePlan
```

| Element | Description |
| --- | --- |
| Hotel | a property whose rooms are priced |
| RoomType | a sellable room category within a hotel |
| RatePlan | named pricing rules and seasonal adjustments |
| Price | the published nightly rate for a room type and date |
| PricingStrategy | the algorithm that derives prices from rate plans |
| User | a manager or administrator acting on the system |
"""

# Per-iteration content. Structure lines go inside the container subgraph,
# external lines after it. Decisions are (driver, decision, rationale,
# discarded alternative) rows appended at step 6.
ITERATIONS = {
    1: {
        "drivers": "CRN-1, CON-6, CON-2, CRN-5, QA-7",
        "elements": ["Hotel Pricing System"],
        "concepts": [
            (
                "Microservice architecture on managed cloud services",
                "matches the cloud-native constraint and lets services deploy independently",
                "modular monolith",
            ),
            (
                "Deployment pipeline per service",
                "automated delivery is needed from the first iteration",
                "shared release train",
            ),
        ],
        "instantiations": [
            (
                "Split pricing and management into separate services behind the gateway",
                "independent scaling and team ownership",
            ),
            (
                "Provision one delivery pipeline per service",
                "a new version reaches production without coupling releases",
            ),
        ],
        "structure": [
            "        GW --> PS[Price Service]",
            "        GW --> MS[Management Service]",
            "        PS --> PDB[(Price Database)]",
            "        MS --> MDB[(Management Database)]",
        ],
        "external": [],
        "components": [],
        "sequences": [],
        "interfaces": [
            ("Price Service", "price calculation and publication"),
            ("Management Service", "hotel, rate and user records"),
        ],
        "decisions": [
            (
                "CRN-1",
                "Microservices behind a single API gateway",
                "establishes a clear initial structure that supports distributed work",
                "modular monolith",
            ),
            (
                "QA-7",
                "Automated delivery pipeline per service",
                "any service reaches production in under an hour",
                "manual release process",
            ),
        ],
        "analysis": (
            "The service split with per-service pipelines addresses CRN-1, CON-6, "
            "CON-2, CRN-5 and QA-7. The iteration goal is met."
        ),
    },
    2: {
        "drivers": "HPS-2, QA-1, QA-2, CON-5",
        "elements": ["Price Service"],
        "concepts": [
            (
                "Asynchronous publication over a message bus",
                "decouples consumer systems and supports exactly-once delivery",
                "synchronous fan-out to consumers",
            ),
            (
                "Transactional outbox",
                "publication survives crashes without duplicate messages",
                "dual writes to store and bus",
            ),
        ],
        "instantiations": [
            (
                "Price changes are stored and relayed from an outbox to the message bus",
                "the write and the publication cannot diverge",
            ),
            (
                "A dedicated publisher delivers bus messages to partner systems over REST",
                "existing partners integrate over HTTPS as constrained",
            ),
        ],
        "structure": [
            "        PS --> BUS[Message Bus]",
            "        BUS --> PUB[Price Publisher]",
        ],
        "external": ["    PUB --> PMS"],
        "components": [
            (
                "Price Service",
                "flowchart LR\n"
                "    PC[Price Calculator] --> PR[Price Repository]\n"
                "    PC --> OB[Outbox Relay]",
            )
        ],
        "sequences": [
            (
                "HPS-2 Change Prices",
                "sequenceDiagram\n"
                "    participant User\n"
                "    participant WEB\n"
                "    participant GW\n"
                "    participant PS\n"
                "    participant BUS\n"
                "    participant PUB\n"
                "    participant PMS\n"
                "    User->>WEB: adjust pricing strategy\n"
                "    WEB->>GW: PUT /prices\n"
                "    GW->>PS: update prices\n"
                "    PS->>BUS: price-changed event\n"
                "    BUS->>PUB: deliver event\n"
                "    PUB->>PMS: push new prices\n"
                "    PS-->>GW: accepted\n"
                "    GW-->>WEB: confirmation",
            )
        ],
        "interfaces": [("Message Bus", "price change event distribution")],
        "decisions": [
            (
                "QA-2",
                "Transactional outbox feeding the message bus",
                "a price change is published exactly once even across failures",
                "direct dual writes",
            ),
            (
                "QA-1",
                "Prices computed at write time and stored ready to serve",
                "queries answer from stored values within the latency budget",
                "computing prices per query",
            ),
        ],
        "analysis": (
            "The outbox and bus cover HPS-2 and QA-2; precomputed prices keep QA-1 "
            "within budget and partners stay on REST per CON-5. Goal met."
        ),
    },
    3: {
        "drivers": "HPS-3, QA-3, QA-4",
        "elements": ["API Gateway", "Price Service"],
        "concepts": [
            (
                "Dedicated read-optimized query service",
                "isolates the query path so it scales independently of writes",
                "serving queries from the write model",
            ),
            (
                "Replicated cache in front of the price store",
                "queries stay available when a single node fails",
                "single shared cache node",
            ),
        ],
        "instantiations": [
            (
                "Queries route to a query service that reads a replicated cache",
                "node loss degrades capacity, not availability",
            ),
            (
                "Cache misses fall back to the price database",
                "correct answers even with a cold cache",
            ),
        ],
        "structure": [
            "        GW --> QS[Query Service]",
            "        QS --> CACHE[(Price Cache)]",
            "        QS --> PDB",
        ],
        "external": [],
        "components": [
            (
                "Query Service",
                "flowchart LR\n"
                "    QH[Query Handler] --> CR[Cache Reader]\n"
                "    QH --> FB[Store Fallback]",
            )
        ],
        "sequences": [
            (
                "HPS-3 Query Prices",
                "sequenceDiagram\n"
                "    participant CAS\n"
                "    participant GW\n"
                "    participant QS\n"
                "    participant CACHE\n"
                "    CAS->>GW: GET /prices?hotel=H1\n"
                "    GW->>QS: query\n"
                "    QS->>CACHE: lookup\n"
                "    CACHE-->>QS: prices\n"
                "    QS-->>GW: prices\n"
                "    GW-->>CAS: 200 OK",
            )
        ],
        "interfaces": [("Query Service", "low-latency price reads")],
        "decisions": [
            (
                "QA-4",
                "Query service scales horizontally behind the gateway",
                "sustains the seasonal tenfold query volume without redesign",
                "vertical scaling of one service",
            ),
            (
                "QA-3",
                "Price cache replicated across nodes",
                "queries survive a single node failure",
                "single cache instance",
            ),
        ],
        "analysis": (
            "The query service with a replicated cache addresses HPS-3, QA-3 and "
            "QA-4. The iteration goal is met."
        ),
    },
    4: {
        "drivers": "HPS-4, HPS-5",
        "elements": ["Management Service"],
        "concepts": [
            (
                "Management module over the relational store",
                "hotel and rate records belong in the approved relational service",
                "separate document store",
            )
        ],
        "instantiations": [
            (
                "Hotel registry and rate plan editor share the management database",
                "one consistent source for administrative records",
            )
        ],
        "structure": [],
        "external": [],
        "components": [
            (
                "Management Service",
                "flowchart LR\n"
                "    HR[Hotel Registry] --> MD[(Management Records)]\n"
                "    RP[Rate Plan Editor] --> MD",
            )
        ],
        "sequences": [
            (
                "HPS-4 Manage Hotels",
                "sequenceDiagram\n"
                "    participant Admin\n"
                "    participant WEB\n"
                "    participant GW\n"
                "    participant MS\n"
                "    Admin->>WEB: register hotel\n"
                "    WEB->>GW: POST /hotels\n"
                "    GW->>MS: create record\n"
                "    MS-->>GW: hotel id\n"
                "    GW-->>WEB: created",
            )
        ],
        "interfaces": [],
        "decisions": [
            (
                "HPS-4",
                "Administrative records kept in the relational management database",
                "simple reporting and referential integrity for hotels and rates",
                "per-feature data silos",
            )
        ],
        "analysis": (
            "Hotel and rate management flows through the management service; HPS-4 "
            "and HPS-5 are covered. Goal met."
        ),
    },
    5: {
        "drivers": "HPS-1, HPS-6, QA-5, CON-1",
        "elements": ["API Gateway", "Web Application"],
        "concepts": [
            (
                "Token-based authentication at the gateway",
                "every request carries a verifiable identity issued by the cloud identity service",
                "per-service session checks",
            ),
            (
                "Responsive single-page web client",
                "one client covers current desktop and mobile browsers",
                "native mobile applications",
            ),
        ],
        "instantiations": [
            (
                "An auth service brokers logins against the cloud identity provider",
                "services never handle raw credentials",
            ),
            (
                "The gateway validates tokens and attributes every change to a user",
                "price changes stay traceable",
            ),
        ],
        "structure": [
            "        GW --> AS[Auth Service]",
        ],
        "external": ["    AS --> IDP"],
        "components": [
            (
                "API Gateway",
                "flowchart LR\n"
                "    RT[Request Router] --> TV[Token Validator]",
            )
        ],
        "sequences": [
            (
                "HPS-1 Log In",
                "sequenceDiagram\n"
                "    participant User\n"
                "    participant WEB\n"
                "    participant GW\n"
                "    participant AS\n"
                "    participant IDP\n"
                "    User->>WEB: open sign-in\n"
                "    WEB->>GW: POST /login\n"
                "    GW->>AS: authenticate\n"
                "    AS->>IDP: verify credentials\n"
                "    IDP-->>AS: identity token\n"
                "    AS-->>GW: session token\n"
                "    GW-->>WEB: signed in",
            )
        ],
        "interfaces": [("Auth Service", "login brokering and token issuance")],
        "decisions": [
            (
                "QA-5",
                "Authorization and user attribution enforced at the gateway",
                "every price change is traceable to an authenticated user",
                "service-local access checks",
            )
        ],
        "analysis": (
            "Login, user management and gateway-enforced authorization cover HPS-1, "
            "HPS-6, QA-5 and CON-1. Goal met."
        ),
    },
    6: {
        "drivers": "QA-6, QA-8, QA-9, CRN-4",
        "elements": ["Price Service", "Monitoring"],
        "concepts": [
            (
                "Pricing strategies as plug-in modules",
                "a new strategy never touches the query path",
                "conditional logic inside the calculator",
            ),
            (
                "Central metrics collection",
                "operators observe change and query rates in near real time",
                "per-service log scraping",
            ),
        ],
        "instantiations": [
            (
                "Strategy plug-ins load behind a stable calculator interface",
                "pricing logic tests run without delivery infrastructure",
            ),
            (
                "Services emit rate and latency metrics to a monitoring service",
                "one place to watch the system",
            ),
        ],
        "structure": [
            "        PS --> MON[Monitoring Service]",
            "        QS --> MON",
        ],
        "external": [],
        "components": [],
        "sequences": [
            (
                "QA-8 Observe price change throughput",
                "sequenceDiagram\n"
                "    participant PS\n"
                "    participant MON\n"
                "    participant WEB\n"
                "    PS->>MON: emit change metric\n"
                "    WEB->>MON: fetch dashboard\n"
                "    MON-->>WEB: rates and latency",
            )
        ],
        "interfaces": [("Monitoring Service", "metrics collection and dashboards")],
        "decisions": [
            (
                "QA-6",
                "Strategy plug-ins isolated from the query path",
                "pricing strategies evolve without redesign",
                "branching inside the calculator",
            ),
            (
                "CRN-4",
                "Every decision records its discarded alternative",
                "technical debt stays visible and deliberate",
                "informal design notes",
            ),
        ],
        "analysis": (
            "Plug-in strategies, isolated pricing tests and central monitoring "
            "address QA-6, QA-8, QA-9 and CRN-4. Goal met."
        ),
    },
}

BASE_INTERFACES = [
    ("API Gateway", "request routing, authentication, rate limiting"),
    ("Web Application", "management and pricing user interface"),
]


def arch_text(upto: int, *, include_structure_of: int | None = None, row_iters=()) -> str:
    """The architecture document after iteration `upto`'s step 5 content.

    `upto` counts iterations whose structural additions are present;
    pass 0 for the skeleton. `row_iters` lists the iterations whose
    decision rows appear.
    """
    if include_structure_of is not None:
        upto = include_structure_of
    structure = []
    external = []
    components = []
    sequences = []
    interfaces = list(BASE_INTERFACES)
    for n in range(1, upto + 1):
        it = ITERATIONS[n]
        structure.extend(it["structure"])
        external.extend(it["external"])
        components.extend(it["components"])
        sequences.extend(it["sequences"])
        interfaces.extend(it["interfaces"])
    rows = []
    for n in row_iters:
        rows.extend(ITERATIONS[n]["decisions"])

    structure_block = "\n" + "\n".join(structure) if structure else ""
    external_block = "\n" + "\n".join(external) if external else ""
    if components:
        component_block = "\n\n".join(
            f"### {heading}\n\n```mermaid\n{body}\n```" for heading, body in components
        )
    else:
        component_block = "Container internals are documented as they are refined."
    if sequences:
        sequence_block = "\n\n".join(
            f"### {heading}\n\n```mermaid\n{body}\n```" for heading, body in sequences
        )
    else:
        sequence_block = "Runtime scenarios are added as the iterations address them."
    interface_rows = "\n".join(f"| {name} | {resp} |" for name, resp in interfaces)
    decision_rows = "\n".join(
        f"| {driver} | {decision} | {rationale} | {alt} |"
        for driver, decision, rationale, alt in rows
    )
    decisions_block = decision_rows + "\n" if decision_rows else ""

    return f"""# Architecture

## 1. Introduction

The Hotel Pricing System computes and publishes room prices for a hotel
chain. This document is the single canonical record of its design.

## 2. Context diagram

```mermaid
flowchart TD
    User[Hotel Manager] --> HPS[Hotel Pricing System]
    Admin[Administrator] --> HPS
    PMS[Property Management System] --> HPS
    CAS[Commercial Analysis System] --> HPS
    HPS --> IDP[Cloud Identity Service]
```

## 3. Architectural drivers

The drivers are maintained in ArchitecturalDrivers.md and are cited here
by id.

## 4. Domain model

The domain entities are described in DomainModel.md.

## 5. Container diagram

```mermaid
flowchart TB
    User[Hotel Manager] --> WEB
    Admin[Administrator] --> WEB
    subgraph HPS[Hotel Pricing System]
        WEB[Web Application] --> GW[API Gateway]{structure_block}
    end
    PMS[Property Management System] --> GW
    CAS[Commercial Analysis System] --> GW
    GW --> IDP[Cloud Identity Service]{external_block}
```

## 6. Component diagrams

{component_block}

## 7. Sequence diagrams

{sequence_block}

## 8. Interfaces

| Container | Responsibilities |
| --- | --- |
{interface_rows}

## 9. Design decisions

| Driver | Decision | Rationale | Discarded alternative |
| --- | --- | --- | --- |
{decisions_block}"""


STEP_HEADINGS = {
    2: "Establish the Iteration Goal by Selecting Drivers",
    3: "Choose One or More Elements of the System to Refine",
    4: "Choose One or More Design Concepts That Satisfy the Selected Drivers",
    5: (
        "Instantiate Architectural Elements, Sketch Views, Allocate "
        "Responsibilities, and Define Interfaces"
    ),
    7: "Perform Analysis of the Current Design and Review the Iteration Goal",
}


def iteration_doc(n: int, upto_step: int, *, include_concept_table: bool = True) -> str:
    it = ITERATIONS[n]
    parts = [f"# Iteration {n}\n"]
    parts.append(f"## Step 2: {STEP_HEADINGS[2]}\n")
    parts.append(f"Drivers addressed in this iteration: {it['drivers']}\n")
    if upto_step >= 3:
        parts.append(f"## Step 3: {STEP_HEADINGS[3]}\n")
        parts.append("\n".join(f"- {e}" for e in it["elements"]) + "\n")
    if upto_step >= 4:
        parts.append(f"## Step 4: {STEP_HEADINGS[4]}\n")
        if include_concept_table:
            rows = "\n".join(f"| {c} | {r} | {d} |" for c, r, d in it["concepts"])
            parts.append(
                "| Selected design concept | Rationale | Discarded Alternatives |\n"
                "| --- | --- | --- |\n" + rows + "\n"
            )
        else:
            parts.append("The concept discussion was captured in the session notes.\n")
    if upto_step >= 5:
        parts.append(f"## Step 5: {STEP_HEADINGS[5]}\n")
        rows = "\n".join(f"| {d} | {r} |" for d, r in it["instantiations"])
        parts.append(
            "| Instantiation decision | Rationale |\n| --- | --- |\n" + rows + "\n"
        )
    if upto_step >= 7:
        parts.append(f"## Step 7: {STEP_HEADINGS[7]}\n")
        parts.append(it["analysis"] + "\n")
    return "\n".join(parts)


def edit(path: str, content: str) -> str:
    return f"````\nfile: {path}\n{content}````\n"


REVIEW_REPLY = (
    "The drivers are complete and consistent. The primary stories HPS-2, HPS-3 "
    "and HPS-4 pair naturally with scenarios QA-1 through QA-5; CON-2 and CON-6 "
    "anchor the platform choice. No clarification questions."
)


def build_script(*, skip_rows_for: set[int] = frozenset()) -> list[str]:
    """All 40 scripted model responses for a six-iteration session.

    `skip_rows_for` names iterations whose decision rows must be absent
    from every LATER state (the model still proposes them in that
    iteration's own step 6; a reviewer edit strips them at the gate).
    """

    def rows_through(n: int, *, include_own: bool) -> list[int]:
        last = n if include_own else n - 1
        return [i for i in range(1, last + 1) if i not in skip_rows_for or (include_own and i == n)]

    script = [
        REVIEW_REPLY,
        "The domain model follows.\n\n" + edit("Design/DomainModel.md", DOMAIN_MODEL),
        edit("Design/IterationPlan.md", PLAN_TEXT),
        edit("Design/Architecture.md", arch_text(0)),
    ]
    for n in range(1, 7):
        arch_s5 = arch_text(n, row_iters=rows_through(n, include_own=False))
        arch_s6 = arch_text(n, row_iters=rows_through(n, include_own=True))
        script += [
            edit(f"Design/Iteration{n}.md", iteration_doc(n, 2)),
            edit(f"Design/Iteration{n}.md", iteration_doc(n, 3)),
            edit(f"Design/Iteration{n}.md", iteration_doc(n, 4)),
            edit(f"Design/Iteration{n}.md", iteration_doc(n, 5))
            + edit("Design/Architecture.md", arch_s5),
            edit("Design/Architecture.md", arch_s6),
            edit(f"Design/Iteration{n}.md", iteration_doc(n, 7)),
        ]
    return script


def make_clock():
    counter = itertools.count()

    def clock() -> str:
        i = next(counter)
        return f"2026-01-01T{i // 3600:02d}:{i // 60 % 60:02d}:{i % 60:02d}Z"

    return clock


def run_session(root: Path, script: list[str], gate_edits: dict[str, dict] | None = None):
    """Drive a scripted session to Finished.

    `gate_edits` maps a phase token to reviewer file overrides; those
    gates are recorded as edit-then-approve instead of plain approve.
    """
    gate_edits = gate_edits or {}
    ws = Workspace.create(root)
    ws.write_artifact(DRIVERS_DOC, DRIVERS_TEXT)
    gateway = Gateway(
        transcript=Transcript(ws.root / "journal" / "transcript.jsonl"),
        transport=scripted_transport(script),
        clock=make_clock(),
    )
    session = Session.start(ws, gateway, clock=make_clock())
    while not session.phase.finished:
        session.advance()
        token = session.phase.token()
        if token in gate_edits:
            session.record_gate(
                GateDecision("edit_artifacts_then_approve", comment="reviewer override"),
                edits=gate_edits[token],
            )
        else:
            session.record_gate(GateDecision("approve"))
    return ws


def export_corpus(ws_root: Path, target: Path, *, snapshots: bool = True) -> None:
    if target.exists():
        shutil.rmtree(target)
    target.mkdir(parents=True)
    shutil.copyfile(ws_root / "ArchitecturalDrivers.md", target / "ArchitecturalDrivers.md")
    shutil.copytree(ws_root / "Design", target / "Design")
    journal = target / "journal"
    journal.mkdir()
    shutil.copyfile(ws_root / "journal" / "events.jsonl", journal / "events.jsonl")
    if snapshots:
        shutil.copytree(ws_root / "journal" / "snapshots", journal / "snapshots")


def mutate(target: Path, artifact: str, old: str, new: str) -> None:
    path = target / artifact
    text = path.read_text(encoding="utf-8")
    if old not in text:
        raise SystemExit(f"mutation anchor not found in {path}: {old!r}")
    path.write_text(text.replace(old, new), encoding="utf-8")


ORPHAN_SEQUENCE = """### QA-4 Seasonal surge handling

```mermaid
sequenceDiagram
    participant GW
    participant QS
    participant DF as Demand Forecaster
    GW->>QS: query burst
    QS->>DF: prefetch hot hotels
    DF-->>QS: warm set
```

## 8. Interfaces"""

STALE_COMPONENT = """### Notification Service

```mermaid
flowchart LR
    NT[Template Renderer] --> ND[Dispatcher]
```

## 7. Sequence diagrams"""

CREEP_SEQUENCE = """### CON-3 Management records housekeeping

```mermaid
sequenceDiagram
    participant MS
    participant MDB
    MS->>MDB: archive stale records
    MDB-->>MS: done
```

## 8. Interfaces"""


def check(name: str, corpus_root: Path, expected: set[str]) -> None:
    report = audit(Corpus.load(corpus_root))
    got = {f.rule_id for f in report.findings}
    status = "ok" if got == expected else "MISMATCH"
    print(f"  {name:18s} -> {sorted(got) or ['clean']} {status}")
    if got != expected:
        for f in report.findings:
            print(f"    {f.severity} {f.rule_id}: {f.message}")
        raise SystemExit(f"{name}: expected {sorted(expected)}")


def main() -> None:
    DEFECTS.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)

        print("clean six-iteration session")
        clean_ws = run_session(tmp / "clean", build_script())
        shutil.copyfile(
            clean_ws.root / "journal" / "transcript.jsonl", HPS / "transcript.jsonl"
        )
        export_corpus(clean_ws.root, DEFECTS / "clean")
        check("clean", DEFECTS / "clean", set())

        print("variant: iteration 6 leaves the architecture untouched")
        pre_it6 = arch_text(5, row_iters=range(1, 6))
        final_arch = arch_text(5, row_iters=range(1, 7))
        untouched_script = build_script()
        untouched_script[-1] = edit(
            "Design/Iteration6.md", iteration_doc(6, 7)
        ) + edit("Design/Architecture.md", final_arch)
        untouched_ws = run_session(
            tmp / "untouched",
            untouched_script,
            gate_edits={
                "iterating:6:5": {ARCHITECTURE_DOC: pre_it6},
                "iterating:6:6": {ARCHITECTURE_DOC: pre_it6},
            },
        )
        export_corpus(untouched_ws.root, DEFECTS / "arch_untouched")
        check("arch_untouched", DEFECTS / "arch_untouched", {"R-ARCH_DOC_UNTOUCHED"})

        print("variant: iteration 3 ships no decision rows")
        missing_script = build_script(skip_rows_for={3})
        after_it3_s5 = arch_text(3, row_iters=[1, 2])
        missing_ws = run_session(
            tmp / "missing",
            missing_script,
            gate_edits={"iterating:3:6": {ARCHITECTURE_DOC: after_it3_s5}},
        )
        export_corpus(missing_ws.root, DEFECTS / "missing_decisions")
        check("missing_decisions", DEFECTS / "missing_decisions", {"R-MISSING_DECISIONS"})

        print("document mutations of the clean corpus")
        for name in ("orphan_element", "container_stale", "scope_creep", "missing_step4"):
            # document rules read the live files; these four corpora skip the
            # snapshot tree to keep the committed fixtures small
            export_corpus(clean_ws.root, DEFECTS / name, snapshots=False)

        mutate(
            DEFECTS / "orphan_element",
            "Design/Architecture.md",
            "## 8. Interfaces",
            ORPHAN_SEQUENCE,
        )
        check("orphan_element", DEFECTS / "orphan_element", {"R-ORPHAN_ELEMENT"})

        mutate(
            DEFECTS / "container_stale",
            "Design/Architecture.md",
            "## 7. Sequence diagrams",
            STALE_COMPONENT,
        )
        check("container_stale", DEFECTS / "container_stale", {"R-CONTAINER_STALE"})

        mutate(
            DEFECTS / "scope_creep",
            "Design/Architecture.md",
            "## 8. Interfaces",
            CREEP_SEQUENCE,
        )
        check("scope_creep", DEFECTS / "scope_creep", {"R-SCOPE_CREEP"})

        stripped = iteration_doc(2, 7, include_concept_table=False)
        (DEFECTS / "missing_step4" / "Design" / "Iteration2.md").write_text(
            stripped, encoding="utf-8"
        )
        check("missing_step4", DEFECTS / "missing_step4", {"R-STEP4_TABLE"})

    events = (DEFECTS / "clean" / "journal" / "events.jsonl").read_text().splitlines()
    kinds = [json.loads(line)["type"] for line in events]
    cycle = ("prompt-sent", "response-applied", "awaiting-gate", "gate-recorded")
    core = [k for k in kinds if k in cycle]
    assert core == list(cycle) * 40, f"unexpected event cycles: {len(core)} core events"
    print(f"transcript: {sum(1 for _ in open(HPS / 'transcript.jsonl'))} exchanges")
    print("fixtures regenerated")


if __name__ == "__main__":
    main()
