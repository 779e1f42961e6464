"""Synthetic case dataset: one student project captured over two work bursts.

The fixture mirrors the shape of a real mannequin-redesign project: 82
prototypes by a single card in one booth, worked on October through
mid-November 2017 and again January through mid-May 2018 with nothing in
between, coded against the builtin schemes plus a project-specific
"solution principles" scheme, and linked into a derivation graph whose
externally tested prototypes are numbers 5, 17, 29, 60 and 63 and whose
final concept is number 82.

Everything is a pure function of the seed, so two processes can synthesize
bit-identical repositories without sharing state.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone

from .images import MEDIA_BMP, image_ref_for, render_view_image
from .model import (
    CAPTURE_ORDER,
    Annotation,
    CaptureRecord,
    CodingScheme,
    LinkGraph,
    NodeClass,
    ViewAngle,
    builtin_schemes,
    validate_graph,
)
from .service import BoothService

BOOTH_ID = "booth-01"
CARD_ID = "card-7f3a9c"
USER_ID = "user-case"
PROJECT_ID = "project-case"
CUSTOM_SCHEME = CodingScheme(
    "solution-principles",
    "Solution principles",
    ("chest compression", "rib fracture", "data logging"),
)

EXTERNAL_TEST_NUMBERS = (5, 17, 29, 60, 63)
FINAL_NUMBER = 82
# A couple of captures never linked into the graph data flow, plus a short
# side branch that dead-ends: both patterns occur in real coding sessions.
_ISOLATED = (11, 54)
_DEAD_BRANCH = (45, 46, 47)

_BURST_1 = (date(2017, 10, 2), date(2017, 11, 14), 30)
_BURST_2 = (date(2018, 1, 10), date(2018, 5, 14), 52)

_INTENT_PHRASES = (
    "explore chest spring stiffness",
    "test rib fracture clip geometry",
    "check sensor mounting position",
    "evaluate compression depth feel",
    "try vacuum-formed shell fit",
    "review electronics layout",
    "compare foam densities",
    "mock up data logger housing",
)


@dataclass
class CaseFixture:
    seed: int
    booth_id: str
    card_id: str
    user_id: str
    display_name: str
    project_id: str
    project_title: str
    project_description: str
    captures: list[CaptureRecord]  # index n-1 holds prototype number n
    images: dict[str, dict[ViewAngle, bytes]]
    codes: dict[str, dict[str, list[str]]]  # capture_id -> scheme_id -> categories
    custom_scheme: CodingScheme
    graph: LinkGraph
    number_by_id: dict[str, int] = field(default_factory=dict)

    def capture_id(self, number: int) -> str:
        return self.captures[number - 1].capture_id


def _burst_days(start: date, end: date, count: int) -> list[date]:
    span = (end - start).days
    return [start + timedelta(days=round(i * span / (count - 1))) for i in range(count)]


def _burst_timestamps(rng: random.Random, start: date, end: date, count: int) -> list[int]:
    """One timestamp per capture: working hours 08:00-20:00 UTC, at least
    45 minutes between captures on the same day."""
    days = _burst_days(start, end, count)
    stamps = []
    i = 0
    while i < len(days):
        j = i
        while j < len(days) and days[j] == days[i]:
            j += 1
        slot = (12 * 60) // (j - i)
        for k in range(i, j):
            minute = (k - i) * slot + rng.randint(0, slot - 46)
            moment = datetime(
                days[k].year,
                days[k].month,
                days[k].day,
                8 + minute // 60,
                minute % 60,
                rng.randint(0, 59),
                tzinfo=timezone.utc,
            )
            stamps.append(int(moment.timestamp()))
        i = j
    return stamps


def _draw_codes(
    rng: random.Random,
    numbers: range,
    scheme: CodingScheme,
    low: int,
    high: int,
    coverage_rate: float,
    pinned: dict[int, list[str]],
) -> dict[int, list[str]]:
    """Random per-capture category draws, then patch in any category the whole
    draw missed so every scheme gets fully exercised."""
    out: dict[int, list[str]] = {}
    for n in numbers:
        if n in pinned:
            out[n] = list(pinned[n])
            continue
        if rng.random() > coverage_rate:
            continue
        k = rng.randint(low, min(high, len(scheme.categories)))
        chosen = set(rng.sample(scheme.categories, k))
        out[n] = [c for c in scheme.categories if c in chosen]
    used = {c for cats in out.values() for c in cats}
    for category in scheme.categories:
        if category in used:
            continue
        target = rng.choice([n for n in numbers if n not in pinned])
        merged = set(out.get(target, ())) | {category}
        out[target] = [c for c in scheme.categories if c in merged]
    return out


def synthesize_case_fixture(seed: int = 0) -> CaseFixture:
    rng = random.Random(f"case-fixture:{seed}")
    timestamps = _burst_timestamps(rng, *_BURST_1) + _burst_timestamps(rng, *_BURST_2)
    assert len(timestamps) == 82

    captures = []
    images: dict[str, dict[ViewAngle, bytes]] = {}
    number_by_id: dict[str, int] = {}
    for n, ts in enumerate(timestamps, start=1):
        capture_id = f"{ts:010d}-{BOOTH_ID}-{n:06d}"
        frame_bytes = {
            angle: render_view_image(BOOTH_ID, capture_id, angle) for angle in CAPTURE_ORDER
        }
        views = {angle: image_ref_for(data, MEDIA_BMP) for angle, data in frame_bytes.items()}
        intent = rng.choice(_INTENT_PHRASES) if rng.random() < 0.4 else None
        captures.append(
            CaptureRecord(
                capture_id=capture_id,
                booth_id=BOOTH_ID,
                card_id=CARD_ID,
                timestamp=ts,
                views=views,
                annotation=Annotation(title=f"Prototype {n}", intent=intent),
            )
        )
        images[capture_id] = frame_bytes
        number_by_id[capture_id] = n

    materials, tools, disciplines = builtin_schemes()
    numbers = range(1, 83)
    per_scheme = {
        materials.scheme_id: _draw_codes(
            rng, numbers, materials, 1, 3, 1.0,
            pinned={37: ["hard plastics", "metal", "electronics"]},
        ),
        tools.scheme_id: _draw_codes(rng, numbers, tools, 1, 2, 1.0, pinned={}),
        disciplines.scheme_id: _draw_codes(rng, numbers, disciplines, 1, 2, 1.0, pinned={}),
        CUSTOM_SCHEME.scheme_id: _draw_codes(rng, numbers, CUSTOM_SCHEME, 1, 2, 0.6, pinned={}),
    }
    codes: dict[str, dict[str, list[str]]] = {}
    for scheme_id, by_number in per_scheme.items():
        for n, categories in by_number.items():
            codes.setdefault(captures[n - 1].capture_id, {})[scheme_id] = categories

    graph = _build_graph(rng, captures, number_by_id)
    return CaseFixture(
        seed=seed,
        booth_id=BOOTH_ID,
        card_id=CARD_ID,
        user_id=USER_ID,
        display_name="Design student",
        project_id=PROJECT_ID,
        project_title="CPR training mannequin",
        project_description=(
            "Redesign of a resuscitation training mannequin covering chest "
            "compression feel, rib fracture feedback and performance logging."
        ),
        captures=captures,
        images=images,
        codes=codes,
        custom_scheme=CUSTOM_SCHEME,
        graph=graph,
        number_by_id=number_by_id,
    )


def _build_graph(
    rng: random.Random,
    captures: list[CaptureRecord],
    number_by_id: dict[str, int],
) -> LinkGraph:
    def cid(n: int) -> str:
        return captures[n - 1].capture_id

    node_classes = {}
    for n in range(1, 83):
        if n == FINAL_NUMBER:
            node_classes[cid(n)] = NodeClass.FINAL_CONCEPT
        elif n in EXTERNAL_TEST_NUMBERS:
            node_classes[cid(n)] = NodeClass.EXTERNAL_TEST
        else:
            node_classes[cid(n)] = NodeClass.INTERNAL

    skip = set(_ISOLATED) | set(_DEAD_BRANCH)
    mainline = [n for n in range(1, 83) if n not in skip]
    edges = {(cid(a), cid(b)) for a, b in zip(mainline, mainline[1:])}
    branch_root = _DEAD_BRANCH[0] - 1
    for a, b in zip((branch_root, *_DEAD_BRANCH), _DEAD_BRANCH):
        edges.add((cid(a), cid(b)))
    # Cross links between non-adjacent mainline prototypes (reuse of earlier ideas).
    for _ in range(12):
        i = rng.randrange(0, len(mainline) - 2)
        j = rng.randrange(i + 2, min(i + 14, len(mainline)))
        edges.add((cid(mainline[i]), cid(mainline[j])))

    graph = LinkGraph(PROJECT_ID, node_classes, edges)
    by_id = {record.capture_id: record for record in captures}
    problems = validate_graph(graph, by_id)
    assert not problems, problems
    return graph


def install_fixture(service: BoothService, fixture: CaseFixture) -> dict:
    """Load a synthesized fixture into a backend. Returns a summary of ids."""
    service.create_user(fixture.display_name, user_id=fixture.user_id)
    service.register_card(fixture.card_id, fixture.user_id)
    for record in fixture.captures:
        service.ingest_capture(record, fixture.images[record.capture_id])
    service.create_project(
        fixture.project_title,
        fixture.project_description,
        creator=fixture.user_id,
        project_id=fixture.project_id,
    )
    service.assign_to_project(
        fixture.project_id, [record.capture_id for record in fixture.captures]
    )
    service.create_scheme(
        fixture.custom_scheme.name,
        fixture.custom_scheme.categories,
        scheme_id=fixture.custom_scheme.scheme_id,
    )
    for capture_id, per_scheme in fixture.codes.items():
        for scheme_id, categories in per_scheme.items():
            service.set_codes(capture_id, scheme_id, categories)
    service.put_graph(
        LinkGraph(fixture.project_id, dict(fixture.graph.node_classes), set(fixture.graph.edges))
    )
    return {
        "user_id": fixture.user_id,
        "project_id": fixture.project_id,
        "captures": len(fixture.captures),
        "schemes": [s.scheme_id for s in service.list_schemes()],
    }
