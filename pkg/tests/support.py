"""Shared builders for tests: cheap records, stub rigs, in-memory spools."""

from __future__ import annotations

import hashlib
import random

from protobooth.images import MEDIA_BMP
from protobooth.model import (
    CAPTURE_ORDER,
    Annotation,
    CaptureRecord,
    CodeAssignment,
    ImageRef,
    LinkGraph,
    NodeClass,
    ViewAngle,
)
from protobooth.node import RigError, SpoolEntry


def make_capture(
    capture_id: str,
    timestamp: int = 1509532800,
    booth_id: str = "booth-01",
    card_id: str = "card-01",
    title: str | None = None,
) -> tuple[CaptureRecord, dict[ViewAngle, bytes]]:
    """A valid record plus matching image bytes, tiny enough for tight loops."""
    views = {}
    images = {}
    for angle in CAPTURE_ORDER:
        data = f"{capture_id}:{angle.value}".encode("utf-8")
        views[angle] = ImageRef(hashlib.sha256(data).hexdigest(), MEDIA_BMP, len(data))
        images[angle] = data
    record = CaptureRecord(
        capture_id=capture_id,
        booth_id=booth_id,
        card_id=card_id,
        timestamp=timestamp,
        views=views,
        annotation=Annotation(title=title),
    )
    return record, images


def random_captures(
    rng: random.Random,
    count: int,
    cards: tuple[str, ...] = ("card-a", "card-b"),
    ts_low: int = 1_500_000_000,
    ts_high: int = 1_500_900_000,
) -> list[CaptureRecord]:
    records = []
    for i in range(count):
        record, _ = make_capture(
            f"r{i:04d}",
            timestamp=rng.randint(ts_low, ts_high),
            card_id=rng.choice(cards),
        )
        records.append(record)
    return records


def random_graph(
    rng: random.Random, captures: list[CaptureRecord], edge_count: int
) -> LinkGraph:
    """Forward-only random edges over the captures, one random final node."""
    ordered = sorted(captures, key=CaptureRecord.sort_key)
    ids = [r.capture_id for r in ordered]
    node_classes = {cid: NodeClass.INTERNAL for cid in ids}
    if ids:
        node_classes[rng.choice(ids)] = NodeClass.FINAL_CONCEPT
    edges = set()
    if len(ids) > 1:
        for _ in range(edge_count):
            i = rng.randrange(0, len(ids) - 1)
            j = rng.randrange(i + 1, len(ids))
            edges.add((ids[i], ids[j]))
    return LinkGraph("project-x", node_classes, edges)


def random_assignments(
    rng: random.Random, captures: list[CaptureRecord], scheme, rate: float = 0.7
) -> list[CodeAssignment]:
    out = []
    for record in captures:
        if rng.random() > rate:
            continue
        k = rng.randint(0, len(scheme.categories))
        chosen = set(rng.sample(scheme.categories, k))
        out.append(
            CodeAssignment(
                record.capture_id,
                scheme.scheme_id,
                tuple(c for c in scheme.categories if c in chosen),
            )
        )
    return out


class StubRig:
    """Instant camera bank returning tiny frames; optionally fails one angle."""

    resolution = (1920, 1080)

    def __init__(self, fail_angles: set[ViewAngle] | None = None):
        self.fail_angles = fail_angles if fail_angles is not None else set()
        self.acquired: list[ViewAngle] = []

    def acquire(self, capture_id: str, angle: ViewAngle) -> tuple[bytes, str]:
        if angle in self.fail_angles:
            raise RigError(f"acquisition failed on angle {angle.value!r}")
        self.acquired.append(angle)
        return f"{capture_id}:{angle.value}".encode("utf-8"), MEDIA_BMP


class MemorySpool:
    """Spool-shaped dict for high-volume state machine runs (no disk I/O)."""

    def __init__(self):
        self.entries: dict[str, SpoolEntry] = {}
        self.counter = 0

    def bump_counter(self) -> int:
        self.counter += 1
        return self.counter

    def add(self, record, images) -> None:
        self.entries[record.capture_id] = SpoolEntry(record, dict(images))

    def capture_ids(self) -> list[str]:
        return sorted(self.entries)

    def load(self, capture_id: str) -> SpoolEntry:
        return self.entries[capture_id]

    def update_attempt(self, capture_id: str, attempt_count: int, next_attempt_at: float) -> None:
        entry = self.entries[capture_id]
        entry.attempt_count = attempt_count
        entry.next_attempt_at = next_attempt_at

    def remove(self, capture_id: str) -> None:
        self.entries.pop(capture_id, None)

    def sweep_incomplete(self) -> int:
        return 0

    def __len__(self) -> int:
        return len(self.entries)
