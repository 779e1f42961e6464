"""The booth daemon: RFID-triggered capture state machine with a durable retry spool."""

from __future__ import annotations

import json
import os
import random
import shutil
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Mapping, Protocol

import httpx

from .clock import Clock, SimulatedClock, SystemClock
from .images import MEDIA_BMP, ext_for_media, image_ref_for, media_for_ext, render_view_image
from .model import CAPTURE_ORDER, CaptureRecord, ViewAngle
from .service import BoothService, IngestReceipt
from .store import StorageFault, canonical_json


class NodeState(Enum):
    IDLE = "idle"
    CAPTURING = "capturing"
    UPLOADING = "uploading"
    FAULT = "fault"


# The complete transition table. Idle->Fault is declared for spontaneous
# hardware faults even though this implementation only faults mid-sequence.
DECLARED_TRANSITIONS: frozenset[tuple[NodeState, NodeState]] = frozenset(
    {
        (NodeState.IDLE, NodeState.CAPTURING),
        (NodeState.CAPTURING, NodeState.UPLOADING),
        (NodeState.UPLOADING, NodeState.IDLE),
        (NodeState.IDLE, NodeState.FAULT),
        (NodeState.CAPTURING, NodeState.FAULT),
        (NodeState.UPLOADING, NodeState.FAULT),
        (NodeState.FAULT, NodeState.IDLE),
    }
)


@dataclass(frozen=True)
class LedPattern:
    busy: str  # "on" | "off"
    done: str  # "on" | "off" | "blink"


def led_pattern(
    state: NodeState,
    now: float,
    last_done_at: float | None,
    notify_interval: float,
) -> LedPattern:
    """LEDs as a pure function of state and the completion-notify timer."""
    if state is NodeState.FAULT:
        return LedPattern("on", "blink")
    if state in (NodeState.CAPTURING, NodeState.UPLOADING):
        return LedPattern("on", "off")
    if last_done_at is not None and now - last_done_at < notify_interval:
        return LedPattern("off", "blink")
    return LedPattern("off", "off")


class RigError(Exception):
    """Camera acquisition failure."""


class UplinkError(Exception):
    """Backend temporarily unreachable; the spool entry stays and backs off."""


class CameraRig(Protocol):
    resolution: tuple[int, int]

    def acquire(self, capture_id: str, angle: ViewAngle) -> tuple[bytes, str]: ...


class MockCameraRig:
    """Deterministic stand-in camera bank.

    Frame bytes are a pure function of (booth_id, capture_id, angle), so any
    two rigs configured alike produce bit-identical output. The per-frame
    latency is charged to the injected clock; with the default 1.28 s a full
    7-angle sweep plus node overhead lands at about 9 seconds.
    """

    resolution = (1920, 1080)

    def __init__(
        self,
        booth_id: str,
        clock: Clock | None = None,
        frame_latency: float = 1.28,
        fail_angles: set[ViewAngle] | None = None,
        after_frame: Callable[[ViewAngle], None] | None = None,
    ):
        self.booth_id = booth_id
        self.clock = clock
        self.frame_latency = frame_latency
        self.fail_angles = fail_angles if fail_angles is not None else set()
        self.after_frame = after_frame

    def acquire(self, capture_id: str, angle: ViewAngle) -> tuple[bytes, str]:
        if self.clock is not None and self.frame_latency:
            self.clock.advance(self.frame_latency)
        if angle in self.fail_angles:
            raise RigError(f"acquisition failed on angle {angle.value!r}")
        data = render_view_image(self.booth_id, capture_id, angle)
        if self.after_frame is not None:
            self.after_frame(angle)
        return data, MEDIA_BMP


def generate_capture_id(booth_id: str, clock: Clock, counter: int) -> str:
    """Time-prefixed id, unique per booth counter, lexicographically sortable."""
    return f"{int(clock.now()):010d}-{booth_id}-{counter:06d}"


@dataclass
class SpoolEntry:
    record: CaptureRecord
    images: dict[ViewAngle, bytes]
    attempt_count: int = 0
    next_attempt_at: float = 0.0


class Spool:
    """Durable outbox: one directory per capture with images plus a meta document.

    The meta document is written last via atomic rename, so an entry either
    exists completely or not at all; partial capture directories are swept.
    """

    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _dir(self, capture_id: str) -> Path:
        return self.root / capture_id

    def bump_counter(self) -> int:
        counter_file = self.root / "counter"
        value = int(counter_file.read_text()) + 1 if counter_file.exists() else 1
        tmp = counter_file.with_suffix(".tmp")
        tmp.write_text(str(value))
        os.replace(tmp, counter_file)
        return value

    def add(self, record: CaptureRecord, images: Mapping[ViewAngle, bytes]) -> None:
        entry_dir = self._dir(record.capture_id)
        try:
            entry_dir.mkdir(parents=True, exist_ok=True)
            for angle, data in images.items():
                ext = ext_for_media(record.views[angle].media_type)
                (entry_dir / f"{angle.value}.{ext}").write_bytes(data)
            meta = {"record": record.to_doc(), "attempt_count": 0, "next_attempt_at": 0.0}
            tmp = entry_dir / "meta.json.tmp"
            tmp.write_bytes(canonical_json(meta))
            os.replace(tmp, entry_dir / "meta.json")
        except Exception as exc:
            shutil.rmtree(entry_dir, ignore_errors=True)
            raise StorageFault(f"could not spool {record.capture_id!r}") from exc

    def capture_ids(self) -> list[str]:
        return sorted(
            p.name for p in self.root.iterdir() if p.is_dir() and (p / "meta.json").exists()
        )

    def load(self, capture_id: str) -> SpoolEntry:
        entry_dir = self._dir(capture_id)
        meta = json.loads((entry_dir / "meta.json").read_text())
        record = CaptureRecord.from_doc(meta["record"])
        images = {}
        for angle, ref in record.views.items():
            ext = ext_for_media(ref.media_type)
            images[angle] = (entry_dir / f"{angle.value}.{ext}").read_bytes()
        return SpoolEntry(record, images, meta["attempt_count"], meta["next_attempt_at"])

    def update_attempt(self, capture_id: str, attempt_count: int, next_attempt_at: float) -> None:
        entry_dir = self._dir(capture_id)
        meta = json.loads((entry_dir / "meta.json").read_text())
        meta["attempt_count"] = attempt_count
        meta["next_attempt_at"] = next_attempt_at
        tmp = entry_dir / "meta.json.tmp"
        tmp.write_bytes(canonical_json(meta))
        os.replace(tmp, entry_dir / "meta.json")

    def remove(self, capture_id: str) -> None:
        shutil.rmtree(self._dir(capture_id), ignore_errors=True)

    def sweep_incomplete(self) -> int:
        """Drop directories that never got their meta document (crash mid-write)."""
        swept = 0
        for p in self.root.iterdir():
            if p.is_dir() and not (p / "meta.json").exists():
                shutil.rmtree(p, ignore_errors=True)
                swept += 1
        return swept

    def __len__(self) -> int:
        return len(self.capture_ids())


@dataclass(frozen=True)
class SwipeOutcome:
    status: str  # "captured" | "ignored" | "fault"
    record: CaptureRecord | None = None
    duration: float | None = None
    reason: str | None = None


def capture_duration(outcome: SwipeOutcome) -> float:
    """Wall-clock seconds from swipe to spool-complete for a captured session."""
    if outcome.status != "captured" or outcome.duration is None:
        raise ValueError("capture_duration requires a completed capture")
    return outcome.duration


@dataclass(frozen=True)
class DeliveryReport:
    delivered: int
    deferred: int


BACKOFF_BASE = 5.0
BACKOFF_FACTOR = 2.0
BACKOFF_CAP = 600.0


def backoff_delay(attempt_count: int) -> float:
    return min(BACKOFF_BASE * BACKOFF_FACTOR ** (attempt_count - 1), BACKOFF_CAP)


class Uplink(Protocol):
    def deliver(
        self, record: CaptureRecord, images: Mapping[ViewAngle, bytes]
    ) -> IngestReceipt: ...


class ServiceUplink:
    """In-process delivery straight into a backend service."""

    def __init__(self, service: BoothService):
        self.service = service

    def deliver(self, record, images) -> IngestReceipt:
        try:
            return self.service.ingest_capture(record, images)
        except StorageFault as exc:
            raise UplinkError(str(exc)) from exc


class HttpUplink:
    """Delivery over the wire API's multipart ingestion endpoint."""

    def __init__(self, client: httpx.Client, base_url: str = ""):
        self.client = client
        self.base_url = base_url.rstrip("/")

    def deliver(self, record, images) -> IngestReceipt:
        files = {}
        for angle, data in images.items():
            ref = record.views[angle]
            ext = ext_for_media(ref.media_type)
            files[angle.value] = (f"{angle.value}.{ext}", data, ref.media_type)
        try:
            response = self.client.post(
                f"{self.base_url}/api/captures",
                data={"manifest": json.dumps(record.to_doc())},
                files=files,
            )
        except httpx.HTTPError as exc:
            raise UplinkError(str(exc)) from exc
        if response.status_code >= 500:
            raise UplinkError(f"server error {response.status_code}")
        if response.status_code >= 400:
            raise UplinkError(f"rejected ({response.status_code}): {response.text}")
        body = response.json()
        return IngestReceipt(body["capture_id"], body["created"], body["stored_views"])


class FlakyUplink:
    """Seeded failure injection around another uplink; used by simulations."""

    def __init__(self, inner: Uplink, fail_rate: float, seed: int = 0):
        self.inner = inner
        self.fail_rate = fail_rate
        self.rng = random.Random(f"uplink-faults:{seed}")

    def deliver(self, record, images) -> IngestReceipt:
        if self.rng.random() < self.fail_rate:
            raise UplinkError("injected uplink failure")
        return self.inner.deliver(record, images)


class CaptureNode:
    """One booth: a sequential state machine driven by swipe events.

    Every transition is appended to `transition_history` so tests can check
    the machine never leaves the declared table.
    """

    ACTIVATION_OVERHEAD = 0.02  # card read and sequence start
    SPOOL_OVERHEAD = 0.02  # local persistence after the last frame

    def __init__(
        self,
        booth_id: str,
        rig: CameraRig,
        spool: Spool,
        clock: Clock | None = None,
        notify_interval: float = 5.0,
    ):
        self.booth_id = booth_id
        self.rig = rig
        self.spool = spool
        self.clock = clock if clock is not None else SystemClock()
        self.notify_interval = notify_interval
        self.state = NodeState.IDLE
        self.transition_history: list[tuple[NodeState, NodeState, str]] = []
        self._last_done_at: float | None = None
        self.spool.sweep_incomplete()

    def _transition(self, to_state: NodeState, event: str) -> None:
        self.transition_history.append((self.state, to_state, event))
        self.state = to_state

    def led(self) -> LedPattern:
        return led_pattern(self.state, self.clock.now(), self._last_done_at, self.notify_interval)

    def swipe(self, card_id: str) -> SwipeOutcome:
        """Run one capture sequence; swipes while busy are ignored (debounce)."""
        if self.state is not NodeState.IDLE:
            return SwipeOutcome("ignored", reason=f"busy: {self.state.value}")
        started = self.clock.now()
        self._transition(NodeState.CAPTURING, "swipe")
        capture_id = generate_capture_id(self.booth_id, self.clock, self.spool.bump_counter())
        timestamp = int(started)
        self.clock.advance(self.ACTIVATION_OVERHEAD)

        frames: dict[ViewAngle, tuple[bytes, str]] = {}
        try:
            for angle in CAPTURE_ORDER:
                frames[angle] = self.rig.acquire(capture_id, angle)
        except RigError as exc:
            # All-or-nothing: partial frames are discarded, nothing is spooled.
            self._transition(NodeState.FAULT, "rig_failure")
            return SwipeOutcome("fault", reason=str(exc))

        self._transition(NodeState.UPLOADING, "frames_complete")
        views = {angle: image_ref_for(data, media) for angle, (data, media) in frames.items()}
        record = CaptureRecord(capture_id, self.booth_id, card_id, timestamp, views)
        try:
            self.spool.add(record, {angle: data for angle, (data, _) in frames.items()})
        except StorageFault as exc:
            self._transition(NodeState.FAULT, "storage_failure")
            return SwipeOutcome("fault", reason=str(exc))
        self.clock.advance(self.SPOOL_OVERHEAD)

        self._transition(NodeState.IDLE, "spooled")
        self._last_done_at = self.clock.now()
        return SwipeOutcome("captured", record=record, duration=self.clock.now() - started)

    def reset(self) -> bool:
        if self.state is not NodeState.FAULT:
            return False
        self._transition(NodeState.IDLE, "reset")
        return True

    def flush_spool(self, uplink: Uplink) -> DeliveryReport:
        """Attempt due entries oldest-first; failures back off exponentially.

        Delivery is at-least-once: a crash between acknowledgement and local
        delete re-sends the record, and the backend deduplicates by capture_id.
        """
        delivered = 0
        deferred = 0
        for capture_id in self.spool.capture_ids():
            entry = self.spool.load(capture_id)
            if entry.next_attempt_at > self.clock.now():
                deferred += 1
                continue
            try:
                uplink.deliver(entry.record, entry.images)
            except UplinkError:
                attempts = entry.attempt_count + 1
                self.spool.update_attempt(
                    capture_id, attempts, self.clock.now() + backoff_delay(attempts)
                )
                deferred += 1
                continue
            self.spool.remove(capture_id)
            delivered += 1
        return DeliveryReport(delivered, deferred)


def drain_spool(
    node: CaptureNode,
    uplink: Uplink,
    max_rounds: int = 1000,
) -> DeliveryReport:
    """Flush until the spool empties, advancing the node clock across backoffs.

    Useful with a simulated clock; against a hard-down server it stops after
    `max_rounds` and reports what is still deferred.
    """
    total_delivered = 0
    report = DeliveryReport(0, 0)
    for _ in range(max_rounds):
        ids = node.spool.capture_ids()
        if not ids:
            break
        next_due = min(node.spool.load(cid).next_attempt_at for cid in ids)
        if next_due > node.clock.now():
            node.clock.advance(next_due - node.clock.now())
        report = node.flush_spool(uplink)
        total_delivered += report.delivered
    return DeliveryReport(total_delivered, len(node.spool))
