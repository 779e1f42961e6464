"""Ingestion and curation operations over a repository: the backend's domain layer."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Mapping

from .clock import Clock, SystemClock
from .model import (
    CAPTURE_ORDER,
    Annotation,
    CaptureRecord,
    CodeAssignment,
    CodingScheme,
    LinkGraph,
    ModelError,
    Project,
    UnknownCategoryError,
    User,
    ViewAngle,
    assign_codes,
    builtin_schemes,
    canonical_order,
    is_safe_id,
    validate_capture,
    validate_graph,
)
from .store import Repository, StorageFault

_UNSET = object()


class ServiceError(ModelError):
    """Base class for request-level failures."""


class UnknownEntityError(ServiceError):
    def __init__(self, kind: str, entity_id: str):
        super().__init__(f"unknown {kind}: {entity_id!r}")
        self.kind = kind
        self.entity_id = entity_id


class CardConflictError(ServiceError):
    def __init__(self, card_id: str, bound_to: str):
        super().__init__(f"card {card_id!r} is already bound to user {bound_to!r}")
        self.card_id = card_id
        self.bound_to = bound_to


class ValidationRejected(ServiceError):
    """Request refused; `violations` lists every broken rule."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


@dataclass(frozen=True)
class IngestReceipt:
    capture_id: str
    created: bool
    stored_views: int = len(CAPTURE_ORDER)

    def to_doc(self) -> dict:
        return {
            "capture_id": self.capture_id,
            "created": self.created,
            "stored_views": self.stored_views,
        }


class BoothService:
    """All backend operations; holds the repository lock across each mutation."""

    def __init__(self, repo: Repository, clock: Clock | None = None):
        self.repo = repo
        self.clock = clock if clock is not None else SystemClock()
        self._ensure_builtin_schemes()

    def _ensure_builtin_schemes(self) -> None:
        with self.repo.lock:
            for scheme in builtin_schemes():
                if not self.repo.schemes.exists(scheme.scheme_id):
                    self.repo.schemes.put(scheme.scheme_id, scheme.to_doc())

    # -- captures -------------------------------------------------------

    def ingest_capture(
        self, record: CaptureRecord, images: Mapping[ViewAngle, bytes]
    ) -> IngestReceipt:
        """Store blobs then metadata; re-ingesting a known capture_id is a no-op.

        The capture_id is the idempotency key, so at-least-once delivery from
        booths collapses to exactly-once repository state.
        """
        violations = validate_capture(record)
        provided = set(images)
        expected = set(CAPTURE_ORDER)
        for angle in sorted(expected - provided, key=CAPTURE_ORDER.index):
            violations.append(f"image payload missing: {angle.value}")
        for angle in provided - expected:
            violations.append(f"unexpected image payload: {angle!r}")
        if violations:
            raise ValidationRejected(violations)
        for angle in CAPTURE_ORDER:
            ref = record.views[angle]
            data = images[angle]
            if hashlib.sha256(data).hexdigest() != ref.content_hash or len(data) != ref.byte_length:
                raise ValidationRejected(
                    [f"payload does not match manifest: {angle.value}"]
                )

        with self.repo.lock:
            if self.repo.captures.exists(record.capture_id):
                return IngestReceipt(record.capture_id, created=False)
            written: list[str] = []
            try:
                for angle in CAPTURE_ORDER:
                    digest = record.views[angle].content_hash
                    if not self.repo.blobs.exists(digest):
                        self.repo.blobs.put(images[angle])
                        written.append(digest)
                self.repo.captures.put(record.capture_id, record.to_doc())
            except Exception as exc:
                self._discard_unreferenced(written)
                raise StorageFault(f"ingest of {record.capture_id!r} failed") from exc
        return IngestReceipt(record.capture_id, created=True)

    def _discard_unreferenced(self, digests: Iterable[str]) -> None:
        pending = set(digests)
        if not pending:
            return
        for _, doc in self.repo.captures.items():
            for ref in doc["views"].values():
                pending.discard(ref["content_hash"])
        for digest in pending:
            self.repo.blobs.delete(digest)

    def get_capture(self, capture_id: str) -> CaptureRecord:
        doc = self.repo.captures.get(capture_id)
        if doc is None:
            raise UnknownEntityError("capture", capture_id)
        return CaptureRecord.from_doc(doc)

    def get_view_image(self, capture_id: str, angle: ViewAngle) -> tuple[bytes, str]:
        record = self.get_capture(capture_id)
        ref = record.views[angle]
        return self.repo.blobs.get(ref.content_hash), ref.media_type

    def query_captures(
        self,
        user: str | None = None,
        booth: str | None = None,
        project: str | None = None,
        time_range: tuple[int | None, int | None] | None = None,
    ) -> list[CaptureRecord]:
        """Conjunctive filters, results in canonical order. Unknown filter ids
        match nothing rather than erroring. Time bounds are inclusive."""
        with self.repo.lock:
            cards: set[str] | None = None
            if user is not None:
                doc = self.repo.users.get(user)
                cards = set(doc["card_ids"]) if doc else set()
            members: set[str] | None = None
            if project is not None:
                doc = self.repo.projects.get(project)
                members = set(doc["members"]) if doc else set()
            records = []
            for _, doc in self.repo.captures.items():
                record = CaptureRecord.from_doc(doc)
                if cards is not None and record.card_id not in cards:
                    continue
                if booth is not None and record.booth_id != booth:
                    continue
                if members is not None and record.capture_id not in members:
                    continue
                if time_range is not None:
                    lo, hi = time_range
                    if lo is not None and record.timestamp < lo:
                        continue
                    if hi is not None and record.timestamp > hi:
                        continue
                records.append(record)
        return canonical_order(records)

    def annotate(
        self,
        capture_id: str,
        title: str | None = _UNSET,  # type: ignore[assignment]
        description: str | None = _UNSET,  # type: ignore[assignment]
        intent: str | None = _UNSET,  # type: ignore[assignment]
    ) -> CaptureRecord:
        """Replace only the fields passed; omitted fields keep their value."""
        with self.repo.lock:
            record = self.get_capture(capture_id)
            updates = {
                name: value
                for name, value in (
                    ("title", title),
                    ("description", description),
                    ("intent", intent),
                )
                if value is not _UNSET
            }
            annotation = record.annotation.merged_with(**updates)
            updated = CaptureRecord(
                capture_id=record.capture_id,
                booth_id=record.booth_id,
                card_id=record.card_id,
                timestamp=record.timestamp,
                views=record.views,
                annotation=annotation,
            )
            self.repo.captures.put(capture_id, updated.to_doc())
        return updated

    def correct_timestamp(
        self, capture_id: str, new_ts: int, audit_note: str
    ) -> CaptureRecord:
        """Set a corrected timestamp, appending to the capture's immutable audit log."""
        if new_ts <= 0:
            raise ValidationRejected(["timestamp nonpositive"])
        with self.repo.lock:
            record = self.get_capture(capture_id)
            entry = {
                "old_ts": record.timestamp,
                "new_ts": int(new_ts),
                "note": audit_note,
                "at": int(self.clock.now()),
            }
            log = self.repo.audit.get(capture_id) or {"capture_id": capture_id, "entries": []}
            log["entries"].append(entry)
            updated = CaptureRecord(
                capture_id=record.capture_id,
                booth_id=record.booth_id,
                card_id=record.card_id,
                timestamp=int(new_ts),
                views=record.views,
                annotation=record.annotation,
            )
            self.repo.captures.put(capture_id, updated.to_doc())
            self.repo.audit.put(capture_id, log)
        return updated

    def audit_log(self, capture_id: str) -> list[dict]:
        doc = self.repo.audit.get(capture_id)
        return list(doc["entries"]) if doc else []

    # -- users and cards --------------------------------------------------

    def create_user(self, display_name: str, user_id: str | None = None) -> User:
        with self.repo.lock:
            if user_id is None:
                user_id = f"user-{len(self.repo.users) + 1:04d}"
            if not is_safe_id(user_id):
                raise ValidationRejected([f"user_id malformed: {user_id!r}"])
            if self.repo.users.exists(user_id):
                raise ValidationRejected([f"user_id already taken: {user_id!r}"])
            user = User(user_id, display_name)
            self.repo.users.put(user_id, user.to_doc())
        return user

    def list_users(self) -> list[User]:
        return [User.from_doc(doc) for _, doc in self.repo.users.items()]

    def get_user(self, user_id: str) -> User:
        doc = self.repo.users.get(user_id)
        if doc is None:
            raise UnknownEntityError("user", user_id)
        return User.from_doc(doc)

    def register_card(self, card_id: str, user_id: str) -> User:
        """Bind a card to a user; captures resolve card -> user at query time,
        so captures made before registration become attributed afterwards."""
        with self.repo.lock:
            user = self.get_user(user_id)
            for other_id, doc in self.repo.users.items():
                if card_id in doc["card_ids"] and other_id != user_id:
                    raise CardConflictError(card_id, other_id)
            user.card_ids.add(card_id)
            self.repo.users.put(user_id, user.to_doc())
        return user

    def resolve_card(self, card_id: str) -> User | None:
        with self.repo.lock:
            for _, doc in self.repo.users.items():
                if card_id in doc["card_ids"]:
                    return User.from_doc(doc)
        return None

    def capturer_label(self, record: CaptureRecord) -> str:
        user = self.resolve_card(record.card_id)
        return user.user_id if user else f"unknown card {record.card_id}"

    # -- projects ---------------------------------------------------------

    def create_project(
        self,
        title: str,
        description: str,
        creator: str,
        project_id: str | None = None,
    ) -> Project:
        with self.repo.lock:
            if not self.repo.users.exists(creator):
                raise UnknownEntityError("user", creator)
            if project_id is None:
                project_id = f"project-{len(self.repo.projects) + 1:04d}"
            if not is_safe_id(project_id):
                raise ValidationRejected([f"project_id malformed: {project_id!r}"])
            if self.repo.projects.exists(project_id):
                raise ValidationRejected([f"project_id already taken: {project_id!r}"])
            project = Project(project_id, title, description, contributors={creator})
            self.repo.projects.put(project_id, project.to_doc())
        return project

    def get_project(self, project_id: str) -> Project:
        doc = self.repo.projects.get(project_id)
        if doc is None:
            raise UnknownEntityError("project", project_id)
        return Project.from_doc(doc)

    def list_projects(self) -> list[Project]:
        return [Project.from_doc(doc) for _, doc in self.repo.projects.items()]

    def add_contributor(self, project_id: str, user_id: str) -> Project:
        with self.repo.lock:
            project = self.get_project(project_id)
            if not self.repo.users.exists(user_id):
                raise UnknownEntityError("user", user_id)
            project.contributors.add(user_id)
            self.repo.projects.put(project_id, project.to_doc())
        return project

    def assign_to_project(self, project_id: str, capture_ids: Iterable[str]) -> Project:
        """Idempotent set-union membership; a capture may belong to many projects."""
        with self.repo.lock:
            project = self.get_project(project_id)
            for capture_id in capture_ids:
                if not self.repo.captures.exists(capture_id):
                    raise UnknownEntityError("capture", capture_id)
                project.members.add(capture_id)
            self.repo.projects.put(project_id, project.to_doc())
        return project

    # -- coding schemes ----------------------------------------------------

    def create_scheme(
        self, name: str, categories: Iterable[str], scheme_id: str | None = None
    ) -> CodingScheme:
        with self.repo.lock:
            if scheme_id is None:
                scheme_id = f"scheme-{len(self.repo.schemes) + 1:04d}"
            if not is_safe_id(scheme_id):
                raise ValidationRejected([f"scheme_id malformed: {scheme_id!r}"])
            if self.repo.schemes.exists(scheme_id):
                raise ValidationRejected([f"scheme_id already taken: {scheme_id!r}"])
            scheme = CodingScheme(scheme_id, name, tuple(categories))
            self.repo.schemes.put(scheme_id, scheme.to_doc())
        return scheme

    def get_scheme(self, scheme_id: str) -> CodingScheme:
        doc = self.repo.schemes.get(scheme_id)
        if doc is None:
            raise UnknownEntityError("scheme", scheme_id)
        return CodingScheme.from_doc(doc)

    def list_schemes(self) -> list[CodingScheme]:
        return [CodingScheme.from_doc(doc) for _, doc in self.repo.schemes.items()]

    def set_codes(
        self, capture_id: str, scheme_id: str, categories: Iterable[str]
    ) -> CodeAssignment:
        """Store an assignment, replacing any prior one for (capture, scheme)."""
        with self.repo.lock:
            if not self.repo.captures.exists(capture_id):
                raise UnknownEntityError("capture", capture_id)
            scheme = self.get_scheme(scheme_id)
            assignment = assign_codes(capture_id, scheme, categories)
            doc = self.repo.assignments.get(capture_id) or {
                "capture_id": capture_id,
                "codes": {},
            }
            doc["codes"][scheme_id] = list(assignment.categories)
            self.repo.assignments.put(capture_id, doc)
        return assignment

    def get_codes(self, capture_id: str) -> dict[str, list[str]]:
        doc = self.repo.assignments.get(capture_id)
        return dict(doc["codes"]) if doc else {}

    def assignments_for_scheme(
        self, scheme_id: str, capture_ids: Iterable[str] | None = None
    ) -> list[CodeAssignment]:
        wanted = set(capture_ids) if capture_ids is not None else None
        out = []
        with self.repo.lock:
            for capture_id, doc in self.repo.assignments.items():
                if wanted is not None and capture_id not in wanted:
                    continue
                categories = doc["codes"].get(scheme_id)
                if categories is not None:
                    out.append(CodeAssignment(capture_id, scheme_id, tuple(categories)))
        return out

    # -- link graphs ---------------------------------------------------------

    def get_graph(self, project_id: str) -> LinkGraph:
        self.get_project(project_id)
        doc = self.repo.graphs.get(project_id)
        if doc is None:
            return LinkGraph(project_id)
        return LinkGraph.from_doc(doc)

    def put_graph(self, graph: LinkGraph) -> LinkGraph:
        """Replace a project's graph after validating every invariant."""
        with self.repo.lock:
            project = self.get_project(graph.project_id)
            captures = {
                cid: self.get_capture(cid)
                for cid in project.members
                if self.repo.captures.exists(cid)
            }
            violations = validate_graph(graph, captures, project.members)
            if violations:
                raise ValidationRejected(violations)
            self.repo.graphs.put(graph.project_id, graph.to_doc())
        return graph

    # -- integrity -------------------------------------------------------------

    def verify(self) -> list[dict]:
        """Full integrity scan; each violation is a machine-readable dict."""
        violations: list[dict] = []

        def flag(kind: str, subject: str, detail: str) -> None:
            violations.append({"kind": kind, "subject": subject, "detail": detail})

        with self.repo.lock:
            referenced: set[str] = set()
            for capture_id, doc in self.repo.captures.items():
                try:
                    record = CaptureRecord.from_doc(doc)
                except Exception as exc:
                    flag("capture-unreadable", capture_id, str(exc))
                    continue
                for problem in validate_capture(record):
                    flag("capture-invariant", capture_id, problem)
                for angle, ref in record.views.items():
                    referenced.add(ref.content_hash)
                    if not self.repo.blobs.exists(ref.content_hash):
                        flag("missing-blob", capture_id, f"{angle.value}: {ref.content_hash}")
                        continue
                    data = self.repo.blobs.get(ref.content_hash)
                    if hashlib.sha256(data).hexdigest() != ref.content_hash:
                        flag("blob-corrupt", capture_id, f"{angle.value}: {ref.content_hash}")
                    elif len(data) != ref.byte_length:
                        flag("blob-length-mismatch", capture_id, angle.value)

            for digest in self.repo.blobs.digests():
                if digest not in referenced:
                    flag("orphan-blob", digest, "no capture references this blob")

            card_owners: dict[str, str] = {}
            for user_id, doc in self.repo.users.items():
                for card_id in doc["card_ids"]:
                    if card_id in card_owners:
                        flag("card-conflict", card_id, f"{card_owners[card_id]} and {user_id}")
                    card_owners[card_id] = user_id

            for project_id, doc in self.repo.projects.items():
                for user_id in doc["contributors"]:
                    if not self.repo.users.exists(user_id):
                        flag("missing-contributor", project_id, user_id)
                for capture_id in doc["members"]:
                    if not self.repo.captures.exists(capture_id):
                        flag("missing-member", project_id, capture_id)

            for capture_id, doc in self.repo.assignments.items():
                if not self.repo.captures.exists(capture_id):
                    flag("assignment-orphan", capture_id, "capture does not exist")
                for scheme_id, categories in doc["codes"].items():
                    scheme_doc = self.repo.schemes.get(scheme_id)
                    if scheme_doc is None:
                        flag("assignment-unknown-scheme", capture_id, scheme_id)
                        continue
                    known = set(scheme_doc["categories"])
                    for category in categories:
                        if category not in known:
                            flag("assignment-unknown-category", capture_id, f"{scheme_id}: {category}")

            for project_id, doc in self.repo.graphs.items():
                project_doc = self.repo.projects.get(project_id)
                if project_doc is None:
                    flag("graph-orphan", project_id, "project does not exist")
                    continue
                graph = LinkGraph.from_doc(doc)
                members = set(project_doc["members"])
                captures = {}
                for cid in members:
                    capture_doc = self.repo.captures.get(cid)
                    if capture_doc is not None:
                        captures[cid] = CaptureRecord.from_doc(capture_doc)
                for problem in validate_graph(graph, captures, members):
                    flag("graph-invariant", project_id, problem)

            for capture_id, doc in self.repo.audit.items():
                capture_doc = self.repo.captures.get(capture_id)
                if capture_doc is None:
                    flag("audit-orphan", capture_id, "capture does not exist")
                    continue
                entries = doc["entries"]
                for prev, current in zip(entries, entries[1:]):
                    if prev["new_ts"] != current["old_ts"]:
                        flag("audit-chain", capture_id, "entries do not chain old_ts -> new_ts")
                if entries and entries[-1]["new_ts"] != capture_doc["timestamp"]:
                    flag("audit-chain", capture_id, "last correction does not match stored timestamp")

        return violations
