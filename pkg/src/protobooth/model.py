"""Domain types for prototype capture: records, projects, coding schemes, link graphs."""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping, Sequence


class ViewAngle(Enum):
    """The seven camera angles of a capture, in acquisition order."""

    FRONT = "front"
    TOP = "top"
    RIGHT = "right"
    LEFT = "left"
    REAR_RIGHT = "rear_right"
    REAR_LEFT = "rear_left"
    REAR = "rear"


# Acquisition order is the declaration order above and is relied on by the
# booth sequence and by duration accounting.
CAPTURE_ORDER: tuple[ViewAngle, ...] = tuple(ViewAngle)

_ANGLE_BY_NAME = {angle.value: angle for angle in ViewAngle}

# Identifiers end up as file and URL path segments.
_SAFE_ID = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")


class ModelError(Exception):
    """Base class for domain rule violations raised as exceptions."""


class UnknownCategoryError(ModelError):
    def __init__(self, scheme_id: str, category: str):
        super().__init__(f"unknown category {category!r} for scheme {scheme_id!r}")
        self.scheme_id = scheme_id
        self.category = category


class ChronologyError(ModelError):
    """Raised for link edges that do not point forward in time."""


class MembershipError(ModelError):
    """Raised for link edges whose endpoints are not project members."""


def is_safe_id(value: str) -> bool:
    return bool(_SAFE_ID.match(value))


def angle_from_name(name: str) -> ViewAngle:
    try:
        return _ANGLE_BY_NAME[name]
    except KeyError:
        raise ModelError(f"unknown view angle {name!r}") from None


@dataclass(frozen=True)
class ImageRef:
    """Pointer into the content-addressed blob store."""

    content_hash: str
    media_type: str
    byte_length: int

    def to_doc(self) -> dict:
        return {
            "content_hash": self.content_hash,
            "media_type": self.media_type,
            "byte_length": self.byte_length,
        }

    @classmethod
    def from_doc(cls, doc: Mapping) -> "ImageRef":
        return cls(doc["content_hash"], doc["media_type"], int(doc["byte_length"]))


@dataclass(frozen=True)
class Annotation:
    """Optional free-text metadata; an empty annotation is valid."""

    title: str | None = None
    description: str | None = None
    intent: str | None = None

    def is_empty(self) -> bool:
        return self.title is None and self.description is None and self.intent is None

    def merged_with(self, **updates: str | None) -> "Annotation":
        """Return a copy with only the passed fields replaced."""
        return replace(self, **updates)

    def to_doc(self) -> dict:
        return {"title": self.title, "description": self.description, "intent": self.intent}

    @classmethod
    def from_doc(cls, doc: Mapping) -> "Annotation":
        return cls(doc.get("title"), doc.get("description"), doc.get("intent"))


@dataclass(frozen=True)
class CaptureRecord:
    """One prototype capture: identity, booth/card/time metadata, and the 7 view images."""

    capture_id: str
    booth_id: str
    card_id: str
    timestamp: int
    views: Mapping[ViewAngle, ImageRef]
    annotation: Annotation = field(default_factory=Annotation)

    def sort_key(self) -> tuple[int, str]:
        return (self.timestamp, self.capture_id)

    def to_doc(self) -> dict:
        return {
            "capture_id": self.capture_id,
            "booth_id": self.booth_id,
            "card_id": self.card_id,
            "timestamp": self.timestamp,
            "views": {angle.value: ref.to_doc() for angle, ref in sorted(
                self.views.items(), key=lambda kv: CAPTURE_ORDER.index(kv[0]))},
            "annotation": self.annotation.to_doc(),
        }

    @classmethod
    def from_doc(cls, doc: Mapping) -> "CaptureRecord":
        views = {
            angle_from_name(name): ImageRef.from_doc(ref)
            for name, ref in doc["views"].items()
        }
        return cls(
            capture_id=doc["capture_id"],
            booth_id=doc["booth_id"],
            card_id=doc["card_id"],
            timestamp=int(doc["timestamp"]),
            views=views,
            annotation=Annotation.from_doc(doc.get("annotation", {})),
        )


@dataclass
class User:
    user_id: str
    display_name: str
    card_ids: set[str] = field(default_factory=set)

    def to_doc(self) -> dict:
        return {
            "user_id": self.user_id,
            "display_name": self.display_name,
            "card_ids": sorted(self.card_ids),
        }

    @classmethod
    def from_doc(cls, doc: Mapping) -> "User":
        return cls(doc["user_id"], doc["display_name"], set(doc.get("card_ids", [])))


@dataclass
class Project:
    project_id: str
    title: str
    description: str
    contributors: set[str] = field(default_factory=set)
    members: set[str] = field(default_factory=set)

    def to_doc(self) -> dict:
        return {
            "project_id": self.project_id,
            "title": self.title,
            "description": self.description,
            "contributors": sorted(self.contributors),
            "members": sorted(self.members),
        }

    @classmethod
    def from_doc(cls, doc: Mapping) -> "Project":
        return cls(
            doc["project_id"],
            doc["title"],
            doc["description"],
            set(doc.get("contributors", [])),
            set(doc.get("members", [])),
        )


@dataclass(frozen=True)
class CodingScheme:
    """A named, ordered list of category labels applied manually to captures."""

    scheme_id: str
    name: str
    categories: tuple[str, ...]

    def __post_init__(self):
        if not self.categories:
            raise ModelError(f"scheme {self.scheme_id!r} has no categories")
        if len(set(self.categories)) != len(self.categories):
            raise ModelError(f"scheme {self.scheme_id!r} has duplicate categories")

    def to_doc(self) -> dict:
        return {
            "scheme_id": self.scheme_id,
            "name": self.name,
            "categories": list(self.categories),
        }

    @classmethod
    def from_doc(cls, doc: Mapping) -> "CodingScheme":
        return cls(doc["scheme_id"], doc["name"], tuple(doc["categories"]))


@dataclass(frozen=True)
class CodeAssignment:
    """Per-capture multi-label assignment; categories kept in scheme order."""

    capture_id: str
    scheme_id: str
    categories: tuple[str, ...] = ()

    def to_doc(self) -> dict:
        return {
            "capture_id": self.capture_id,
            "scheme_id": self.scheme_id,
            "categories": list(self.categories),
        }

    @classmethod
    def from_doc(cls, doc: Mapping) -> "CodeAssignment":
        return cls(doc["capture_id"], doc["scheme_id"], tuple(doc["categories"]))


class NodeClass(Enum):
    INTERNAL = "internal"
    EXTERNAL_TEST = "external_test"
    FINAL_CONCEPT = "final_concept"


@dataclass
class LinkGraph:
    """Chronology-respecting directed edges between a project's captures."""

    project_id: str
    node_classes: dict[str, NodeClass] = field(default_factory=dict)
    edges: set[tuple[str, str]] = field(default_factory=set)

    def nodes(self) -> set[str]:
        found = set(self.node_classes)
        for src, dst in self.edges:
            found.add(src)
            found.add(dst)
        return found

    def final_nodes(self) -> list[str]:
        return sorted(
            cid for cid, cls in self.node_classes.items() if cls is NodeClass.FINAL_CONCEPT
        )

    def to_doc(self) -> dict:
        return {
            "project_id": self.project_id,
            "node_classes": {cid: cls.value for cid, cls in sorted(self.node_classes.items())},
            "edges": sorted([src, dst] for src, dst in self.edges),
        }

    @classmethod
    def from_doc(cls, doc: Mapping) -> "LinkGraph":
        return cls(
            project_id=doc["project_id"],
            node_classes={cid: NodeClass(v) for cid, v in doc.get("node_classes", {}).items()},
            edges={(src, dst) for src, dst in doc.get("edges", [])},
        )


# --- operations -------------------------------------------------------------


def validate_capture(record: CaptureRecord) -> list[str]:
    """Return every violated record invariant; an empty list means the record is valid.

    Violations are data, not faults: callers decide whether to reject.
    """
    violations: list[str] = []
    for name in ("capture_id", "booth_id", "card_id"):
        value = getattr(record, name)
        if not value:
            violations.append(f"{name} empty")
        elif not is_safe_id(value):
            violations.append(f"{name} malformed: {value!r}")
    if record.timestamp <= 0:
        violations.append("timestamp nonpositive")
    missing = [angle for angle in CAPTURE_ORDER if angle not in record.views]
    if missing:
        violations.append("views incomplete: " + ", ".join(a.value for a in missing))
    for key in record.views:
        if not isinstance(key, ViewAngle):
            violations.append(f"views unknown angle: {key!r}")
    for angle in CAPTURE_ORDER:
        ref = record.views.get(angle)
        if ref is None:
            continue
        if ref.byte_length <= 0:
            violations.append(f"view {angle.value}: byte_length nonpositive")
        if not re.fullmatch(r"[0-9a-f]{64}", ref.content_hash or ""):
            violations.append(f"view {angle.value}: content_hash not a sha256 hex digest")
    return violations


MATERIALS_SCHEME_ID = "materials"
TOOLS_SCHEME_ID = "tools"
DISCIPLINES_SCHEME_ID = "disciplines"


def builtin_schemes() -> list[CodingScheme]:
    """The three stock coding schemes: 9 materials, 6 tools, 3 disciplines."""
    return [
        CodingScheme(
            MATERIALS_SCHEME_ID,
            "materials",
            (
                "foam",
                "cardboard",
                "MDF",
                "wood",
                "hard plastics",
                "soft plastics",
                "metal",
                "electronics",
                "other",
            ),
        ),
        CodingScheme(
            TOOLS_SCHEME_ID,
            "tools",
            (
                "hand tools",
                "3D-printer",
                "laser cutter",
                "machining",
                "vacuum former",
                "computer",
            ),
        ),
        CodingScheme(
            DISCIPLINES_SCHEME_ID,
            "disciplines",
            ("mechanics", "software", "electronics"),
        ),
    ]


def assign_codes(
    capture_id: str, scheme: CodingScheme, categories: Iterable[str]
) -> CodeAssignment:
    """Build an assignment after checking every label against the scheme.

    An empty category list is a valid "nothing observed" assignment. Labels are
    deduplicated and stored in scheme order.
    """
    requested = list(categories)
    for category in requested:
        if category not in scheme.categories:
            raise UnknownCategoryError(scheme.scheme_id, category)
    chosen = set(requested)
    ordered = tuple(c for c in scheme.categories if c in chosen)
    return CodeAssignment(capture_id, scheme.scheme_id, ordered)


def canonical_order(captures: Iterable[CaptureRecord]) -> list[CaptureRecord]:
    """Sort by (timestamp, capture_id): the total order every figure relies on."""
    return sorted(captures, key=CaptureRecord.sort_key)


def add_link(
    graph: LinkGraph,
    from_id: str,
    to_id: str,
    captures: Mapping[str, CaptureRecord],
    members: set[str] | None = None,
) -> LinkGraph:
    """Add a directed edge, enforcing membership and forward chronology.

    `captures` maps capture_id to its record for ordering; `members` defaults
    to the capture map's keys.
    """
    allowed = set(captures) if members is None else members
    for endpoint in (from_id, to_id):
        if endpoint not in allowed:
            raise MembershipError(f"{endpoint!r} is not a project member")
        if endpoint not in captures:
            raise MembershipError(f"{endpoint!r} has no capture record")
    if captures[from_id].sort_key() >= captures[to_id].sort_key():
        raise ChronologyError(
            f"edge must point forward in time: {from_id!r} -> {to_id!r}"
        )
    graph.edges.add((from_id, to_id))
    graph.node_classes.setdefault(from_id, NodeClass.INTERNAL)
    graph.node_classes.setdefault(to_id, NodeClass.INTERNAL)
    return graph


def validate_graph(
    graph: LinkGraph,
    captures: Mapping[str, CaptureRecord],
    members: set[str] | None = None,
) -> list[str]:
    """Return every violated graph invariant (membership, chronology, final uniqueness)."""
    allowed = set(captures) if members is None else members
    violations: list[str] = []
    for cid in sorted(graph.nodes()):
        if cid not in allowed:
            violations.append(f"graph node {cid!r} is not a project member")
        elif cid not in captures:
            violations.append(f"graph node {cid!r} has no capture record")
    for src, dst in sorted(graph.edges):
        if src in captures and dst in captures:
            if captures[src].sort_key() >= captures[dst].sort_key():
                violations.append(f"edge {src!r} -> {dst!r} does not point forward in time")
    finals = graph.final_nodes()
    if len(finals) > 1:
        violations.append("multiple final-concept nodes: " + ", ".join(finals))
    return violations


def reachability(graph: LinkGraph) -> dict[str, bool]:
    """For each node, whether a directed path leads to the final-concept node.

    With no final-concept node every flag is False. The final node itself
    reaches trivially.
    """
    nodes = graph.nodes()
    finals = graph.final_nodes()
    if not finals:
        return {cid: False for cid in nodes}
    final = finals[0]
    incoming: dict[str, list[str]] = {cid: [] for cid in nodes}
    for src, dst in graph.edges:
        incoming[dst].append(src)
    reaches = {cid: False for cid in nodes}
    if final in reaches:
        reaches[final] = True
    frontier = [final]
    while frontier:
        current = frontier.pop()
        for src in incoming.get(current, ()):
            if not reaches[src]:
                reaches[src] = True
                frontier.append(src)
    return reaches
