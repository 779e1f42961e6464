"""Figure computation over repository data.

Every function here is pure: output depends only on the input data, the seed
and the parameters. Inputs are re-sorted into canonical order internally, so
shuffling them never changes a result.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from datetime import datetime
from typing import Iterable, Mapping, Sequence
from zoneinfo import ZoneInfo

import numpy as np

from .model import (
    CaptureRecord,
    CodeAssignment,
    CodingScheme,
    LinkGraph,
    NodeClass,
    Project,
    canonical_order,
)


class AnalyticsError(Exception):
    """Input data violates a figure precondition."""


JITTER_BOUND = 0.4


def jitter(seed: int | str, capture_id: str) -> float:
    """Deterministic offset in [-0.4, 0.4), keyed by (seed, capture_id).

    Hash-derived rather than drawn from a sequential PRNG so a capture keeps
    its jitter no matter which dataset or iteration order it appears in.
    """
    digest = hashlib.sha256(f"{seed}:{capture_id}".encode("utf-8")).digest()
    unit = int.from_bytes(digest[:8], "big") / 2**64
    return unit * 2 * JITTER_BOUND - JITTER_BOUND


@dataclass(frozen=True)
class ScatterPoint:
    capture_id: str
    x: float
    lane: int
    jitter: float
    color_key: str | None

    def to_doc(self) -> dict:
        return {
            "capture_id": self.capture_id,
            "x": self.x,
            "lane": self.lane,
            "jitter": self.jitter,
            "color_key": self.color_key,
        }


@dataclass(frozen=True)
class CumulativeSeries:
    scheme_id: str
    points: tuple[tuple[int, int], ...]

    def to_doc(self) -> dict:
        return {
            "scheme_id": self.scheme_id,
            "points": [{"k": k, "value": v} for k, v in self.points],
        }


@dataclass(frozen=True)
class CategoryMatrix:
    scheme_id: str
    capture_ids: tuple[str, ...]
    categories: tuple[str, ...]
    cells: np.ndarray  # shape (len(capture_ids), len(categories)), values 0/1

    def row_sums(self) -> list[int]:
        return [int(v) for v in self.cells.sum(axis=1)]

    def column_sums(self) -> list[int]:
        return [int(v) for v in self.cells.sum(axis=0)]

    def to_doc(self) -> dict:
        return {
            "scheme_id": self.scheme_id,
            "capture_ids": list(self.capture_ids),
            "categories": list(self.categories),
            "cells": self.cells.astype(int).tolist(),
        }


@dataclass(frozen=True)
class PositionedNode:
    capture_id: str
    x: float
    y: float
    node_class: NodeClass

    def to_doc(self) -> dict:
        return {
            "capture_id": self.capture_id,
            "x": self.x,
            "y": self.y,
            "node_class": self.node_class.value,
        }


@dataclass(frozen=True)
class GraphLayout:
    nodes: tuple[PositionedNode, ...]
    edges: tuple[tuple[str, str], ...]

    def to_doc(self) -> dict:
        return {
            "nodes": [n.to_doc() for n in self.nodes],
            "edges": [{"from": a, "to": b} for a, b in self.edges],
        }


@dataclass(frozen=True)
class BulkSession:
    card_id: str
    window_start: int
    window_end: int
    capture_ids: tuple[str, ...]
    count: int

    def to_doc(self) -> dict:
        return {
            "card_id": self.card_id,
            "window_start": self.window_start,
            "window_end": self.window_end,
            "capture_ids": list(self.capture_ids),
            "count": self.count,
        }


def _first_project_by_id(
    capture_id: str, projects: Iterable[Project] | None
) -> str | None:
    if projects is None:
        return None
    owning = sorted(p.project_id for p in projects if capture_id in p.members)
    return owning[0] if owning else None


def weekday_scatter(
    captures: Sequence[CaptureRecord],
    seed: int | str = 0,
    tz: str = "UTC",
    projects: Iterable[Project] | None = None,
) -> list[ScatterPoint]:
    """Time-of-day scatter: x in hours [0, 24), one lane per weekday (Mon=0).

    Color key is the capture's project, taking the first project id in sorted
    order when it belongs to several, and None when unassigned.
    """
    zone = ZoneInfo(tz)
    project_list = list(projects) if projects is not None else None
    points = []
    for record in canonical_order(captures):
        local = datetime.fromtimestamp(record.timestamp, tz=zone)
        x = local.hour + local.minute / 60 + local.second / 3600
        points.append(
            ScatterPoint(
                capture_id=record.capture_id,
                x=x,
                lane=local.weekday(),
                jitter=jitter(seed, record.capture_id),
                color_key=_first_project_by_id(record.capture_id, project_list),
            )
        )
    return points


def project_timeline(
    captures: Sequence[CaptureRecord], seed: int | str = 0
) -> list[ScatterPoint]:
    """Absolute-time scatter on a single lane; gaps stay visible (no binning)."""
    return [
        ScatterPoint(
            capture_id=record.capture_id,
            x=float(record.timestamp),
            lane=0,
            jitter=jitter(seed, record.capture_id),
            color_key=None,
        )
        for record in canonical_order(captures)
    ]


def _categories_by_capture(
    assignments: Iterable[CodeAssignment], scheme: CodingScheme
) -> dict[str, set[str]]:
    allowed = set(scheme.categories)
    out: dict[str, set[str]] = {}
    for assignment in assignments:
        if assignment.scheme_id != scheme.scheme_id:
            raise AnalyticsError(
                f"assignment for {assignment.capture_id!r} references scheme "
                f"{assignment.scheme_id!r}, expected {scheme.scheme_id!r}"
            )
        cats = out.setdefault(assignment.capture_id, set())
        cats.update(c for c in assignment.categories if c in allowed)
    return out


def cumulative_usage(
    captures: Sequence[CaptureRecord],
    assignments: Iterable[CodeAssignment],
    scheme: CodingScheme,
    mode: str = "distinct",
) -> CumulativeSeries:
    """Point k = categories used over the first k captures in canonical order.

    The default counts distinct categories (the union so far). mode="summed"
    instead accumulates per-capture category counts; it is exposed because the
    quantity cannot be read off a cumulative plot unambiguously.
    """
    if mode not in ("distinct", "summed"):
        raise AnalyticsError(f"unknown cumulative mode {mode!r}")
    by_capture = _categories_by_capture(assignments, scheme)
    ordered = canonical_order(captures)
    points = []
    seen: set[str] = set()
    total = 0
    for k, record in enumerate(ordered, start=1):
        cats = by_capture.get(record.capture_id, set())
        seen |= cats
        total += len(cats)
        points.append((k, len(seen) if mode == "distinct" else total))
    return CumulativeSeries(scheme.scheme_id, tuple(points))


def category_matrix(
    captures: Sequence[CaptureRecord],
    assignments: Iterable[CodeAssignment],
    scheme: CodingScheme,
) -> CategoryMatrix:
    """0/1 membership matrix: one row per capture (canonical order), one
    column per scheme category. Row sums are the bar heights of the
    per-prototype category charts."""
    by_capture = _categories_by_capture(assignments, scheme)
    ordered = canonical_order(captures)
    col_index = {cat: j for j, cat in enumerate(scheme.categories)}
    cells = np.zeros((len(ordered), len(scheme.categories)), dtype=int)
    for i, record in enumerate(ordered):
        for cat in by_capture.get(record.capture_id, ()):
            cells[i, col_index[cat]] = 1
    return CategoryMatrix(
        scheme.scheme_id,
        tuple(r.capture_id for r in ordered),
        tuple(scheme.categories),
        cells,
    )


def layout_graph(
    graph: LinkGraph, captures: Sequence[CaptureRecord], seed: int | str = 0
) -> GraphLayout:
    """Chronological layout: x is the capture's rank 1..N in canonical order,
    y is deterministic jitter to spread over-plotted nodes. Every valid edge
    therefore points left to right."""
    ordered = canonical_order(captures)
    known = {record.capture_id for record in ordered}
    for node in sorted(graph.nodes()):
        if node not in known:
            raise AnalyticsError(f"graph references unknown capture {node!r}")
    nodes = tuple(
        PositionedNode(
            capture_id=record.capture_id,
            x=float(rank),
            y=jitter(seed, record.capture_id),
            node_class=graph.node_classes.get(record.capture_id, NodeClass.INTERNAL),
        )
        for rank, record in enumerate(ordered, start=1)
    )
    return GraphLayout(nodes, tuple(sorted(graph.edges)))


def detect_bulk(
    captures: Sequence[CaptureRecord],
    window_seconds: int = 1800,
    threshold: int = 20,
) -> list[BulkSession]:
    """Find per-card runs where every consecutive gap is within the window.

    Clusters are maximal, so they do not depend on the threshold; the
    threshold only filters which clusters get reported (strictly more than
    `threshold` captures). Sessions come back oldest-first.
    """
    if window_seconds <= 0:
        raise AnalyticsError("window_seconds must be positive")
    if threshold < 1:
        raise AnalyticsError("threshold must be at least 1")
    by_card: dict[str, list[CaptureRecord]] = {}
    for record in canonical_order(captures):
        by_card.setdefault(record.card_id, []).append(record)

    sessions = []
    for card_id, records in by_card.items():
        cluster: list[CaptureRecord] = []
        for record in records:
            if cluster and record.timestamp - cluster[-1].timestamp > window_seconds:
                if len(cluster) > threshold:
                    sessions.append(_session(card_id, cluster))
                cluster = []
            cluster.append(record)
        if len(cluster) > threshold:
            sessions.append(_session(card_id, cluster))
    sessions.sort(key=lambda s: (s.window_start, s.card_id))
    return sessions


def _session(card_id: str, cluster: list[CaptureRecord]) -> BulkSession:
    return BulkSession(
        card_id=card_id,
        window_start=cluster[0].timestamp,
        window_end=cluster[-1].timestamp,
        capture_ids=tuple(r.capture_id for r in cluster),
        count=len(cluster),
    )
