"""Deterministic SVG and CSV renderings of figure data.

SVG output is built from plain strings with fixed float formatting so a given
figure and seed always produce byte-identical files (golden-file testable).
CSV schemas are documented per figure in the README.
"""

from __future__ import annotations

import csv
import io
from datetime import datetime, timezone
from typing import Sequence

from .analytics import (
    BulkSession,
    CategoryMatrix,
    CumulativeSeries,
    GraphLayout,
    ScatterPoint,
)
from .model import NodeClass
from .store import canonical_json

CANVAS_WIDE = (1000, 400)
CANVAS_GRAPH = (1200, 600)

_PALETTE = (
    "#4c78a8",
    "#f58518",
    "#54a24b",
    "#e45756",
    "#72b7b2",
    "#eeca3b",
    "#b279a2",
    "#ff9da6",
    "#9d755d",
    "#bab0ac",
)
_UNASSIGNED_COLOR = "#999999"
_CLASS_COLORS = {
    NodeClass.INTERNAL: "#4c78a8",
    NodeClass.EXTERNAL_TEST: "#f58518",
    NodeClass.FINAL_CONCEPT: "#e45756",
}
_WEEKDAY_NAMES = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")


def _f(value: float) -> str:
    return f"{value:.3f}"


def _svg_document(width: int, height: int, body: list[str]) -> bytes:
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}"'
        f' viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
    ]
    parts.extend(body)
    parts.append("</svg>")
    return ("\n".join(parts) + "\n").encode("utf-8")


def _text(x: float, y: float, content: str, anchor: str = "start", size: int = 11) -> str:
    return (
        f'<text x="{_f(x)}" y="{_f(y)}" font-family="sans-serif" font-size="{size}"'
        f' fill="#333333" text-anchor="{anchor}">{_escape(content)}</text>'
    )


def _escape(content: str) -> str:
    return content.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _line(x1: float, y1: float, x2: float, y2: float, color: str = "#cccccc", width: float = 1.0) -> str:
    return (
        f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}"'
        f' stroke="{color}" stroke-width="{_f(width)}"/>'
    )


def _circle(cx: float, cy: float, r: float, fill: str) -> str:
    return f'<circle cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(r)}" fill="{fill}"/>'


def _color_map(points: Sequence[ScatterPoint]) -> dict[str, str]:
    keys = sorted({p.color_key for p in points if p.color_key is not None})
    return {key: _PALETTE[i % len(_PALETTE)] for i, key in enumerate(keys)}


def weekday_scatter_svg(points: Sequence[ScatterPoint]) -> bytes:
    width, height = CANVAS_WIDE
    left, right, top, bottom = 60.0, 20.0, 20.0, 40.0
    plot_w = width - left - right
    plot_h = height - top - bottom
    lane_h = plot_h / 7
    colors = _color_map(points)
    body = []
    for hour in range(0, 25, 6):
        x = left + hour / 24 * plot_w
        body.append(_line(x, top, x, top + plot_h))
        body.append(_text(x, height - bottom + 16, f"{hour:02d}:00", anchor="middle"))
    for lane in range(7):
        y = top + (lane + 0.5) * lane_h
        body.append(_line(left, top + lane * lane_h, left + plot_w, top + lane * lane_h, "#eeeeee"))
        body.append(_text(left - 8, y + 4, _WEEKDAY_NAMES[lane], anchor="end"))
    for p in points:
        cx = left + p.x / 24 * plot_w
        cy = top + (p.lane + 0.5) * lane_h + p.jitter * lane_h
        fill = colors.get(p.color_key, _UNASSIGNED_COLOR) if p.color_key else _UNASSIGNED_COLOR
        body.append(_circle(cx, cy, 3.0, fill))
    return _svg_document(width, height, body)


def weekday_scatter_csv(points: Sequence[ScatterPoint]) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["capture_id", "x_hours", "weekday", "jitter", "project"])
    for p in points:
        writer.writerow(
            [p.capture_id, f"{p.x:.6f}", p.lane, f"{p.jitter:.6f}", p.color_key or ""]
        )
    return out.getvalue().encode("utf-8")


def _utc_date(ts: float) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%d")


def timeline_svg(points: Sequence[ScatterPoint]) -> bytes:
    width, height = CANVAS_WIDE
    left, right, top, bottom = 60.0, 20.0, 20.0, 40.0
    plot_w = width - left - right
    mid_y = top + (height - top - bottom) / 2
    body = [_line(left, mid_y, left + plot_w, mid_y, "#dddddd")]
    if points:
        lo = min(p.x for p in points)
        hi = max(p.x for p in points)
        span = hi - lo or 1.0
        for p in points:
            cx = left + (p.x - lo) / span * plot_w
            cy = mid_y + p.jitter * 300.0
            body.append(_circle(cx, cy, 3.0, _PALETTE[0]))
        body.append(_text(left, height - bottom + 16, _utc_date(lo)))
        body.append(_text(left + plot_w, height - bottom + 16, _utc_date(hi), anchor="end"))
    return _svg_document(width, height, body)


def timeline_csv(points: Sequence[ScatterPoint]) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["capture_id", "timestamp", "jitter"])
    for p in points:
        writer.writerow([p.capture_id, int(p.x), f"{p.jitter:.6f}"])
    return out.getvalue().encode("utf-8")


def cumulative_svg(series: CumulativeSeries) -> bytes:
    width, height = CANVAS_WIDE
    left, right, top, bottom = 60.0, 20.0, 20.0, 40.0
    plot_w = width - left - right
    plot_h = height - top - bottom
    body = [
        _line(left, top + plot_h, left + plot_w, top + plot_h, "#333333"),
        _line(left, top, left, top + plot_h, "#333333"),
    ]
    if series.points:
        max_k = max(k for k, _ in series.points)
        max_v = max((v for _, v in series.points), default=0) or 1
        coords = []
        for k, v in series.points:
            x = left + (k - 1) / max(max_k - 1, 1) * plot_w
            y = top + plot_h - v / max_v * plot_h
            coords.append(f"{_f(x)},{_f(y)}")
        body.append(
            f'<polyline points="{" ".join(coords)}" fill="none"'
            f' stroke="{_PALETTE[0]}" stroke-width="2.000"/>'
        )
        body.append(_text(left - 8, top + 4, str(max_v), anchor="end"))
        body.append(_text(left + plot_w, height - bottom + 16, str(max_k), anchor="end"))
    body.append(_text(left - 8, top + plot_h + 4, "0", anchor="end"))
    body.append(_text(left, height - bottom + 16, "1"))
    return _svg_document(width, height, body)


def cumulative_csv(series: CumulativeSeries) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["k", "distinct_count"])
    for k, v in series.points:
        writer.writerow([k, v])
    return out.getvalue().encode("utf-8")


def matrix_svg(matrix: CategoryMatrix) -> bytes:
    width, height = CANVAS_WIDE
    left, right, top, bottom = 110.0, 20.0, 20.0, 30.0
    plot_w = width - left - right
    plot_h = height - top - bottom
    n_rows = len(matrix.categories)
    n_cols = len(matrix.capture_ids)
    cell_h = plot_h / max(n_rows, 1)
    cell_w = plot_w / max(n_cols, 1)
    body = []
    for j, category in enumerate(matrix.categories):
        y = top + j * cell_h
        body.append(_text(left - 8, y + cell_h / 2 + 4, category, anchor="end", size=10))
        body.append(_line(left, y, left + plot_w, y, "#eeeeee"))
    for i in range(n_cols):
        for j in range(n_rows):
            if matrix.cells[i, j]:
                x = left + i * cell_w
                y = top + j * cell_h
                body.append(
                    f'<rect x="{_f(x)}" y="{_f(y)}" width="{_f(max(cell_w - 0.5, 0.5))}"'
                    f' height="{_f(max(cell_h - 0.5, 0.5))}"'
                    f' fill="{_PALETTE[j % len(_PALETTE)]}"/>'
                )
    if n_cols:
        body.append(_text(left, height - bottom + 16, "1"))
        body.append(_text(left + plot_w, height - bottom + 16, str(n_cols), anchor="end"))
    return _svg_document(width, height, body)


def matrix_csv(matrix: CategoryMatrix) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["capture_id", *matrix.categories])
    for i, capture_id in enumerate(matrix.capture_ids):
        writer.writerow([capture_id, *(int(v) for v in matrix.cells[i])])
    return out.getvalue().encode("utf-8")


def graph_svg(layout: GraphLayout) -> bytes:
    width, height = CANVAS_GRAPH
    left, right, top, bottom = 40.0, 40.0, 40.0, 40.0
    plot_w = width - left - right
    mid_y = top + (height - top - bottom) / 2
    n = len(layout.nodes)
    span = max(n - 1, 1)
    positions = {}
    for node in layout.nodes:
        cx = left + (node.x - 1) / span * plot_w
        cy = mid_y + node.y * 500.0
        positions[node.capture_id] = (cx, cy)
    body = []
    for a, b in layout.edges:
        (x1, y1), (x2, y2) = positions[a], positions[b]
        body.append(_line(x1, y1, x2, y2, "#bbbbbb", 1.2))
    for node in layout.nodes:
        cx, cy = positions[node.capture_id]
        body.append(_circle(cx, cy, 6.0, _CLASS_COLORS[node.node_class]))
    legend_y = 20.0
    legend_x = left
    for node_class in (NodeClass.INTERNAL, NodeClass.EXTERNAL_TEST, NodeClass.FINAL_CONCEPT):
        body.append(_circle(legend_x, legend_y, 5.0, _CLASS_COLORS[node_class]))
        body.append(_text(legend_x + 10, legend_y + 4, node_class.value))
        legend_x += 140.0
    return _svg_document(width, height, body)


def graph_csv(layout: GraphLayout) -> bytes:
    targets: dict[str, list[str]] = {}
    for a, b in layout.edges:
        targets.setdefault(a, []).append(b)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["capture_id", "rank", "jitter", "node_class", "links_to"])
    for node in layout.nodes:
        writer.writerow(
            [
                node.capture_id,
                int(node.x),
                f"{node.y:.6f}",
                node.node_class.value,
                ";".join(sorted(targets.get(node.capture_id, ()))),
            ]
        )
    return out.getvalue().encode("utf-8")


def bulk_report_csv(sessions: Sequence[BulkSession]) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["card_id", "window_start", "window_end", "count", "capture_ids"])
    for s in sessions:
        writer.writerow(
            [s.card_id, s.window_start, s.window_end, s.count, ";".join(s.capture_ids)]
        )
    return out.getvalue().encode("utf-8")


def bulk_report_json(sessions: Sequence[BulkSession]) -> bytes:
    return canonical_json({"sessions": [s.to_doc() for s in sessions]})


def render(figure: object, fmt: str, scatter_kind: str = "weekday") -> bytes:
    """Render any figure data structure to SVG or CSV bytes.

    Scatter point lists serve two figures, so `scatter_kind` picks between
    "weekday" (time-of-day lanes) and "timeline" (absolute time, one lane).
    """
    if fmt not in ("svg", "csv"):
        raise ValueError(f"unsupported format {fmt!r}")
    if isinstance(figure, CumulativeSeries):
        return cumulative_svg(figure) if fmt == "svg" else cumulative_csv(figure)
    if isinstance(figure, CategoryMatrix):
        return matrix_svg(figure) if fmt == "svg" else matrix_csv(figure)
    if isinstance(figure, GraphLayout):
        return graph_svg(figure) if fmt == "svg" else graph_csv(figure)
    if isinstance(figure, (list, tuple)) and all(isinstance(p, ScatterPoint) for p in figure):
        if scatter_kind == "weekday":
            return weekday_scatter_svg(figure) if fmt == "svg" else weekday_scatter_csv(figure)
        if scatter_kind == "timeline":
            return timeline_svg(figure) if fmt == "svg" else timeline_csv(figure)
        raise ValueError(f"unknown scatter kind {scatter_kind!r}")
    raise ValueError(f"unsupported figure data {type(figure).__name__}")
