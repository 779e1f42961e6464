/** Figure panel: the analytics charts, fetched as data and drawn client-side
 * so points can carry hover previews. Nothing is computed here beyond
 * projecting served coordinates to pixels; a "server SVG" link offers the
 * backend's own static rendering of the same figure.
 */

import { ApiClient, ApiError } from "../api.js";
import { clear, el, showViolations, svgEl } from "../dom.js";
import type {
  GraphLayoutDoc,
  MatrixDoc,
  ScatterPointDoc,
  SchemeDoc,
} from "../types.js";

const WIDTH = 800;
const HEIGHT = 320;
const MARGIN = 40;
const WEEKDAYS = ["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"];
const CLASS_COLORS: Record<string, string> = {
  internal: "#4878a8",
  external_test: "#e0a03c",
  final_concept: "#c04848",
};

export type FigureKind =
  | "timeline"
  | "weekday"
  | "cumulative"
  | "matrix"
  | "graph"
  | "bulk";

const KINDS: FigureKind[] = [
  "timeline",
  "weekday",
  "cumulative",
  "matrix",
  "graph",
  "bulk",
];

export class FigurePanelView {
  readonly root: HTMLElement;
  kind: FigureKind = "timeline";
  schemeId: string | null = null;
  private api: ApiClient;
  private projectId: string | undefined;
  private errors: HTMLElement;
  private schemes: SchemeDoc[] = [];

  constructor(api: ApiClient, mount: HTMLElement, projectId?: string) {
    this.api = api;
    this.projectId = projectId;
    this.root = el("section", { class: "figure-panel" });
    this.errors = el("div", { class: "violations", hidden: "" });
    mount.append(this.root);
  }

  async load(): Promise<void> {
    if (!this.schemes.length) {
      this.schemes = await this.api.listSchemes();
      if (this.schemes.length && this.schemeId === null) {
        this.schemeId = this.schemes[0].scheme_id;
      }
    }
    clear(this.root);
    const scope = this.projectId ? `project ${this.projectId}` : "all captures";
    this.root.append(el("h2", {}, [`Figures: ${scope}`]), this.errors);

    const tabs = el("nav", { class: "figure-tabs" });
    for (const kind of KINDS) {
      if (kind === "graph" && !this.projectId) continue;
      const tab = el("button", {
        type: "button",
        class: "tab" + (kind === this.kind ? " active" : ""),
        "data-kind": kind,
      }, [kind]);
      tab.addEventListener("click", () => {
        this.kind = kind;
        void this.load();
      });
      tabs.append(tab);
    }
    this.root.append(tabs);

    if (this.kind === "cumulative" || this.kind === "matrix") {
      const select = el("select", { class: "scheme-select" });
      for (const scheme of this.schemes) {
        const option = el("option", { value: scheme.scheme_id }, [scheme.name]);
        if (scheme.scheme_id === this.schemeId) option.selected = true;
        select.append(option);
      }
      select.addEventListener("change", () => {
        this.schemeId = select.value;
        void this.load();
      });
      this.root.append(select);
    }

    const body = el("div", { class: "figure-body" });
    const preview = el("div", { class: "preview", hidden: "" });
    this.root.append(body, preview);
    try {
      await this.drawInto(body, preview);
    } catch (err) {
      if (err instanceof ApiError) showViolations(this.errors, err.violations);
      else showViolations(this.errors, [String(err)]);
    }
  }

  private serverLink(name: string, query: Record<string, string | number | undefined>): HTMLElement {
    return el("p", {}, [
      el("a", { class: "server-svg", href: this.api.figureUrl(name, query) }, [
        "server SVG",
      ]),
    ]);
  }

  private async drawInto(body: HTMLElement, preview: HTMLElement): Promise<void> {
    const project = this.projectId;
    if (this.kind === "timeline") {
      const points = await this.api.timeline(project);
      body.append(
        this.scatterSvg(points, 1, null, preview),
        this.serverLink("timeline", { project }),
      );
    } else if (this.kind === "weekday") {
      const points = await this.api.weekday(project);
      body.append(
        this.scatterSvg(points, 7, [0, 24], preview),
        this.serverLink("weekday", { project }),
      );
    } else if (this.kind === "cumulative") {
      const series = await this.api.cumulative(this.schemeId ?? "", project);
      body.append(
        this.cumulativeSvg(series.points.map((p) => [p.k, p.value])),
        this.serverLink("cumulative", { project, scheme: this.schemeId ?? "" }),
      );
    } else if (this.kind === "matrix") {
      const matrix = await this.api.matrix(this.schemeId ?? "", project);
      body.append(
        this.matrixTable(matrix),
        this.serverLink("matrix", { project, scheme: this.schemeId ?? "" }),
      );
    } else if (this.kind === "graph") {
      const layout = await this.api.graphLayout(project!);
      body.append(this.graphSvg(layout, preview), this.serverLink("graph", { project }));
    } else {
      const sessions = await this.api.bulk(project);
      const list = el("ul", { class: "bulk-sessions" });
      for (const s of sessions) {
        list.append(
          el("li", {}, [
            `${s.card_id}: ${s.count} captures between ${s.window_start} and ${s.window_end}`,
          ]),
        );
      }
      if (!sessions.length) list.append(el("li", {}, ["no bulk sessions detected"]));
      body.append(list);
    }
  }

  /** Project served (x, lane, jitter) points onto a fixed pixel canvas. */
  private scatterSvg(
    points: ScatterPointDoc[],
    laneCount: number,
    xRange: [number, number] | null,
    preview: HTMLElement,
  ): SVGElement {
    const svg = svgEl("svg", {
      viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
      class: "figure scatter",
    });
    const xs = points.map((p) => p.x);
    const [xMin, xMax] = xRange ?? [Math.min(...xs, 0), Math.max(...xs, 1)];
    const span = xMax - xMin || 1;
    const plotWidth = WIDTH - 2 * MARGIN;
    const laneHeight = (HEIGHT - 2 * MARGIN) / laneCount;
    for (let lane = 0; lane < laneCount; lane++) {
      const y = MARGIN + (lane + 0.5) * laneHeight;
      svg.append(
        svgEl("line", {
          x1: String(MARGIN),
          x2: String(WIDTH - MARGIN),
          y1: String(y),
          y2: String(y),
          class: "lane",
        }),
      );
      if (laneCount === 7) {
        svg.append(
          svgEl("text", { x: "4", y: String(y + 4), class: "lane-label" }, [
            WEEKDAYS[lane],
          ]),
        );
      }
    }
    const colorKeys = [...new Set(points.map((p) => p.color_key).filter((k) => k !== null))];
    for (const point of points) {
      const x = MARGIN + ((point.x - xMin) / span) * plotWidth;
      const y = MARGIN + (point.lane + 0.5 + point.jitter) * laneHeight;
      const hue = point.color_key === null
        ? "#888888"
        : `hsl(${(colorKeys.indexOf(point.color_key) * 67) % 360} 60% 45%)`;
      const dot = svgEl("circle", {
        cx: x.toFixed(1),
        cy: y.toFixed(1),
        r: "4",
        fill: hue,
        "data-capture-id": point.capture_id,
      }, [svgEl("title", {}, [point.capture_id])]);
      this.attachPreview(dot, point.capture_id, preview);
      svg.append(dot);
    }
    return svg;
  }

  private cumulativeSvg(points: [number, number][]): SVGElement {
    const svg = svgEl("svg", {
      viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
      class: "figure cumulative",
    });
    if (!points.length) return svg;
    const kMax = points[points.length - 1][0];
    const vMax = Math.max(...points.map(([, v]) => v), 1);
    const px = (k: number) => MARGIN + ((k - 1) / Math.max(kMax - 1, 1)) * (WIDTH - 2 * MARGIN);
    const py = (v: number) => HEIGHT - MARGIN - (v / vMax) * (HEIGHT - 2 * MARGIN);
    const path = points
      .map(([k, v], i) => `${i ? "L" : "M"}${px(k).toFixed(1)},${py(v).toFixed(1)}`)
      .join(" ");
    svg.append(svgEl("path", { d: path, class: "series", fill: "none" }));
    for (const [k, v] of points) {
      svg.append(
        svgEl("circle", {
          cx: px(k).toFixed(1),
          cy: py(v).toFixed(1),
          r: "3",
          "data-k": String(k),
        }, [svgEl("title", {}, [`k=${k}: ${v}`])]),
      );
    }
    svg.append(
      svgEl("text", { x: String(WIDTH - MARGIN), y: String(MARGIN), class: "final-count" }, [
        String(points[points.length - 1][1]),
      ]),
    );
    return svg;
  }

  private matrixTable(matrix: MatrixDoc): HTMLElement {
    const table = el("table", { class: "matrix" });
    table.append(
      el("tr", {}, [
        el("th", {}, ["capture"]),
        ...matrix.categories.map((c) => el("th", {}, [c])),
      ]),
    );
    matrix.capture_ids.forEach((captureId, row) => {
      table.append(
        el("tr", { "data-capture-id": captureId }, [
          el("td", {}, [el("a", { href: `#/captures/${captureId}` }, [captureId])]),
          ...matrix.categories.map((_, col) =>
            el("td", { class: matrix.cells[row][col] ? "hit" : "miss" }, [
              matrix.cells[row][col] ? "x" : "",
            ]),
          ),
        ]),
      );
    });
    return table;
  }

  private graphSvg(layout: GraphLayoutDoc, preview: HTMLElement): SVGElement {
    const svg = svgEl("svg", {
      viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
      class: "figure graph",
    });
    const ranks = layout.nodes.map((n) => n.x);
    const span = Math.max(...ranks, 1) - Math.min(...ranks, 1) || 1;
    const xMin = Math.min(...ranks, 1);
    const px = (x: number) => MARGIN + ((x - xMin) / span) * (WIDTH - 2 * MARGIN);
    const py = (jit: number) => HEIGHT / 2 + jit * (HEIGHT - 2 * MARGIN);
    const at = new Map(layout.nodes.map((n) => [n.capture_id, n]));
    for (const edge of layout.edges) {
      const a = at.get(edge.from);
      const b = at.get(edge.to);
      if (!a || !b) continue;
      svg.append(
        svgEl("line", {
          x1: px(a.x).toFixed(1),
          y1: py(a.y).toFixed(1),
          x2: px(b.x).toFixed(1),
          y2: py(b.y).toFixed(1),
          class: "edge",
        }),
      );
    }
    for (const node of layout.nodes) {
      const dot = svgEl("circle", {
        cx: px(node.x).toFixed(1),
        cy: py(node.y).toFixed(1),
        r: "5",
        fill: CLASS_COLORS[node.node_class] ?? "#888888",
        "data-capture-id": node.capture_id,
      }, [svgEl("title", {}, [node.capture_id])]);
      this.attachPreview(dot, node.capture_id, preview);
      svg.append(dot);
    }
    return svg;
  }

  /** Hovering a plotted point shows that prototype's front view. */
  private attachPreview(dot: SVGElement, captureId: string, preview: HTMLElement): void {
    dot.addEventListener("mouseenter", () => {
      clear(preview);
      preview.append(
        el("img", { src: this.api.viewUrl(captureId, "front"), alt: captureId }),
        el("a", { href: `#/captures/${captureId}` }, [captureId]),
      );
      preview.hidden = false;
    });
    dot.addEventListener("mouseleave", () => {
      preview.hidden = true;
    });
  }
}
