/** Link editor: the project's captures as a chronological strip of nodes.
 * Clicking two nodes in order draws an edge; clicking a node's class badge
 * cycles internal, external test, final concept. Edits that break the
 * chronology or final-uniqueness rules are refused before any round trip,
 * with the same wording the server would use; everything else is PUT whole
 * and re-read, so the strip always shows the stored graph.
 */

import { ApiClient, ApiError } from "../api.js";
import { classViolation, edgeViolation, nextNodeClass } from "../chronology.js";
import { clear, el, formatTimestamp, showViolations } from "../dom.js";
import type { CaptureDoc, LinkGraphDoc, NodeClassName } from "../types.js";

export class LinkEditorView {
  readonly root: HTMLElement;
  private api: ApiClient;
  private projectId: string;
  private errors: HTMLElement;
  private captures = new Map<string, CaptureDoc>();
  private graph: LinkGraphDoc = { project_id: "", node_classes: {}, edges: [] };
  private pendingSource: string | null = null;

  constructor(api: ApiClient, mount: HTMLElement, projectId: string) {
    this.api = api;
    this.projectId = projectId;
    this.root = el("section", { class: "link-editor" });
    this.errors = el("div", { class: "violations", hidden: "" });
    mount.append(this.root);
  }

  async load(): Promise<void> {
    const [project, graph, members] = await Promise.all([
      this.api.getProject(this.projectId),
      this.api.getLinks(this.projectId),
      this.api.listCaptures({ project: this.projectId }),
    ]);
    this.graph = graph;
    this.captures = new Map(members.map((c) => [c.capture_id, c]));
    this.pendingSource = null;
    clear(this.root);
    this.root.append(el("h2", {}, [`Links: ${project.title}`]), this.errors);

    // members arrive in canonical (timestamp, id) order, which is the strip order
    const strip = el("div", { class: "node-strip" });
    members.forEach((capture, index) => {
      strip.append(this.nodeCell(capture, index + 1));
    });
    this.root.append(strip);

    const edgeList = el("ul", { class: "edges" });
    for (const [from, to] of this.graph.edges) {
      const remove = el("button", { type: "button", class: "remove-edge" }, ["remove"]);
      remove.addEventListener("click", () => {
        void this.removeEdge(from, to);
      });
      edgeList.append(
        el("li", { "data-edge": `${from}>${to}` }, [`${from} to ${to} `, remove]),
      );
    }
    this.root.append(
      el("h3", {}, [`Edges (${this.graph.edges.length})`]),
      edgeList,
      el("p", { class: "hint" }, [
        "Click an earlier node, then a later one, to draw a derivation edge.",
      ]),
    );
  }

  private nodeClassOf(captureId: string): NodeClassName {
    return this.graph.node_classes[captureId] ?? "internal";
  }

  private nodeCell(capture: CaptureDoc, ordinal: number): HTMLElement {
    const nodeClass = this.nodeClassOf(capture.capture_id);
    const badge = el("button", { type: "button", class: `badge ${nodeClass}` }, [
      nodeClass.replace("_", " "),
    ]);
    badge.addEventListener("click", (event) => {
      event.stopPropagation();
      void this.cycleClass(capture.capture_id);
    });
    const cell = el("div", {
      class:
        "node" + (this.pendingSource === capture.capture_id ? " selected" : ""),
      "data-capture-id": capture.capture_id,
    }, [
      el("img", {
        src: this.api.viewUrl(capture.capture_id, "front"),
        alt: capture.capture_id,
        class: "thumb",
      }),
      el("span", { class: "ordinal" }, [String(ordinal)]),
      el("small", {}, [formatTimestamp(capture.timestamp)]),
      badge,
    ]);
    cell.addEventListener("click", () => {
      void this.pickNode(capture.capture_id);
    });
    return cell;
  }

  private async pickNode(captureId: string): Promise<void> {
    if (this.pendingSource === null) {
      this.pendingSource = captureId;
      for (const cell of this.root.querySelectorAll(".node")) {
        cell.classList.toggle(
          "selected",
          cell.getAttribute("data-capture-id") === captureId,
        );
      }
      return;
    }
    const from = this.pendingSource;
    this.pendingSource = null;
    if (from === captureId) {
      await this.load();
      return;
    }
    await this.drawEdge(from, captureId);
  }

  private async drawEdge(from: string, to: string): Promise<void> {
    const blocked = edgeViolation(this.captures, from, to);
    if (blocked) {
      showViolations(this.errors, [blocked]);
      this.pendingSource = null;
      return;
    }
    if (this.graph.edges.some(([a, b]) => a === from && b === to)) {
      showViolations(this.errors, [`edge already present: '${from}' -> '${to}'`]);
      return;
    }
    await this.putGraph({
      ...this.graph,
      edges: [...this.graph.edges, [from, to]],
    });
  }

  private async removeEdge(from: string, to: string): Promise<void> {
    await this.putGraph({
      ...this.graph,
      edges: this.graph.edges.filter(([a, b]) => !(a === from && b === to)),
    });
  }

  private async cycleClass(captureId: string): Promise<void> {
    const next = nextNodeClass(this.nodeClassOf(captureId));
    const blocked = classViolation(this.graph, captureId, next);
    if (blocked) {
      showViolations(this.errors, [blocked]);
      return;
    }
    await this.putGraph({
      ...this.graph,
      node_classes: { ...this.graph.node_classes, [captureId]: next },
    });
  }

  private async putGraph(graph: LinkGraphDoc): Promise<void> {
    try {
      await this.api.putLinks(graph);
      await this.load();
    } catch (err) {
      // client checks are advisory only; show what the server said
      if (err instanceof ApiError) showViolations(this.errors, err.violations);
      else showViolations(this.errors, [String(err)]);
    }
  }
}
