/** Hash router gluing the five screens to one mount point. */

import { ApiClient } from "./api.js";
import { clear, el } from "./dom.js";
import { CaptureDetailView } from "./views/captureDetail.js";
import { FigurePanelView } from "./views/figurePanel.js";
import { LinkEditorView } from "./views/linkEditor.js";
import { ProjectBoardView } from "./views/projectBoard.js";
import { ProjectListView } from "./views/projectList.js";

export class App {
  private api: ApiClient;
  private mount: HTMLElement;

  constructor(api: ApiClient, mount: HTMLElement) {
    this.api = api;
    this.mount = mount;
  }

  start(): void {
    window.addEventListener("hashchange", () => {
      void this.route();
    });
    void this.route();
  }

  async route(): Promise<void> {
    const hash = window.location.hash || "#/projects";
    const parts = hash.replace(/^#\/?/, "").split("/").filter(Boolean);
    clear(this.mount);
    this.mount.append(
      el("header", {}, [
        el("h1", {}, [el("a", { href: "#/projects" }, ["Prototype captures"])]),
        el("nav", {}, [
          el("a", { href: "#/projects" }, ["Projects"]),
          " ",
          el("a", { href: "#/figures" }, ["Figures"]),
        ]),
      ]),
    );
    const body = el("main");
    this.mount.append(body);
    try {
      if (parts[0] === "projects" && parts.length === 1) {
        await new ProjectListView(this.api, body).load();
      } else if (parts[0] === "projects" && parts.length === 2) {
        await new ProjectBoardView(this.api, body, parts[1]).load();
      } else if (parts[0] === "projects" && parts[2] === "links") {
        await new LinkEditorView(this.api, body, parts[1]).load();
      } else if (parts[0] === "projects" && parts[2] === "figures") {
        await new FigurePanelView(this.api, body, parts[1]).load();
      } else if (parts[0] === "captures" && parts.length === 2) {
        await new CaptureDetailView(this.api, body, parts[1]).load();
      } else if (parts[0] === "figures") {
        await new FigurePanelView(this.api, body).load();
      } else {
        body.append(el("p", {}, [`no such page: ${hash}`]));
      }
    } catch (err) {
      body.append(el("p", { class: "violation" }, [String(err)]));
    }
  }
}
