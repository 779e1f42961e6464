/** One project's board: its member captures beside the pool of captures not
 * yet assigned to it (a capture may sit in several projects). Assignment is
 * a set union on the server, so reloading after each call is enough to agree
 * with concurrent sessions.
 */

import { ApiClient, ApiError } from "../api.js";
import { clear, el, formatTimestamp, showViolations } from "../dom.js";
import type { CaptureDoc } from "../types.js";

export class ProjectBoardView {
  readonly root: HTMLElement;
  private api: ApiClient;
  private projectId: string;
  private errors: HTMLElement;

  constructor(api: ApiClient, mount: HTMLElement, projectId: string) {
    this.api = api;
    this.projectId = projectId;
    this.root = el("section", { class: "project-board" });
    this.errors = el("div", { class: "violations", hidden: "" });
    mount.append(this.root);
  }

  async load(): Promise<void> {
    try {
      await this.render();
    } catch (err) {
      clear(this.root);
      this.root.append(this.errors);
      this.reportError(err);
    }
  }

  private async render(): Promise<void> {
    const [project, captures, users] = await Promise.all([
      this.api.getProject(this.projectId),
      this.api.listCaptures(),
      this.api.listUsers(),
    ]);
    const byId = new Map(captures.map((c) => [c.capture_id, c]));
    const memberSet = new Set(project.members);

    clear(this.root);
    this.root.append(
      el("h2", {}, [project.title]),
      el("p", { class: "description" }, [project.description]),
      this.errors,
    );

    const memberColumn = el("div", { class: "column members" }, [
      el("h3", {}, [`Members (${project.members.length})`]),
    ]);
    for (const captureId of project.members) {
      const capture = byId.get(captureId);
      if (capture) memberColumn.append(this.captureCard(capture));
    }

    const poolColumn = el("div", { class: "column pool" }, [
      el("h3", {}, ["Unassigned captures"]),
    ]);
    const boxes: HTMLInputElement[] = [];
    for (const capture of captures) {
      if (memberSet.has(capture.capture_id)) continue;
      const box = el("input", {
        type: "checkbox",
        value: capture.capture_id,
        "data-capture-id": capture.capture_id,
      });
      boxes.push(box);
      poolColumn.append(el("label", { class: "pool-item" }, [box, this.captureCard(capture)]));
    }
    const assignButton = el("button", { class: "assign" }, ["Assign selected"]);
    assignButton.addEventListener("click", () => {
      const picked = boxes.filter((b) => b.checked).map((b) => b.value);
      void this.assign(picked);
    });
    poolColumn.append(assignButton);

    this.root.append(el("div", { class: "board-columns" }, [memberColumn, poolColumn]));

    const contributorList = el("ul", { class: "contributors" });
    for (const userId of project.contributors) {
      contributorList.append(el("li", {}, [userId]));
    }
    const userSelect = el("select", { name: "contributor" });
    for (const user of users) {
      userSelect.append(el("option", { value: user.user_id }, [user.display_name]));
    }
    const addButton = el("button", { class: "add-contributor" }, ["Add contributor"]);
    addButton.addEventListener("click", () => {
      void this.addContributor(userSelect.value);
    });
    this.root.append(
      el("h3", {}, ["Contributors"]),
      contributorList,
      el("div", {}, [userSelect, addButton]),
      el("p", {}, [
        el("a", { href: `#/projects/${this.projectId}/links` }, ["Edit links"]),
        " ",
        el("a", { href: `#/projects/${this.projectId}/figures` }, ["Figures"]),
      ]),
    );
  }

  private captureCard(capture: CaptureDoc): HTMLElement {
    return el("span", { class: "capture-card", "data-capture-id": capture.capture_id }, [
      el("img", {
        src: this.api.viewUrl(capture.capture_id, "front"),
        alt: capture.capture_id,
        class: "thumb",
      }),
      el("a", { href: `#/captures/${capture.capture_id}` }, [
        capture.annotation.title ?? capture.capture_id,
      ]),
      el("small", {}, [`${capture.capturer}, ${formatTimestamp(capture.timestamp)}`]),
    ]);
  }

  private async assign(captureIds: string[]): Promise<void> {
    if (!captureIds.length) return;
    try {
      await this.api.assignMembers(this.projectId, captureIds);
      await this.render();
    } catch (err) {
      // keep the pool and its checkbox state; only surface the rejection
      this.reportError(err);
    }
  }

  private async addContributor(userId: string): Promise<void> {
    try {
      await this.api.addContributor(this.projectId, userId);
      await this.render();
    } catch (err) {
      this.reportError(err);
    }
  }

  private reportError(err: unknown): void {
    if (err instanceof ApiError) showViolations(this.errors, err.violations);
    else showViolations(this.errors, [String(err)]);
  }
}
