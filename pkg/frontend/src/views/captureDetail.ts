/** One capture: the seven-view gallery, the annotation form, coding-scheme
 * labels, and the timestamp correction with its audit trail.
 *
 * The form tracks which fields were actually edited and PATCHes only those,
 * so fields changed by someone else between load and save are preserved.
 */

import { ApiClient, ApiError } from "../api.js";
import { clear, el, formatTimestamp, showViolations } from "../dom.js";
import { CAPTURE_ORDER, angleLabel } from "../types.js";
import type { SchemeDoc } from "../types.js";

const INTENT_PICKS = ["learning", "communication", "decision"];

type FieldName = "title" | "description" | "intent";

export class CaptureDetailView {
  readonly root: HTMLElement;
  private api: ApiClient;
  private captureId: string;
  private errors: HTMLElement;
  private status: HTMLElement;
  private dirty = new Map<FieldName, string>();
  private fieldErrors = new Map<FieldName, HTMLElement>();

  constructor(api: ApiClient, mount: HTMLElement, captureId: string) {
    this.api = api;
    this.captureId = captureId;
    this.root = el("section", { class: "capture-detail" });
    this.errors = el("div", { class: "violations", hidden: "" });
    this.status = el("p", { class: "status" });
    mount.append(this.root);
  }

  async load(): Promise<void> {
    const [capture, codes, schemes, audit] = await Promise.all([
      this.api.getCapture(this.captureId),
      this.api.getCodes(this.captureId),
      this.api.listSchemes(),
      this.api.auditLog(this.captureId),
    ]);
    this.dirty.clear();
    this.fieldErrors.clear();
    clear(this.root);
    this.root.append(
      el("h2", {}, [capture.annotation.title ?? capture.capture_id]),
      el("p", { class: "meta" }, [
        `${capture.capture_id}, booth ${capture.booth_id}, by ${capture.capturer}, `,
        formatTimestamp(capture.timestamp),
      ]),
      this.errors,
      this.status,
    );

    const gallery = el("div", { class: "gallery" });
    for (const angle of CAPTURE_ORDER) {
      if (!(angle in capture.views)) continue;
      gallery.append(
        el("figure", { class: "view", "data-angle": angle }, [
          el("img", {
            src: this.api.viewUrl(capture.capture_id, angle),
            alt: `${angleLabel(angle)} view`,
          }),
          el("figcaption", {}, [angleLabel(angle)]),
        ]),
      );
    }
    this.root.append(gallery);

    const form = el("form", { class: "annotation" }, [el("h3", {}, ["Annotation"])]);
    const title = el("input", { name: "title", value: capture.annotation.title ?? "" });
    const description = el("textarea", { name: "description" });
    description.value = capture.annotation.description ?? "";
    const intent = el("textarea", { name: "intent" });
    intent.value = capture.annotation.intent ?? "";
    const fields: [FieldName, HTMLInputElement | HTMLTextAreaElement][] = [
      ["title", title],
      ["description", description],
      ["intent", intent],
    ];
    for (const [name, input] of fields) {
      input.addEventListener("input", () => {
        this.dirty.set(name, input.value);
      });
      const slot = el("small", { class: "field-error" });
      this.fieldErrors.set(name, slot);
      form.append(el("label", {}, [name, input, slot]));
    }

    const picks = el("div", { class: "intent-picks" });
    for (const pick of INTENT_PICKS) {
      const button = el("button", { type: "button", "data-pick": pick }, [pick]);
      button.addEventListener("click", () => {
        intent.value = pick;
        this.dirty.set("intent", pick);
      });
      picks.append(button);
    }
    form.append(picks, el("button", { type: "submit", class: "save" }, ["Save"]));
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.save();
    });
    this.root.append(form);

    const codesSection = el("div", { class: "codes" }, [el("h3", {}, ["Codes"])]);
    for (const scheme of schemes) {
      codesSection.append(this.schemeFieldset(scheme, codes[scheme.scheme_id] ?? []));
    }
    this.root.append(codesSection);

    const tsInput = el("input", {
      type: "number",
      name: "timestamp",
      value: String(capture.timestamp),
    });
    const noteInput = el("input", { name: "note", placeholder: "why the correction" });
    const tsButton = el("button", { class: "correct-timestamp" }, ["Correct timestamp"]);
    tsButton.addEventListener("click", () => {
      void this.correctTimestamp(Number(tsInput.value), noteInput.value);
    });
    const auditList = el("ul", { class: "audit" });
    for (const entry of audit) {
      auditList.append(
        el("li", {}, [`${entry.old_ts} to ${entry.new_ts}: ${entry.note || "no note"}`]),
      );
    }
    this.root.append(
      el("h3", {}, ["Timestamp"]),
      el("div", {}, [tsInput, noteInput, tsButton]),
      auditList,
    );
  }

  private schemeFieldset(scheme: SchemeDoc, current: string[]): HTMLElement {
    const applied = new Set(current);
    const boxes: HTMLInputElement[] = [];
    const fieldset = el("fieldset", { "data-scheme-id": scheme.scheme_id }, [
      el("legend", {}, [scheme.name]),
    ]);
    for (const category of scheme.categories) {
      const box = el("input", { type: "checkbox", value: category });
      if (applied.has(category)) box.checked = true;
      boxes.push(box);
      fieldset.append(el("label", { class: "category" }, [box, category]));
    }
    const save = el("button", { type: "button", class: "save-codes" }, ["Save codes"]);
    save.addEventListener("click", () => {
      const picked = boxes.filter((b) => b.checked).map((b) => b.value);
      void this.saveCodes(scheme.scheme_id, picked);
    });
    fieldset.append(save);
    return fieldset;
  }

  private async save(): Promise<void> {
    if (!this.dirty.size) {
      this.status.textContent = "no changes";
      return;
    }
    const patch: Record<string, string | null> = {};
    for (const [name, value] of this.dirty) {
      patch[name] = value === "" ? null : value;
    }
    try {
      await this.api.patchAnnotation(this.captureId, patch);
      this.status.textContent = "saved";
      await this.load();
    } catch (err) {
      this.reportError(err);
    }
  }

  private async saveCodes(schemeId: string, categories: string[]): Promise<void> {
    try {
      await this.api.setCodes(this.captureId, schemeId, categories);
      await this.load();
    } catch (err) {
      this.reportError(err);
    }
  }

  private async correctTimestamp(timestamp: number, note: string): Promise<void> {
    try {
      await this.api.correctTimestamp(this.captureId, timestamp, note);
      await this.load();
    } catch (err) {
      this.reportError(err);
    }
  }

  /** Violations that name a form field land beside it; the rest go on top. */
  private reportError(err: unknown): void {
    if (!(err instanceof ApiError)) {
      showViolations(this.errors, [String(err)]);
      return;
    }
    const general: string[] = [];
    for (const slot of this.fieldErrors.values()) slot.textContent = "";
    for (const violation of err.violations) {
      const field = [...this.fieldErrors.keys()].find((name) =>
        violation.includes(name),
      );
      if (field) this.fieldErrors.get(field)!.textContent = violation;
      else general.push(violation);
    }
    showViolations(this.errors, general);
  }
}
