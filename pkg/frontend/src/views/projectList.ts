/** Project overview: every project with links into its board, plus forms for
 * creating projects and registering users. All rows come straight from the
 * API; a reload after each mutation shows what the server actually stored.
 */

import { ApiClient, ApiError } from "../api.js";
import { clear, el, showViolations } from "../dom.js";

export class ProjectListView {
  readonly root: HTMLElement;
  private api: ApiClient;
  private errors: HTMLElement;

  constructor(api: ApiClient, mount: HTMLElement) {
    this.api = api;
    this.root = el("section", { class: "project-list" });
    this.errors = el("div", { class: "violations", hidden: "" });
    mount.append(this.root);
  }

  async load(): Promise<void> {
    const [projects, users] = await Promise.all([
      this.api.listProjects(),
      this.api.listUsers(),
    ]);
    clear(this.root);
    this.root.append(el("h2", {}, ["Projects"]), this.errors);

    const table = el("table", { class: "projects" });
    table.append(
      el("tr", {}, [
        el("th", {}, ["Title"]),
        el("th", {}, ["Description"]),
        el("th", {}, ["Contributors"]),
        el("th", {}, ["Captures"]),
        el("th", {}, [""]),
      ]),
    );
    for (const project of projects) {
      table.append(
        el("tr", { "data-project-id": project.project_id }, [
          el("td", {}, [
            el("a", { href: `#/projects/${project.project_id}` }, [project.title]),
          ]),
          el("td", {}, [project.description]),
          el("td", {}, [project.contributors.join(", ")]),
          el("td", { class: "member-count" }, [String(project.members.length)]),
          el("td", {}, [
            el("a", { href: `#/projects/${project.project_id}/links` }, ["links"]),
            " ",
            el("a", { href: `#/projects/${project.project_id}/figures` }, ["figures"]),
          ]),
        ]),
      );
    }
    this.root.append(table);

    const creatorSelect = el("select", { name: "creator" });
    for (const user of users) {
      creatorSelect.append(el("option", { value: user.user_id }, [user.display_name]));
    }
    const titleInput = el("input", { name: "title", placeholder: "title" });
    const descriptionInput = el("input", { name: "description", placeholder: "description" });
    const projectForm = el("form", { class: "create-project" }, [
      el("h3", {}, ["New project"]),
      titleInput,
      descriptionInput,
      creatorSelect,
      el("button", { type: "submit" }, ["Create project"]),
    ]);
    projectForm.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.createProject(titleInput.value, descriptionInput.value, creatorSelect.value);
    });
    this.root.append(projectForm);

    const nameInput = el("input", { name: "display_name", placeholder: "display name" });
    const userForm = el("form", { class: "register-user" }, [
      el("h3", {}, ["Register user"]),
      nameInput,
      el("button", { type: "submit" }, ["Register"]),
    ]);
    userForm.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.createUser(nameInput.value);
    });
    this.root.append(
      userForm,
      el("p", {}, [el("a", { href: this.api.url("/api/export") }, ["Download archive"])]),
    );
  }

  private async createProject(title: string, description: string, creator: string): Promise<void> {
    try {
      await this.api.createProject(title, description, creator);
      await this.load();
    } catch (err) {
      // leave the form as typed so nothing is lost on a rejected submit
      this.reportError(err);
    }
  }

  private async createUser(displayName: string): Promise<void> {
    try {
      await this.api.createUser(displayName);
      await this.load();
    } catch (err) {
      this.reportError(err);
    }
  }

  private reportError(err: unknown): void {
    if (err instanceof ApiError) showViolations(this.errors, err.violations);
    else showViolations(this.errors, [String(err)]);
  }
}
