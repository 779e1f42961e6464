import { beforeEach, describe, expect, test } from "vitest";

import { ApiClient } from "../src/api.js";
import { ProjectBoardView } from "../src/views/projectBoard.js";
import { ProjectListView } from "../src/views/projectList.js";
import { click, mountPoint, setValue, submit, waitFor } from "./helpers.js";
import { makeCapture, MockBackend } from "./mockBackend.js";

let backend: MockBackend;
let api: ApiClient;

beforeEach(() => {
  backend = new MockBackend();
  api = new ApiClient("", backend.fetch);
  backend.addProject({
    project_id: "p-1",
    title: "Gripper",
    description: "robot hand studies",
    contributors: ["user-0001"],
    members: [],
  });
  for (let i = 1; i <= 5; i++) {
    backend.addCapture(makeCapture(`cap-${i}`, 1000 + i * 100));
  }
});

describe("project list", () => {
  test("lists projects with board links", async () => {
    const view = new ProjectListView(api, mountPoint());
    await view.load();
    const row = view.root.querySelector('tr[data-project-id="p-1"]')!;
    expect(row.textContent).toContain("Gripper");
    expect(row.querySelector('a[href="#/projects/p-1"]')).not.toBeNull();
    expect(row.querySelector('a[href="#/projects/p-1/links"]')).not.toBeNull();
  });

  test("creating a project shows the server's copy after reload", async () => {
    const view = new ProjectListView(api, mountPoint());
    await view.load();
    setValue(view.root.querySelector<HTMLInputElement>('input[name="title"]')!, "Second");
    setValue(
      view.root.querySelector<HTMLInputElement>('input[name="description"]')!,
      "another",
    );
    submit(view.root.querySelector<HTMLFormElement>("form.create-project")!);
    await waitFor(() => view.root.textContent!.includes("Second"));
    expect(backend.projects.size).toBe(2);
    const created = [...backend.projects.values()].find((p) => p.title === "Second")!;
    expect(created.contributors).toEqual(["user-0001"]);
  });

  test("a rejected creation keeps the typed form and shows the violation", async () => {
    const view = new ProjectListView(api, mountPoint());
    await view.load();
    const title = view.root.querySelector<HTMLInputElement>('input[name="title"]')!;
    setValue(title, "Doomed");
    backend.failNext = { status: 404, violations: ["unknown user: 'user-0001'"] };
    submit(view.root.querySelector<HTMLFormElement>("form.create-project")!);
    await waitFor(() => view.root.textContent!.includes("unknown user"));
    // the form was not re-rendered, so nothing typed is lost
    expect(view.root.querySelector<HTMLInputElement>('input[name="title"]')!.value).toBe(
      "Doomed",
    );
    expect(backend.projects.size).toBe(1);
  });

  test("registering a user adds them to the creator choices", async () => {
    const view = new ProjectListView(api, mountPoint());
    await view.load();
    setValue(
      view.root.querySelector<HTMLInputElement>('input[name="display_name"]')!,
      "Alex",
    );
    submit(view.root.querySelector<HTMLFormElement>("form.register-user")!);
    await waitFor(() =>
      [...view.root.querySelectorAll("select[name=creator] option")].some(
        (o) => o.textContent === "Alex",
      ),
    );
    expect(backend.users.size).toBe(2);
  });
});

describe("project board", () => {
  test("members and the unassigned pool are disjoint", async () => {
    backend.projects.get("p-1")!.members = ["cap-1", "cap-2"];
    const view = new ProjectBoardView(api, mountPoint(), "p-1");
    await view.load();
    const members = view.root.querySelectorAll(".members .capture-card");
    const pool = view.root.querySelectorAll(".pool input[type=checkbox]");
    expect(members.length).toBe(2);
    expect(pool.length).toBe(3);
    const poolIds = [...pool].map((b) => (b as HTMLInputElement).value);
    expect(poolIds).not.toContain("cap-1");
    expect(poolIds).not.toContain("cap-2");
  });

  test("assigning three captures shows three members after reload", async () => {
    const view = new ProjectBoardView(api, mountPoint(), "p-1");
    await view.load();
    for (const id of ["cap-1", "cap-3", "cap-5"]) {
      view.root.querySelector<HTMLInputElement>(`input[data-capture-id="${id}"]`)!.checked =
        true;
    }
    click(view.root.querySelector("button.assign")!);
    await waitFor(
      () => view.root.querySelectorAll(".members .capture-card").length === 3,
    );
    expect(backend.projects.get("p-1")!.members).toEqual(["cap-1", "cap-3", "cap-5"]);
    expect(view.root.textContent).toContain("Members (3)");
  });

  test("two sessions assigning concurrently both land (set union)", async () => {
    const viewA = new ProjectBoardView(api, mountPoint(), "p-1");
    await viewA.load();
    const mountB = document.createElement("div");
    document.body.append(mountB);
    const viewB = new ProjectBoardView(api, mountB, "p-1");
    await viewB.load();

    // both boards were loaded before either assignment, like two browsers
    viewA.root.querySelector<HTMLInputElement>('input[data-capture-id="cap-1"]')!.checked =
      true;
    click(viewA.root.querySelector("button.assign")!);
    await waitFor(() => backend.projects.get("p-1")!.members.includes("cap-1"));

    viewB.root.querySelector<HTMLInputElement>('input[data-capture-id="cap-2"]')!.checked =
      true;
    click(viewB.root.querySelector("button.assign")!);
    await waitFor(() => backend.projects.get("p-1")!.members.includes("cap-2"));

    expect(backend.projects.get("p-1")!.members).toEqual(["cap-1", "cap-2"]);
    await waitFor(
      () => viewB.root.querySelectorAll(".members .capture-card").length === 2,
    );
  });

  test("a board for an unknown project surfaces the violation inline", async () => {
    const view = new ProjectBoardView(api, mountPoint(), "ghost");
    await view.load();
    expect(view.root.textContent).toContain("unknown project");
  });

  test("a rejected assignment keeps the checkbox state", async () => {
    const view = new ProjectBoardView(api, mountPoint(), "p-1");
    await view.load();
    const box = view.root.querySelector<HTMLInputElement>('input[data-capture-id="cap-4"]')!;
    box.checked = true;
    backend.failNext = { status: 404, violations: ["unknown capture: 'cap-4'"] };
    click(view.root.querySelector("button.assign")!);
    await waitFor(() => view.root.textContent!.includes("unknown capture"));
    expect(
      view.root.querySelector<HTMLInputElement>('input[data-capture-id="cap-4"]')!.checked,
    ).toBe(true);
    expect(backend.projects.get("p-1")!.members).toEqual([]);
  });

  test("adding a contributor re-renders the list from the server", async () => {
    backend.users.set("user-0002", {
      user_id: "user-0002",
      display_name: "Sam",
      card_ids: [],
    });
    const view = new ProjectBoardView(api, mountPoint(), "p-1");
    await view.load();
    const select = view.root.querySelector<HTMLSelectElement>("select[name=contributor]")!;
    select.value = "user-0002";
    click(view.root.querySelector("button.add-contributor")!);
    await waitFor(() =>
      [...view.root.querySelectorAll(".contributors li")].some(
        (li) => li.textContent === "user-0002",
      ),
    );
    expect(backend.projects.get("p-1")!.contributors).toContain("user-0002");
  });
});
