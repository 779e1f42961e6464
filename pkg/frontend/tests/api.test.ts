import { describe, expect, test } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

interface Recorded {
  url: string;
  method: string;
  body: string | null;
}

function recordingClient(respond: (url: string) => Response) {
  const calls: Recorded[] = [];
  const client = new ApiClient("http://srv", async (input, init) => {
    calls.push({
      url: input,
      method: init?.method ?? "GET",
      body: init?.body ? String(init.body) : null,
    });
    return respond(input);
  });
  return { client, calls };
}

const ok = (doc: unknown) =>
  new Response(JSON.stringify(doc), {
    status: 200,
    headers: { "content-type": "application/json" },
  });

describe("error envelope", () => {
  test("violations become an ApiError with the list intact", async () => {
    const { client } = recordingClient(
      () => new Response(JSON.stringify({ violations: ["a bad thing", "another"] }), { status: 422 }),
    );
    const err = await client.getCapture("cap-9").catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(422);
    expect(err.violations).toEqual(["a bad thing", "another"]);
    expect(err.message).toContain("a bad thing");
  });

  test("non-JSON error body still raises with the status", async () => {
    const { client } = recordingClient(() => new Response("gateway exploded", { status: 502 }));
    const err = await client.listProjects().catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(502);
    expect(err.violations).toEqual([]);
    expect(err.message).toContain("502");
  });
});

describe("annotation patch bodies", () => {
  test("only the provided fields are transmitted", async () => {
    const { client, calls } = recordingClient(() => ok({}));
    await client.patchAnnotation("cap-1", { title: "new title" });
    expect(calls[0].method).toBe("PATCH");
    expect(JSON.parse(calls[0].body!)).toEqual({ title: "new title" });
  });

  test("explicit null is transmitted to clear a field", async () => {
    const { client, calls } = recordingClient(() => ok({}));
    await client.patchAnnotation("cap-1", { intent: null });
    expect(JSON.parse(calls[0].body!)).toEqual({ intent: null });
  });
});

describe("url construction", () => {
  test("capture filters become query parameters, absent ones are dropped", async () => {
    const { client, calls } = recordingClient(() => ok({ captures: [] }));
    await client.listCaptures({ project: "p-1", from: 100 });
    const url = new URL(calls[0].url);
    expect(url.pathname).toBe("/api/captures");
    expect(url.searchParams.get("project")).toBe("p-1");
    expect(url.searchParams.get("from")).toBe("100");
    expect(url.searchParams.has("user")).toBe(false);
    expect(url.searchParams.has("to")).toBe(false);
  });

  test("view urls point at the raw image route", () => {
    const client = new ApiClient("http://srv/");
    expect(client.viewUrl("cap-1", "rear_left")).toBe(
      "http://srv/api/captures/cap-1/views/rear_left",
    );
  });

  test("figure urls always carry format=svg", () => {
    const client = new ApiClient("");
    const url = client.figureUrl("timeline", { project: "p-1" });
    expect(url).toContain("/api/analytics/timeline");
    expect(url).toContain("format=svg");
    expect(url).toContain("project=p-1");
  });
});

describe("request bodies", () => {
  test("member assignment posts the capture id list", async () => {
    const { client, calls } = recordingClient(() => ok({}));
    await client.assignMembers("p-1", ["cap-1", "cap-2"]);
    expect(calls[0].url).toContain("/api/projects/p-1/members");
    expect(JSON.parse(calls[0].body!)).toEqual({ capture_ids: ["cap-1", "cap-2"] });
  });

  test("graph PUT sends the whole document", async () => {
    const { client, calls } = recordingClient(() => ok({}));
    await client.putLinks({
      project_id: "p-1",
      node_classes: { "cap-1": "final_concept" },
      edges: [["cap-0", "cap-1"]],
    });
    expect(calls[0].method).toBe("PUT");
    expect(JSON.parse(calls[0].body!)).toEqual({
      project_id: "p-1",
      node_classes: { "cap-1": "final_concept" },
      edges: [["cap-0", "cap-1"]],
    });
  });

  test("code assignment uses the scheme-scoped route", async () => {
    const { client, calls } = recordingClient(() => ok({}));
    await client.setCodes("cap-1", "materials", ["wood"]);
    expect(calls[0].url).toContain("/api/captures/cap-1/codes/materials");
    expect(JSON.parse(calls[0].body!)).toEqual({ categories: ["wood"] });
  });
});
