/** Typed client for the backend wire API.
 *
 * Every failing response carries {"violations": [...]}; the client rethrows
 * them as ApiError so screens can show the server's own wording inline.
 */

import type {
  AnnotationPatch,
  AuditEntryDoc,
  BulkSessionDoc,
  CaptureDoc,
  CumulativeDoc,
  GraphLayoutDoc,
  LinkGraphDoc,
  MatrixDoc,
  ProjectDoc,
  ScatterPointDoc,
  SchemeDoc,
  UserDoc,
  ViewAngle,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  status: number;
  violations: string[];

  constructor(status: number, violations: string[]) {
    super(violations.join("; ") || `request failed with status ${status}`);
    this.status = status;
    this.violations = violations;
  }
}

export interface CaptureFilter {
  user?: string;
  booth?: string;
  project?: string;
  from?: number;
  to?: number;
}

type Query = Record<string, string | number | undefined>;

export class ApiClient {
  readonly base: string;
  private fetchFn: FetchLike;

  constructor(base = "", fetchFn?: FetchLike) {
    this.base = base.replace(/\/$/, "");
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  url(path: string, query?: Query): string {
    let out = this.base + path;
    if (query) {
      const params = new URLSearchParams();
      for (const [key, value] of Object.entries(query)) {
        if (value !== undefined) params.set(key, String(value));
      }
      const qs = params.toString();
      if (qs) out += "?" + qs;
    }
    return out;
  }

  private async request<T>(
    method: string,
    path: string,
    query?: Query,
    body?: unknown,
  ): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchFn(this.url(path, query), init);
    if (!resp.ok) {
      let violations: string[] = [];
      try {
        const doc = await resp.json();
        if (doc && Array.isArray(doc.violations)) {
          violations = doc.violations.map(String);
        }
      } catch {
        // non-JSON error body; the status code is all we know
      }
      throw new ApiError(resp.status, violations);
    }
    return (await resp.json()) as T;
  }

  // -- captures --------------------------------------------------------

  async listCaptures(filter: CaptureFilter = {}): Promise<CaptureDoc[]> {
    const doc = await this.request<{ captures: CaptureDoc[] }>(
      "GET",
      "/api/captures",
      filter as Query,
    );
    return doc.captures;
  }

  getCapture(captureId: string): Promise<CaptureDoc> {
    return this.request("GET", `/api/captures/${captureId}`);
  }

  viewUrl(captureId: string, angle: ViewAngle): string {
    return `${this.base}/api/captures/${captureId}/views/${angle}`;
  }

  patchAnnotation(captureId: string, patch: AnnotationPatch): Promise<CaptureDoc> {
    return this.request("PATCH", `/api/captures/${captureId}`, undefined, patch);
  }

  correctTimestamp(
    captureId: string,
    timestamp: number,
    note: string,
  ): Promise<CaptureDoc> {
    return this.request("POST", `/api/captures/${captureId}/timestamp`, undefined, {
      timestamp,
      note,
    });
  }

  async auditLog(captureId: string): Promise<AuditEntryDoc[]> {
    const doc = await this.request<{ entries: AuditEntryDoc[] }>(
      "GET",
      `/api/captures/${captureId}/audit`,
    );
    return doc.entries;
  }

  // -- users and projects ------------------------------------------------

  async listUsers(): Promise<UserDoc[]> {
    const doc = await this.request<{ users: UserDoc[] }>("GET", "/api/users");
    return doc.users;
  }

  createUser(displayName: string): Promise<UserDoc> {
    return this.request("POST", "/api/users", undefined, { display_name: displayName });
  }

  async listProjects(): Promise<ProjectDoc[]> {
    const doc = await this.request<{ projects: ProjectDoc[] }>("GET", "/api/projects");
    return doc.projects;
  }

  getProject(projectId: string): Promise<ProjectDoc> {
    return this.request("GET", `/api/projects/${projectId}`);
  }

  createProject(title: string, description: string, creator: string): Promise<ProjectDoc> {
    return this.request("POST", "/api/projects", undefined, {
      title,
      description,
      creator,
    });
  }

  addContributor(projectId: string, userId: string): Promise<ProjectDoc> {
    return this.request("POST", `/api/projects/${projectId}/contributors`, undefined, {
      user_id: userId,
    });
  }

  assignMembers(projectId: string, captureIds: string[]): Promise<ProjectDoc> {
    return this.request("POST", `/api/projects/${projectId}/members`, undefined, {
      capture_ids: captureIds,
    });
  }

  // -- coding schemes ------------------------------------------------------

  async listSchemes(): Promise<SchemeDoc[]> {
    const doc = await this.request<{ schemes: SchemeDoc[] }>("GET", "/api/schemes");
    return doc.schemes;
  }

  async getCodes(captureId: string): Promise<Record<string, string[]>> {
    const doc = await this.request<{ codes: Record<string, string[]> }>(
      "GET",
      `/api/captures/${captureId}/codes`,
    );
    return doc.codes;
  }

  setCodes(
    captureId: string,
    schemeId: string,
    categories: string[],
  ): Promise<{ capture_id: string; scheme_id: string; categories: string[] }> {
    return this.request(
      "PUT",
      `/api/captures/${captureId}/codes/${schemeId}`,
      undefined,
      { categories },
    );
  }

  // -- link graphs -----------------------------------------------------------

  getLinks(projectId: string): Promise<LinkGraphDoc> {
    return this.request("GET", `/api/projects/${projectId}/links`);
  }

  putLinks(graph: LinkGraphDoc): Promise<LinkGraphDoc> {
    return this.request(
      "PUT",
      `/api/projects/${graph.project_id}/links`,
      undefined,
      graph,
    );
  }

  // -- analytics ---------------------------------------------------------------

  async weekday(project?: string, seed = 0, tz = "UTC"): Promise<ScatterPointDoc[]> {
    const doc = await this.request<{ points: ScatterPointDoc[] }>(
      "GET",
      "/api/analytics/weekday",
      { project, seed, tz },
    );
    return doc.points;
  }

  async timeline(project?: string, seed = 0): Promise<ScatterPointDoc[]> {
    const doc = await this.request<{ points: ScatterPointDoc[] }>(
      "GET",
      "/api/analytics/timeline",
      { project, seed },
    );
    return doc.points;
  }

  cumulative(scheme: string, project?: string, mode = "distinct"): Promise<CumulativeDoc> {
    return this.request("GET", "/api/analytics/cumulative", { scheme, project, mode });
  }

  matrix(scheme: string, project?: string): Promise<MatrixDoc> {
    return this.request("GET", "/api/analytics/matrix", { scheme, project });
  }

  graphLayout(project: string, seed = 0): Promise<GraphLayoutDoc> {
    return this.request("GET", "/api/analytics/graph", { project, seed });
  }

  async bulk(project?: string, window?: number, threshold?: number): Promise<BulkSessionDoc[]> {
    const doc = await this.request<{ sessions: BulkSessionDoc[] }>(
      "GET",
      "/api/analytics/bulk",
      { project, window, threshold },
    );
    return doc.sessions;
  }

  /** Link to the server-rendered figure, the fallback for saving a chart. */
  figureUrl(name: string, query: Query = {}): string {
    return this.url(`/api/analytics/${name}`, { ...query, format: "svg" });
  }

  verify(): Promise<{ violations: string[]; count: number }> {
    return this.request("GET", "/api/verify");
  }
}
