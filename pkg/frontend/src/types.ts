/** Wire document shapes, mirroring the backend JSON exactly. */

export type ViewAngle =
  | "front"
  | "top"
  | "right"
  | "left"
  | "rear_right"
  | "rear_left"
  | "rear";

export const CAPTURE_ORDER: readonly ViewAngle[] = [
  "front",
  "top",
  "right",
  "left",
  "rear_right",
  "rear_left",
  "rear",
];

export function angleLabel(angle: ViewAngle): string {
  return angle.replace("_", " ");
}

export interface ImageRefDoc {
  content_hash: string;
  media_type: string;
  byte_length: number;
}

export interface AnnotationDoc {
  title: string | null;
  description: string | null;
  intent: string | null;
}

export interface CaptureDoc {
  capture_id: string;
  booth_id: string;
  card_id: string;
  timestamp: number;
  views: Partial<Record<ViewAngle, ImageRefDoc>>;
  annotation: AnnotationDoc;
  capturer: string;
}

export interface UserDoc {
  user_id: string;
  display_name: string;
  card_ids: string[];
}

export interface ProjectDoc {
  project_id: string;
  title: string;
  description: string;
  contributors: string[];
  members: string[];
}

export interface SchemeDoc {
  scheme_id: string;
  name: string;
  categories: string[];
}

export type NodeClassName = "internal" | "external_test" | "final_concept";

export interface LinkGraphDoc {
  project_id: string;
  node_classes: Record<string, NodeClassName>;
  edges: [string, string][];
}

export interface ScatterPointDoc {
  capture_id: string;
  x: number;
  lane: number;
  jitter: number;
  color_key: string | null;
}

export interface CumulativePointDoc {
  k: number;
  value: number;
}

export interface CumulativeDoc {
  scheme_id: string;
  points: CumulativePointDoc[];
}

export interface MatrixDoc {
  scheme_id: string;
  capture_ids: string[];
  categories: string[];
  cells: number[][];
}

export interface LayoutNodeDoc {
  capture_id: string;
  x: number;
  y: number;
  node_class: NodeClassName;
}

export interface LayoutEdgeDoc {
  from: string;
  to: string;
}

export interface GraphLayoutDoc {
  nodes: LayoutNodeDoc[];
  edges: LayoutEdgeDoc[];
}

export interface BulkSessionDoc {
  card_id: string;
  window_start: number;
  window_end: number;
  capture_ids: string[];
  count: number;
}

export interface AuditEntryDoc {
  old_ts: number;
  new_ts: number;
  note: string;
  at: number;
}

/** PATCH body: absent fields stay untouched, explicit null clears. */
export interface AnnotationPatch {
  title?: string | null;
  description?: string | null;
  intent?: string | null;
}
