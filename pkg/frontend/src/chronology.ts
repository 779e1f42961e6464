/** Client-side mirror of the server's link-graph rules.
 *
 * The server stays authoritative; these checks only let the editor refuse
 * clearly invalid edits before a round trip, using the same wording.
 */

import type { CaptureDoc, LinkGraphDoc, NodeClassName } from "./types.js";

export type SortKey = [number, string];

export function sortKey(capture: Pick<CaptureDoc, "timestamp" | "capture_id">): SortKey {
  return [capture.timestamp, capture.capture_id];
}

export function keyBefore(a: SortKey, b: SortKey): boolean {
  return a[0] < b[0] || (a[0] === b[0] && a[1] < b[1]);
}

/** Reason a new edge would be rejected, or null if it looks valid. */
export function edgeViolation(
  captures: Map<string, Pick<CaptureDoc, "timestamp" | "capture_id">>,
  fromId: string,
  toId: string,
): string | null {
  const from = captures.get(fromId);
  const to = captures.get(toId);
  if (!from) return `graph node '${fromId}' is not a project member`;
  if (!to) return `graph node '${toId}' is not a project member`;
  if (!keyBefore(sortKey(from), sortKey(to))) {
    return `edge must point forward in time: '${fromId}' -> '${toId}'`;
  }
  return null;
}

/** Reason reclassifying a node would be rejected, or null. */
export function classViolation(
  graph: LinkGraphDoc,
  nodeId: string,
  next: NodeClassName,
): string | null {
  if (next !== "final_concept") return null;
  const others = Object.entries(graph.node_classes)
    .filter(([cid, cls]) => cls === "final_concept" && cid !== nodeId)
    .map(([cid]) => cid);
  if (others.length) {
    return "multiple final-concept nodes: " + [...others, nodeId].sort().join(", ");
  }
  return null;
}

/** Toggle order follows the lifecycle: internal, external test, final concept. */
export function nextNodeClass(current: NodeClassName): NodeClassName {
  if (current === "internal") return "external_test";
  if (current === "external_test") return "final_concept";
  return "internal";
}
